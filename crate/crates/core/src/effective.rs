//! Effective quadratic Hamiltonians for the two classical limits.
//!
//! * Classical-spin (CS) limit, `j -> inf`: the truncated Holstein–Primakoff map
//!   `J_+ ~ sqrt(2j) b^+`, `J_z = b^+b - j` turns the model into two coupled modes.
//!   Above `g = 1` the spin is rotated by `delta` and the field displaced by `alpha`
//!   (see [`displacement_solution`]); the terms cubic in the fluctuations that survive
//!   this step carry explicit `1/sqrt(j)` factors and are dropped.
//! * Classical-oscillator (CO) limit, `Omega/omega -> inf`: a Schrieffer–Wolff rotation
//!   generated by `S ~ -(A J_+ - B J_-)/(sqrt(2j) Omega)` with
//!   `A = lambda1 e^{-i theta} a + lambda2 e^{i theta} a^+` and
//!   `B = lambda1 e^{i theta} a^+ + lambda2 e^{-i theta} a`, projected onto `|j, -j>`,
//!   leaves the one-mode form `omega a^+a - B A / Omega - j Omega`. Only the projected
//!   result is built here; the generator itself never appears at runtime.
//!
//! Every model is represented exactly by a [`QuadraticBosonForm`]. Parameter derivatives
//! come from forward-mode dual numbers applied to the coefficient formulas, so `dH/dp`
//! is exact and shares its code path with `H`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adm::DEFAULT_MAX_DIM;
use crate::basis::{Basis, Sector, Truncation};
use crate::dual::{Dual, DualComplex};
use crate::error::{Error, Result};
use crate::model::ParametricHamiltonian;
use crate::operator::{OperatorMatrix, C64};
use crate::params::{ModelParams, Param};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EffectiveModel {
    #[serde(rename = "cs_np")]
    CsNormal,
    #[serde(rename = "cs_sp")]
    CsSuperradiant,
    #[serde(rename = "co_np")]
    CoNormal,
    #[serde(rename = "co_sp")]
    CoSuperradiant,
}

impl EffectiveModel {
    pub const ALL: [EffectiveModel; 4] =
        [EffectiveModel::CsNormal, EffectiveModel::CsSuperradiant, EffectiveModel::CoNormal, EffectiveModel::CoSuperradiant];

    pub fn label(self) -> &'static str {
        match self {
            EffectiveModel::CsNormal => "cs_np",
            EffectiveModel::CsSuperradiant => "cs_sp",
            EffectiveModel::CoNormal => "co_np",
            EffectiveModel::CoSuperradiant => "co_sp",
        }
    }

    pub fn modes(self) -> usize {
        match self {
            EffectiveModel::CsNormal | EffectiveModel::CsSuperradiant => 2,
            EffectiveModel::CoNormal | EffectiveModel::CoSuperradiant => 1,
        }
    }

    pub fn is_superradiant(self) -> bool {
        matches!(self, EffectiveModel::CsSuperradiant | EffectiveModel::CoSuperradiant)
    }

    /// Default truncation: 40 x 40 for the two-mode models, 200 for the one-mode ones.
    pub fn default_truncation(self) -> Truncation {
        match self.modes() {
            2 => Truncation::two_mode(40, 40, Sector::Positive),
            _ => Truncation::one_mode(200, Sector::Positive),
        }
    }

    /// Quadratic form at `p`.
    pub fn form(self, p: &ModelParams) -> Result<QuadraticBosonForm> {
        p.validate()?;
        let x = p.primaries().map(Dual::constant);
        Ok(self.coefficients(x, p.j())?.value())
    }

    /// Exact derivative of every coefficient (including the constant) with respect to `which`.
    pub fn form_derivative(self, p: &ModelParams, which: Param) -> Result<QuadraticBosonForm> {
        p.validate()?;
        let mut x = p.primaries().map(Dual::constant);
        x[which.index()].deriv = 1.0;
        Ok(self.coefficients(x, p.j())?.deriv())
    }

    fn coefficients(self, x: [Dual; 5], j: f64) -> Result<DualForm> {
        let [omega, omega_q, l1, l2, theta] = x;
        let phase = DualComplex::expi(theta);
        let phase2 = DualComplex::expi(theta * 2.0);
        let sum = l1 + l2;
        let diff = l1 - l2;
        let g2 = sum * sum / (omega * omega_q);
        let one = Dual::constant(1.0);
        if self.is_superradiant() && !(g2.value > 1.0) {
            return Err(Error::WrongPhase(format!(
                "{} needs g > 1 (got g = {:.6})",
                self.label(),
                g2.value.sqrt()
            )));
        }
        let form = match self {
            EffectiveModel::CsNormal => DualForm {
                modes: 2,
                n_a: omega,
                n_b: omega_q,
                a_dag_b: phase * l1,
                a_dag_b_dag: phase * l2,
                constant: -(omega_q * j),
                ..DualForm::default()
            },
            EffectiveModel::CsSuperradiant => {
                let c = omega * omega_q / (sum * 2.0);
                let d = diff * 0.5;
                DualForm {
                    modes: 2,
                    n_a: omega,
                    n_b: sum * sum / omega,
                    a_dag_b: phase * (c + d),
                    a_dag_b_dag: phase * (c - d),
                    constant: -(sum * sum / (omega * 2.0) + omega * omega_q * omega_q / (sum * sum * 2.0)) * j,
                    ..DualForm::default()
                }
            }
            EffectiveModel::CoNormal => DualForm {
                modes: 1,
                n_a: omega - (l1 * l1 + l2 * l2) / omega_q,
                a_dag_sq: -(phase2 * (l1 * l2 / omega_q)),
                constant: -(omega_q * j) - l2 * l2 / omega_q,
                ..DualForm::default()
            },
            EffectiveModel::CoSuperradiant => {
                let (omega_t, k1, k2) = rescaled_dual(omega, omega_q, sum, diff);
                DualForm {
                    modes: 1,
                    n_a: omega - (k1 * k1 + k2 * k2) / omega_t,
                    a_dag_sq: -(phase2 * (k1 * k2 / omega_t)),
                    constant: -(omega_q * j * 0.5) * (g2 + one / g2) - k2 * k2 / omega_t,
                    ..DualForm::default()
                }
            }
        };
        Ok(form)
    }
}

impl fmt::Display for EffectiveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EffectiveModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EffectiveModel::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown effective model `{s}`")))
    }
}

/// `(Omega_tilde, kappa1, kappa2)` with `kappa_{1,2} = [omega Omega/(l1+l2) +- (l1-l2)]/2`,
/// the couplings that multiply the projected one-mode form above `g = 1`.
fn rescaled_dual(omega: Dual, omega_q: Dual, sum: Dual, diff: Dual) -> (Dual, Dual, Dual) {
    let omega_t = sum * sum / omega;
    let base = omega * omega_q / sum;
    (omega_t, (base + diff) * 0.5, (base - diff) * 0.5)
}

#[derive(Debug, Clone, Copy, Default)]
struct DualForm {
    modes: u8,
    n_a: Dual,
    n_b: Dual,
    a_dag_b: DualComplex,
    a_dag_b_dag: DualComplex,
    a_dag_sq: DualComplex,
    constant: Dual,
}

impl DualForm {
    fn value(&self) -> QuadraticBosonForm {
        QuadraticBosonForm {
            modes: self.modes,
            n_a: self.n_a.value,
            n_b: self.n_b.value,
            a_dag_b: self.a_dag_b.value(),
            a_dag_b_dag: self.a_dag_b_dag.value(),
            a_dag_sq: self.a_dag_sq.value(),
            constant: self.constant.value,
        }
    }

    fn deriv(&self) -> QuadraticBosonForm {
        QuadraticBosonForm {
            modes: self.modes,
            n_a: self.n_a.deriv,
            n_b: self.n_b.deriv,
            a_dag_b: self.a_dag_b.deriv(),
            a_dag_b_dag: self.a_dag_b_dag.deriv(),
            a_dag_sq: self.a_dag_sq.deriv(),
            constant: self.constant.deriv,
        }
    }
}

/// A Hermitian quadratic bosonic form on one (`a`) or two (`a`, `b`) modes:
///
/// ```text
/// n_a a^+a + n_b b^+b + (a_dag_b a^+b + a_dag_b_dag a^+b^+ + a_dag_sq a^+^2 + h.c.) + constant
/// ```
///
/// The conjugate monomials `b^+a`, `ab`, `a^2` carry the conjugate coefficients, so the
/// operator is Hermitian by construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraticBosonForm {
    pub modes: u8,
    pub n_a: f64,
    pub n_b: f64,
    pub a_dag_b: C64,
    pub a_dag_b_dag: C64,
    pub a_dag_sq: C64,
    pub constant: f64,
}

impl QuadraticBosonForm {
    pub fn a_sq(&self) -> C64 {
        self.a_dag_sq.conj()
    }

    pub fn b_dag_a(&self) -> C64 {
        self.a_dag_b.conj()
    }

    pub fn ab(&self) -> C64 {
        self.a_dag_b_dag.conj()
    }

    fn check_basis(&self, t: &Truncation) -> Result<(usize, usize)> {
        match (self.modes, t.basis) {
            (1, Basis::OneMode { n_max }) => Ok((n_max, 0)),
            (2, Basis::TwoMode { n_a, n_b }) => Ok((n_a, n_b)),
            (m, basis) => Err(Error::InvalidTruncation(format!("{m}-mode form cannot live on {basis:?}"))),
        }
    }

    /// Matrix on the truncated Fock basis, projected onto `t.sector`.
    pub fn to_matrix(&self, t: &Truncation) -> Result<OperatorMatrix> {
        t.validate()?;
        let (na_max, nb_max) = self.check_basis(t)?;
        let full = t.full_dim();
        if full > DEFAULT_MAX_DIM {
            return Err(Error::DimensionOverflow { dim: full, max: DEFAULT_MAX_DIM });
        }
        let stride = nb_max + 1;
        let idx = |na: usize, nb: usize| na * stride + nb;
        let zero = C64::default();
        let mut entries = Vec::with_capacity(5 * full);
        for na in 0..=na_max {
            for nb in 0..=nb_max {
                let here = idx(na, nb);
                let diag = self.n_a * na as f64 + self.n_b * nb as f64 + self.constant;
                if diag != 0.0 {
                    entries.push((here, here, C64::new(diag, 0.0)));
                }
                let up_a = ((na + 1) as f64).sqrt();
                if na < na_max && nb > 0 && self.a_dag_b != zero {
                    let v = self.a_dag_b * up_a * (nb as f64).sqrt();
                    entries.push((idx(na + 1, nb - 1), here, v));
                    entries.push((here, idx(na + 1, nb - 1), v.conj()));
                }
                if na < na_max && nb < nb_max && self.a_dag_b_dag != zero {
                    let v = self.a_dag_b_dag * up_a * ((nb + 1) as f64).sqrt();
                    entries.push((idx(na + 1, nb + 1), here, v));
                    entries.push((here, idx(na + 1, nb + 1), v.conj()));
                }
                if na + 2 <= na_max && self.a_dag_sq != zero {
                    let v = self.a_dag_sq * (((na + 1) * (na + 2)) as f64).sqrt();
                    entries.push((idx(na + 2, nb), here, v));
                    entries.push((here, idx(na + 2, nb), v.conj()));
                }
            }
        }
        let full_t = t.full_basis();
        let op = OperatorMatrix::from_triplets(full, entries, full_t.tag());
        match t.sector {
            Sector::Full => Ok(op),
            sector => {
                let labels: Vec<i8> = (0..full).map(|i| t.parity_of(i)).collect();
                op.restrict(&labels, &t.with_sector(sector).sector_indices(), t.tag(), crate::operator::HERMITIAN_TOL)
            }
        }
    }

    /// Reads the coefficients off a full-basis matrix and verifies that rebuilding them
    /// reproduces every entry; anything beyond a quadratic form is rejected.
    pub fn from_matrix(m: &OperatorMatrix, t: &Truncation) -> Result<Self> {
        let t = t.full_basis();
        if m.dim() != t.full_dim() {
            return Err(Error::NotQuadratic(format!(
                "matrix dimension {} does not match the {}-state Fock basis",
                m.dim(),
                t.full_dim()
            )));
        }
        let (modes, na_max, nb_max) = match t.basis {
            Basis::OneMode { n_max } => (1u8, n_max, 0),
            Basis::TwoMode { n_a, n_b } => (2u8, n_a, n_b),
            Basis::Product { .. } => return Err(Error::NotQuadratic("a spin factor is not a bosonic mode".into())),
        };
        let stride = nb_max + 1;
        let idx = |na: usize, nb: usize| na * stride + nb;
        let constant = m.get(0, 0).re;
        let mut form = QuadraticBosonForm {
            modes,
            constant,
            n_a: (m.get(idx(na_max, 0), idx(na_max, 0)).re - constant) / na_max as f64,
            ..Default::default()
        };
        if modes == 2 {
            form.n_b = (m.get(idx(0, nb_max), idx(0, nb_max)).re - constant) / nb_max as f64;
            form.a_dag_b = m.get(idx(1, 0), idx(0, 1));
            form.a_dag_b_dag = m.get(idx(1, 1), idx(0, 0));
        }
        if na_max >= 2 {
            form.a_dag_sq = m.get(idx(2, 0), idx(0, 0)) / 2f64.sqrt();
        }
        let rebuilt = form.to_matrix(&t)?;
        let scale = m.norm_inf().max(1.0);
        let defect = rebuilt.max_abs_diff(m);
        if defect > 1e-12 * scale {
            return Err(Error::NotQuadratic(format!("rebuilt matrix differs by {defect:e}")));
        }
        Ok(form)
    }
}

/// Displaced/rotated frame above the critical coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementSolution {
    /// Displacement of mode `a`, `a = a' + conj(alpha)`.
    pub alpha: C64,
    /// Cosine of the spin rotation angle about `y`.
    pub cos_delta: f64,
    /// `true` only for `g > 1`.
    pub valid_region: bool,
}

impl DisplacementSolution {
    pub fn sin_delta(&self) -> f64 {
        (1.0 - self.cos_delta * self.cos_delta).max(0.0).sqrt()
    }
}

/// Nontrivial stationary point eliminating the linear terms:
/// `|alpha| = sqrt(2j[(l1+l2)^4 - omega^2 Omega^2]) / [2 (l1+l2) omega]`, phase `e^{i theta}`,
/// `cos(delta) = omega Omega / (l1+l2)^2`. Below `g = 1` the trivial solution is returned.
pub fn displacement_solution(p: &ModelParams) -> DisplacementSolution {
    let sum = p.coupling_sum();
    let wo = p.omega * p.omega_q;
    if !(p.g() > 1.0) {
        return DisplacementSolution { alpha: C64::default(), cos_delta: 1.0, valid_region: false };
    }
    let disc = (2.0 * p.j() * (sum.powi(4) - wo * wo)).max(0.0);
    let magnitude = disc.sqrt() / (2.0 * sum * p.omega);
    DisplacementSolution { alpha: C64::from_polar(magnitude, p.theta), cos_delta: wo / (sum * sum), valid_region: true }
}

/// Coefficients of the two terms linear in `(e^{i theta} a'^+ + h.c.)` and `(b'^+ + b')`
/// after rotation and displacement; both vanish at the stationary point.
pub fn linear_term_residuals(p: &ModelParams, s: &DisplacementSolution) -> [f64; 2] {
    let sum = p.coupling_sum();
    let half_j = (p.j() / 2.0).sqrt();
    let sin_d = s.sin_delta();
    let a = s.alpha.norm();
    [p.omega * a - half_j * sum * sin_d, sum * a * s.cos_delta - p.omega_q * half_j * sin_d]
}

/// Rescaled frequency and couplings of the rotated spin–oscillator problem above `g = 1`.
///
/// `lambda1_prime`/`lambda2_prime` follow the normalization
/// `[sqrt(omega Omega)/g +- (l1 - l2)] / (2 sqrt(2j))`; the couplings that multiply the
/// projected one-mode form are [`RescaledParams::projected_couplings`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledParams {
    pub omega_tilde: f64,
    pub lambda1_prime: f64,
    pub lambda2_prime: f64,
    two_j: f64,
}

impl RescaledParams {
    /// `sqrt(2j) * lambda_prime`, i.e. `[sqrt(omega Omega)/g +- (l1 - l2)]/2`.
    pub fn projected_couplings(&self) -> (f64, f64) {
        let s = self.two_j.sqrt();
        (self.lambda1_prime * s, self.lambda2_prime * s)
    }
}

pub fn rescaled_params(p: &ModelParams) -> Result<RescaledParams> {
    let g = p.g();
    if !(g > 1.0) {
        return Err(Error::WrongPhase(format!("rescaled couplings need g > 1 (got g = {g:.6})")));
    }
    Ok(rescaled_params_unchecked(p))
}

fn rescaled_params_unchecked(p: &ModelParams) -> RescaledParams {
    let g = p.g();
    let two_j = 2.0 * p.j();
    let base = (p.omega * p.omega_q).sqrt() / g;
    let diff = p.lambda1 - p.lambda2;
    let norm = 1.0 / (2.0 * two_j.sqrt());
    RescaledParams { omega_tilde: p.omega_q * g * g, lambda1_prime: norm * (base + diff), lambda2_prime: norm * (base - diff), two_j }
}

pub fn quadratic_form(model: EffectiveModel, p: &ModelParams) -> Result<QuadraticBosonForm> {
    model.form(p)
}

fn build(model: EffectiveModel, p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    model.form(p)?.to_matrix(t)
}

/// Two-mode normal-phase form (intended for `g < 1`, not enforced).
pub fn cs_normal_hamiltonian(p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    build(EffectiveModel::CsNormal, p, t)
}

/// Two-mode form in the displaced frame; requires `g > 1`.
pub fn cs_superradiant_hamiltonian(p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    build(EffectiveModel::CsSuperradiant, p, t)
}

/// One-mode projected form `omega a^+a - (l1 e a^+ + l2 e* a)(l1 e* a + l2 e a^+)/Omega - j Omega`.
pub fn co_normal_hamiltonian(p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    build(EffectiveModel::CoNormal, p, t)
}

/// One-mode projected form above `g = 1`; requires `g > 1`.
pub fn co_superradiant_hamiltonian(p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    build(EffectiveModel::CoSuperradiant, p, t)
}

/// An effective model on a fixed truncation, as a parametric family.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveHamiltonian {
    pub model: EffectiveModel,
    pub truncation: Truncation,
}

impl EffectiveHamiltonian {
    pub fn new(model: EffectiveModel, truncation: Truncation) -> Result<Self> {
        let modes_ok = matches!(
            (model.modes(), truncation.basis),
            (1, Basis::OneMode { .. }) | (2, Basis::TwoMode { .. })
        );
        if !modes_ok {
            return Err(Error::InvalidTruncation(format!("{model} needs a {}-mode Fock basis", model.modes())));
        }
        truncation.validate()?;
        Ok(EffectiveHamiltonian { model, truncation })
    }
}

impl ParametricHamiltonian for EffectiveHamiltonian {
    fn truncation(&self) -> Truncation {
        self.truncation
    }

    fn hamiltonian(&self, p: &ModelParams) -> Result<OperatorMatrix> {
        build(self.model, p, &self.truncation)
    }

    fn derivative(&self, p: &ModelParams, which: Param) -> Result<OperatorMatrix> {
        self.model.form_derivative(p, which)?.to_matrix(&self.truncation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SpinLength;
    use crate::spectra::{bogoliubov_modes, dense_eigensystem};
    use approx::assert_relative_eq;

    fn spin(twice: u32) -> SpinLength {
        SpinLength::from_twice(twice).unwrap()
    }

    fn point(g: f64, gamma: f64, eta: f64, theta: f64) -> ModelParams {
        ModelParams::from_dimensionless(g, gamma, eta, 1.0, theta, spin(20)).unwrap()
    }

    #[test]
    fn decoupled_limits() {
        let p = ModelParams::new(1.2, 0.8, 0.0, 0.0, 0.3, spin(20)).unwrap();
        let cs = EffectiveModel::CsNormal.form(&p).unwrap();
        assert_eq!((cs.n_a, cs.n_b, cs.constant), (1.2, 0.8, -8.0));
        assert_eq!(cs.a_dag_b, C64::default());
        assert_eq!(cs.a_dag_b_dag, C64::default());
        let co = EffectiveModel::CoNormal.form(&p).unwrap();
        assert_eq!((co.n_a, co.constant), (1.2, -8.0));
        assert_eq!(co.a_dag_sq, C64::default());
        let h = cs_normal_hamiltonian(&p, &Truncation::two_mode(4, 4, Sector::Positive)).unwrap();
        assert_relative_eq!(dense_eigensystem(&h).unwrap().energies[0], -8.0, epsilon = 1e-12);
    }

    #[test]
    fn read_off_coefficients() {
        let p = ModelParams::new(1.0, 2.0, 0.3, 0.2, 0.0, spin(4)).unwrap();
        let co = EffectiveModel::CoNormal.form(&p).unwrap();
        assert_relative_eq!(co.a_dag_sq.re, -0.3 * 0.2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(co.a_dag_sq.im, 0.0);
        let p = p.with(Param::Theta, 0.7);
        let cs = EffectiveModel::CsNormal.form(&p).unwrap();
        assert!((cs.a_dag_b - C64::from_polar(0.3, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn displacement_at_and_above_threshold() {
        let p = ModelParams::new(1.0, 1.0, 0.5, 0.5, 0.0, spin(8)).unwrap();
        let s = displacement_solution(&p);
        assert_eq!(s.alpha, C64::default());
        assert_eq!(s.cos_delta, 1.0);

        let p = ModelParams::new(1.0, 1.0, 2f64.sqrt() / 2.0, 2f64.sqrt() / 2.0, 0.4, spin(8)).unwrap();
        let s = displacement_solution(&p);
        assert!(s.valid_region);
        assert_relative_eq!(s.cos_delta, 0.5, epsilon = 1e-14);
        assert_relative_eq!(s.alpha.arg(), 0.4, epsilon = 1e-14);
        let expected = 2.0 * 4.0 * (4.0 - 1.0) / (4.0 * 2.0 * 1.0);
        assert_relative_eq!(s.alpha.norm_sqr(), expected, epsilon = 1e-13);

        let below = displacement_solution(&point(0.7, 2.0, 1.0, 0.0));
        assert!(!below.valid_region);
        assert_eq!(below.alpha, C64::default());
    }

    #[test]
    fn displacement_removes_linear_terms() {
        for &(g, gamma, eta, twice) in &[(1.3, 2.0, 1.0, 20), (2.0, 0.5, 3.0, 5), (1.01, 1.0, 0.2, 40)] {
            let p = ModelParams::from_dimensionless(g, gamma, eta, 0.8, 0.2, spin(twice)).unwrap();
            let r = linear_term_residuals(&p, &displacement_solution(&p));
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn rescaled_parameter_relations() {
        let p = ModelParams::from_dimensionless(2f64.sqrt(), 3.0, 1.0, 1.0, 0.0, spin(7)).unwrap();
        let r = rescaled_params(&p).unwrap();
        let two_j: f64 = 7.0;
        assert_relative_eq!(r.omega_tilde, 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.lambda1_prime + r.lambda2_prime, 1.0 / (2f64.sqrt() * two_j.sqrt()), epsilon = 1e-14);
        assert_relative_eq!(r.lambda1_prime - r.lambda2_prime, (p.lambda1 - p.lambda2) / two_j.sqrt(), epsilon = 1e-14);

        let sym = rescaled_params(&point(1.7, 1.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(sym.lambda1_prime, sym.lambda2_prime);

        let edge = rescaled_params_unchecked(&ModelParams::new(1.0, 1.0, 0.6, 0.4, 0.0, spin(4)).unwrap());
        assert_relative_eq!(edge.omega_tilde, 1.0, epsilon = 1e-14);
        assert_relative_eq!(edge.lambda1_prime - edge.lambda2_prime, 0.2 / 2.0, epsilon = 1e-14);

        assert!(rescaled_params(&point(0.9, 2.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn superradiant_builders_reject_normal_phase() {
        let p = point(0.95, 2.0, 1.0, 0.0);
        let t2 = Truncation::two_mode(4, 4, Sector::Positive);
        let t1 = Truncation::one_mode(10, Sector::Positive);
        assert!(matches!(cs_superradiant_hamiltonian(&p, &t2), Err(Error::WrongPhase(_))));
        assert!(matches!(co_superradiant_hamiltonian(&p, &t1), Err(Error::WrongPhase(_))));
        assert!(matches!(co_superradiant_hamiltonian(&point(1.0, 2.0, 1.0, 0.0), &t1), Err(Error::WrongPhase(_))));
    }

    #[test]
    fn superradiant_forms_are_continuous_at_threshold() {
        let below = point(1.0 - 1e-9, 2.0, 1.5, 0.3);
        let above = point(1.0 + 1e-9, 2.0, 1.5, 0.3);
        for (np, sp) in [(EffectiveModel::CsNormal, EffectiveModel::CsSuperradiant), (EffectiveModel::CoNormal, EffectiveModel::CoSuperradiant)] {
            let a = np.form(&below).unwrap();
            let b = sp.form(&above).unwrap();
            assert!((a.n_a - b.n_a).abs() < 1e-7);
            assert!((a.n_b - b.n_b).abs() < 1e-7);
            assert!((a.a_dag_b - b.a_dag_b).norm() < 1e-7);
            assert!((a.a_dag_b_dag - b.a_dag_b_dag).norm() < 1e-7);
            assert!((a.a_dag_sq - b.a_dag_sq).norm() < 1e-7);
        }
    }

    #[test]
    fn co_superradiant_is_co_normal_with_rescaled_couplings() {
        let p = point(1.4, 1.0, 2.0, 0.0);
        let r = rescaled_params(&p).unwrap();
        let (k1, k2) = r.projected_couplings();
        let sub = ModelParams::new(p.omega, r.omega_tilde, k1, k2, 0.0, p.spin).unwrap();
        let a = EffectiveModel::CoSuperradiant.form(&p).unwrap();
        let b = EffectiveModel::CoNormal.form(&sub).unwrap();
        assert_relative_eq!(a.n_a, b.n_a, epsilon = 1e-14);
        assert!((a.a_dag_sq - b.a_dag_sq).norm() < 1e-14);
        // same monomials: number, squeezing and constant only
        assert_eq!(a.a_dag_b, C64::default());
        assert_eq!(a.a_dag_b_dag, C64::default());
    }

    #[test]
    fn co_normal_form_is_gamma_inversion_symmetric() {
        let a = EffectiveModel::CoNormal.form(&point(0.9, 3.0, 4.0, 0.6)).unwrap();
        let b = EffectiveModel::CoNormal.form(&point(0.9, 1.0 / 3.0, 4.0, 0.6)).unwrap();
        assert_relative_eq!(a.n_a, b.n_a, epsilon = 1e-14);
        assert!((a.a_dag_sq - b.a_dag_sq).norm() < 1e-14);
        assert!((a.constant - b.constant).abs() > 1e-3);
    }

    #[test]
    fn matrices_hermitian_and_parity_preserving() {
        let t2 = Truncation::two_mode(8, 7, Sector::Full);
        let t1 = Truncation::one_mode(15, Sector::Full);
        for model in EffectiveModel::ALL {
            let g = if model.is_superradiant() { 1.3 } else { 0.7 };
            let p = point(g, 2.0, 1.3, 0.9);
            let t = if model.modes() == 2 { t2 } else { t1 };
            let h = model.form(&p).unwrap().to_matrix(&t).unwrap();
            assert!(h.hermiticity_defect() < 1e-12);
            let parity: Vec<f64> = (0..t.full_dim()).map(|i| f64::from(t.parity_of(i))).collect();
            assert!(h.commutator_with_diagonal(&parity) < 1e-12, "{model}");
        }
    }

    #[test]
    fn extraction_round_trip() {
        let t2 = Truncation::two_mode(6, 5, Sector::Full);
        let t1 = Truncation::one_mode(9, Sector::Full);
        for model in EffectiveModel::ALL {
            let g = if model.is_superradiant() { 1.2 } else { 0.6 };
            let p = point(g, 0.5, 2.0, 1.1);
            let t = if model.modes() == 2 { t2 } else { t1 };
            let form = model.form(&p).unwrap();
            let m = form.to_matrix(&t).unwrap();
            let back = QuadraticBosonForm::from_matrix(&m, &t).unwrap();
            let diff = back.to_matrix(&t).unwrap().max_abs_diff(&m);
            assert!(diff < 1e-14, "{model}: {diff:e}");
        }
    }

    #[test]
    fn extraction_rejects_non_quadratic() {
        let t = Truncation::one_mode(6, Sector::Full);
        let mut entries: Vec<(usize, usize, C64)> = (0..7).map(|n| (n, n, C64::new((n * n) as f64, 0.0))).collect();
        entries.push((0, 0, C64::new(0.5, 0.0)));
        let m = OperatorMatrix::from_triplets(7, entries, t.tag());
        assert!(matches!(QuadraticBosonForm::from_matrix(&m, &t), Err(Error::NotQuadratic(_))));
    }

    #[test]
    fn dual_derivatives_match_central_differences() {
        let t = Truncation::two_mode(5, 5, Sector::Full);
        let t1 = Truncation::one_mode(12, Sector::Full);
        for model in EffectiveModel::ALL {
            let g = if model.is_superradiant() { 1.25 } else { 0.6 };
            let p = point(g, 2.5, 1.7, 0.4);
            let tt = if model.modes() == 2 { t } else { t1 };
            let fam = EffectiveHamiltonian::new(model, tt).unwrap();
            for which in Param::ALL {
                let h = 1e-5;
                let fd = fam.hamiltonian(&p.shifted(which, h)).unwrap().sub(&fam.hamiltonian(&p.shifted(which, -h)).unwrap()).scaled(C64::new(0.5 / h, 0.0));
                let exact = fam.derivative(&p, which).unwrap();
                assert!(fd.max_abs_diff(&exact) < 1e-7, "{model} {which}: {}", fd.max_abs_diff(&exact));
            }
        }
    }

    #[test]
    fn normal_phase_cs_gap_at_resonance() {
        // at omega = Omega = 1 and g = 0.5 the two normal modes are sqrt(1 -+ g)
        let p = point(0.5, 1.0, 1.0, 0.0);
        let modes = bogoliubov_modes(&EffectiveModel::CsNormal.form(&p).unwrap()).unwrap();
        let f = modes.frequencies().unwrap();
        assert_relative_eq!(f[0], 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(f[1], 1.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn co_normal_gap_closes_at_threshold() {
        for gamma in [0.5, 1.0, 3.0] {
            let p = point(1.0, gamma, 5.0, 0.0);
            let modes = bogoliubov_modes(&EffectiveModel::CoNormal.form(&p).unwrap()).unwrap();
            assert!(modes.squared[0].abs() < 1e-12, "{:?}", modes.squared);
        }
    }

    #[test]
    fn cs_gap_ratio_distinguishes_gamma() {
        // cs ground states at gamma and 1/gamma differ
        let t = Truncation::two_mode(30, 30, Sector::Positive);
        let a = dense_eigensystem(&cs_normal_hamiltonian(&point(0.9, 2.0, 1.0, 0.0), &t).unwrap()).unwrap();
        let b = dense_eigensystem(&cs_normal_hamiltonian(&point(0.9, 0.5, 1.0, 0.0), &t).unwrap()).unwrap();
        let overlap = a.state(0).dotc(&b.state(0)).norm();
        assert!(overlap < 1.0 - 1e-6, "{overlap}");
    }
}
