//! Quantum geometric tensor of a ground state by three independent routes.
//!
//! * sum over states: `Q = sum_{m != n} <n|d_mu H|m><m|d_nu H|n> / (E_m - E_n)^2`
//! * linear solve: `x_mu = (H - E0)^+ P d_mu H |psi0>` with `P = 1 - |psi0><psi0|`, then
//!   `Q = <x_mu|x_nu>`; no excited states needed
//! * finite differences of gauge-fixed ground states, assembled as
//!   `Q = <d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi>`

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParametricHamiltonian;
use crate::operator::{OperatorMatrix, StateVector, C64};
use crate::params::{ModelParams, Param};
use crate::spectra::{self, gauge_anchor, gauge_fix_at, Eigensystem};

/// Sum over states is the default up to this dimension, linear solve above.
pub const SUM_OVER_STATES_MAX_DIM: usize = 1500;

/// Largest dimension at which [`ground_pair`] diagonalizes densely.
pub const GROUND_PAIR_DENSE_MAX: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "sum")]
    SumOverStates,
    #[serde(rename = "solve")]
    LinearSolve,
    #[serde(rename = "fd")]
    FiniteDifference,
    #[serde(rename = "analytic")]
    Analytic,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::SumOverStates => "sum",
            Method::LinearSolve => "solve",
            Method::FiniteDifference => "fd",
            Method::Analytic => "analytic",
        }
    }

    pub fn default_for(dim: usize) -> Method {
        if dim <= SUM_OVER_STATES_MAX_DIM {
            Method::SumOverStates
        } else {
            Method::LinearSolve
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" | "sum_over_states" => Ok(Method::SumOverStates),
            "solve" | "linear_solve" => Ok(Method::LinearSolve),
            "fd" | "finite_difference" => Ok(Method::FiniteDifference),
            "analytic" => Ok(Method::Analytic),
            _ => Err(Error::InvalidSpec(format!("unknown method `{s}`"))),
        }
    }
}

/// Which primaries are held fixed when differentiating with respect to `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Convention {
    /// `Omega, lambda1, lambda2, theta, j` fixed; `g` varies with `omega`.
    #[default]
    #[serde(rename = "fixed_couplings")]
    FixedCouplings,
    /// `g`, `gamma`, `Omega`, `theta`, `j` fixed; both couplings scale as `sqrt(omega)`.
    #[serde(rename = "fixed_g")]
    FixedG,
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_couplings" | "couplings" => Ok(Convention::FixedCouplings),
            "fixed_g" | "g" => Ok(Convention::FixedG),
            _ => Err(Error::InvalidSpec(format!("unknown derivative convention `{s}`"))),
        }
    }
}

impl Convention {
    /// `p` moved by `h` along `which`.
    pub fn displace(self, p: &ModelParams, which: Param, h: f64) -> ModelParams {
        match (self, which) {
            (Convention::FixedG, Param::Omega) => {
                let scale = ((p.omega + h) / p.omega).sqrt();
                let mut q = p.shifted(Param::Omega, h);
                q.lambda1 *= scale;
                q.lambda2 *= scale;
                q
            }
            _ => p.shifted(which, h),
        }
    }

    /// `dH` along `which` under this convention.
    pub fn derivative(self, model: &dyn ParametricHamiltonian, p: &ModelParams, which: Param) -> Result<OperatorMatrix> {
        let direct = model.derivative(p, which)?;
        match (self, which) {
            (Convention::FixedG, Param::Omega) => {
                let half = 0.5 / p.omega;
                let l1 = model.derivative(p, Param::Lambda1)?.scaled(C64::new(p.lambda1 * half, 0.0));
                let l2 = model.derivative(p, Param::Lambda2)?.scaled(C64::new(p.lambda2 * half, 0.0));
                Ok(direct.add(&l1).add(&l2))
            }
            _ => Ok(direct),
        }
    }
}

/// `Q_{mu nu}` over an ordered parameter subset.
#[derive(Debug, Clone, PartialEq)]
pub struct QGTComponents {
    pub labels: Vec<Param>,
    pub q: DMatrix<C64>,
    pub method: Method,
}

/// Quantum Fisher information for one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QFIValue {
    pub param: Param,
    pub value: f64,
}

impl QGTComponents {
    /// Rejects tensors whose Hermiticity defect exceeds `1e-8 * max(1, |Q|)`.
    pub fn new(labels: Vec<Param>, q: DMatrix<C64>, method: Method) -> Result<Self> {
        assert_eq!(labels.len(), q.nrows());
        let scale = q.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let defect = (&q - q.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if defect > 1e-8 * scale {
            return Err(Error::NotHermitian { defect });
        }
        Ok(QGTComponents { labels, q, method })
    }

    pub fn index_of(&self, p: Param) -> Result<usize> {
        self.labels.iter().position(|&l| l == p).ok_or(Error::MissingParam(p))
    }

    pub fn get(&self, mu: Param, nu: Param) -> Result<C64> {
        Ok(self.q[(self.index_of(mu)?, self.index_of(nu)?)])
    }

    /// `G = Re Q`, symmetrized.
    pub fn metric(&self) -> DMatrix<f64> {
        let re = self.q.map(|c| c.re);
        (&re + re.transpose()) * 0.5
    }

    /// `F = 2 Im Q`, antisymmetrized.
    pub fn berry(&self) -> DMatrix<f64> {
        let im = self.q.map(|c| c.im);
        &im - im.transpose()
    }

    pub fn metric_component(&self, mu: Param, nu: Param) -> Result<f64> {
        Ok(self.metric()[(self.index_of(mu)?, self.index_of(nu)?)])
    }

    pub fn berry_component(&self, mu: Param, nu: Param) -> Result<f64> {
        Ok(self.berry()[(self.index_of(mu)?, self.index_of(nu)?)])
    }

    pub fn qfi(&self, mu: Param) -> Result<QFIValue> {
        let i = self.index_of(mu)?;
        Ok(QFIValue { param: mu, value: 4.0 * self.q[(i, i)].re })
    }

    pub fn min_metric_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.metric()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn gram(vectors: &[StateVector], psi: Option<&StateVector>) -> DMatrix<C64> {
    let k = vectors.len();
    let overlaps: Vec<C64> = match psi {
        Some(psi) => vectors.iter().map(|v| psi.dotc(v)).collect(),
        None => vec![C64::default(); k],
    };
    DMatrix::from_fn(k, k, |a, b| vectors[a].dotc(&vectors[b]) - overlaps[a].conj() * overlaps[b])
}

/// Single component by the spectral sum; needs a complete, nondegenerate spectrum at `n`.
pub fn qgt_sum_over_states(es: &Eigensystem, d_mu: &OperatorMatrix, d_nu: &OperatorMatrix, n: usize) -> Result<C64> {
    let t = qgt_tensor_sum_over_states(es, &[d_mu.clone(), d_nu.clone()], n)?;
    Ok(t[(0, 1)])
}

pub fn qgt_tensor_sum_over_states(es: &Eigensystem, derivs: &[OperatorMatrix], n: usize) -> Result<DMatrix<C64>> {
    if !es.complete {
        return Err(Error::InvalidParams("sum over states needs the complete spectrum".into()));
    }
    es.require_nondegenerate(n)?;
    let psi = es.state(n);
    let weights: Vec<f64> =
        es.energies.iter().enumerate().map(|(m, e)| if m == n { 0.0 } else { 1.0 / (e - es.energies[n]) }).collect();
    let scaled: Vec<StateVector> = derivs
        .iter()
        .map(|d| {
            let coeffs = es.states.adjoint() * d.apply(&psi);
            StateVector::from_iterator(coeffs.len(), coeffs.iter().zip(&weights).map(|(c, w)| c * *w))
        })
        .collect();
    Ok(gram(&scaled, None))
}

/// Controls for the projected conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative residual target `||r|| / ||b||`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-10, max_iterations: 20_000 }
    }
}

/// Single component via `<x_mu|x_nu>`.
pub fn qgt_linear_solve(h: &OperatorMatrix, e0: f64, psi0: &StateVector, d_mu: &OperatorMatrix, d_nu: &OperatorMatrix) -> Result<C64> {
    let xs = response_vectors(h, e0, psi0, &[d_mu.clone(), d_nu.clone()], SolveOptions::default())?;
    Ok(xs[0].dotc(&xs[1]))
}

pub fn qgt_tensor_linear_solve(h: &OperatorMatrix, e0: f64, psi0: &StateVector, derivs: &[OperatorMatrix], opts: SolveOptions) -> Result<DMatrix<C64>> {
    Ok(gram(&response_vectors(h, e0, psi0, derivs, opts)?, None))
}

/// `x = (H - E0)^+ P dH psi0` for each derivative.
pub fn response_vectors(h: &OperatorMatrix, e0: f64, psi0: &StateVector, derivs: &[OperatorMatrix], opts: SolveOptions) -> Result<Vec<StateVector>> {
    let shifted = h.shifted(e0);
    let floor = 1e-3 * h.norm_inf().max(1e-300);
    let precond: Vec<f64> = (0..h.dim()).map(|i| 1.0 / shifted.get(i, i).re.max(floor)).collect();
    derivs
        .iter()
        .map(|d| {
            let b = project(&d.apply(psi0), psi0);
            projected_cg(&shifted, psi0, &b, &precond, opts)
        })
        .collect()
}

fn project(v: &StateVector, psi: &StateVector) -> StateVector {
    v - psi * psi.dotc(v)
}

/// Preconditioned CG for `P A P x = b` on the complement of `psi`, `A = H - E0`.
fn projected_cg(a: &OperatorMatrix, psi: &StateVector, b: &StateVector, precond: &[f64], opts: SolveOptions) -> Result<StateVector> {
    let n = b.len();
    let b_norm = b.norm();
    let mut x = StateVector::zeros(n);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let op = |v: &StateVector| project(&a.apply(v), psi);
    let prec = |r: &StateVector| project(&StateVector::from_iterator(n, r.iter().zip(precond).map(|(c, w)| c * *w)), psi);
    let mut r = b.clone();
    let mut z = prec(&r);
    let mut p = z.clone();
    let mut rz = r.dotc(&z).re;
    let target = opts.tol * b_norm;
    let mut residual = r.norm();
    for it in 1..=opts.max_iterations {
        let ap = op(&p);
        let alpha = rz / p.dotc(&ap).re;
        x.axpy(C64::new(alpha, 0.0), &p, C64::new(1.0, 0.0));
        if it % 50 == 0 {
            r = b - op(&x);
        } else {
            r.axpy(C64::new(-alpha, 0.0), &ap, C64::new(1.0, 0.0));
        }
        residual = r.norm();
        if residual < target {
            let true_residual = (b - op(&x)).norm();
            if true_residual < target {
                return Ok(project(&x, psi));
            }
            r = b - op(&x);
        }
        z = prec(&r);
        let rz_new = r.dotc(&z).re;
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + &p * C64::new(beta, 0.0);
    }
    Err(Error::SolveNoConvergence { iterations: opts.max_iterations, residual: residual / b_norm })
}

/// Step and extrapolation controls for the finite-difference route.
#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    /// `h_mu = rel_step * max(1, |p_mu|)`.
    pub rel_step: f64,
    /// `None`: Richardson step-halving only for `g` in `[0.97, 1.03]`.
    pub richardson: Option<bool>,
    pub convention: Convention,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { rel_step: 1e-5, richardson: None, convention: Convention::FixedCouplings }
    }
}

impl FdOptions {
    pub fn step(&self, p: &ModelParams, which: Param) -> f64 {
        self.rel_step * p.get(which).abs().max(1.0)
    }

    fn use_richardson(&self, p: &ModelParams) -> bool {
        self.richardson.unwrap_or_else(|| (0.97..=1.03).contains(&p.g()))
    }
}

/// Finite-difference tensor and the spread between the two step sizes when Richardson is on.
#[derive(Debug, Clone)]
pub struct FdEstimate {
    pub q: QGTComponents,
    pub error_estimate: Option<f64>,
}

/// Single component from finite differences of `builder`'s ground states.
pub fn qgt_overlap_fd<F>(builder: &F, p: &ModelParams, mu: Param, nu: Param, opts: FdOptions) -> Result<C64>
where
    F: Fn(&ModelParams) -> Result<StateVector> + Sync,
{
    let params = if mu == nu { vec![mu] } else { vec![mu, nu] };
    let est = qgt_tensor_fd(builder, p, &params, opts)?;
    est.q.get(mu, nu)
}

/// Every stencil state is phase-fixed at the component where the centre state is largest,
/// so the difference quotients see no gauge jumps.
pub fn qgt_tensor_fd<F>(builder: &F, p: &ModelParams, params: &[Param], opts: FdOptions) -> Result<FdEstimate>
where
    F: Fn(&ModelParams) -> Result<StateVector> + Sync,
{
    let center = builder(p)?;
    let anchor = gauge_anchor(&center);
    let psi = gauge_fix_at(&center, anchor);
    let state_at = |q: &ModelParams| -> Result<StateVector> {
        let v = gauge_fix_at(&builder(q)?, anchor);
        let overlap = psi.dotc(&v).norm();
        if overlap < 0.5 {
            return Err(Error::StencilOverlap { overlap });
        }
        Ok(v)
    };
    let derivative = |which: Param, h: f64| -> Result<StateVector> {
        let plus = state_at(&opts.convention.displace(p, which, h))?;
        let minus = state_at(&opts.convention.displace(p, which, -h))?;
        Ok((plus - minus) / C64::new(2.0 * h, 0.0))
    };
    let coarse: Vec<StateVector> = params.iter().map(|&w| derivative(w, opts.step(p, w))).collect::<Result<_>>()?;
    let (q, error_estimate) = if opts.use_richardson(p) {
        let fine: Vec<StateVector> = params.iter().map(|&w| derivative(w, 0.5 * opts.step(p, w))).collect::<Result<_>>()?;
        let extrapolated: Vec<StateVector> =
            fine.iter().zip(&coarse).map(|(f, c)| (f * C64::new(4.0, 0.0) - c) / C64::new(3.0, 0.0)).collect();
        let q = gram(&extrapolated, Some(&psi));
        let spread = (&q - gram(&fine, Some(&psi))).iter().map(|c| c.norm()).fold(0.0, f64::max);
        (q, Some(spread))
    } else {
        (gram(&coarse, Some(&psi)), None)
    };
    Ok(FdEstimate { q: QGTComponents::new(params.to_vec(), q, Method::FiniteDifference)?, error_estimate })
}

/// Ground-state summary at one parameter point.
#[derive(Debug, Clone)]
pub struct GroundStateGeometry {
    pub qgt: QGTComponents,
    pub energy: f64,
    pub gap: Option<f64>,
    pub photon_mean: f64,
    pub photon_variance: f64,
    /// Weight of the ground state on the two highest retained Fock levels.
    pub tail_weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct QgtOptions {
    pub method: Method,
    pub fd: FdOptions,
    pub solve: SolveOptions,
}

impl QgtOptions {
    pub fn new(method: Method) -> Self {
        QgtOptions { method, fd: FdOptions::default(), solve: SolveOptions::default() }
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.fd.convention = convention;
        self
    }
}

/// Lowest two levels: dense up to [`GROUND_PAIR_DENSE_MAX`], iterative above.
pub fn ground_pair(h: &OperatorMatrix) -> Result<Eigensystem> {
    if h.dim() <= GROUND_PAIR_DENSE_MAX {
        spectra::dense_eigensystem(h)
    } else {
        spectra::lowest_k(h, 2.min(h.dim()))
    }
}

/// Gauge-fixed ground state of `model` at `p`.
pub fn ground_state(model: &dyn ParametricHamiltonian, p: &ModelParams) -> Result<StateVector> {
    let es = ground_pair(&model.hamiltonian(p)?)?;
    es.require_nondegenerate(0)?;
    Ok(es.ground_state())
}

/// QGT over `params` for the ground state of `model` at `p`.
pub fn ground_state_qgt(model: &dyn ParametricHamiltonian, p: &ModelParams, params: &[Param], opts: QgtOptions) -> Result<GroundStateGeometry> {
    let h = model.hamiltonian(p)?;
    let es = match opts.method {
        Method::SumOverStates => spectra::dense_eigensystem(&h)?,
        Method::LinearSolve | Method::FiniteDifference => ground_pair(&h)?,
        Method::Analytic => return Err(Error::InvalidSpec("closed forms exist only for the one-mode effective models".into())),
    };
    es.require_nondegenerate(0)?;
    let psi = es.ground_state();
    let conv = opts.fd.convention;
    let derivs = || params.iter().map(|&w| conv.derivative(model, p, w)).collect::<Result<Vec<_>>>();
    let q = match opts.method {
        Method::SumOverStates => qgt_tensor_sum_over_states(&es, &derivs()?, 0)?,
        Method::LinearSolve => qgt_tensor_linear_solve(&h, es.ground_energy(), &psi, &derivs()?, opts.solve)?,
        _ => {
            let builder = |q: &ModelParams| ground_state(model, q);
            qgt_tensor_fd(&builder, p, params, opts.fd)?.q.q
        }
    };
    let n_op = model.photon_number();
    let n_psi = n_op.apply(&psi);
    let photon_mean = psi.dotc(&n_psi).re;
    Ok(GroundStateGeometry {
        qgt: QGTComponents::new(params.to_vec(), q, opts.method)?,
        energy: es.ground_energy(),
        gap: es.gap(),
        photon_mean,
        photon_variance: n_psi.norm_squared() - photon_mean * photon_mean,
        tail_weight: model.fock_tail_weight(&psi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adm::FullModel;
    use crate::basis::{Sector, Truncation};
    use crate::params::SpinLength;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> FullModel {
        FullModel::new(Truncation::full_model(30, SpinLength::from_twice(10).unwrap(), Sector::Positive)).unwrap()
    }

    fn point(g: f64, gamma: f64) -> ModelParams {
        ModelParams::from_dimensionless(g, gamma, 1.0, 1.0, 0.3, SpinLength::from_twice(10).unwrap()).unwrap()
    }

    const ALL3: [Param; 3] = [Param::Omega, Param::Theta, Param::Lambda1];

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / a.norm().max(b.norm()).max(1.0)
    }

    #[test]
    fn decoupled_point_is_flat_in_omega() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, SpinLength::from_twice(10).unwrap()).unwrap();
        let m = model();
        for method in [Method::SumOverStates, Method::LinearSolve] {
            let g = ground_state_qgt(&m, &p, &[Param::Omega, Param::Theta], QgtOptions::new(method)).unwrap();
            assert!(g.qgt.q.iter().all(|c| c.norm() < 1e-14), "{method}");
        }
    }

    #[test]
    fn theta_component_is_photon_variance() {
        let m = model();
        for g in [0.3, 0.8] {
            let geo = ground_state_qgt(&m, &point(g, 2.0), &[Param::Theta], QgtOptions::new(Method::SumOverStates)).unwrap();
            assert!((geo.qgt.q[(0, 0)].re - geo.photon_variance).abs() < 1e-10);
        }
    }

    #[test]
    fn three_routes_agree() {
        let m = model();
        for &(g, gamma) in &[(0.5, 2.0), (0.8, 0.5)] {
            let p = point(g, gamma);
            let a = ground_state_qgt(&m, &p, &ALL3, QgtOptions::new(Method::SumOverStates)).unwrap().qgt;
            let b = ground_state_qgt(&m, &p, &ALL3, QgtOptions::new(Method::LinearSolve)).unwrap().qgt;
            let c = ground_state_qgt(&m, &p, &ALL3, QgtOptions::new(Method::FiniteDifference)).unwrap().qgt;
            for (x, (y, z)) in a.q.iter().zip(b.q.iter().zip(c.q.iter())) {
                assert!(rel(*x, *y) < 1e-8, "{x} {y}");
                assert!(rel(*x, *z) < 1e-6, "{x} {z}");
            }
        }
    }

    #[test]
    fn single_component_entry_points() {
        let m = model();
        let p = point(0.6, 3.0);
        let h = m.hamiltonian(&p).unwrap();
        let es = spectra::dense_eigensystem(&h).unwrap();
        let dw = m.derivative(&p, Param::Omega).unwrap();
        let dt = m.derivative(&p, Param::Theta).unwrap();
        let a = qgt_sum_over_states(&es, &dt, &dw, 0).unwrap();
        let b = qgt_linear_solve(&h, es.ground_energy(), &es.ground_state(), &dt, &dw).unwrap();
        let builder = |q: &ModelParams| ground_state(&m, q);
        let c = qgt_overlap_fd(&builder, &p, Param::Theta, Param::Omega, FdOptions::default()).unwrap();
        assert!(rel(a, b) < 1e-8);
        assert!(rel(a, c) < 1e-6);
        assert!(a.im.abs() > 1e-3);
    }

    #[test]
    fn fd_is_gauge_invariant() {
        let m = model();
        let p = point(0.5, 2.0);
        let plain = |q: &ModelParams| ground_state(&m, q);
        let counter = std::sync::atomic::AtomicU64::new(1);
        let scrambled = |q: &ModelParams| {
            let seed = counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            let phase = ChaCha8Rng::seed_from_u64(seed).random::<f64>() * std::f64::consts::TAU;
            Ok(ground_state(&m, q)? * C64::from_polar(1.0, phase))
        };
        let a = qgt_tensor_fd(&plain, &p, &ALL3, FdOptions::default()).unwrap().q;
        let b = qgt_tensor_fd(&scrambled, &p, &ALL3, FdOptions::default()).unwrap().q;
        assert!((a.q - b.q).iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn fidelity_distance_matches_metric() {
        let m = model();
        let p = point(0.7, 2.0);
        let geo = ground_state_qgt(&m, &p, &[Param::Omega, Param::Lambda1], QgtOptions::new(Method::SumOverStates)).unwrap();
        let g = geo.qgt.metric();
        let d = [1e-4, -0.7e-4];
        let q = p.shifted(Param::Omega, d[0]).shifted(Param::Lambda1, d[1]);
        let a = ground_state(&m, &p).unwrap();
        let b = ground_state(&m, &q).unwrap();
        let ds2 = 1.0 - a.dotc(&b).norm_sqr();
        let predicted: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| g[(i, j)] * d[i] * d[j]).sum();
        assert!((ds2 - predicted).abs() < 1e-3 * predicted, "{ds2} {predicted}");
    }

    #[test]
    fn derived_accessors() {
        let q = DMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.1, 0.3), C64::new(0.1, -0.3), C64::new(1.0, 0.0)]);
        let t = QGTComponents::new(vec![Param::Theta, Param::Omega], q, Method::SumOverStates).unwrap();
        assert_eq!(t.berry_component(Param::Theta, Param::Omega).unwrap(), 0.6);
        assert_eq!(t.berry_component(Param::Omega, Param::Theta).unwrap(), -0.6);
        assert_eq!(t.qfi(Param::Omega).unwrap().value, 4.0);
        assert!(matches!(t.qfi(Param::Lambda2), Err(Error::MissingParam(Param::Lambda2))));

        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.0)]));
        let t = QGTComponents::new(vec![Param::Theta, Param::Omega], diag, Method::SumOverStates).unwrap();
        assert!(t.berry().iter().all(|&x| x == 0.0));

        let bad = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(QGTComponents::new(vec![Param::Theta, Param::Omega], bad, Method::SumOverStates), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fixed_g_convention_matches_its_finite_difference() {
        let m = model();
        let p = point(0.6, 2.0);
        let opts = QgtOptions::new(Method::SumOverStates).with_convention(Convention::FixedG);
        let a = ground_state_qgt(&m, &p, &[Param::Omega], opts).unwrap().qgt.q[(0, 0)];
        let fd = QgtOptions { method: Method::FiniteDifference, ..opts };
        let b = ground_state_qgt(&m, &p, &[Param::Omega], fd).unwrap().qgt.q[(0, 0)];
        assert!(rel(a, b) < 1e-6);
        let plain = ground_state_qgt(&m, &p, &[Param::Omega], QgtOptions::new(Method::SumOverStates)).unwrap().qgt.q[(0, 0)];
        assert!(rel(a, plain) > 1e-3);
        assert!((Convention::FixedG.displace(&p, Param::Omega, 0.3).g() - p.g()).abs() < 1e-14);
    }

    #[test]
    fn default_method_boundary() {
        assert_eq!(Method::default_for(1500), Method::SumOverStates);
        assert_eq!(Method::default_for(1501), Method::LinearSolve);
    }
}
