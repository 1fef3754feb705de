//! Squeezed-vacuum ground states of the one-mode effective models and their curvature.
//!
//! With `r = s e^{i phi}`, `S[r] = exp[(r* a^2 - r a^+^2)/2]` and
//!
//! ```text
//! S[r]|0> = cosh(s)^{-1/2} sum_n (-e^{i phi} tanh s)^n sqrt((2n)!) / (2^n n!) |2n>
//! ```
//!
//! The squeezing phase is locked to `e^{2i theta}`, so `theta` acts through
//! `e^{i theta a^+a}`. For any such family `F_theta,mu = -d_mu <a^+a>` and
//! `Q_theta,theta = Var(a^+a) = sinh^2(2s)/2`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::Truncation;
use crate::effective::{EffectiveModel, QuadraticBosonForm};
use crate::error::{Error, Result};
use crate::operator::{StateVector, C64};
use crate::params::{ModelParams, Param};
use crate::qgeom::{Convention, GroundStateGeometry, Method, QGTComponents};
use crate::spectra::bogoliubov_modes;

/// Largest tail weight tolerated beyond the Fock cutoff.
pub const TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "np")]
    Normal,
    #[serde(rename = "sp")]
    Superradiant,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Normal => "np",
            Branch::Superradiant => "sp",
        }
    }

    pub fn of(g: f64) -> Branch {
        if g <= 1.0 {
            Branch::Normal
        } else {
            Branch::Superradiant
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "np" => Ok(Branch::Normal),
            "sp" => Ok(Branch::Superradiant),
            _ => Err(Error::InvalidSpec(format!("unknown branch `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParams {
    pub r: C64,
    pub branch: Branch,
    /// Optional coherent displacement applied after squeezing (superradiant branch).
    pub alpha: Option<C64>,
}

impl SqueezeParams {
    pub fn magnitude(&self) -> f64 {
        self.r.norm()
    }

    pub fn displaced(mut self, alpha: C64) -> Self {
        self.alpha = Some(alpha);
        self
    }
}

/// `r_np = e^{2i theta} ln(1 - g^2)/4` for `0 <= g < 1`,
/// `r_sp = e^{2i theta} ln(1 - g^-4)/4` for `g > 1`.
pub fn squeeze_params(g: f64, theta: f64, branch: Branch) -> Result<SqueezeParams> {
    let log = match branch {
        Branch::Normal if (0.0..1.0).contains(&g) => (1.0 - g * g).ln(),
        Branch::Superradiant if g > 1.0 && g.is_finite() => (1.0 - g.powi(-4)).ln(),
        _ => return Err(Error::WrongPhase(format!("g = {g} outside the {branch} domain"))),
    };
    Ok(SqueezeParams { r: C64::from_polar(1.0, 2.0 * theta) * (0.25 * log), branch, alpha: None })
}

/// Normalized Fock vector of `D[alpha] S[r]|0>` on `0..=n_max`.
pub fn squeezed_state_vector(sp: &SqueezeParams, n_max: usize) -> Result<StateVector> {
    let alpha = sp.alpha.unwrap_or_default();
    let work = if alpha == C64::default() { n_max } else { n_max + 60 + (16.0 * alpha.norm_sqr()).ceil() as usize };
    let s = sp.magnitude();
    let x = if s == 0.0 { C64::default() } else { -(sp.r / s) * s.tanh() };
    let mut v = StateVector::zeros(work + 1);
    let mut c = C64::new(1.0 / s.cosh().sqrt(), 0.0);
    let mut n = 0usize;
    let mut kept = 0.0;
    while 2 * n <= work {
        v[2 * n] = c;
        kept += c.norm_sqr();
        c *= x * (((2 * n + 1) as f64) / ((2 * n + 2) as f64)).sqrt();
        n += 1;
    }
    let mut tail = (1.0 - kept).max(0.0);
    if alpha != C64::default() {
        v = displace(&v, alpha);
        tail = v.rows(n_max + 1, work - n_max).norm_squared() + tail;
    }
    if tail > TAIL_TOL {
        return Err(Error::FockTail { tail });
    }
    let v = v.rows(0, n_max + 1).into_owned();
    let norm = v.norm();
    Ok(v / C64::new(norm, 0.0))
}

/// `D[alpha] = e^{-|alpha|^2/2} e^{alpha a^+} e^{-alpha* a}` on the given vector.
fn displace(v: &StateVector, alpha: C64) -> StateVector {
    let dim = v.len();
    let series = |start: &StateVector, step: &dyn Fn(&StateVector) -> StateVector| {
        let mut total = start.clone();
        let mut term = start.clone();
        for k in 1..=4 * dim {
            term = step(&term) / C64::new(k as f64, 0.0);
            total += &term;
            if term.norm() < 1e-18 * total.norm() {
                break;
            }
        }
        total
    };
    let lower = |u: &StateVector| {
        StateVector::from_fn(dim, |n, _| if n + 1 < dim { -alpha.conj() * u[n + 1] * ((n + 1) as f64).sqrt() } else { C64::default() })
    };
    let raise = |u: &StateVector| StateVector::from_fn(dim, |n, _| if n > 0 { alpha * u[n - 1] * (n as f64).sqrt() } else { C64::default() });
    let w = series(v, &lower);
    series(&w, &raise) * C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0)
}

/// Berry curvature of the normal-branch squeezed family in the printed closed form
/// `|r| g^2 cosh(2|r|) / [2 omega (1 - g^2)]`.
pub fn berry_curvature_np(g: f64, omega: f64) -> Result<f64> {
    let s = squeeze_params(g, 0.0, Branch::Normal)?.magnitude();
    check_omega(omega)?;
    Ok(s * g * g * (2.0 * s).cosh() / (2.0 * omega * (1.0 - g * g)))
}

/// `-d_omega <a^+a>` for the normal-branch family: `sinh(2|r|) g^2 / [4 omega (1 - g^2)]`.
pub fn berry_curvature_np_exact(g: f64, omega: f64) -> Result<f64> {
    let s = squeeze_params(g, 0.0, Branch::Normal)?.magnitude();
    check_omega(omega)?;
    Ok((2.0 * s).sinh() * g * g / (4.0 * omega * (1.0 - g * g)))
}

/// Superradiant-branch curvature split into its divergent and regular parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpCurvature {
    /// `-|r| cosh(2|r|) / [g^4 omega (1 - g^-4)]`
    pub first_term: f64,
    /// `2 lambda_eff^2 / omega^3`, negligible near the critical point.
    pub second_term: f64,
}

impl SpCurvature {
    pub fn total(&self) -> f64 {
        self.first_term + self.second_term
    }
}

pub fn berry_curvature_sp(g: f64, omega: f64, lambda_eff: f64) -> Result<SpCurvature> {
    let s = squeeze_params(g, 0.0, Branch::Superradiant)?.magnitude();
    check_omega(omega)?;
    let g4 = g.powi(4);
    Ok(SpCurvature {
        first_term: -s * (2.0 * s).cosh() / (g4 * omega * (1.0 - 1.0 / g4)),
        second_term: 2.0 * lambda_eff * lambda_eff / omega.powi(3),
    })
}

/// `-d_omega <a^+a>` for the superradiant-branch family: `-sinh(2|r|) g^-4 / [2 omega (1 - g^-4)]`.
pub fn berry_curvature_sp_exact(g: f64, omega: f64) -> Result<f64> {
    let s = squeeze_params(g, 0.0, Branch::Superradiant)?.magnitude();
    check_omega(omega)?;
    let inv = g.powi(-4);
    Ok(-(2.0 * s).sinh() * inv / (2.0 * omega * (1.0 - inv)))
}

/// Default coupling for the regular superradiant term: `(lambda1 + lambda2)/2`.
pub fn default_lambda_eff(p: &ModelParams) -> f64 {
    0.5 * p.coupling_sum()
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("omega must be positive, got {omega}")))
    }
}

/// Ground states of the closed-form family along a parameter path: the squeezing follows
/// `g(p)` and `theta(p)`, everything else is ignored.
pub fn squeezed_family(branch: Branch, n_max: usize) -> impl Fn(&ModelParams) -> Result<StateVector> + Sync {
    move |p: &ModelParams| squeezed_state_vector(&squeeze_params(p.g(), p.theta, branch)?, n_max)
}

/// Closed-form ground-state geometry of a one-mode effective model: the ground state is
/// a squeezed vacuum with `tanh(2s) = 2|c|/A` for `H = A a^+a + (c a^+^2 + h.c.) + const`.
pub fn co_closed_form(model: EffectiveModel, p: &ModelParams, params: &[Param], convention: Convention) -> Result<GroundStateGeometry> {
    if model.modes() != 1 {
        return Err(Error::InvalidSpec(format!("no closed form for the two-mode model {model}")));
    }
    let form = model.form(p)?;
    let modes = bogoliubov_modes(&form)?;
    let gap = modes.lowest()?;
    let a = form.n_a;
    let c = form.a_dag_sq.norm();
    let t = 2.0 * c / a;
    let s = 0.5 * t.atanh();
    let ds = |which: Param| -> Result<f64> {
        let d = form_derivative(model, p, which, convention)?;
        let dc = if c > 0.0 { (form.a_dag_sq.conj() * d.a_dag_sq).re / c } else { d.a_dag_sq.norm() };
        let dt = 2.0 * dc / a - 2.0 * c * d.n_a / (a * a);
        Ok(0.5 * dt / (1.0 - t * t))
    };
    let k = params.len();
    let grads: Vec<Option<f64>> = params.iter().map(|&w| if w == Param::Theta { Ok(None) } else { ds(w).map(Some) }).collect::<Result<_>>()?;
    let sinh2 = (2.0 * s).sinh();
    let q = DMatrix::from_fn(k, k, |i, j| match (grads[i], grads[j]) {
        (None, None) => C64::new(0.5 * sinh2 * sinh2, 0.0),
        (None, Some(d)) => C64::new(0.0, -0.5 * sinh2 * d),
        (Some(d), None) => C64::new(0.0, 0.5 * sinh2 * d),
        (Some(x), Some(y)) => C64::new(0.5 * x * y, 0.0),
    });
    Ok(GroundStateGeometry {
        qgt: QGTComponents::new(params.to_vec(), q, Method::Analytic)?,
        energy: modes.zero_point.ok_or(Error::Unstable)?,
        gap: Some(gap),
        photon_mean: s.sinh().powi(2),
        photon_variance: 0.5 * sinh2 * sinh2,
        tail_weight: 0.0,
    })
}

fn form_derivative(model: EffectiveModel, p: &ModelParams, which: Param, convention: Convention) -> Result<QuadraticBosonForm> {
    let d = model.form_derivative(p, which)?;
    if !(convention == Convention::FixedG && which == Param::Omega) {
        return Ok(d);
    }
    let half = 0.5 / p.omega;
    let l1 = model.form_derivative(p, Param::Lambda1)?;
    let l2 = model.form_derivative(p, Param::Lambda2)?;
    let (w1, w2) = (p.lambda1 * half, p.lambda2 * half);
    Ok(QuadraticBosonForm {
        modes: d.modes,
        n_a: d.n_a + w1 * l1.n_a + w2 * l2.n_a,
        n_b: d.n_b + w1 * l1.n_b + w2 * l2.n_b,
        a_dag_b: d.a_dag_b + l1.a_dag_b * w1 + l2.a_dag_b * w2,
        a_dag_b_dag: d.a_dag_b_dag + l1.a_dag_b_dag * w1 + l2.a_dag_b_dag * w2,
        a_dag_sq: d.a_dag_sq + l1.a_dag_sq * w1 + l2.a_dag_sq * w2,
        constant: d.constant + w1 * l1.constant + w2 * l2.constant,
    })
}

/// Default one-mode truncation for the squeezed families.
pub fn default_truncation() -> Truncation {
    Truncation::one_mode(400, crate::basis::Sector::Full)
}
