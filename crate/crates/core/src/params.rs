//! Physical parameter points of the anisotropic Dicke model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spin length `j`, stored as the integer `2j` so that half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpinLength(u32);

impl SpinLength {
    pub fn from_twice(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(Error::InvalidParams("spin length must be at least 1/2".into()));
        }
        Ok(SpinLength(twice_j))
    }

    /// Accepts any positive multiple of 1/2.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("j = {j} is not a positive half-integer")));
        }
        Self::from_twice(twice.round() as u32)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Number of `|j, m>` states, `2j + 1`.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for SpinLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Differentiable Hamiltonian parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Param {
    /// Boson frequency `omega`.
    #[serde(rename = "omega")]
    Omega,
    /// Spin transition frequency `Omega`.
    #[serde(rename = "Omega")]
    OmegaQ,
    #[serde(rename = "lambda1")]
    Lambda1,
    #[serde(rename = "lambda2")]
    Lambda2,
    #[serde(rename = "theta")]
    Theta,
}

impl Param {
    pub const ALL: [Param; 5] = [Param::Omega, Param::OmegaQ, Param::Lambda1, Param::Lambda2, Param::Theta];

    pub fn label(self) -> &'static str {
        match self {
            Param::Omega => "omega",
            Param::OmegaQ => "Omega",
            Param::Lambda1 => "lambda1",
            Param::Lambda2 => "lambda2",
            Param::Theta => "theta",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Param::Omega => 0,
            Param::OmegaQ => 1,
            Param::Lambda1 => 2,
            Param::Lambda2 => 3,
            Param::Theta => 4,
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" | "w" => Ok(Param::Omega),
            "Omega" | "W" => Ok(Param::OmegaQ),
            "lambda1" | "l1" => Ok(Param::Lambda1),
            "lambda2" | "l2" => Ok(Param::Lambda2),
            "theta" => Ok(Param::Theta),
            other => Err(Error::InvalidParams(format!("unknown parameter label `{other}`"))),
        }
    }
}

/// A point `(omega, Omega, lambda1, lambda2, theta, j)` in parameter space.
///
/// Only the primaries are stored; `g`, `gamma` and `eta` are always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub omega_q: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta: f64,
    pub spin: SpinLength,
}

/// Dimensionless ratios `g = (l1 + l2)/sqrt(omega Omega)`, `gamma = l1/l2`, `eta = Omega/omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCouplings {
    pub g: f64,
    /// `+inf` when `lambda2 = 0 < lambda1`; `1` when both couplings vanish.
    pub gamma: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(omega: f64, omega_q: f64, lambda1: f64, lambda2: f64, theta: f64, spin: SpinLength) -> Result<Self> {
        let p = ModelParams { omega, omega_q, lambda1, lambda2, theta, spin };
        p.validate()?;
        Ok(p)
    }

    /// Builds a point from the dimensionless description used by sweeps:
    /// `Omega = eta * omega`, `lambda1 + lambda2 = g sqrt(omega Omega)`, `lambda1 = gamma lambda2`.
    /// `gamma = inf` puts all coupling into `lambda1`.
    pub fn from_dimensionless(g: f64, gamma: f64, eta: f64, omega: f64, theta: f64, spin: SpinLength) -> Result<Self> {
        if !(g >= 0.0) || !(eta > 0.0) || !(omega > 0.0) || !(gamma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "need g >= 0, gamma >= 0, eta > 0, omega > 0 (got g={g}, gamma={gamma}, eta={eta}, omega={omega})"
            )));
        }
        let omega_q = eta * omega;
        let sum = g * (omega * omega_q).sqrt();
        let (lambda1, lambda2) = if gamma.is_infinite() {
            (sum, 0.0)
        } else {
            let l2 = sum / (1.0 + gamma);
            (sum - l2, l2)
        };
        Self::new(omega, omega_q, lambda1, lambda2, theta, spin)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0
            && self.omega_q > 0.0
            && self.lambda1 >= 0.0
            && self.lambda2 >= 0.0
            && self.omega.is_finite()
            && self.omega_q.is_finite()
            && self.lambda1.is_finite()
            && self.lambda2.is_finite()
            && self.theta.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn j(&self) -> f64 {
        self.spin.value()
    }

    pub fn coupling_sum(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    pub fn g(&self) -> f64 {
        self.coupling_sum() / (self.omega * self.omega_q).sqrt()
    }

    pub fn derived(&self) -> DerivedCouplings {
        derived_couplings(self)
    }

    pub fn get(&self, which: Param) -> f64 {
        match which {
            Param::Omega => self.omega,
            Param::OmegaQ => self.omega_q,
            Param::Lambda1 => self.lambda1,
            Param::Lambda2 => self.lambda2,
            Param::Theta => self.theta,
        }
    }

    /// Copy with one primary replaced. No validation, so stencils may probe freely.
    pub fn with(&self, which: Param, value: f64) -> Self {
        let mut p = *self;
        match which {
            Param::Omega => p.omega = value,
            Param::OmegaQ => p.omega_q = value,
            Param::Lambda1 => p.lambda1 = value,
            Param::Lambda2 => p.lambda2 = value,
            Param::Theta => p.theta = value,
        }
        p
    }

    pub fn shifted(&self, which: Param, delta: f64) -> Self {
        self.with(which, self.get(which) + delta)
    }

    /// `[omega, Omega, lambda1, lambda2, theta]`, in [`Param::ALL`] order.
    pub(crate) fn primaries(&self) -> [f64; 5] {
        [self.omega, self.omega_q, self.lambda1, self.lambda2, self.theta]
    }
}

pub fn derived_couplings(p: &ModelParams) -> DerivedCouplings {
    let gamma = if p.lambda2 == 0.0 {
        if p.lambda1 == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        p.lambda1 / p.lambda2
    };
    DerivedCouplings { g: p.g(), gamma, eta: p.omega_q / p.omega }
}
