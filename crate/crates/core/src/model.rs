//! Parametric Hamiltonian families shared by the full and effective models.

use crate::basis::Truncation;
use crate::error::Result;
use crate::operator::{OperatorMatrix, StateVector, C64};
use crate::params::{ModelParams, Param};

/// A Hamiltonian `H(p)` on a fixed truncated basis together with its exact parameter derivatives.
///
/// Implementations are pure; they may be evaluated concurrently from many threads.
pub trait ParametricHamiltonian: Sync {
    fn truncation(&self) -> Truncation;

    fn hamiltonian(&self, p: &ModelParams) -> Result<OperatorMatrix>;

    fn derivative(&self, p: &ModelParams, which: Param) -> Result<OperatorMatrix>;

    /// Photon number of mode `a` on the working (possibly projected) basis.
    fn photon_number(&self) -> OperatorMatrix {
        let t = self.truncation();
        let n: Vec<f64> = t.sector_indices().into_iter().map(|i| t.photons_a(i) as f64).collect();
        OperatorMatrix::diagonal(&n, t.tag())
    }

    /// Weight of `psi` on the two highest Fock levels of any mode; a cheap truncation check.
    fn fock_tail_weight(&self, psi: &StateVector) -> f64 {
        let t = self.truncation();
        t.sector_indices()
            .into_iter()
            .zip(psi.iter())
            .filter(|(i, _)| near_cutoff(&t, *i))
            .map(|(_, c): (usize, &C64)| c.norm_sqr())
            .sum()
    }
}

fn near_cutoff(t: &Truncation, index: usize) -> bool {
    use crate::basis::Basis;
    match t.basis {
        Basis::Product { n_max, .. } | Basis::OneMode { n_max } => t.photons_a(index) + 1 >= n_max,
        Basis::TwoMode { n_a, n_b } => {
            let na = index / (n_b + 1);
            let nb = index % (n_b + 1);
            na + 1 >= n_a || nb + 1 >= n_b
        }
    }
}
