//! Shared fixtures for the benchmarks.

use dicke_qgt::{FullModel, ModelParams, Sector, SpinLength, Truncation};

/// Full model at `(g, gamma = 2, eta = 1, theta = 0.3)` on the positive sector.
pub fn full_point(g: f64, j: f64, n_max: usize) -> (FullModel, ModelParams) {
    let spin = SpinLength::new(j).expect("valid spin");
    let p = ModelParams::from_dimensionless(g, 2.0, 1.0, 1.0, 0.3, spin).expect("valid point");
    let model = FullModel::new(Truncation::full_model(n_max, spin, Sector::Positive)).expect("valid truncation");
    (model, p)
}
