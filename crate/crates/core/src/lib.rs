//! Ground-state quantum geometry of the anisotropic Dicke model.
//!
//! The full model lives in [`adm`], its quadratic limits in [`effective`], eigensolvers in
//! [`spectra`], the geometric tensor in [`qgeom`], squeezed-state closed forms in
//! [`analytic`] and parameter sweeps in [`sweep`]. Shared types are re-exported here.

pub mod adm;
pub mod analytic;
pub mod basis;
pub mod dual;
pub mod effective;
pub mod error;
pub mod model;
pub mod operator;
pub mod params;
pub mod qgeom;
pub mod spectra;
pub mod sweep;

pub use adm::FullModel;
pub use analytic::{Branch, SqueezeParams};
pub use basis::{Basis, BasisTag, Sector, Truncation};
pub use effective::{DisplacementSolution, EffectiveHamiltonian, EffectiveModel, QuadraticBosonForm, RescaledParams};
pub use error::{Error, Result};
pub use model::ParametricHamiltonian;
pub use operator::{OperatorMatrix, StateVector, C64};
pub use params::{derived_couplings, DerivedCouplings, ModelParams, Param, SpinLength};
pub use qgeom::{Convention, GroundStateGeometry, Method, QFIValue, QGTComponents};
pub use spectra::{Eigensystem, NormalModes};
pub use sweep::{BasePoint, Grid, ModelKind, Spacing, SweepParam, SweepRow, SweepSpec, TruncationSpec};
