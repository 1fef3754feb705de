//! The anisotropic Dicke Hamiltonian on a truncated `|n> (x) |j, m>` basis.
//!
//! ```text
//! H = omega a^+a + Omega J_z
//!   + lambda1/sqrt(2j) (e^{i theta} a^+ J_- + h.c.)
//!   + lambda2/sqrt(2j) (e^{i theta} a^+ J_+ + h.c.)
//! ```
//!
//! Parity `exp{i pi [a^+a + J_z + j]}` is conserved exactly, also after Fock truncation,
//! so every builder can return a single parity block directly.

use nalgebra::DMatrix;

use crate::basis::{Basis, BasisTag, Sector, Truncation};
use crate::error::{Error, Result};
use crate::model::ParametricHamiltonian;
use crate::operator::{OperatorMatrix, C64, HERMITIAN_TOL};
use crate::params::{ModelParams, Param, SpinLength};

/// Default guard on the full-basis dimension.
pub const DEFAULT_MAX_DIM: usize = 400_000;

/// Truncated ladder operators `(a, a^+, a^+a)` on `|0>..|n_max>` (boson factor only).
///
/// `[a, a^+] = I` except at the corner `(n_max, n_max)`, where it equals `-n_max`.
pub fn build_boson_ops(t: &Truncation) -> Result<(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)> {
    t.validate()?;
    let n = t.n_max() + 1;
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let number = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| C64::new(k as f64, 0.0)));
    Ok((a, a_dag, number))
}

/// `(J_+, J_-, J_z)` in the `|j, m>` basis ordered `m = -j, ..., j`.
pub fn build_spin_ops(spin: SpinLength) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let d = spin.dim();
    let j = spin.value();
    let mut jp = DMatrix::zeros(d, d);
    let mut jz = DMatrix::zeros(d, d);
    for k in 0..d {
        let m = k as f64 - j;
        jz[(k, k)] = C64::new(m, 0.0);
        if k + 1 < d {
            jp[(k + 1, k)] = C64::new(raise_amplitude(j, m), 0.0);
        }
    }
    let jm = jp.adjoint();
    (jp, jm, jz)
}

/// `<j, m+1| J_+ |j, m>`.
fn raise_amplitude(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Linear-combination coefficients shared by the Hamiltonian and its derivatives:
/// `number a^+a + jz J_z + [rotating a^+J_- + counter a^+J_+] / sqrt(2j) + h.c.`.
#[derive(Debug, Clone, Copy, Default)]
struct Coefficients {
    number: f64,
    jz: f64,
    rotating: C64,
    counter: C64,
}

fn product_parts(t: &Truncation) -> Result<(usize, SpinLength)> {
    match t.basis {
        Basis::Product { n_max, spin } => Ok((n_max, spin)),
        _ => Err(Error::InvalidTruncation("the full model needs a boson (x) spin product basis".into())),
    }
}

fn assemble(t: &Truncation, c: Coefficients, max_dim: usize) -> Result<OperatorMatrix> {
    t.validate()?;
    let (n_max, spin) = product_parts(t)?;
    let full = t.full_dim();
    if full > max_dim {
        return Err(Error::DimensionOverflow { dim: full, max: max_dim });
    }
    let d = spin.dim();
    let j = spin.value();
    let norm = 1.0 / (2.0 * j).sqrt();
    let idx = |n: usize, k: usize| n * d + k;
    let mut entries: Vec<(usize, usize, C64)> = Vec::with_capacity(3 * full);
    for n in 0..=n_max {
        for k in 0..d {
            let m = k as f64 - j;
            let diag = c.number * n as f64 + c.jz * m;
            if diag != 0.0 {
                entries.push((idx(n, k), idx(n, k), C64::new(diag, 0.0)));
            }
            if n == n_max {
                continue;
            }
            let up = ((n + 1) as f64).sqrt() * norm;
            // a^+ J_- : |n, m> -> |n+1, m-1>
            if k > 0 && c.rotating != C64::default() {
                let amp = c.rotating * up * raise_amplitude(j, m - 1.0);
                entries.push((idx(n + 1, k - 1), idx(n, k), amp));
                entries.push((idx(n, k), idx(n + 1, k - 1), amp.conj()));
            }
            // a^+ J_+ : |n, m> -> |n+1, m+1>
            if k + 1 < d && c.counter != C64::default() {
                let amp = c.counter * up * raise_amplitude(j, m);
                entries.push((idx(n + 1, k + 1), idx(n, k), amp));
                entries.push((idx(n, k), idx(n + 1, k + 1), amp.conj()));
            }
        }
    }
    let full_op = OperatorMatrix::from_triplets(full, entries, BasisTag::FullProduct);
    match t.sector {
        Sector::Full => Ok(full_op),
        sector => Ok(project_parity(&full_op, t, sector)?.0),
    }
}

/// The anisotropic Dicke Hamiltonian, projected onto `t.sector`.
pub fn build_full_hamiltonian(p: &ModelParams, t: &Truncation) -> Result<OperatorMatrix> {
    build_full_hamiltonian_with_limit(p, t, DEFAULT_MAX_DIM)
}

pub fn build_full_hamiltonian_with_limit(p: &ModelParams, t: &Truncation, max_dim: usize) -> Result<OperatorMatrix> {
    p.validate()?;
    let phase = C64::from_polar(1.0, p.theta);
    let c = Coefficients { number: p.omega, jz: p.omega_q, rotating: phase * p.lambda1, counter: phase * p.lambda2 };
    assemble(t, c, max_dim)
}

/// Exact `dH/d(which)` on the same basis as [`build_full_hamiltonian`].
pub fn param_derivative(p: &ModelParams, t: &Truncation, which: Param) -> Result<OperatorMatrix> {
    let phase = C64::from_polar(1.0, p.theta);
    let i = C64::new(0.0, 1.0);
    let c = match which {
        Param::Omega => Coefficients { number: 1.0, ..Default::default() },
        Param::OmegaQ => Coefficients { jz: 1.0, ..Default::default() },
        Param::Lambda1 => Coefficients { rotating: phase, ..Default::default() },
        Param::Lambda2 => Coefficients { counter: phase, ..Default::default() },
        Param::Theta => Coefficients { rotating: i * phase * p.lambda1, counter: i * phase * p.lambda2, ..Default::default() },
    };
    assemble(t, c, DEFAULT_MAX_DIM)
}

/// Diagonal parity matrix on the full product basis.
pub fn parity_operator(t: &Truncation) -> OperatorMatrix {
    let labels: Vec<f64> = (0..t.full_dim()).map(|i| f64::from(t.parity_of(i))).collect();
    OperatorMatrix::diagonal(&labels, t.full_basis().tag())
}

/// Restricts a full-basis operator to one parity sector.
///
/// Returns the block and the full-basis index of every kept state. Fails if `m`
/// couples the two sectors by more than the Hermiticity tolerance.
pub fn project_parity(m: &OperatorMatrix, t: &Truncation, sector: Sector) -> Result<(OperatorMatrix, Vec<usize>)> {
    let t = t.with_sector(sector);
    if m.dim() != t.full_dim() {
        return Err(Error::InvalidTruncation(format!("operator dimension {} does not match basis {}", m.dim(), t.full_dim())));
    }
    let labels: Vec<i8> = (0..t.full_dim()).map(|i| t.parity_of(i)).collect();
    let keep = t.sector_indices();
    let block = m.restrict(&labels, &keep, t.tag(), HERMITIAN_TOL)?;
    Ok((block, keep))
}

/// The full model as a parametric family on a fixed truncation.
#[derive(Debug, Clone, Copy)]
pub struct FullModel {
    pub truncation: Truncation,
}

impl FullModel {
    pub fn new(truncation: Truncation) -> Result<Self> {
        product_parts(&truncation)?;
        truncation.validate()?;
        Ok(FullModel { truncation })
    }
}

impl ParametricHamiltonian for FullModel {
    fn truncation(&self) -> Truncation {
        self.truncation
    }

    fn hamiltonian(&self, p: &ModelParams) -> Result<OperatorMatrix> {
        build_full_hamiltonian(p, &self.truncation)
    }

    fn derivative(&self, p: &ModelParams, which: Param) -> Result<OperatorMatrix> {
        param_derivative(p, &self.truncation, which)
    }
}
