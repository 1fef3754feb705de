//! Complex operator matrices with dense or CSR storage.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::basis::BasisTag;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type StateVector = DVector<C64>;

/// Matrices larger than this are stored sparse.
pub const SPARSE_THRESHOLD: usize = 2000;

/// Entrywise Hermiticity tolerance for Hamiltonians and observables.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix<C64>),
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    storage: Storage,
    tag: BasisTag,
}

impl OperatorMatrix {
    /// Assembles from `(row, col, value)` entries; duplicates are summed.
    /// Storage is dense up to [`SPARSE_THRESHOLD`].
    pub fn from_triplets<I>(dim: usize, entries: I, tag: BasisTag) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        if dim <= SPARSE_THRESHOLD {
            let mut m = DMatrix::zeros(dim, dim);
            for (i, j, v) in entries {
                m[(i, j)] += v;
            }
            OperatorMatrix { storage: Storage::Dense(m), tag }
        } else {
            let mut coo = CooMatrix::new(dim, dim);
            for (i, j, v) in entries {
                if v != C64::new(0.0, 0.0) {
                    coo.push(i, j, v);
                }
            }
            OperatorMatrix { storage: Storage::Sparse(CsrMatrix::from(&coo)), tag }
        }
    }

    pub fn from_dense(m: DMatrix<C64>, tag: BasisTag) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator matrices are square");
        OperatorMatrix { storage: Storage::Dense(m), tag }
    }

    pub fn identity(dim: usize, tag: BasisTag) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))), tag)
    }

    pub fn diagonal(values: &[f64], tag: BasisTag) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, C64::new(v, 0.0))), tag)
    }

    pub fn dim(&self) -> usize {
        match &self.storage {
            Storage::Dense(m) => m.nrows(),
            Storage::Sparse(m) => m.nrows(),
        }
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(m) => m.get_entry(i, j).map(|e| e.into_value()).unwrap_or_default(),
        }
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let v = m[(i, j)];
                        if v != C64::new(0.0, 0.0) {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
            Storage::Sparse(m) => m.triplet_iter().map(|(i, j, v)| (i, j, *v)).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => {
                let mut d = DMatrix::zeros(m.nrows(), m.ncols());
                for (i, j, v) in m.triplet_iter() {
                    d[(i, j)] = *v;
                }
                d
            }
        }
    }

    /// `M v`.
    pub fn apply(&self, v: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim());
        self.apply_into(v, &mut out);
        out
    }

    pub fn apply_into(&self, v: &StateVector, out: &mut StateVector) {
        match &self.storage {
            Storage::Dense(m) => m.mul_to(v, out),
            Storage::Sparse(m) => {
                let offsets = m.row_offsets();
                let cols = m.col_indices();
                let vals = m.values();
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in offsets[i]..offsets[i + 1] {
                        acc += vals[k] * v[cols[k]];
                    }
                    *o = acc;
                }
            }
        }
    }

    /// `<u| M |v>`.
    pub fn matrix_element(&self, u: &StateVector, v: &StateVector) -> C64 {
        u.dotc(&self.apply(v))
    }

    pub fn expectation(&self, v: &StateVector) -> f64 {
        self.matrix_element(v, v).re
    }

    /// `max |M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut worst: f64 = 0.0;
                for i in 0..n {
                    for j in i..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            }
            Storage::Sparse(_) => self
                .triplets()
                .into_iter()
                .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
                .fold(0.0, f64::max),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < HERMITIAN_TOL
    }

    /// Infinity norm (max absolute row sum); an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.dim()];
        for (i, _, v) in self.triplets() {
            rows[i] += v.norm();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let mut worst: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - other.get(i, j)).norm());
        }
        for (i, j, v) in other.triplets() {
            worst = worst.max((v - self.get(i, j)).norm());
        }
        worst
    }

    /// `max |[M, D]|` for a diagonal `D = diag(d)`: `[M, D]_ij = M_ij (d_j - d_i)`.
    pub fn commutator_with_diagonal(&self, d: &[f64]) -> f64 {
        self.triplets()
            .into_iter()
            .map(|(i, j, v)| (v * (d[j] - d[i])).norm())
            .fold(0.0, f64::max)
    }

    /// `M - s I`, keeping the storage kind.
    pub fn shifted(&self, s: f64) -> OperatorMatrix {
        let n = self.dim();
        let entries = self.triplets().into_iter().chain((0..n).map(|i| (i, i, C64::new(-s, 0.0))));
        Self::from_triplets(n, entries, self.tag)
    }

    pub fn scaled(&self, s: C64) -> OperatorMatrix {
        match &self.storage {
            Storage::Dense(m) => OperatorMatrix { storage: Storage::Dense(m * s), tag: self.tag },
            Storage::Sparse(_) => Self::from_triplets(self.dim(), self.triplets().into_iter().map(|(i, j, v)| (i, j, v * s)), self.tag),
        }
    }

    /// `A + B` on the same basis.
    pub fn add(&self, other: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.dim(), other.dim());
        Self::from_triplets(self.dim(), self.triplets().into_iter().chain(other.triplets()), self.tag)
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Restricts to the given (ascending) full-basis indices after checking that no entry
    /// couples kept and dropped states. `labels[i]` is the parity of full-basis state `i`.
    pub(crate) fn restrict(&self, labels: &[i8], keep: &[usize], tag: BasisTag, tol: f64) -> Result<OperatorMatrix> {
        let mut position = vec![usize::MAX; self.dim()];
        for (k, &i) in keep.iter().enumerate() {
            position[i] = k;
        }
        let mut defect: f64 = 0.0;
        let mut entries = Vec::new();
        for (i, j, v) in self.triplets() {
            if labels[i] != labels[j] {
                defect = defect.max(2.0 * v.norm());
                continue;
            }
            if position[i] != usize::MAX && position[j] != usize::MAX {
                entries.push((position[i], position[j], v));
            }
        }
        if defect > tol {
            return Err(Error::ParityBreaking { defect });
        }
        Ok(Self::from_triplets(keep.len(), entries, tag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dense_and_sparse_agree() {
        let entries = |n: usize| (0..n).flat_map(move |i| [(i, i, c(i as f64, 0.0)), (i, (i + 1) % n, c(0.5, 0.25)), ((i + 1) % n, i, c(0.5, -0.25))]);
        let n = SPARSE_THRESHOLD + 5;
        let sparse = OperatorMatrix::from_triplets(n, entries(n), BasisTag::FullProduct);
        assert!(sparse.is_sparse());
        let dense = OperatorMatrix::from_dense(sparse.to_dense(), BasisTag::FullProduct);
        let v = StateVector::from_fn(n, |i, _| c((i as f64).sin(), (i as f64 * 0.3).cos()));
        let diff = (sparse.apply(&v) - dense.apply(&v)).norm();
        assert!(diff < 1e-9, "{diff}");
        assert!(sparse.hermiticity_defect() < 1e-15);
        assert_eq!(sparse.get(3, 4), c(0.5, 0.25));
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let m = OperatorMatrix::from_triplets(2, [(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0))], BasisTag::FullProduct);
        assert_eq!(m.get(0, 1), c(3.0, 0.0));
    }

    #[test]
    fn restrict_rejects_cross_sector_entries() {
        let m = OperatorMatrix::from_triplets(2, [(0, 1, c(1.0, 0.0)), (1, 0, c(1.0, 0.0))], BasisTag::FullProduct);
        let err = m.restrict(&[1, -1], &[0], BasisTag::ParityProjected(crate::basis::Sector::Positive), 1e-12);
        assert!(matches!(err, Err(Error::ParityBreaking { .. })));
    }
}
