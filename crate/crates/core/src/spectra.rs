//! Eigensolvers, gauge fixing and the Bogoliubov normal-mode oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::BasisTag;
use crate::effective::QuadraticBosonForm;
use crate::error::{Error, Result};
use crate::operator::{OperatorMatrix, StateVector, C64};

/// Largest dimension accepted by [`dense_eigensystem`].
pub const DENSE_LIMIT: usize = 4000;

/// Relative (to `||H||`) spacing below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Ties in [`gauge_fix`] are resolved towards the lowest index within this margin.
pub const GAUGE_TIE_TOL: f64 = 1e-13;

const ITERATIVE_SEED: u64 = 0x5eed_d1c4e;

/// Ascending eigenpairs; `states` holds one gauge-fixed eigenvector per column.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub energies: Vec<f64>,
    pub states: DMatrix<C64>,
    pub tag: BasisTag,
    /// Infinity-norm bound on `||H||` used for residual and degeneracy scales.
    pub norm: f64,
    /// `true` when every eigenpair of `H` is present.
    pub complete: bool,
}

impl Eigensystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    pub fn state(&self, k: usize) -> StateVector {
        self.states.column(k).into_owned()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> StateVector {
        self.state(0)
    }

    /// Spacing to the nearest retained neighbour of level `k`.
    pub fn spacing(&self, k: usize) -> f64 {
        let e = &self.energies;
        let below = if k > 0 { e[k] - e[k - 1] } else { f64::INFINITY };
        let above = if k + 1 < e.len() { e[k + 1] - e[k] } else { f64::INFINITY };
        below.min(above)
    }

    pub fn is_degenerate(&self, k: usize) -> bool {
        self.spacing(k) < DEGENERACY_TOL * self.norm.max(1.0)
    }

    /// First excitation energy, when at least two levels are known.
    pub fn gap(&self) -> Option<f64> {
        (self.energies.len() > 1).then(|| self.energies[1] - self.energies[0])
    }

    pub fn require_nondegenerate(&self, k: usize) -> Result<()> {
        if self.is_degenerate(k) {
            return Err(Error::Degenerate { index: k, gap: self.spacing(k) });
        }
        Ok(())
    }

    /// `max_k ||H v_k - E_k v_k||`.
    pub fn max_residual(&self, h: &OperatorMatrix) -> f64 {
        (0..self.len())
            .map(|k| {
                let v = self.state(k);
                (h.apply(&v) - &v * C64::new(self.energies[k], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Rotates the global phase so the largest-magnitude component is real and positive.
/// Components within [`GAUGE_TIE_TOL`] of the maximum tie, and the lowest index wins.
pub fn gauge_fix(v: &StateVector) -> StateVector {
    gauge_fix_at(v, gauge_anchor(v))
}

/// Index that [`gauge_fix`] makes real and positive.
pub fn gauge_anchor(v: &StateVector) -> usize {
    let largest = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    v.iter().position(|c| c.norm() >= largest - GAUGE_TIE_TOL).unwrap_or(0)
}

/// Makes component `index` real and non-negative.
pub fn gauge_fix_at(v: &StateVector, index: usize) -> StateVector {
    let c = v[index];
    let r = c.norm();
    if r == 0.0 {
        return v.clone();
    }
    v * (c.conj() / r)
}

/// Full spectrum via Hermitian eigendecomposition; limited to [`DENSE_LIMIT`].
pub fn dense_eigensystem(h: &OperatorMatrix) -> Result<Eigensystem> {
    dense_eigensystem_with_limit(h, DENSE_LIMIT)
}

pub fn dense_eigensystem_with_limit(h: &OperatorMatrix, limit: usize) -> Result<Eigensystem> {
    let n = h.dim();
    if n > limit {
        return Err(Error::DenseLimit { dim: n, limit });
    }
    let defect = h.hermiticity_defect();
    if defect > crate::operator::HERMITIAN_TOL * h.norm_inf().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut states = DMatrix::zeros(n, n);
    let mut energies = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        energies.push(eig.eigenvalues[i]);
        let v = eig.eigenvectors.column(i).into_owned();
        let v = &v / C64::new(v.norm(), 0.0);
        states.set_column(k, &gauge_fix(&v));
    }
    Ok(Eigensystem { energies, states, tag: h.tag(), norm: h.norm_inf(), complete: true })
}

/// Controls for [`lowest_k_with`].
#[derive(Debug, Clone, Copy)]
pub struct IterativeOptions {
    /// Convergence when `||H v - E v|| < tol * ||H||` for each wanted pair.
    pub tol: f64,
    /// Krylov basis size before a restart; raised to at least `2k + 20`.
    pub basis_size: usize,
    pub max_restarts: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions { tol: 1e-12, basis_size: 60, max_restarts: 2000 }
    }
}

/// The `k` lowest eigenpairs by thick-restart Lanczos with full reorthogonalization.
pub fn lowest_k(h: &OperatorMatrix, k: usize) -> Result<Eigensystem> {
    lowest_k_with(h, k, IterativeOptions::default())
}

pub fn lowest_k_with(h: &OperatorMatrix, k: usize, opts: IterativeOptions) -> Result<Eigensystem> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidParams(format!("cannot extract {k} eigenpairs from dimension {n}")));
    }
    let norm = h.norm_inf().max(f64::MIN_POSITIVE);
    let m = opts.basis_size.max(2 * k + 20).min(n);
    if m == n || n <= 64 {
        let mut full = dense_eigensystem_with_limit(h, usize::MAX)?;
        full.energies.truncate(k);
        full.states = full.states.columns(0, k).into_owned();
        full.complete = k == n;
        return Ok(full);
    }
    let keep = (k + (m - k) / 3).min(m - 2).max(k);
    let mut rng = ChaCha8Rng::seed_from_u64(ITERATIVE_SEED);
    let mut random_vector = |n: usize| StateVector::from_fn(n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));

    let mut basis: Vec<StateVector> = Vec::with_capacity(m);
    let mut images: Vec<StateVector> = Vec::with_capacity(m);
    let mut t = DMatrix::<C64>::zeros(m, m);
    let mut next = random_vector(n);
    let mut worst = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        while basis.len() < m {
            let mut v = next.clone();
            let mut norm_v = orthogonalize(&mut v, &basis);
            if norm_v < 1e-10 * next.norm().max(f64::MIN_POSITIVE) {
                v = random_vector(n);
                norm_v = orthogonalize(&mut v, &basis);
            }
            v /= C64::new(norm_v, 0.0);
            let hv = h.apply(&v);
            let col = basis.len();
            for (i, b) in basis.iter().enumerate() {
                let x = b.dotc(&hv);
                t[(i, col)] = x;
                t[(col, i)] = x.conj();
            }
            t[(col, col)] = C64::new(v.dotc(&hv).re, 0.0);
            next = hv.clone();
            basis.push(v);
            images.push(hv);
        }

        let ritz = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| ritz.eigenvalues[a].total_cmp(&ritz.eigenvalues[b]));

        let combine = |set: &[StateVector], y: &DVector<C64>| {
            let mut out = StateVector::zeros(n);
            for (s, c) in set.iter().zip(y.iter()) {
                out.axpy(*c, s, C64::new(1.0, 0.0));
            }
            out
        };

        let mut first_unconverged = None;
        worst = 0.0;
        let mut new_basis = Vec::with_capacity(keep);
        let mut new_images = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for (slot, &i) in order.iter().take(keep).enumerate() {
            let y = ritz.eigenvectors.column(i).into_owned();
            let x = combine(&basis, &y);
            let hx = combine(&images, &y);
            let r = &hx - &x * C64::new(ritz.eigenvalues[i], 0.0);
            let rn = r.norm();
            if slot < k {
                worst = worst.max(rn);
                if rn >= opts.tol * norm && first_unconverged.is_none() {
                    first_unconverged = Some(slot);
                }
            }
            residuals.push(r);
            new_basis.push(x);
            new_images.push(hx);
        }

        match first_unconverged {
            None => {
                let mut states = DMatrix::zeros(n, k);
                let mut energies = Vec::with_capacity(k);
                for slot in 0..k {
                    let x = &new_basis[slot];
                    let x = x / C64::new(x.norm(), 0.0);
                    energies.push(ritz.eigenvalues[order[slot]]);
                    states.set_column(slot, &gauge_fix(&x));
                }
                return Ok(Eigensystem { energies, states, tag: h.tag(), norm, complete: k == n });
            }
            Some(slot) => {
                // thick restart: keep the lowest Ritz pairs, continue from a residual
                t.fill(C64::new(0.0, 0.0));
                for (s, &i) in order.iter().take(keep).enumerate() {
                    t[(s, s)] = C64::new(ritz.eigenvalues[i], 0.0);
                }
                next = residuals.swap_remove(slot);
                basis = new_basis;
                images = new_images;
            }
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_restarts, residual: worst })
}

/// Two passes of classical Gram–Schmidt; returns the remaining norm.
fn orthogonalize(v: &mut StateVector, basis: &[StateVector]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = b.dotc(v);
            v.axpy(-c, b, C64::new(1.0, 0.0));
        }
    }
    v.norm()
}

/// Normal modes of a quadratic boson form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    /// Squared excitation energies, ascending. Negative entries mark unstable directions.
    pub squared: Vec<f64>,
    /// `false` when the quadrature matrix is not positive semidefinite or a squared
    /// frequency is complex; nothing is clamped in that case.
    pub stable: bool,
    /// Ground energy `const + (sum eps - tr A)/2`; only for stable forms.
    pub zero_point: Option<f64>,
}

impl NormalModes {
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        if !self.stable {
            return Err(Error::Unstable);
        }
        Ok(self.squared.iter().map(|e| e.max(0.0).sqrt()).collect())
    }

    pub fn lowest(&self) -> Result<f64> {
        Ok(self.frequencies()?[0])
    }
}

/// Symplectic normal-mode frequencies. One mode: `eps^2 = A^2 - |B|^2` with `A` the number
/// coefficient and `B = 2 a_dag_sq`. Two modes: `eps` from the spectrum of `J M`, where
/// `M` is the real quadrature matrix of the form and `J` the symplectic unit.
pub fn bogoliubov_modes(q: &QuadraticBosonForm) -> Result<NormalModes> {
    let scale = [q.n_a, q.n_b, q.a_dag_b.norm(), q.a_dag_b_dag.norm(), q.a_dag_sq.norm()]
        .into_iter()
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * scale * scale;
    let m = quadrature_matrix(q);
    let min_m = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut stable = min_m >= -1e-12 * scale;

    let squared = if q.modes == 1 {
        vec![q.n_a * q.n_a - 4.0 * q.a_dag_sq.norm_sqr()]
    } else {
        let modes = m.nrows() / 2;
        let mut jm = DMatrix::<f64>::zeros(2 * modes, 2 * modes);
        for r in 0..modes {
            for c in 0..2 * modes {
                jm[(r, c)] = m[(r + modes, c)];
                jm[(r + modes, c)] = -m[(r, c)];
            }
        }
        let mut sq: Vec<(f64, f64)> = jm
            .complex_eigenvalues()
            .iter()
            .map(|mu| {
                let s = -(mu * mu);
                (s.re, s.im)
            })
            .collect();
        sq.sort_by(|a, b| a.0.total_cmp(&b.0));
        if sq.iter().any(|s| s.1.abs() > 1e-9 * scale * scale) {
            stable = false;
        }
        sq.iter().step_by(2).map(|s| s.0).collect()
    };
    if squared.iter().any(|&s| s < -tol) {
        stable = false;
    }
    let zero_point = stable.then(|| {
        let trace = q.n_a + if q.modes == 2 { q.n_b } else { 0.0 };
        let sum: f64 = squared.iter().map(|s| s.max(0.0).sqrt()).sum();
        q.constant + 0.5 * (sum - trace)
    });
    Ok(NormalModes { squared, stable, zero_point })
}

/// `M` with `H = xi^T M xi / 2 + const`, `xi = (x_1.., p_1..)`, `a_k = (x_k + i p_k)/sqrt 2`.
fn quadrature_matrix(q: &QuadraticBosonForm) -> DMatrix<f64> {
    let modes = usize::from(q.modes);
    let dim = 2 * modes;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // row k of `u` expresses a_k in the quadratures
    let u: Vec<DVector<C64>> = (0..modes)
        .map(|k| {
            let mut row = DVector::zeros(dim);
            row[k] = C64::new(s, 0.0);
            row[k + modes] = C64::new(0.0, s);
            row
        })
        .collect();
    let mut k = DMatrix::<C64>::zeros(dim, dim);
    let mut add = |coef: C64, left: &DVector<C64>, right: &DVector<C64>| {
        k += left * right.transpose() * coef;
    };
    let ad = |i: usize| u[i].map(|c| c.conj());
    add(C64::new(q.n_a, 0.0), &ad(0), &u[0]);
    add(q.a_dag_sq, &ad(0), &ad(0));
    add(q.a_sq(), &u[0], &u[0]);
    if modes == 2 {
        add(C64::new(q.n_b, 0.0), &ad(1), &u[1]);
        add(q.a_dag_b, &ad(0), &u[1]);
        add(q.b_dag_a(), &ad(1), &u[0]);
        add(q.a_dag_b_dag, &ad(0), &ad(1));
        add(q.ab(), &u[0], &u[1]);
    }
    let sym = (&k + k.transpose()) * C64::new(0.5, 0.0);
    sym.map(|c| c.re) * 2.0
}
