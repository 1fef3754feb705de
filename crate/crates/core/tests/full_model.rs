use std::time::Instant;

use nalgebra::DMatrix;

use dicke_qgt::adm::build_full_hamiltonian;
use dicke_qgt::qgeom::{ground_state_qgt, QgtOptions};
use dicke_qgt::spectra::dense_eigensystem;
use dicke_qgt::sweep::{convergence_scan, gamma_comparison, peak_locate_rows, run_sweep};
use dicke_qgt::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Dense ADM Hamiltonian written out directly from ladder and spin matrix elements,
/// photon-major, no parity projection.
fn brute_force(p: &ModelParams, n_max: usize) -> DMatrix<C64> {
    let j = p.j();
    let ns = (2.0 * j).round() as usize + 1;
    let dim = (n_max + 1) * ns;
    let idx = |n: usize, k: usize| n * ns + k;
    let m_of = |k: usize| k as f64 - j;
    let scale = 1.0 / (2.0 * j).sqrt();
    let e = C64::from_polar(1.0, p.theta);
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..=n_max {
        for k in 0..ns {
            h[(idx(n, k), idx(n, k))] = c(p.omega * n as f64 + p.omega_q * m_of(k));
            if n < n_max {
                let a_dag = ((n + 1) as f64).sqrt();
                if k > 0 {
                    let jm = (j * (j + 1.0) - m_of(k) * (m_of(k) - 1.0)).sqrt();
                    let v = e * (p.lambda1 * scale * a_dag * jm);
                    h[(idx(n + 1, k - 1), idx(n, k))] += v;
                    h[(idx(n, k), idx(n + 1, k - 1))] += v.conj();
                }
                if k + 1 < ns {
                    let jp = (j * (j + 1.0) - m_of(k) * (m_of(k) + 1.0)).sqrt();
                    let v = e * (p.lambda2 * scale * a_dag * jp);
                    h[(idx(n + 1, k + 1), idx(n, k))] += v;
                    h[(idx(n, k), idx(n + 1, k + 1))] += v.conj();
                }
            }
        }
    }
    h
}

fn lowest(h: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    (energies, vectors)
}

#[test]
fn ground_energy_matches_brute_force_dense_oracle() {
    let p = ModelParams::from_dimensionless(0.5, 2.0, 1.0, 1.0, 0.0, SpinLength::new(10.0).unwrap()).unwrap();
    let (oracle, _) = lowest(brute_force(&p, 40));
    let t = Truncation::full_model(40, p.spin, Sector::Positive);
    let es = dense_eigensystem(&build_full_hamiltonian(&p, &t).unwrap()).unwrap();
    assert!((es.ground_energy() - oracle[0]).abs() < 1e-10);
    let full = dense_eigensystem(&build_full_hamiltonian(&p, &t.full_basis()).unwrap()).unwrap();
    let worst = full.energies.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
}

#[test]
fn brute_force_oracle_agrees_off_axis() {
    let p = ModelParams::new(0.8, 1.3, 0.4, 0.15, 0.9, SpinLength::new(2.5).unwrap()).unwrap();
    let t = Truncation::full_model(12, p.spin, Sector::Full);
    let lib = build_full_hamiltonian(&p, &t).unwrap().to_dense();
    assert!((lib - brute_force(&p, 12)).camax() < 1e-14);
}

#[test]
fn symmetric_coupling_qfi_matches_conventional_dicke() {
    let (j, n_max, g) = (3.0, 30, 0.9);
    let mut spec = SweepSpec::new(ModelKind::Full, Method::SumOverStates, SweepParam::Gamma, Grid::Values(vec![]), BasePoint { j, ..BasePoint::default() });
    spec.truncation = TruncationSpec::with_n_max(n_max);
    let table = gamma_comparison(&spec, g, &[0.5, 1.0, 2.0]).unwrap();
    let row = table.rows.iter().find(|r| (r.gamma - 1.0).abs() < 1e-12).unwrap();

    // H = w a^+a + W Jz + (2 lambda/sqrt(2j)) (a + a^+) Jx on the full product basis.
    let lambda = 0.5 * g;
    let ns = 2 * j as usize + 1;
    let dim = (n_max + 1) * ns;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    let mut number = DMatrix::<C64>::zeros(dim, dim);
    for n in 0..=n_max {
        for k in 0..ns {
            let m = k as f64 - j;
            h[(n * ns + k, n * ns + k)] = c(n as f64 + m);
            number[(n * ns + k, n * ns + k)] = c(n as f64);
            if n < n_max && k + 1 < ns {
                let jx = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
                let v = c(2.0 * lambda / (2.0 * j).sqrt() * ((n + 1) as f64).sqrt() * jx);
                for (a, b) in [((n + 1) * ns + k + 1, n * ns + k), ((n + 1) * ns + k, n * ns + k + 1)] {
                    h[(a, b)] += v;
                    h[(b, a)] += v;
                }
            }
        }
    }
    let (e, v) = lowest(h);
    let psi0 = v.column(0);
    let mut qfi = 0.0;
    for k in 1..dim {
        let amp = (v.column(k).adjoint() * &number * psi0)[(0, 0)];
        qfi += 4.0 * amp.norm_sqr() / (e[k] - e[0]).powi(2);
    }
    assert!((row.i_omega_omega - qfi).abs() / qfi < 1e-9, "{} vs {qfi}", row.i_omega_omega);
}

#[test]
fn linear_solve_reaches_working_cutoff() {
    let p = ModelParams::from_dimensionless(0.99, 2.0, 1.0, 1.0, 0.0, SpinLength::new(10.0).unwrap()).unwrap();
    let t = Truncation::full_model(100, p.spin, Sector::Full);
    assert_eq!(t.dim(), 2121);
    let start = Instant::now();
    let geo = ground_state_qgt(&FullModel::new(t).unwrap(), &p, &[Param::Omega, Param::Theta], QgtOptions::new(Method::LinearSolve)).unwrap();
    assert!(start.elapsed().as_secs() < 60);
    assert!(geo.tail_weight < 1e-8);
    let proj = ground_state_qgt(&FullModel::new(t.with_sector(Sector::Positive)).unwrap(), &p, &[Param::Omega, Param::Theta], QgtOptions::new(Method::LinearSolve))
        .unwrap();
    assert!((geo.qgt.q[(0, 0)] - proj.qgt.q[(0, 0)]).norm() / proj.qgt.q[(0, 0)].norm() < 1e-8);
}

fn full_peak(j: f64, n_max: usize) -> f64 {
    let base = BasePoint { j, ..BasePoint::default() };
    let mut spec = SweepSpec::new(ModelKind::Full, Method::LinearSolve, SweepParam::G, Grid::linear(0.8, 1.2, 21), base);
    spec.truncation = TruncationSpec::with_n_max(n_max);
    spec.workers = 4;
    let rows = run_sweep(&spec).unwrap();
    assert!(rows.iter().all(|r| r.converged), "{:?}", rows.iter().filter(|r| !r.converged).map(|r| (r.g, &r.note)).collect::<Vec<_>>());
    peak_locate_rows(&rows).unwrap()
}

#[test]
fn finite_size_peak_moves_toward_critical_point() {
    let g10 = full_peak(10.0, 80);
    let g20 = full_peak(20.0, 120);
    assert!(g10 > 1.0 && g20 > 1.0, "{g10} {g20}");
    assert!(g20 < g10, "{g10} {g20}");
}

#[test]
fn effective_peak_approaches_critical_point_under_refinement() {
    let mut prev = f64::INFINITY;
    for count in [6, 12, 24] {
        let mut spec = SweepSpec::new(ModelKind::AutoCs, Method::LinearSolve, SweepParam::G, Grid::linear(0.9, 1.1, count), BasePoint::default());
        spec.truncation = TruncationSpec { n_max: Some(100), n_b: Some(100), sector: Sector::Positive };
        let rows = run_sweep(&spec).unwrap();
        let dist = (peak_locate_rows(&rows).unwrap() - 1.0).abs();
        assert!(dist < prev, "{count}: {dist} vs {prev}");
        prev = dist;
    }
    assert!(prev < 0.01);
}

#[test]
fn cutoff_scans() {
    let base = BasePoint { j: 10.0, ..BasePoint::default() };
    let spec = SweepSpec::new(ModelKind::Full, Method::LinearSolve, SweepParam::G, Grid::Values(vec![0.5]), base);
    let cutoffs = [6, 8, 10, 12, 14, 16, 20, 30, 40, 60, 80, 100];
    let easy = convergence_scan(&spec, &cutoffs[..8]).unwrap();
    assert!(easy.all_converged());
    let easy_needed = easy.points[0].required_n_max.unwrap();
    assert!(easy_needed <= 30);

    let spec = SweepSpec { grid: Grid::Values(vec![0.99]), ..spec };
    let hard = convergence_scan(&spec, &cutoffs).unwrap();
    assert!(hard.all_converged());
    let needed = hard.points[0].required_n_max.unwrap();
    assert!(needed > easy_needed && needed <= 100, "{easy_needed} {needed}");
}
