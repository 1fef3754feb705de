use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use dicke_qgt::spectra::{bogoliubov_modes, dense_eigensystem, lowest_k};
use dicke_qgt::{EffectiveModel, ModelParams, ParametricHamiltonian, SpinLength};
use dicke_qgt_bench::full_point;

fn dense_vs_lanczos(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_pair");
    group.sample_size(10);
    for n_max in [20, 40] {
        let (model, p) = full_point(0.8, 5.0, n_max);
        let h = model.hamiltonian(&p).unwrap();
        group.bench_with_input(BenchmarkId::new("dense", h.dim()), &h, |b, h| b.iter(|| dense_eigensystem(black_box(h)).unwrap()));
        group.bench_with_input(BenchmarkId::new("lanczos", h.dim()), &h, |b, h| b.iter(|| lowest_k(black_box(h), 2).unwrap()));
    }
    let (model, p) = full_point(0.99, 10.0, 100);
    let h = model.hamiltonian(&p).unwrap();
    group.bench_with_input(BenchmarkId::new("lanczos", h.dim()), &h, |b, h| b.iter(|| lowest_k(black_box(h), 2).unwrap()));
    group.finish();
}

fn normal_modes(c: &mut Criterion) {
    let p = ModelParams::from_dimensionless(0.9, 2.0, 1.0, 1.0, 0.0, SpinLength::new(10.0).unwrap()).unwrap();
    let form = EffectiveModel::CsNormal.form(&p).unwrap();
    c.bench_function("bogoliubov_two_mode", |b| b.iter(|| bogoliubov_modes(black_box(&form)).unwrap()));
}

criterion_group!(benches, dense_vs_lanczos, normal_modes);
criterion_main!(benches);
