//! Hot kernels on a one-thread pool versus the default pool. Built without
//! the `parallel` feature both variants run the sequential fallback.

use apfb::apcore::{el_residual, energy};
use apfb::gammalimit::{recovery_field, rescaled_energy, RecoveryProfile, SetGeometry};
use apfb::minimize::{solve, sweep, Problem, SolverConfig};
use apfb::{make_params, Grid, ScalarField};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

fn pools() -> Vec<(String, ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("one_thread".into(), one), (format!("pool_{}", all.current_num_threads()), all)]
}

fn half_plane(h: f64) -> ScalarField {
    let p = make_params(1.0).unwrap();
    ScalarField::from_fn(Grid::covering(&[-1.0, -1.0], &[1.0, 1.0], h).unwrap(), |x| p.c0 * x[1].max(0.0).powf(p.alpha))
}

fn field_kernels(c: &mut Criterion) {
    let p = make_params(1.0).unwrap();
    let u = half_plane(1.0 / 256.0);
    let mut g = c.benchmark_group("field_513x513");
    g.sample_size(20);
    for (threads, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("energy", &threads), &u, |b, u| b.iter(|| pool.install(|| energy(&p, u, None).unwrap().total)));
        g.bench_with_input(BenchmarkId::new("el_residual", &threads), &u, |b, u| b.iter(|| pool.install(|| el_residual(&p, u))));
    }
    g.finish();
}

fn solver_kernels(c: &mut Criterion) {
    let p = make_params(1.0).unwrap();
    let grid = Grid::covering(&[-1.0, -1.0], &[1.0, 1.0], 1.0 / 128.0).unwrap();
    let prob = Problem::with_boundary_data(p, grid, |x| p.c0 * x[1].max(0.0).powf(p.alpha)).unwrap();
    let start = half_plane(1.0 / 128.0);
    let mut g = c.benchmark_group("minimize_257x257");
    g.sample_size(10);
    for (threads, pool) in pools() {
        g.bench_function(BenchmarkId::new("sweep", &threads), |b| b.iter(|| pool.install(|| sweep(&prob, &start).1)));
        g.bench_function(BenchmarkId::new("solve", &threads), |b| b.iter(|| pool.install(|| solve(&prob, &SolverConfig::default()).unwrap().1.sweeps_used)));
    }
    g.finish();
}

fn gamma_kernels(c: &mut Criterion) {
    let p = make_params(1.98).unwrap();
    let grid = Grid::covering(&[0.0, 0.0], &[1.0, 1.0], 1.0 / 512.0).unwrap();
    let disk = SetGeometry::disk([0.5, 0.5], 0.25);
    let mut g = c.benchmark_group("recovery_513x513");
    g.sample_size(20);
    for (threads, pool) in pools() {
        g.bench_function(BenchmarkId::new("build_and_energy", &threads), |b| {
            b.iter(|| {
                pool.install(|| {
                    let u = recovery_field(&p, &disk, &RecoveryProfile::new(0.05), &grid, None).unwrap();
                    rescaled_energy(&p, &u).unwrap()
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, field_kernels, solver_kernels, gamma_kernels);
criterion_main!(benches);
