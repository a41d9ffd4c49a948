use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use narrow_escape::asymptotics::FluxExpansion;
use narrow_escape::grid::solve_grid;
use narrow_escape::montecarlo::simulate_mfpt;
use narrow_escape::quadrature::{integrate, QuadratureSpec};
use narrow_escape::series::compute_series;
use narrow_escape::{Geometry, McConfig, Start};

fn quadrature(c: &mut Criterion) {
    let spec = QuadratureSpec::with_tolerance(1e-12);
    c.bench_function("quadrature/log_singular", |b| {
        b.iter(|| integrate(|t: f64| (t.abs() + 1e-12).ln() * t.cos(), black_box(-1.0), 1.0, &spec).unwrap())
    });
}

fn series(c: &mut Criterion) {
    let mut g = c.benchmark_group("series");
    for n in [128usize, 512] {
        g.bench_with_input(BenchmarkId::new("compute", n), &n, |b, &n| {
            b.iter(|| compute_series(black_box(0.05), n).unwrap())
        });
    }
    let s = compute_series(0.05, 512).unwrap();
    g.bench_function("eval_v", |b| b.iter(|| s.eval_v(black_box(0.7), black_box(1.3)).unwrap()));
    g.finish();
}

fn flux(c: &mut Criterion) {
    let e = FluxExpansion::new(0.01, 64).unwrap();
    c.bench_function("flux/eval_201", |b| {
        b.iter(|| (0..201).map(|k| e.eval(0.999 * (k as f64 - 100.0) / 100.0).unwrap()).sum::<f64>())
    });
}

fn monte_carlo(c: &mut Criterion) {
    let geom = Geometry::unit(0.2).unwrap();
    let cfg = McConfig::new(1e-3, 500, 7, Start::Center);
    let mut g = c.benchmark_group("montecarlo");
    g.sample_size(10);
    g.bench_function("center_500_paths", |b| b.iter(|| simulate_mfpt(&geom, &cfg).unwrap()));
    g.finish();
}

fn grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("grid");
    g.sample_size(10);
    for (n_r, n_theta) in [(32usize, 128usize), (128, 512)] {
        g.bench_with_input(BenchmarkId::new("solve", format!("{n_r}x{n_theta}")), &(n_r, n_theta), |b, &(nr, nt)| {
            b.iter(|| solve_grid(black_box(0.2), nr, nt).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, quadrature, series, flux, monte_carlo, grid);
criterion_main!(benches);
