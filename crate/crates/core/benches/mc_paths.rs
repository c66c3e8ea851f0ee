//! Benchmarks the Monte Carlo and solver hot paths. The crate compiles the
//! data-parallel implementation by default; run
//!
//!   cargo bench -p jbb-core
//!   cargo bench -p jbb-core --no-default-features
//!
//! to compare the rayon and sequential executions of the same workloads.
//! Group names carry the active mode so criterion keeps the baselines apart.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jbb_core::model::{db_to_linear, OperatingPoint, PathLossProfile, Precoder, Scheme, SystemConfig};
use jbb_core::montecarlo::{measure_b_terms, measure_o_rate};
use jbb_core::solver::{log_ratio_grid, optimize_epsilon, trace_b_curve};

fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

fn reference_cfg() -> SystemConfig {
    SystemConfig::new(100, 1, 7, 500, 10, 10, db_to_linear(-3.0)).unwrap()
}

fn reference_point() -> OperatingPoint {
    OperatingPoint {
        rho_b: db_to_linear(-4.0),
        rho_o: db_to_linear(7.0),
        scheme: Scheme::JbbPrime,
    }
}

fn bench_b_terms(c: &mut Criterion) {
    let cfg = reference_cfg();
    let profile = PathLossProfile::new(vec![1.0], 1.0).unwrap();
    let op = reference_point();
    let mut group = c.benchmark_group(format!("measure_b_terms/{}", mode()));
    group.sample_size(10);
    for &n in &[2_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| measure_b_terms(&cfg, &profile, op, Precoder::Zf, n, 7).unwrap());
        });
    }
    group.finish();
}

fn bench_o_rate(c: &mut Criterion) {
    let cfg = reference_cfg();
    let profile = PathLossProfile::new(vec![1.0], 1.0).unwrap();
    let op = reference_point();
    let mut group = c.benchmark_group(format!("measure_o_rate/{}", mode()));
    group.sample_size(10);
    for &n in &[5_000usize, 20_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| measure_o_rate(&cfg, &profile, 1.0, op, Precoder::Zf, n, 7).unwrap());
        });
    }
    group.finish();
}

fn bench_solver(c: &mut Criterion) {
    let cfg = reference_cfg();
    let profile = PathLossProfile::new(vec![1.0], 1.0).unwrap();
    let gamma = vec![jbb_core::estimation::gamma_k(1.0, cfg.rho_u, cfg.tau_pu)];
    let grid = log_ratio_grid(-10.0, 20.0, 31);
    let mut group = c.benchmark_group(format!("solver/{}", mode()));
    group.sample_size(10);
    group.bench_function("trace_b_curve_31", |b| {
        b.iter(|| trace_b_curve(&cfg, &profile, &gamma, Precoder::Zf, 2.0, &grid));
    });
    let point = OperatingPoint {
        rho_b: db_to_linear(-2.1),
        rho_o: db_to_linear(10.3),
        scheme: Scheme::JbbPrime,
    };
    group.bench_function("optimize_epsilon", |b| {
        b.iter(|| optimize_epsilon(point, &cfg, &profile, &gamma, Precoder::Zf));
    });
    group.finish();
}

criterion_group!(benches, bench_b_terms, bench_o_rate, bench_solver);
criterion_main!(benches);
