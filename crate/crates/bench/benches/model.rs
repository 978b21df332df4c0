//! Hot-path benchmarks: the gain quadratures dominate every sweep, with
//! conversion, counting statistics, and a whole scenario as context.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use eshg_bench::reference_point;
use eshg_core::{
    classical_shg, eshg_from_sv, fit, fock_oracle, gain_integrals_raw, matched_classical,
    run_scenario, simulate_counts, sv_summary, DetectionChain, ExperimentConfig, FitModel,
    Grid, Scenario, ShgCoupling,
};

fn source_model(c: &mut Criterion) {
    let (crystal, pump, window, n_pump) = reference_point();
    c.bench_function("gain_integrals_raw g=4", |b| {
        b.iter(|| gain_integrals_raw(black_box(4.0), Grid::default()).unwrap())
    });
    c.bench_function("sv_summary 120uJ", |b| {
        b.iter(|| {
            sv_summary(&crystal, &pump, &window, black_box(n_pump), Grid::default()).unwrap()
        })
    });
}

fn conversion(c: &mut Criterion) {
    let (crystal, pump, window, n_pump) = reference_point();
    let coupling = ShgCoupling::new(crystal);
    let aperture = eshg_core::aperture_fraction(&DetectionChain::default());
    c.bench_function("eshg_from_sv 120uJ", |b| {
        b.iter(|| {
            eshg_from_sv(
                &crystal,
                &pump,
                &window,
                black_box(n_pump),
                0.7,
                &coupling,
                aperture,
                Grid::default(),
            )
            .unwrap()
        })
    });
    let summary = sv_summary(&crystal, &pump, &window, n_pump, Grid::default()).unwrap();
    c.bench_function("classical_shg matched", |b| {
        b.iter(|| classical_shg(&matched_classical(&summary, &crystal), &coupling).unwrap())
    });
}

fn statistics(c: &mut Criterion) {
    c.bench_function("fock_oracle g=1 cutoff=60", |b| {
        b.iter(|| fock_oracle(black_box(1.0), 60).unwrap())
    });
    let chain = DetectionChain::default();
    c.bench_function("simulate_counts", |b| {
        b.iter(|| simulate_counts(black_box(0.05), &chain, 7).unwrap())
    });
    let xs: Vec<f64> = (1..=200).map(|i| i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x + 0.04 * x * x).collect();
    let sigmas: Vec<f64> = ys.iter().map(|y| 0.01 * y).collect();
    c.bench_function("fit linear+quadratic 200pts", |b| {
        b.iter(|| {
            fit(black_box(&xs), &ys, Some(&sigmas), FitModel::LinearPlusQuadratic).unwrap()
        })
    });
}

fn scenario(c: &mut Criterion) {
    let cfg = ExperimentConfig::for_scenario(Scenario::Fig2a);
    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    group.bench_function("fig2a 25pts", |b| b.iter(|| run_scenario(&cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, source_model, conversion, statistics, scenario);
criterion_main!(benches);
