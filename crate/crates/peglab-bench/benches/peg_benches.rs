//! Benchmarks for the hot paths: closed-form classification, the brute-force
//! agent oracle, and the causality regression on a year of daily data.

use criterion::{criterion_group, criterion_main, Criterion};

use peglab_core::{
    enumerate_equilibria, estimate_zone, granger, zone_diagram, Design, RunOptions,
    ScenarioConfig,
};

fn pair(design: Design) -> (peglab_core::StablecoinSpec, peglab_core::Economy) {
    ScenarioConfig::reference(design).build().expect("reference builds")
}

fn bench_zone_diagram(c: &mut Criterion) {
    let (spec, econ) = pair(Design::Crypto);
    c.bench_function("zone_diagram_crypto_101", |b| {
        b.iter(|| zone_diagram(&spec, &econ, 101).unwrap())
    });
}

fn bench_estimate_zone(c: &mut Criterion) {
    let (spec, econ) = pair(Design::Crypto);
    c.bench_function("estimate_zone_crypto_20_agents", |b| {
        b.iter(|| estimate_zone(&spec, &econ, 1.5, 20, RunOptions::default()).unwrap())
    });
}

fn bench_enumerate_over(c: &mut Criterion) {
    // The over design splits the population into debtors and plain users, so
    // its profile space is the largest of the five designs.
    let (spec, econ) = pair(Design::Over);
    c.bench_function("enumerate_over_20_agents", |b| {
        b.iter(|| enumerate_equilibria(&spec, &econ, 1.5, 20).unwrap())
    });
}

fn bench_granger_year(c: &mut Criterion) {
    // A year of daily observations with a genuine one-day lead; the wiggle
    // comes from incommensurate sinusoids, so the fit is never perfect.
    let n = 365;
    let mut x = vec![0.0_f64; n];
    let mut y = vec![0.0_f64; n];
    for t in 0..n {
        let tt = t as f64;
        x[t] = 1.0 + 0.01 * (0.37 * tt).sin() + 0.003 * (1.13 * tt).cos();
        y[t] = 1.0
            + 0.5 * (if t > 0 { x[t - 1] - 1.0 } else { 0.0 })
            + 0.004 * (0.71 * tt).sin();
    }
    c.bench_function("granger_365_days_lag_2", |b| b.iter(|| granger(&x, &y, 2).unwrap()));
}

criterion_group!(
    benches,
    bench_zone_diagram,
    bench_estimate_zone,
    bench_enumerate_over,
    bench_granger_year
);
criterion_main!(benches);
