use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use stochdim_bench::{churn_market, example};
use stochdim_core::io::write_paths;
use stochdim_core::{
    build_piecewise_deflator, dissect_path, integrate_dissected, integrate_schedule, refine_resets,
    simulate_scenario, simulate_strict_local_mart_scenario, NamedRule, Strategy,
};

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    let spec = churn_market(1000, 1);
    g.throughput(Throughput::Elements(1000));
    g.bench_function("gbm_churn_1000_steps", |b| b.iter(|| simulate_scenario(black_box(&spec), 3).unwrap()));
    let ex = example(1000, 1);
    g.bench_function("inverse_bessel_1000_steps", |b| {
        b.iter(|| simulate_strict_local_mart_scenario(black_box(&ex), 3).unwrap())
    });
    g.finish();
}

fn integration(c: &mut Criterion) {
    let spec = churn_market(1000, 1);
    let sc = simulate_scenario(&spec, 1).unwrap();
    let path = &sc.path;
    let h = Strategy::named(NamedRule::EqualWeight).schedule(path).unwrap();
    let mut g = c.benchmark_group("integrate");
    g.throughput(Throughput::Elements(1000));
    g.bench_function("schedule_equal_weight", |b| {
        b.iter(|| Strategy::named(NamedRule::EqualWeight).schedule(black_box(path)).unwrap())
    });
    g.bench_function("direct", |b| b.iter(|| integrate_schedule(black_box(&h), path).unwrap()));
    let resets = refine_resets(&path.minimal_resets(), &[0.25, 0.5, 0.75], path).unwrap();
    g.bench_function("dissected_4_extra_resets", |b| {
        b.iter(|| integrate_dissected(black_box(&h), path, &resets).unwrap())
    });
    g.bench_function("dissect_path", |b| b.iter(|| dissect_path(black_box(path), &resets).unwrap()));
    g.finish();
}

fn deflator_and_io(c: &mut Criterion) {
    let mut spec = churn_market(300, 1);
    spec.assets[0].model = stochdim_core::PieceModel::Gbm { mu: 0.3, sigma: 0.2 };
    let sc = simulate_scenario(&spec, 2).unwrap();
    c.bench_function("deflator_300_steps", |b| b.iter(|| build_piecewise_deflator(black_box(&sc)).unwrap()));
    c.bench_function("write_path_csv_300_steps", |b| {
        b.iter_batched(Vec::new, |buf| write_paths(buf, [(2, &sc.path)]).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, simulation, integration, deflator_and_io);
criterion_main!(benches);
