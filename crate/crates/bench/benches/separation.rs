use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use infmax_bench::{network, scenarios};
use infmax_core::benders::{self, default_mem_limit_ids, separate, EnumerationMaster, ReachCache, SolveOptions};
use infmax_core::{presolve, DiffusionModel, PresolveLevel};

fn separation(c: &mut Criterion) {
    let mut group = c.benchmark_group("separate");
    let set = scenarios(&network(2_000, 6.0, 7), DiffusionModel::Icm, 100, 8);
    let reduced = presolve(&set, &PresolveLevel::Ina.options(DiffusionModel::Icm)).expect("presolve succeeds");
    let mut y = vec![0.0; reduced.node_count];
    for j in (0..y.len()).step_by(97) {
        y[j] = 1.0;
    }
    let phi_bar = vec![f64::INFINITY; reduced.scenario_count()];
    for (name, limit) in [("cached", default_mem_limit_ids(reduced.scenario_count())), ("uncached", 0)] {
        let cache = ReachCache::build(&reduced, limit);
        group.bench_with_input(BenchmarkId::from_parameter(name), &cache, |b, cache| {
            b.iter(|| separate(black_box(&y), &phi_bar, &reduced, cache))
        });
    }
    group.finish();
}

fn small_solve(c: &mut Criterion) {
    let set = scenarios(&network(30, 3.0, 9), DiffusionModel::Icm, 50, 10);
    let reduced = presolve(&set, &PresolveLevel::Ina.options(DiffusionModel::Icm)).expect("presolve succeeds");
    let options = SolveOptions::for_scenarios(reduced.scenario_count());
    c.bench_function("solve_30_nodes_k3", |b| {
        b.iter(|| benders::solve(black_box(&reduced), 3, &mut EnumerationMaster::default(), &options).expect("solves"))
    });
}

criterion_group!(benches, separation, small_solve);
criterion_main!(benches);
