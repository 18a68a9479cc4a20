use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use drig_bench::{heavy, pairs};
use drig_core::analysis::{giant_fraction_bipartite, solve_giant, LimitLaws};
use drig_core::bcm::{enumerate_bcm, DegreeSequencePair};
use drig_core::dynamics::simulate;
use drig_core::local::{canonical_code, extract_ball, DEFAULT_BALL_CAP};
use drig_core::projection::project;
use drig_core::rng;
use drig_core::sampler::sample_stationary;
use drig_core::{GroupSizeLaw, WeightLaw};

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_stationary");
    g.sample_size(10);
    for n in [10_000, 100_000] {
        let m = pairs(n, 0.0);
        g.bench_with_input(BenchmarkId::new("pairs", n), &m, |b, m| {
            let mut r = rng::seeded(1);
            b.iter(|| sample_stationary(m, &mut r).unwrap())
        });
    }
    let m = heavy(100_000, 3.5, 0.0);
    g.bench_function("power_law_3.5/100000", |b| {
        let mut r = rng::seeded(2);
        b.iter(|| sample_stationary(&m, &mut r).unwrap())
    });
    g.finish();
}

fn dynamics(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    for n in [10_000, 100_000] {
        let m = pairs(n, 1.0);
        g.bench_with_input(BenchmarkId::new("pairs_t1", n), &m, |b, m| {
            let mut r = rng::seeded(3);
            b.iter(|| simulate(m, &mut r).unwrap())
        });
    }
    g.finish();
}

fn graphs(c: &mut Criterion) {
    let state = sample_stationary(&pairs(100_000, 0.0), &mut rng::seeded(4)).unwrap();
    let mut g = c.benchmark_group("graph");
    g.sample_size(20);
    g.bench_function("project/100000", |b| b.iter(|| project(black_box(&state)).unwrap()));
    g.bench_function("giant_union_find/100000", |b| b.iter(|| giant_fraction_bipartite(black_box(&state))));
    let graph = project(&state).unwrap();
    let balls: Vec<_> = (0..200).filter_map(|v| extract_ball(&graph, v, 2, DEFAULT_BALL_CAP).unwrap()).collect();
    g.bench_function("canonical_code/200_balls_r2", |b| {
        b.iter(|| balls.iter().map(|ball| canonical_code(ball.adjacency()).0.len()).sum::<usize>())
    });
    g.finish();
}

fn limits(c: &mut Criterion) {
    let laws = LimitLaws::new(&WeightLaw::two_point(0.5, 2.0, 0.3).unwrap(), &GroupSizeLaw::power_law(3.5).unwrap())
        .unwrap();
    c.bench_function("solve_giant/power_law", |b| b.iter(|| solve_giant(black_box(&laws)).unwrap()));
    let seq = DegreeSequencePair::new(vec![2, 2, 2, 2], vec![2, 2, 2, 2]).unwrap();
    c.bench_function("enumerate_bcm/h8", |b| b.iter(|| enumerate_bcm(black_box(&seq)).unwrap().len()));
}

criterion_group!(benches, sampling, dynamics, graphs, limits);
criterion_main!(benches);
