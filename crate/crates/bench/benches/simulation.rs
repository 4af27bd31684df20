use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use marsim_core::mobility::{self, GroupMap};
use marsim_core::{monte_carlo, run_episode, ScenarioConfig, TopologySnapshot};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn snapshot_build(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let groups = GroupMap::round_robin(cfg.n_nodes, cfg.mobility.group_size);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let nodes = mobility::initial_kinematics(cfg.n_nodes, &cfg.mobility, &groups, &mut rng);
    let operational = vec![true; cfg.n_nodes];
    c.bench_function("snapshot_build_25", |b| {
        b.iter(|| {
            TopologySnapshot::build(
                black_box(&nodes),
                &operational,
                &cfg.radio,
                &cfg.failure,
                cfg.mobility.delta_t,
                None,
                0,
                &mut rng,
            )
        })
    });
}

fn mobility_step(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let groups = GroupMap::round_robin(cfg.n_nodes, cfg.mobility.group_size);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut nodes = mobility::initial_kinematics(cfg.n_nodes, &cfg.mobility, &groups, &mut rng);
    c.bench_function("srmm_advance_25", |b| {
        b.iter(|| mobility::advance_all(black_box(&mut nodes), &groups, &cfg.mobility, &mut rng))
    });
}

fn episode(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let mut seed = 0;
    c.bench_function("episode_default", |b| {
        b.iter(|| {
            seed += 1;
            run_episode(black_box(&cfg), seed).unwrap()
        })
    });
}

fn monte_carlo_small(c: &mut Criterion) {
    let mut cfg = ScenarioConfig::default();
    cfg.q_runs = 20;
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(10);
    group.bench_function("q20_default", |b| b.iter(|| monte_carlo(black_box(&cfg), 1).unwrap()));
    group.finish();
}

criterion_group!(benches, snapshot_build, mobility_step, episode, monte_carlo_small);
criterion_main!(benches);
