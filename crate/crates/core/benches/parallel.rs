//! Rayon against the sequential fallback on the two workloads the harness
//! spreads over threads: independent environment rollouts and a sweep of
//! short training runs.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use forcelearn::controllers::ActionSpaceModel;
use forcelearn::harness::{sweep, RunConfig, SweepSpec};
use forcelearn::par::{self, Parallelism};
use forcelearn::tasks::{EnvConfig, PegInsertionEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Parallelism); 2] = [
    ("rayon", Parallelism::Auto),
    ("sequential", Parallelism::Sequential),
];

fn rollout(seed: u64, steps: usize) -> f64 {
    let mut cfg = EnvConfig::default();
    cfg.control.model = ActionSpaceModel::P14;
    let mut env = PegInsertionEnv::new(cfg, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    env.reset();
    let mut total = 0.0;
    for _ in 0..steps {
        let a: Vec<f64> = (0..env.action_dim())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let r = env.step(&a).unwrap();
        total += r.reward;
        if r.done || r.truncated {
            env.reset();
        }
    }
    total
}

fn rollouts(c: &mut Criterion) {
    let mut group = c.benchmark_group("rollouts_8x200");
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(par::map_range(mode, 8, |i| rollout(i as u64, 200))))
        });
    }
    group.finish();
}

fn training_sweep(c: &mut Criterion) {
    let mut base = RunConfig {
        total_steps: 400,
        ..Default::default()
    };
    base.sac.warmup_steps = 100;
    base.sac.batch_size = 32;
    base.train.checkpoint_every = 0;
    let spec = SweepSpec {
        models: vec![ActionSpaceModel::P14, ActionSpaceModel::A13pd],
        seeds: vec![0, 1],
        penalize: vec![true],
    };
    let mut group = c.benchmark_group("sweep_4x400");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let dir = tempfile::tempdir().unwrap();
                black_box(sweep(&base, &spec, dir.path(), mode).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, rollouts, training_sweep);
criterion_main!(benches);
