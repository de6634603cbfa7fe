use std::hint::black_box;

use cgrpo_core::clustering::{dbscan, kmeans};
use cgrpo_core::envs::{rollout, EnvSpec};
use cgrpo_core::numerics::{mlp_backward, mlp_forward, GaussianPolicy};
use cgrpo_core::rng::{stream, Purpose};
use cgrpo_core::{GrpoConfig, Trainer};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::Rng;

fn points(n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = stream(7, Purpose::Probes, &[]);
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn mlp(c: &mut Criterion) {
    let policy = GaussianPolicy::init(4, 2, &[64, 64], -0.5, &mut stream(0, Purpose::Init, &[])).unwrap();
    let net = policy.mean_net();
    let x = [0.1, -0.2, 0.3, 0.0];
    c.bench_function("mlp_forward_4x64x64x2", |b| b.iter(|| mlp_forward(net, black_box(&x)).unwrap()));
    let (_, cache) = mlp_forward(net, &x).unwrap();
    c.bench_function("mlp_backward_4x64x64x2", |b| {
        b.iter(|| mlp_backward(net, black_box(&cache), &[1.0, -1.0]).unwrap())
    });
}

fn episodes(c: &mut Criterion) {
    for spec in [EnvSpec::point_mass(), EnvSpec::pendulum()] {
        let policy = GaussianPolicy::init(spec.state_dim, spec.action_dim, &[64, 64], -0.5, &mut stream(0, Purpose::Init, &[]))
            .unwrap();
        let mut rng = stream(1, Purpose::Rollout, &[]);
        c.bench_function(&format!("rollout_{}", spec.kind.name()), |b| {
            b.iter(|| rollout(&policy, &spec, 0, &mut rng).unwrap())
        });
    }
}

fn clustering(c: &mut Criterion) {
    let feats = points(8, 4);
    c.bench_function("kmeans_8x4_k2", |b| b.iter(|| kmeans(black_box(&feats), 2, 3, 100).unwrap()));
    let states = points(2048, 4);
    c.bench_function("dbscan_2048x4", |b| b.iter(|| dbscan(black_box(&states), 0.5, 5)));
}

fn iteration(c: &mut Criterion) {
    let cfg = GrpoConfig {
        batch_timesteps: 1024,
        ..GrpoConfig::default()
    };
    let mut group = c.benchmark_group("train_iteration");
    group.sample_size(10);
    group.bench_function("point_mass_batch1024", |b| {
        b.iter_batched(
            || Trainer::new(cfg.clone(), EnvSpec::point_mass()).unwrap(),
            |mut t| t.train_iteration().unwrap(),
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, mlp, episodes, clustering, iteration);
criterion_main!(benches);
