//! Sequential vs data-parallel execution of the two trajectory-level hot
//! spots: running a campaign and accumulating the Gram matrix.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gks_rom::rom::svd::gram_matrix;
use gks_rom::{run_campaign, Execution, Grid, Strategy, TrainingPlan};
use nalgebra::DMatrix;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn campaign(c: &mut Criterion) {
    let plan = TrainingPlan::new(Strategy::MultiTrajectory { gamma: 5.0, trajectories: 8 })
        .with_total_snapshots(160)
        .with_seed(1);
    let grid = Grid::new(64, 22.0).unwrap();
    let mut group = c.benchmark_group("campaign");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_campaign(&plan, grid, exec).unwrap())
        });
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let data = DMatrix::from_fn(256, 8192, |i, j| ((i * 31 + j * 17) % 101) as f64 / 101.0 - 0.5);
    let mut group = c.benchmark_group("gram");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| gram_matrix(&data, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, campaign, gram);
criterion_main!(benches);
