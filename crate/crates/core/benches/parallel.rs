//! Monte-Carlo batch execution: rayon-backed `par::map` against the
//! sequential reference path. With `--no-default-features` both arms run
//! sequentially, which isolates the feature overhead itself.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;

use lagtrack::delay::DelayModel;
use lagtrack::experiments::{derive_seed, fit_initial_model, SALT_RUN};
use lagtrack::gp::GpModel;
use lagtrack::kernel::KernelParams;
use lagtrack::par;
use lagtrack::plant::{ControllerGains, PlantSpec, Reference};
use lagtrack::sim::{run, LoopConfig};

fn batch_setup() -> (LoopConfig, GpModel, DelayModel) {
    let plant = PlantSpec::sine_sigmoid();
    let reference = Reference::sinusoid(2, 1, 1.0, 1.0).unwrap();
    let gains = ControllerGains::scalar(&[-2.0, -2.0], DMatrix::identity(2, 2)).unwrap();
    let mut cfg = LoopConfig::new(plant.clone(), reference, gains);
    cfg.horizon = 2.0;
    let model = fit_initial_model(KernelParams::new(1.0, 0.2).unwrap(), &plant, 50, &[0.01], 7, 0)
        .unwrap();
    let delay = DelayModel::Constant { delta_bar: 0.05 };
    (cfg, model, delay)
}

fn bench_mc_batch(c: &mut Criterion) {
    let (cfg, model, delay) = batch_setup();
    let reps = 8;
    let mut group = c.benchmark_group("mc_batch");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            let maxes = par::map(reps, |rep| {
                run(&cfg, &model, &delay, None, derive_seed(7, rep as u64, SALT_RUN))
                    .unwrap()
                    .max_error()
            });
            black_box(maxes)
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            let maxes = par::map_seq(reps, |rep| {
                run(&cfg, &model, &delay, None, derive_seed(7, rep as u64, SALT_RUN))
                    .unwrap()
                    .max_error()
            });
            black_box(maxes)
        })
    });
    group.finish();
}

fn bench_grid_eval(c: &mut Criterion) {
    let (_, model, _) = batch_setup();
    let grid = lagtrack::grid::TensorGrid::from_step(model.domain(), 0.1).unwrap();
    let mut group = c.benchmark_group("posterior_grid");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            black_box(par::map(grid.len(), |i| {
                model.posterior(&grid.point(i)).unwrap().1[0]
            }))
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            black_box(par::map_seq(grid.len(), |i| {
                model.posterior(&grid.point(i)).unwrap().1[0]
            }))
        })
    });
    group.finish();
}

criterion_group!(benches, bench_mc_batch, bench_grid_eval);
criterion_main!(benches);
