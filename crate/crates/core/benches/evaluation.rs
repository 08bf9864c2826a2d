//! Plug-in estimate on a grid, sequential vs parallel, and windowed vs brute
//! force. Thread count follows `RAYON_NUM_THREADS`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vkde::clipping::ClippingSpec;
use vkde::densities::DensityModel;
use vkde::estimators::{BandwidthPair, Evaluator};
use vkde::exec::Exec;
use vkde::kernel::Kernel;
use vkde::sample::{Grid, Sample};

fn plugin_grid(c: &mut Criterion) {
    let kernel = Kernel::tricube();
    let clipping = ClippingSpec::quintic(0.3).unwrap();
    let grid = Grid::linspace(-6.0, 6.0, 1024);
    let mut group = c.benchmark_group("plugin_vkde");
    group.sample_size(10);
    for n in [2_000, 20_000] {
        let sample = Sample::from_1d(DensityModel::StudentT4.sample(1, n)).unwrap();
        let bw = BandwidthPair::default_rates(n, 1);
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            let ev = Evaluator {
                exec,
                ..Evaluator::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| ev.plugin_vkde(black_box(&sample), &kernel, bw, &clipping, &grid).unwrap())
            });
        }
    }
    group.finish();
}

fn windowing(c: &mut Criterion) {
    let kernel = Kernel::tricube();
    let clipping = ClippingSpec::quintic(0.3).unwrap();
    let grid = Grid::linspace(-6.0, 6.0, 256);
    let n = 5_000;
    let sample = Sample::from_1d(DensityModel::Normal.sample(2, n)).unwrap();
    let bw = BandwidthPair::default_rates(n, 1);
    let mut group = c.benchmark_group("window");
    group.sample_size(10);
    for (name, ev) in [("windowed", Evaluator::sequential()), ("brute", Evaluator::brute_force())] {
        let ev = Evaluator {
            exec: Exec::Sequential,
            ..ev
        };
        group.bench_function(name, |b| {
            b.iter(|| ev.plugin_vkde(black_box(&sample), &kernel, bw, &clipping, &grid).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, plugin_grid, windowing);
criterion_main!(benches);
