//! Sequential against rayon-parallel execution of the replicate-level
//! workloads. Without the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use swarmcalc::estimation::{feedback_timeseries, DriftWindow};
use swarmcalc::scenario::{dc_batch, merge_windows, RecognitionNoise, ScenarioConfig, WindowSpec};
use swarmcalc::urn::{
    ensemble_histogram, estimate_switching_time, final_states, InitialState, SimConfig,
};
use swarmcalc::{DriftSpec, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn urn(c: &mut Criterion) {
    let cfg = SimConfig::new(
        DriftSpec::sine(0.75, 64).unwrap(),
        2000,
        1,
        InitialState::SymmetricPair,
        2000,
    )
    .unwrap();
    let phis: Vec<f64> = (0..=4).map(|k| k as f64 * 0.25).collect();
    let spec = DriftSpec::sine(0.75, 16).unwrap();

    let mut group = c.benchmark_group("urn");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("final_states", name), &exec, |b, &exec| {
            b.iter(|| final_states(black_box(&cfg), exec).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("ensemble_histogram", name),
            &exec,
            |b, &exec| b.iter(|| ensemble_histogram(black_box(&phis), &cfg, exec).unwrap()),
        );
        group.bench_with_input(
            BenchmarkId::new("switching_time", name),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    estimate_switching_time(black_box(&spec), 0.25, 0.75, 1_000_000, 500, 2, exec)
                        .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn scenario(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        steps: 4000,
        noise: RecognitionNoise::Misread,
        primed_memory: 4,
        windows: WindowSpec::Doubling { first: 16 },
        trajectory_stride: 4000,
        ..ScenarioConfig::default()
    };
    let grid: Vec<f64> = (0..64)
        .map(|i| 0.05 + 0.9 * (i % 19) as f64 / 18.0)
        .collect();
    let windows: Vec<DriftWindow> =
        merge_windows(&dc_batch(&cfg, &grid, Execution::Parallel).unwrap())
            .iter()
            .map(|w| DriftWindow::from_log(w.end as f64, &w.log))
            .collect();

    let mut group = c.benchmark_group("scenario");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("dc_batch", name), &exec, |b, &exec| {
            b.iter(|| dc_batch(black_box(&cfg), &grid, exec).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("feedback_timeseries", name),
            &exec,
            |b, &exec| b.iter(|| feedback_timeseries(black_box(&windows), exec).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, urn, scenario);
criterion_main!(benches);
