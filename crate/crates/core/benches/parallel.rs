//! Sequential vs parallel execution of independent runs.

use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use specopt::experiment::config::ExperimentConfig;
use specopt::experiment::runner::{denoise_trial, run_experiment};
use specopt::par::{self, Execution};
use specopt::tasks::SmoothSignalSpec;
use specopt::{FilterSpec, ParameterGraph, SpectralBasis};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn denoise(c: &mut Criterion) {
    let mut group = c.benchmark_group("denoise_trials");
    let signal = SmoothSignalSpec {
        cutoff: 2,
        coef_scale: 1.0,
        noise_sd: 0.5,
    };
    let filter = FilterSpec::Heat { t: 1.0 };
    for n in [32usize, 96] {
        let graph = ParameterGraph::random_connected(n, 0.1, (0.5, 1.5), 7).unwrap();
        let basis = SpectralBasis::of_graph(&graph).unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &basis, |b, basis| {
                b.iter(|| {
                    black_box(par::map_range(exec, 256, |s| {
                        denoise_trial(basis, &signal, 8, &filter, 0.5, s as u64).unwrap()
                    }))
                })
            });
        }
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let mut group = c.benchmark_group("train_runs");
    group.sample_size(10);
    for n in [32usize, 64] {
        let cfg = ExperimentConfig::from_json(&format!(
            r#"{{ "graph": {{ "kind": "random", "n": {n}, "edge_prob": 0.1, "seed": 7 }},
                 "task": {{ "kind": "node_regression", "d": 4,
                           "signal": {{ "cutoff": 2, "coef_scale": 4.0, "noise_sd": 0.3 }},
                           "observations_per_node": 8 }},
                 "optimizer": {{ "eta": 0.5, "lambda": 0.01, "filter": {{ "kind": "heat", "t": 0.3 }},
                                "max_steps": 100 }},
                 "seeds": [0, 1, 2, 3, 4, 5, 6, 7] }}"#
        ))
        .unwrap();
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &cfg, |b, cfg| {
                b.iter(|| black_box(run_experiment(cfg, Path::new("."), exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, denoise, training);
criterion_main!(benches);
