//! Ablation runs, sweeps and the denoising Monte Carlo.

use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use super::config::{DenoiseConfig, ExperimentConfig, GraphSpec, SweepAxis, TaskSpec, Variant};
use super::ExperimentError;
use crate::graph::ParameterGraph;
use crate::loss::LossBreakdown;
use crate::optimizer::{train_with_basis, TrainTrace};
use crate::par::{self, Execution};
use crate::spectral::{apply_filter, FilterSpec, ParameterMatrix, SpectralBasis};
use crate::tasks::{
    gen_smooth_signal, normal, rng_for, stream, NodeRegression, Objective, SmoothSignalSpec,
    TinyNet, ToyTask,
};

/// Reports the wrapped task's loss but a zero gradient, so only the
/// regularizer drives descent.
pub struct ZeroTaskGradient<'a, O: ?Sized>(pub &'a O);

impl<O: Objective + ?Sized> Objective for ZeroTaskGradient<'_, O> {
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn loss_and_grad(&self, theta: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let (n, d) = self.shape();
        (self.0.loss(theta), DMatrix::zeros(n, d))
    }
}

/// Result of one (variant, seed) training run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub variant: Variant,
    pub seed: u64,
    pub trace: TrainTrace,
    pub final_losses: LossBreakdown,
    pub steps_to_threshold: Option<usize>,
    pub duration: Duration,
    /// Training accuracy, for classification tasks.
    pub accuracy: Option<f64>,
    /// Expected loss on fresh data, for tasks with a known ground truth.
    pub expected_task_loss: Option<f64>,
    pub theta: ParameterMatrix,
}

/// Graph and basis shared by every run of one config, unless the graph is
/// rebuilt per run from task gradients.
pub struct Prepared {
    static_graph: Option<(ParameterGraph, SpectralBasis)>,
}

fn runtime(e: crate::Error) -> ExperimentError {
    ExperimentError::Runtime(e.to_string())
}

fn decompose(graph: &ParameterGraph) -> Result<SpectralBasis, ExperimentError> {
    SpectralBasis::of_graph(graph).map_err(runtime)
}

/// Validates the config and builds anything that does not depend on the seed.
pub fn prepare(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Prepared, ExperimentError> {
    let errors = cfg.violations(None);
    if !errors.is_empty() {
        return Err(ExperimentError::Config(errors));
    }
    if matches!(cfg.graph, GraphSpec::Similarity { .. }) {
        return Ok(Prepared { static_graph: None });
    }
    let graph = cfg.graph.build_static(base_dir)?;
    let errors = cfg.violations(Some(graph.n_nodes()));
    if !errors.is_empty() {
        return Err(ExperimentError::Config(errors));
    }
    let basis = decompose(&graph)?;
    Ok(Prepared {
        static_graph: Some((graph, basis)),
    })
}

/// Task and starting point for one seed.
pub fn build_task(
    spec: &TaskSpec,
    n: usize,
    basis: Option<&SpectralBasis>,
    seed: u64,
) -> Result<(ToyTask, ParameterMatrix), ExperimentError> {
    let config = |e: crate::Error| ExperimentError::config(format!("task: {e}"));
    match spec {
        TaskSpec::NodeRegression {
            d,
            signal,
            observations_per_node,
            sample_fraction,
        } => {
            let basis = basis.expect("node regression needs a static graph");
            let truth = gen_smooth_signal(basis, signal, *d, seed).map_err(config)?;
            let task = NodeRegression::generate(
                &truth,
                signal.noise_sd,
                *observations_per_node,
                *sample_fraction,
                seed,
            )
            .map_err(config)?;
            Ok((ToyTask::NodeRegression(task), ParameterMatrix::zeros(n, *d)))
        }
        TaskSpec::TinyNet {
            inputs,
            classes,
            samples,
            sample_fraction,
            dataset_seed,
            init_scale,
            ..
        } => {
            let net = TinyNet::generate(
                [*inputs, n, *classes],
                *samples,
                dataset_seed.unwrap_or(seed),
                *sample_fraction,
            )
            .map_err(config)?;
            let mut rng = rng_for(seed, stream::INIT);
            let theta0 =
                DMatrix::from_fn(n, inputs + classes, |_, _| init_scale * normal(&mut rng));
            let theta0 = ParameterMatrix::new(theta0).map_err(config)?;
            Ok((ToyTask::TinyNet(net), theta0))
        }
    }
}

fn hidden_width(cfg: &ExperimentConfig) -> usize {
    match cfg.task {
        TaskSpec::TinyNet {
            hidden: Some(h), ..
        } => h,
        _ => unreachable!("validated: similarity graphs need tiny_net with hidden set"),
    }
}

/// Trains one (variant, seed) pair.
pub fn run_one(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    variant: Variant,
    seed: u64,
) -> Result<RunReport, ExperimentError> {
    let start = Instant::now();
    let owned;
    let (graph, basis, task, theta0) = match &prepared.static_graph {
        Some((graph, basis)) => {
            let (task, theta0) = build_task(&cfg.task, graph.n_nodes(), Some(basis), seed)?;
            (graph, basis, task, theta0)
        }
        None => {
            let GraphSpec::Similarity { k, sigma } = cfg.graph else {
                unreachable!("only similarity graphs are built per run")
            };
            let (task, theta0) = build_task(&cfg.task, hidden_width(cfg), None, seed)?;
            let (_, grad) = task.loss_and_grad(theta0.as_matrix());
            let graph = ParameterGraph::similarity(&grad, k, sigma)
                .map_err(|e| ExperimentError::config(format!("graph: {e}")))?;
            let basis = decompose(&graph)?;
            owned = (graph, basis);
            (&owned.0, &owned.1, task, theta0)
        }
    };

    let opt = variant.optimizer(&cfg.optimizer, seed);
    let result = if variant == Variant::SpecOnly {
        train_with_basis(&ZeroTaskGradient(&task), graph, basis, &opt, &theta0)
    } else {
        train_with_basis(&task, graph, basis, &opt, &theta0)
    }
    .map_err(|e| match e {
        crate::Error::NotConverged { .. } | crate::Error::NotPositiveSemidefinite { .. } => {
            runtime(e)
        }
        other => ExperimentError::config(other.to_string()),
    })?;

    let trace = result.trace;
    let steps_to_threshold = cfg.threshold.and_then(|t| {
        if variant.thresholds_task_loss() {
            trace.steps_to_threshold(t, |r| r.task_loss)
        } else {
            trace.steps_to_threshold(t, |r| r.joint_loss)
        }
    });
    Ok(RunReport {
        variant,
        seed,
        final_losses: trace.final_losses(),
        steps_to_threshold,
        accuracy: task.accuracy(result.theta.as_matrix()),
        expected_task_loss: task.expected_loss(result.theta.as_matrix()),
        trace,
        duration: start.elapsed(),
        theta: result.theta,
    })
}

/// Runs every (variant, seed) pair, ordered by variant then seed.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    base_dir: &Path,
    exec: Execution,
) -> Result<Vec<RunReport>, ExperimentError> {
    let prepared = prepare(cfg, base_dir)?;
    let jobs = jobs(cfg);
    par::map(exec, &jobs, |&(variant, seed)| {
        run_one(cfg, &prepared, variant, seed)
    })
    .into_iter()
    .collect()
}

fn jobs(cfg: &ExperimentConfig) -> Vec<(Variant, u64)> {
    let mut variants = cfg.variants.clone();
    variants.sort();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    variants
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub variant: Variant,
    pub seed: u64,
    pub final_task_loss: f64,
    pub steps_to_threshold: Option<usize>,
    pub diverged: bool,
}

/// Runs the full (value x variant x seed) grid.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    axis: SweepAxis,
    values: &[f64],
    base_dir: &Path,
    exec: Execution,
) -> Result<Vec<SweepRow>, ExperimentError> {
    let errors = cfg.sweep_violations(axis, values, None);
    if !errors.is_empty() {
        return Err(ExperimentError::Config(errors));
    }
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| {
            cfg.with_axis_value(axis, v)
                .map_err(ExperimentError::config)
        })
        .collect::<Result<_, _>>()?;
    let prepared: Vec<Prepared> = configs
        .iter()
        .map(|c| prepare(c, base_dir))
        .collect::<Result<_, _>>()?;

    let grid: Vec<(usize, Variant, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| jobs(c).into_iter().map(move |(v, s)| (i, v, s)))
        .collect();
    let reports: Vec<RunReport> = par::map(exec, &grid, |&(i, variant, seed)| {
        run_one(&configs[i], &prepared[i], variant, seed)
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    Ok(grid
        .iter()
        .zip(reports)
        .map(|(&(i, _, _), r)| SweepRow {
            axis_value: values[i],
            variant: r.variant,
            seed: r.seed,
            final_task_loss: r.final_losses.task,
            steps_to_threshold: r.steps_to_threshold,
            diverged: r.trace.diverged(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoiseRow {
    pub seed: u64,
    pub noise_sd: f64,
    pub mse_unfiltered: f64,
    pub mse_filtered: f64,
}

/// One denoising trial: smooth field `G*` plus white noise, then the filter.
/// Both errors are mean squared errors against `G*`.
pub fn denoise_trial(
    basis: &SpectralBasis,
    signal: &SmoothSignalSpec,
    d: usize,
    filter: &FilterSpec,
    noise_sd: f64,
    seed: u64,
) -> crate::Result<DenoiseRow> {
    let clean = gen_smooth_signal(basis, signal, d, seed)?.into_inner();
    let mut rng = rng_for(seed, stream::NOISE);
    let noisy = DMatrix::from_fn(clean.nrows(), d, |i, j| {
        clean[(i, j)] + noise_sd * normal(&mut rng)
    });
    let filtered = apply_filter(basis, filter, &noisy)?;
    let count = clean.len() as f64;
    Ok(DenoiseRow {
        seed,
        noise_sd,
        mse_unfiltered: (&noisy - &clean).norm_squared() / count,
        mse_filtered: (&filtered - &clean).norm_squared() / count,
    })
}

/// Every (seed, noise level) trial, ordered by seed then noise level.
pub fn run_denoise(
    cfg: &DenoiseConfig,
    base_dir: &Path,
    exec: Execution,
) -> Result<Vec<DenoiseRow>, ExperimentError> {
    let errors = cfg.violations(None);
    if !errors.is_empty() {
        return Err(ExperimentError::Config(errors));
    }
    let graph = cfg.graph.build_static(base_dir)?;
    let errors = cfg.violations(Some(graph.n_nodes()));
    if !errors.is_empty() {
        return Err(ExperimentError::Config(errors));
    }
    let basis = decompose(&graph)?;
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let levels = cfg.noise_levels();
    let trials: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| levels.iter().map(move |&l| (s, l)))
        .collect();
    par::map(exec, &trials, |&(seed, noise)| {
        denoise_trial(&basis, &cfg.signal, cfg.d, &cfg.filter, noise, seed)
    })
    .into_iter()
    .collect::<crate::Result<_>>()
    .map_err(|e| ExperimentError::config(e.to_string()))
}
