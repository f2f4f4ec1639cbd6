//! Experiment orchestration behind the `specopt` command line.
//!
//! Each `cmd_*` function loads its JSON config, runs the work (independent
//! runs in parallel when enabled), writes CSV/JSON outputs and returns a
//! short human-readable report. Errors carry the process exit code: 2 for
//! configuration and parse problems, 1 for runtime failures.

pub mod config;
pub mod report;
pub mod runner;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::GraphFile;
use crate::par::Execution;
use crate::spectral::SpectralBasis;
use config::{seed_offset_from_env, DenoiseConfig, ExperimentConfig, SweepAxis};

pub use config::Variant;
pub use runner::{DenoiseRow, RunReport, SweepRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("runtime failure: {0}")]
    Runtime(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn config(msg: impl Into<String>) -> Self {
        ExperimentError::Config(vec![msg.into()])
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Runtime(_) | ExperimentError::Io(_) => 1,
        }
    }
}

/// What a command produced. `failed` marks runs that diverged; the command
/// still wrote all of its outputs.
#[derive(Debug, Default)]
pub struct CommandOutput {
    pub stdout: String,
    pub files: Vec<PathBuf>,
    pub failed: bool,
}

fn read_text(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::config(format!("cannot read {}: {e}", path.display())))
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default()
}

fn output_dir(cli: Option<&Path>, config: Option<&Path>) -> PathBuf {
    cli.or(config)
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
}

fn load_experiment(path: &Path) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::from_json(&read_text(path)?)?;
    cfg.apply_seed_offset(seed_offset_from_env()?)?;
    Ok(cfg)
}

/// Short decimal form used when echoing eigenvalues.
pub fn fmt_eigenvalue(x: f64) -> String {
    let s = format!("{x:.10}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Decomposes the graph file at `graph_path` into `out/basis.json`.
pub fn cmd_decompose(
    graph_path: &Path,
    out: Option<&Path>,
) -> Result<CommandOutput, ExperimentError> {
    let file: GraphFile = serde_json::from_str(&read_text(graph_path)?)
        .map_err(|e| ExperimentError::config(format!("graph file: {e}")))?;
    let graph = file
        .build()
        .map_err(|e| ExperimentError::config(format!("graph file: {e}")))?;
    let basis =
        SpectralBasis::of_graph(&graph).map_err(|e| ExperimentError::Runtime(e.to_string()))?;
    let mut json = basis.to_json();
    json.push('\n');
    let path = report::write_atomic(&output_dir(out, None), "basis.json", json.as_bytes())?;
    let values: Vec<String> = basis
        .eigenvalues()
        .iter()
        .map(|&v| fmt_eigenvalue(v))
        .collect();
    Ok(CommandOutput {
        stdout: values.join(" ") + "\n",
        files: vec![path],
        failed: false,
    })
}

/// Trains every (variant, seed) pair; one trace CSV each plus `summary.json`.
pub fn cmd_train(
    config_path: &Path,
    out: Option<&Path>,
    exec: Execution,
) -> Result<CommandOutput, ExperimentError> {
    let cfg = load_experiment(config_path)?;
    let reports = runner::run_experiment(&cfg, &base_dir(config_path), exec)?;
    let dir = output_dir(out, cfg.output.as_deref());
    let mut files = Vec::with_capacity(reports.len() + 1);
    let mut stdout = String::new();
    for r in &reports {
        files.push(report::write_atomic(
            &dir,
            &report::trace_file_name(r),
            &report::trace_csv(&r.trace),
        )?);
        let status = if r.trace.diverged() { "diverged" } else { "ok" };
        stdout.push_str(&format!(
            "{:<15} seed {:<6} {:<8} steps {:<6} final task {:.6e} joint {:.6e}\n",
            r.variant.name(),
            r.seed,
            status,
            r.trace.records.len(),
            r.final_losses.task,
            r.final_losses.joint
        ));
    }
    files.push(report::write_atomic(
        &dir,
        "summary.json",
        &report::summary_json("train", cfg.threshold, &reports),
    )?);
    Ok(CommandOutput {
        stdout,
        files,
        failed: reports.iter().any(|r| r.trace.diverged()),
    })
}

/// Sweeps one axis; `axis`/`values` override the config's `sweep` section.
pub fn cmd_sweep(
    config_path: &Path,
    out: Option<&Path>,
    axis: Option<SweepAxis>,
    values: Option<Vec<f64>>,
    exec: Execution,
) -> Result<CommandOutput, ExperimentError> {
    let cfg = load_experiment(config_path)?;
    let axis = axis.or(cfg.sweep.as_ref().map(|s| s.axis)).ok_or_else(|| {
        ExperimentError::config("sweep.axis: not given in the config or on the command line")
    })?;
    let values = values
        .or_else(|| cfg.sweep.as_ref().map(|s| s.values.clone()))
        .ok_or_else(|| {
            ExperimentError::config("sweep.values: not given in the config or on the command line")
        })?;
    let rows = runner::run_sweep(&cfg, axis, &values, &base_dir(config_path), exec)?;
    let dir = output_dir(out, cfg.output.as_deref());
    let path = report::write_atomic(&dir, "sweep.csv", &report::sweep_csv(&rows))?;
    let failed = rows.iter().any(|r| r.diverged);
    Ok(CommandOutput {
        stdout: format!("{} rows over {} = {:?}\n", rows.len(), axis.name(), values),
        files: vec![path],
        failed,
    })
}

/// Filtered vs unfiltered reconstruction error of noisy smooth fields.
pub fn cmd_denoise(
    config_path: &Path,
    out: Option<&Path>,
    exec: Execution,
) -> Result<CommandOutput, ExperimentError> {
    let mut cfg = DenoiseConfig::from_json(&read_text(config_path)?)?;
    cfg.apply_seed_offset(seed_offset_from_env()?)?;
    let rows = runner::run_denoise(&cfg, &base_dir(config_path), exec)?;
    let dir = output_dir(out, cfg.output.as_deref());
    let path = report::write_atomic(&dir, "denoise.csv", &report::denoise_csv(&rows))?;
    let wins = rows
        .iter()
        .filter(|r| r.mse_filtered < r.mse_unfiltered)
        .count();
    Ok(CommandOutput {
        stdout: format!(
            "filtered error below unfiltered in {wins} of {} trials\n",
            rows.len()
        ),
        files: vec![path],
        failed: false,
    })
}
