//! CSV and JSON output.
//!
//! Floating-point cells are written in scientific notation with 17
//! significant digits, so every value parses back to the same `f64`.
//! Files are written to a temporary sibling and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::runner::{DenoiseRow, RunReport, SweepRow};
use super::ExperimentError;
use crate::optimizer::{TrainOutcome, TrainTrace};

pub const TRACE_HEADER: [&str; 7] = [
    "step",
    "task_loss",
    "spec_loss",
    "joint_loss",
    "grad_norm_pre",
    "grad_norm_post",
    "dirichlet_energy",
];

pub const SWEEP_HEADER: [&str; 5] = [
    "axis_value",
    "variant",
    "seed",
    "final_task_loss",
    "steps_to_threshold",
];

pub const DENOISE_HEADER: [&str; 4] = ["seed", "noise_sd", "mse_unfiltered", "mse_filtered"];

/// Written in place of a step count when the threshold was never reached.
pub const NOT_REACHED: &str = "not_reached";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn trace_csv(trace: &TrainTrace) -> Vec<u8> {
    csv_bytes(
        &TRACE_HEADER,
        trace.records.iter().map(|r| {
            vec![
                r.step.to_string(),
                fmt_f64(r.task_loss),
                fmt_f64(r.spec_loss),
                fmt_f64(r.joint_loss),
                fmt_f64(r.grad_norm_pre),
                fmt_f64(r.grad_norm_post),
                fmt_f64(r.dirichlet_energy),
            ]
        }),
    )
}

fn steps_cell(steps: Option<usize>) -> String {
    steps.map_or_else(|| NOT_REACHED.to_string(), |s| s.to_string())
}

pub fn sweep_csv(rows: &[SweepRow]) -> Vec<u8> {
    csv_bytes(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.axis_value),
                r.variant.to_string(),
                r.seed.to_string(),
                fmt_f64(r.final_task_loss),
                steps_cell(r.steps_to_threshold),
            ]
        }),
    )
}

pub fn denoise_csv(rows: &[DenoiseRow]) -> Vec<u8> {
    csv_bytes(
        &DENOISE_HEADER,
        rows.iter().map(|r| {
            vec![
                r.seed.to_string(),
                fmt_f64(r.noise_sd),
                fmt_f64(r.mse_unfiltered),
                fmt_f64(r.mse_filtered),
            ]
        }),
    )
}

pub fn trace_file_name(report: &RunReport) -> String {
    format!("{}_seed{}.csv", report.variant, report.seed)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    variant: &'a str,
    seed: u64,
    csv: String,
    #[serde(flatten)]
    outcome: &'a TrainOutcome,
    steps: usize,
    final_task_loss: f64,
    final_spec_loss: f64,
    final_joint_loss: f64,
    steps_to_threshold: Option<usize>,
    duration_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_task_loss: Option<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    threshold: Option<f64>,
    runs: Vec<RunSummary<'a>>,
}

pub fn summary_json(command: &str, threshold: Option<f64>, reports: &[RunReport]) -> Vec<u8> {
    let runs = reports
        .iter()
        .map(|r| RunSummary {
            variant: r.variant.name(),
            seed: r.seed,
            csv: trace_file_name(r),
            outcome: &r.trace.outcome,
            steps: r.trace.records.len(),
            final_task_loss: r.final_losses.task,
            final_spec_loss: r.final_losses.spec,
            final_joint_loss: r.final_losses.joint,
            steps_to_threshold: r.steps_to_threshold,
            duration_ms: r.duration.as_secs_f64() * 1e3,
            accuracy: r.accuracy,
            expected_task_loss: r.expected_task_loss,
        })
        .collect();
    let mut out = serde_json::to_vec_pretty(&Summary {
        command,
        threshold,
        runs,
    })
    .expect("summary serialization cannot fail");
    out.push(b'\n');
    out
}

/// Writes `bytes` to `dir/name` via a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, ExperimentError> {
    let io = |e: std::io::Error| ExperimentError::Io(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    let mut file = std::fs::File::create(&tmp).map_err(io)?;
    file.write_all(bytes).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    std::fs::rename(&tmp, &target).map_err(io)?;
    Ok(target)
}
