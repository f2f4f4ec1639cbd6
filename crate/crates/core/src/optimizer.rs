//! Spectrally filtered gradient descent.
//!
//! Each step maps the gradient into the Laplacian eigenbasis, rescales every
//! frequency by the filter gain, maps back and takes a plain gradient step.
//! By default only the task gradient is filtered and the regularizer
//! gradient `2 lambda L Theta` is added afterwards; [`FilterTarget::TotalGradient`]
//! filters their sum instead.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::ParameterGraph;
use crate::loss::{spectral_reg, spectral_reg_grad, JointLossConfig, LossBreakdown};
use crate::spectral::{apply_filter, check_rows, FilterSpec, ParameterMatrix, SpectralBasis};
use crate::tasks::Objective;

/// Runs halt once the joint loss exceeds this value.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterTarget {
    #[default]
    TaskGradient,
    TotalGradient,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub eta: f64,
    pub loss: JointLossConfig,
    pub filter: FilterSpec,
    pub filter_target: FilterTarget,
    pub max_steps: usize,
    pub stop_loss: Option<f64>,
    pub seed: u64,
}

impl OptimizerConfig {
    /// Plain gradient descent: no regularizer, identity filter.
    pub fn plain(eta: f64, max_steps: usize) -> Self {
        Self {
            eta,
            loss: JointLossConfig { lambda: 0.0 },
            filter: FilterSpec::Identity,
            filter_target: FilterTarget::TaskGradient,
            max_steps,
            stop_loss: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(invalid(
                "eta",
                format!("learning rate must be positive, got {}", self.eta),
            ));
        }
        self.loss.validate()?;
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        if let Some(s) = self.stop_loss {
            if !s.is_finite() {
                return Err(invalid("stop_loss", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Step size `1 / (task_curvature + 2 lambda lambda_max(L))`, the inverse of
/// an upper bound on the joint objective's curvature.
pub fn safe_step_size(task_curvature: f64, lambda: f64, basis: &SpectralBasis) -> f64 {
    let lambda_max = basis.eigenvalues().last().copied().unwrap_or(0.0);
    1.0 / (task_curvature + 2.0 * lambda * lambda_max)
}

/// One executed step, measured after the update.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub task_loss: f64,
    pub spec_loss: f64,
    pub joint_loss: f64,
    pub grad_norm_pre: f64,
    pub grad_norm_post: f64,
    pub dirichlet_energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrainOutcome {
    /// Ran all `max_steps`.
    Completed,
    /// Joint loss reached `stop_loss` at `step`.
    Stopped { step: usize },
    /// Halted at `step`; that step is not recorded.
    Diverged { step: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainTrace {
    /// Losses of the starting point.
    pub initial: LossBreakdown,
    pub records: Vec<StepRecord>,
    pub outcome: TrainOutcome,
}

impl TrainTrace {
    pub fn final_losses(&self) -> LossBreakdown {
        self.records.last().map_or(self.initial, |r| LossBreakdown {
            task: r.task_loss,
            spec: r.spec_loss,
            joint: r.joint_loss,
        })
    }

    pub fn diverged(&self) -> bool {
        matches!(self.outcome, TrainOutcome::Diverged { .. })
    }

    /// First step whose selected loss is at or below `threshold`.
    pub fn steps_to_threshold(
        &self,
        threshold: f64,
        metric: impl Fn(&StepRecord) -> f64,
    ) -> Option<usize> {
        self.records
            .iter()
            .find(|r| metric(r) <= threshold)
            .map(|r| r.step)
    }
}

#[derive(Clone, Debug)]
pub struct TrainResult {
    pub trace: TrainTrace,
    /// Last finite iterate.
    pub theta: ParameterMatrix,
}

/// `U g(Lambda) U^T` applied to the task gradient.
pub fn filtered_task_grad(
    basis: &SpectralBasis,
    filter: &FilterSpec,
    task_grad: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    apply_filter(basis, filter, task_grad)
}

struct Direction {
    value: DMatrix<f64>,
    norm_pre: f64,
    norm_post: f64,
}

fn descent_direction(
    theta: &ParameterMatrix,
    basis: &SpectralBasis,
    graph: &ParameterGraph,
    cfg: &OptimizerConfig,
    task_grad: &DMatrix<f64>,
) -> Result<Direction> {
    check_rows("task gradient rows", theta.nrows(), task_grad.nrows())?;
    check_rows("task gradient columns", theta.ncols(), task_grad.ncols())?;
    if task_grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("task gradient"));
    }
    let lambda = cfg.loss.lambda;
    let reg = if lambda == 0.0 {
        None
    } else {
        Some(spectral_reg_grad(graph, theta)? * lambda)
    };
    let dir = match cfg.filter_target {
        FilterTarget::TaskGradient => {
            let filtered = filtered_task_grad(basis, &cfg.filter, task_grad)?;
            let (norm_pre, norm_post) = (task_grad.norm(), filtered.norm());
            let value = match reg {
                Some(r) => filtered + r,
                None => filtered,
            };
            Direction {
                value,
                norm_pre,
                norm_post,
            }
        }
        FilterTarget::TotalGradient => {
            let total = match reg {
                Some(r) => task_grad + r,
                None => task_grad.clone(),
            };
            let value = apply_filter(basis, &cfg.filter, &total)?;
            let (norm_pre, norm_post) = (total.norm(), value.norm());
            Direction {
                value,
                norm_pre,
                norm_post,
            }
        }
    };
    if dir.value.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("descent direction"));
    }
    Ok(dir)
}

/// One update `Theta - eta * direction`.
pub fn step(
    theta: &ParameterMatrix,
    basis: &SpectralBasis,
    graph: &ParameterGraph,
    cfg: &OptimizerConfig,
    task_grad: &DMatrix<f64>,
) -> Result<ParameterMatrix> {
    cfg.validate()?;
    let dir = descent_direction(theta, basis, graph, cfg, task_grad)?;
    ParameterMatrix::new(theta.as_matrix() - dir.value * cfg.eta)
}

fn check_setup<O: Objective + ?Sized>(
    task: &O,
    graph: &ParameterGraph,
    cfg: &OptimizerConfig,
    theta0: &ParameterMatrix,
) -> Result<()> {
    cfg.validate()?;
    cfg.filter.validate(graph.n_nodes())?;
    let (n, d) = task.shape();
    check_rows("task nodes vs graph nodes", graph.n_nodes(), n)?;
    check_rows("initial parameter rows", n, theta0.nrows())?;
    check_rows("initial parameter columns", d, theta0.ncols())?;
    Ok(())
}

/// Decomposes the graph once, then runs [`train_with_basis`].
pub fn train<O: Objective + ?Sized>(
    task: &O,
    graph: &ParameterGraph,
    cfg: &OptimizerConfig,
    theta0: &ParameterMatrix,
) -> Result<TrainResult> {
    check_setup(task, graph, cfg, theta0)?;
    let basis = SpectralBasis::of_graph(graph)?;
    train_with_basis(task, graph, &basis, cfg, theta0)
}

/// Runs filtered gradient descent from `theta0` until `max_steps`, the stop
/// loss, or divergence. The basis must belong to `graph` and stays fixed for
/// the whole run.
pub fn train_with_basis<O: Objective + ?Sized>(
    task: &O,
    graph: &ParameterGraph,
    basis: &SpectralBasis,
    cfg: &OptimizerConfig,
    theta0: &ParameterMatrix,
) -> Result<TrainResult> {
    check_setup(task, graph, cfg, theta0)?;
    check_rows("basis dimension", graph.n_nodes(), basis.dim())?;

    let lambda = cfg.loss.lambda;
    let mut theta = theta0.clone();
    let (task_loss, mut task_grad) = task.loss_and_grad(theta.as_matrix());
    let spec = spectral_reg(graph, &theta)?;
    let initial = LossBreakdown {
        task: task_loss,
        spec,
        joint: task_loss + lambda * spec,
    };

    let mut records = Vec::with_capacity(cfg.max_steps);
    let mut outcome = TrainOutcome::Completed;
    for step in 1..=cfg.max_steps {
        let dir = match descent_direction(&theta, basis, graph, cfg, &task_grad) {
            Ok(d) => d,
            Err(Error::NonFinite(what)) => {
                outcome = TrainOutcome::Diverged {
                    step,
                    reason: format!("non-finite {what}"),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let next = theta.as_matrix() - &dir.value * cfg.eta;
        let (task_loss, grad) = task.loss_and_grad(&next);
        let next = match ParameterMatrix::new(next) {
            Ok(p) => p,
            Err(_) => {
                outcome = TrainOutcome::Diverged {
                    step,
                    reason: "non-finite parameters".into(),
                };
                break;
            }
        };
        let spec = spectral_reg(graph, &next)?;
        let joint = task_loss + lambda * spec;
        if !joint.is_finite() || joint > DIVERGENCE_LIMIT {
            outcome = TrainOutcome::Diverged {
                step,
                reason: format!("joint loss {joint:e} exceeds {DIVERGENCE_LIMIT:e}"),
            };
            break;
        }
        records.push(StepRecord {
            step,
            task_loss,
            spec_loss: spec,
            joint_loss: joint,
            grad_norm_pre: dir.norm_pre,
            grad_norm_post: dir.norm_post,
            dirichlet_energy: spec,
        });
        theta = next;
        task_grad = grad;
        if cfg.stop_loss.is_some_and(|s| joint <= s) {
            outcome = TrainOutcome::Stopped { step };
            break;
        }
    }

    Ok(TrainResult {
        trace: TrainTrace {
            initial,
            records,
            outcome,
        },
        theta,
    })
}
