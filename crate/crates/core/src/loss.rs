//! Dirichlet regularizer and the joint objective.
//!
//! The regularizer is the graph Dirichlet energy of the parameter matrix,
//! `sum_{i<j} W_ij |theta_i - theta_j|^2 = tr(Theta^T L Theta)`, which equals
//! `sum_k lambda_k |row k of U^T Theta|^2` in the Laplacian eigenbasis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::ParameterGraph;
use crate::spectral::{check_rows, ParameterMatrix};

/// Regularization weight of the joint objective `task + lambda * spec`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLossConfig {
    pub lambda: f64,
}

impl JointLossConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        let cfg = Self { lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_finite() && self.lambda >= 0.0 {
            Ok(())
        } else {
            Err(invalid(
                "lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub task: f64,
    pub spec: f64,
    pub joint: f64,
}

fn laplacian_times(graph: &ParameterGraph, theta: &ParameterMatrix) -> Result<DMatrix<f64>> {
    check_rows("graph/parameter rows", graph.n_nodes(), theta.nrows())?;
    Ok(graph.laplacian() * theta.as_matrix())
}

/// `tr(Theta^T L Theta)`.
pub fn spectral_reg(graph: &ParameterGraph, theta: &ParameterMatrix) -> Result<f64> {
    let l_theta = laplacian_times(graph, theta)?;
    Ok(theta.as_matrix().dot(&l_theta))
}

/// Gradient of [`spectral_reg`]: `2 L Theta`.
pub fn spectral_reg_grad(graph: &ParameterGraph, theta: &ParameterMatrix) -> Result<DMatrix<f64>> {
    Ok(laplacian_times(graph, theta)? * 2.0)
}

pub fn joint_loss(task: f64, spec: f64, cfg: &JointLossConfig) -> Result<LossBreakdown> {
    cfg.validate()?;
    if !task.is_finite() {
        return Err(Error::NonFinite("task loss"));
    }
    if !spec.is_finite() {
        return Err(Error::NonFinite("spectral loss"));
    }
    Ok(LossBreakdown {
        task,
        spec,
        joint: task + cfg.lambda * spec,
    })
}

/// `task_grad + lambda * 2 L Theta`.
pub fn joint_grad(
    task_grad: &DMatrix<f64>,
    graph: &ParameterGraph,
    theta: &ParameterMatrix,
    cfg: &JointLossConfig,
) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    check_rows("task gradient rows", theta.nrows(), task_grad.nrows())?;
    check_rows("task gradient columns", theta.ncols(), task_grad.ncols())?;
    if cfg.lambda == 0.0 {
        return Ok(task_grad.clone());
    }
    Ok(task_grad + spectral_reg_grad(graph, theta)? * cfg.lambda)
}
