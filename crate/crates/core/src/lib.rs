//! Spectral collaborative optimization over parameter graphs.
//!
//! Parameter vectors are nodes of a weighted graph. The graph Laplacian is
//! eigendecomposed once, task gradients are low-pass filtered in its
//! eigenbasis, and a Dirichlet-energy regularizer keeps connected parameter
//! vectors moving together.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: weighted parameter graphs and their Laplacians.
//! * [`jacobi`] and [`spectral`]: symmetric eigendecomposition, graph Fourier
//!   transforms and spectral filters.
//! * [`loss`]: the Dirichlet regularizer, the joint objective and gradients.
//! * [`optimizer`]: filtered gradient descent and training traces.
//! * [`tasks`]: small differentiable tasks with exact gradients.
//! * [`experiment`]: configuration, ablation runs, sweeps and reports used by
//!   the `specopt` binary.
//! * [`par`]: data-parallel helpers, backed by rayon when the `parallel`
//!   feature is enabled.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod jacobi;
pub mod loss;
pub mod optimizer;
pub mod par;
pub mod spectral;
pub mod tasks;

pub use error::{Error, Result};
pub use graph::ParameterGraph;
pub use loss::{JointLossConfig, LossBreakdown};
pub use optimizer::{FilterTarget, OptimizerConfig, TrainOutcome, TrainTrace};
pub use spectral::{FilterSpec, ParameterMatrix, SpectralBasis, SpectralSignal};
pub use tasks::{Objective, ToyTask};
