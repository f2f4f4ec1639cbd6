//! JSON configuration for the `specopt` commands.
//!
//! Every struct rejects unknown keys. Parsing failures and semantic
//! violations are both reported as [`ExperimentError::Config`]; semantic
//! validation collects every violation rather than stopping at the first.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::graph::{GraphFile, ParameterGraph};
use crate::loss::JointLossConfig;
use crate::optimizer::{FilterTarget, OptimizerConfig};
use crate::spectral::FilterSpec;
use crate::tasks::SmoothSignalSpec;

/// Environment variable whose integer value is added to every configured seed.
pub const SEED_OFFSET_VAR: &str = "SPECOPT_SEED_OFFSET";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Edges {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
    /// Graph JSON file; relative paths resolve against the config file.
    File { path: PathBuf },
    LayerChain {
        group_sizes: Vec<usize>,
        intra_w: f64,
        inter_w: f64,
    },
    Random {
        n: usize,
        edge_prob: f64,
        #[serde(default = "default_weight_range")]
        weight_range: (f64, f64),
        seed: u64,
    },
    /// Gaussian k-NN graph over the per-node initial task gradients.
    Similarity { k: usize, sigma: f64 },
}

fn default_weight_range() -> (f64, f64) {
    (0.5, 1.5)
}

impl GraphSpec {
    /// Builds a graph that does not depend on the task.
    pub fn build_static(&self, base_dir: &Path) -> Result<ParameterGraph, ExperimentError> {
        let graph = match self {
            GraphSpec::Edges { n, edges } => ParameterGraph::from_edge_list(*n, edges),
            GraphSpec::File { path } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    ExperimentError::config(format!(
                        "graph.path: cannot read {}: {e}",
                        path.display()
                    ))
                })?;
                let file: GraphFile = serde_json::from_str(&text).map_err(|e| {
                    ExperimentError::config(format!("graph.path: {}: {e}", path.display()))
                })?;
                file.build()
            }
            GraphSpec::LayerChain {
                group_sizes,
                intra_w,
                inter_w,
            } => ParameterGraph::layer_chain(group_sizes, *intra_w, *inter_w),
            GraphSpec::Random {
                n,
                edge_prob,
                weight_range,
                seed,
            } => ParameterGraph::random_connected(*n, *edge_prob, *weight_range, *seed),
            GraphSpec::Similarity { .. } => {
                return Err(ExperimentError::config(
                    "graph: similarity graphs are built per run from task gradients",
                ))
            }
        };
        graph.map_err(|e| ExperimentError::config(format!("graph: {e}")))
    }

    /// Node count known without building the graph.
    fn declared_nodes(&self) -> Option<usize> {
        match self {
            GraphSpec::Edges { n, .. } | GraphSpec::Random { n, .. } => Some(*n),
            GraphSpec::LayerChain { group_sizes, .. } => Some(group_sizes.iter().sum()),
            GraphSpec::File { .. } | GraphSpec::Similarity { .. } => None,
        }
    }

    fn offset_seeds(&mut self, offset: i64) -> Result<(), String> {
        if let GraphSpec::Random { seed, .. } = self {
            *seed = apply_offset(*seed, offset)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    NodeRegression {
        d: usize,
        signal: SmoothSignalSpec,
        observations_per_node: usize,
        #[serde(default = "one")]
        sample_fraction: f64,
    },
    TinyNet {
        inputs: usize,
        classes: usize,
        samples: usize,
        /// Hidden width; required with similarity graphs, otherwise taken
        /// from the graph and checked if given.
        #[serde(default)]
        hidden: Option<usize>,
        #[serde(default = "one")]
        sample_fraction: f64,
        /// Defaults to the run seed.
        #[serde(default)]
        dataset_seed: Option<u64>,
        #[serde(default = "default_init_scale")]
        init_scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_init_scale() -> f64 {
    0.5
}

impl TaskSpec {
    pub fn sample_fraction(&self) -> f64 {
        match self {
            TaskSpec::NodeRegression {
                sample_fraction, ..
            }
            | TaskSpec::TinyNet {
                sample_fraction, ..
            } => *sample_fraction,
        }
    }

    fn set_sample_fraction(&mut self, value: f64) {
        match self {
            TaskSpec::NodeRegression {
                sample_fraction, ..
            }
            | TaskSpec::TinyNet {
                sample_fraction, ..
            } => *sample_fraction = value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub eta: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "identity")]
    pub filter: FilterSpec,
    #[serde(default)]
    pub filter_target: FilterTarget,
    pub max_steps: usize,
    #[serde(default)]
    pub stop_loss: Option<f64>,
}

fn identity() -> FilterSpec {
    FilterSpec::Identity
}

/// Named ablation run; see [`Variant::optimizer`] for what each one changes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    TaskOnly,
    SpecOnly,
    Joint,
    JointFiltered,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::TaskOnly,
        Variant::SpecOnly,
        Variant::Joint,
        Variant::JointFiltered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::TaskOnly => "task_only",
            Variant::SpecOnly => "spec_only",
            Variant::Joint => "joint",
            Variant::JointFiltered => "joint_filtered",
        }
    }

    /// Optimizer settings for this variant:
    ///
    /// * `task_only`: lambda = 0, identity filter.
    /// * `spec_only`: configured lambda; the runner zeroes the task gradient.
    /// * `joint`: configured lambda, identity filter.
    /// * `joint_filtered`: configured lambda and filter.
    pub fn optimizer(self, spec: &OptimizerSpec, seed: u64) -> OptimizerConfig {
        let (lambda, filter) = match self {
            Variant::TaskOnly => (0.0, FilterSpec::Identity),
            Variant::SpecOnly | Variant::JointFiltered => (spec.lambda, spec.filter),
            Variant::Joint => (spec.lambda, FilterSpec::Identity),
        };
        OptimizerConfig {
            eta: spec.eta,
            loss: JointLossConfig { lambda },
            filter,
            filter_target: spec.filter_target,
            max_steps: spec.max_steps,
            stop_loss: spec.stop_loss,
            seed,
        }
    }

    /// Whether steps-to-threshold is measured on the task loss rather than
    /// the joint loss.
    pub fn thresholds_task_loss(self) -> bool {
        self == Variant::TaskOnly
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    SampleFraction,
    Lambda,
    FilterParam,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SampleFraction => "sample_fraction",
            SweepAxis::Lambda => "lambda",
            SweepAxis::FilterParam => "filter_param",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// Configuration of `train` and `sweep`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    pub task: TaskSpec,
    pub optimizer: OptimizerSpec,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
    /// Loss level for steps-to-threshold; unset means never reached.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_variants() -> Vec<Variant> {
    Variant::ALL.to_vec()
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::config(format!("config: {e}")))
    }

    /// Every semantic violation, or an empty list. `n_nodes` is the graph
    /// size when it is already known.
    pub fn violations(&self, n_nodes: Option<usize>) -> Vec<String> {
        let mut out = Vec::new();
        let n = n_nodes.or_else(|| self.graph.declared_nodes());

        if self.seeds.is_empty() {
            out.push("seeds: at least one seed is required".into());
        }
        if has_duplicates(&self.seeds) {
            out.push("seeds: duplicate seeds".into());
        }
        if self.variants.is_empty() {
            out.push("variants: at least one variant is required".into());
        }
        if has_duplicates(&self.variants) {
            out.push("variants: duplicate variants".into());
        }
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                out.push("threshold: must be finite".into());
            }
        }

        graph_violations(&self.graph, &mut out);
        let similarity = matches!(self.graph, GraphSpec::Similarity { .. });

        match &self.task {
            TaskSpec::NodeRegression {
                d,
                signal,
                observations_per_node,
                sample_fraction,
            } => {
                if similarity {
                    out.push("graph: similarity graphs require a tiny_net task".into());
                }
                if *d == 0 {
                    out.push("task.d: must be at least 1".into());
                }
                signal_violations("task.signal", signal, n, &mut out);
                if !(signal.noise_sd.is_finite() && signal.noise_sd >= 0.0) {
                    out.push("task.signal.noise_sd: must be finite and >= 0".into());
                }
                if *observations_per_node == 0 {
                    out.push("task.observations_per_node: must be at least 1".into());
                }
                fraction_violations(*sample_fraction, *observations_per_node, &mut out);
            }
            TaskSpec::TinyNet {
                inputs,
                classes,
                samples,
                hidden,
                sample_fraction,
                init_scale,
                ..
            } => {
                if *inputs == 0 {
                    out.push("task.inputs: must be at least 1".into());
                }
                if *classes < 2 {
                    out.push("task.classes: must be at least 2".into());
                }
                if *samples == 0 {
                    out.push("task.samples: must be at least 1".into());
                }
                match (hidden, n) {
                    (None, None) if similarity => {
                        out.push("task.hidden: required with a similarity graph".into())
                    }
                    (Some(h), Some(n)) if *h != n => out.push(format!(
                        "task.hidden: {h} does not match the graph's {n} nodes"
                    )),
                    (Some(0), _) => out.push("task.hidden: must be at least 1".into()),
                    _ => {}
                }
                if let GraphSpec::Similarity { k, .. } = self.graph {
                    if let Some(h) = hidden {
                        if k >= *h {
                            out.push(format!("graph.k: must be below the {h} hidden units"));
                        }
                    }
                }
                fraction_violations(*sample_fraction, *samples, &mut out);
                if !(init_scale.is_finite() && *init_scale >= 0.0) {
                    out.push("task.init_scale: must be finite and >= 0".into());
                }
            }
        }

        let opt = &self.optimizer;
        if !(opt.eta.is_finite() && opt.eta > 0.0) {
            out.push(format!("optimizer.eta: must be positive, got {}", opt.eta));
        }
        if !(opt.lambda.is_finite() && opt.lambda >= 0.0) {
            out.push(format!(
                "optimizer.lambda: must be finite and >= 0, got {}",
                opt.lambda
            ));
        }
        if opt.max_steps == 0 {
            out.push("optimizer.max_steps: must be at least 1".into());
        }
        if opt.stop_loss.is_some_and(|s| !s.is_finite()) {
            out.push("optimizer.stop_loss: must be finite".into());
        }
        filter_violations("optimizer.filter", &opt.filter, n, &mut out);

        if let Some(sweep) = &self.sweep {
            out.extend(self.sweep_violations(sweep.axis, &sweep.values, n));
        }
        out
    }

    pub fn sweep_violations(
        &self,
        axis: SweepAxis,
        values: &[f64],
        n: Option<usize>,
    ) -> Vec<String> {
        let mut out = Vec::new();
        if values.is_empty() {
            out.push("sweep.values: at least one value is required".into());
        }
        for &v in values {
            match self.with_axis_value(axis, v) {
                Ok(cfg) => out.extend(
                    cfg.violations(n)
                        .into_iter()
                        .map(|e| format!("sweep value {v}: {e}")),
                ),
                Err(e) => out.push(e),
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Copy of this config with one sweep coordinate replaced.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Result<Self, String> {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::SampleFraction => cfg.task.set_sample_fraction(value),
            SweepAxis::Lambda => cfg.optimizer.lambda = value,
            SweepAxis::FilterParam => {
                cfg.optimizer.filter = match cfg.optimizer.filter {
                    FilterSpec::Identity => {
                        return Err("sweep.axis: filter_param needs a non-identity filter".into())
                    }
                    FilterSpec::IdealLowpass { .. } => {
                        if value.fract() != 0.0 || value < 1.0 {
                            return Err(format!(
                                "sweep value {value}: ideal_lowpass keep must be a positive integer"
                            ));
                        }
                        FilterSpec::IdealLowpass {
                            keep: value as usize,
                        }
                    }
                    FilterSpec::Heat { .. } => FilterSpec::Heat { t: value },
                    FilterSpec::Tikhonov { .. } => FilterSpec::Tikhonov { t: value },
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply_seed_offset(&mut self, offset: i64) -> Result<(), ExperimentError> {
        let mut errors = Vec::new();
        for seed in &mut self.seeds {
            match apply_offset(*seed, offset) {
                Ok(s) => *seed = s,
                Err(e) => errors.push(e),
            }
        }
        if let Err(e) = self.graph.offset_seeds(offset) {
            errors.push(e);
        }
        if let TaskSpec::TinyNet {
            dataset_seed: Some(seed),
            ..
        } = &mut self.task
        {
            match apply_offset(*seed, offset) {
                Ok(s) => *seed = s,
                Err(e) => errors.push(e),
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Config(errors))
        }
    }
}

/// Configuration of `denoise`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiseConfig {
    pub graph: GraphSpec,
    pub signal: SmoothSignalSpec,
    /// Columns of the gradient field.
    #[serde(default = "one_usize")]
    pub d: usize,
    pub filter: FilterSpec,
    /// Defaults to `[signal.noise_sd]`.
    #[serde(default)]
    pub noise_levels: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one_usize() -> usize {
    1
}

impl DenoiseConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text).map_err(|e| ExperimentError::config(format!("config: {e}")))
    }

    pub fn noise_levels(&self) -> Vec<f64> {
        self.noise_levels
            .clone()
            .unwrap_or_else(|| vec![self.signal.noise_sd])
    }

    pub fn violations(&self, n_nodes: Option<usize>) -> Vec<String> {
        let mut out = Vec::new();
        let n = n_nodes.or_else(|| self.graph.declared_nodes());
        if matches!(self.graph, GraphSpec::Similarity { .. }) {
            out.push("graph: similarity graphs are not available for denoise".into());
        }
        graph_violations(&self.graph, &mut out);
        signal_violations("signal", &self.signal, n, &mut out);
        if self.d == 0 {
            out.push("d: must be at least 1".into());
        }
        filter_violations("filter", &self.filter, n, &mut out);
        let levels = self.noise_levels();
        if levels.is_empty() {
            out.push("noise_levels: at least one level is required".into());
        }
        if levels.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            out.push("noise_levels: every level must be finite and >= 0".into());
        }
        if self.seeds.is_empty() {
            out.push("seeds: at least one seed is required".into());
        }
        if has_duplicates(&self.seeds) {
            out.push("seeds: duplicate seeds".into());
        }
        out
    }

    pub fn apply_seed_offset(&mut self, offset: i64) -> Result<(), ExperimentError> {
        let mut errors = Vec::new();
        for seed in &mut self.seeds {
            match apply_offset(*seed, offset) {
                Ok(s) => *seed = s,
                Err(e) => errors.push(e),
            }
        }
        if let Err(e) = self.graph.offset_seeds(offset) {
            errors.push(e);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ExperimentError::Config(errors))
        }
    }
}

/// Reads [`SEED_OFFSET_VAR`]; unset or empty means 0.
pub fn seed_offset_from_env() -> Result<i64, ExperimentError> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse().map_err(|_| {
            ExperimentError::config(format!("{SEED_OFFSET_VAR}: expected an integer, got {v:?}"))
        }),
        _ => Ok(0),
    }
}

fn apply_offset(seed: u64, offset: i64) -> Result<u64, String> {
    seed.checked_add_signed(offset)
        .ok_or_else(|| format!("seed {seed} + offset {offset} is out of range"))
}

fn has_duplicates<T: Ord + Clone>(items: &[T]) -> bool {
    let mut sorted = items.to_vec();
    sorted.sort();
    sorted.windows(2).any(|w| w[0] == w[1])
}

fn graph_violations(graph: &GraphSpec, out: &mut Vec<String>) {
    match graph {
        GraphSpec::Edges { n, .. } if *n == 0 => out.push("graph.n: must be at least 1".into()),
        GraphSpec::Random {
            n,
            edge_prob,
            weight_range: (lo, hi),
            ..
        } => {
            if *n == 0 {
                out.push("graph.n: must be at least 1".into());
            }
            if !(0.0..=1.0).contains(edge_prob) {
                out.push("graph.edge_prob: must lie in [0, 1]".into());
            }
            if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi) {
                out.push("graph.weight_range: need 0 < lo <= hi".into());
            }
        }
        GraphSpec::LayerChain {
            group_sizes,
            intra_w,
            inter_w,
        } => {
            if group_sizes.is_empty() || group_sizes.contains(&0) {
                out.push("graph.group_sizes: need at least one layer, each non-empty".into());
            }
            if !(intra_w.is_finite() && *intra_w >= 0.0) {
                out.push("graph.intra_w: must be finite and >= 0".into());
            }
            if !(inter_w.is_finite() && *inter_w >= 0.0) {
                out.push("graph.inter_w: must be finite and >= 0".into());
            }
        }
        GraphSpec::Similarity { k, sigma } => {
            if *k == 0 {
                out.push("graph.k: must be at least 1".into());
            }
            if !(sigma.is_finite() && *sigma > 0.0) {
                out.push("graph.sigma: must be positive".into());
            }
        }
        _ => {}
    }
}

fn signal_violations(
    prefix: &str,
    signal: &SmoothSignalSpec,
    n: Option<usize>,
    out: &mut Vec<String>,
) {
    if signal.cutoff == 0 {
        out.push(format!("{prefix}.cutoff: must be at least 1"));
    }
    if let Some(n) = n {
        if signal.cutoff > n {
            out.push(format!(
                "{prefix}.cutoff: {} exceeds the {n} graph nodes",
                signal.cutoff
            ));
        }
    }
    if !signal.coef_scale.is_finite() {
        out.push(format!("{prefix}.coef_scale: must be finite"));
    }
}

fn fraction_violations(fraction: f64, total: usize, out: &mut Vec<String>) {
    if !(fraction > 0.0 && fraction <= 1.0) {
        out.push(format!(
            "task.sample_fraction: must lie in (0, 1], got {fraction}"
        ));
    } else if total > 0 && crate::tasks::retained_count(fraction, total) == 0 {
        out.push("task.sample_fraction: retains no training data".into());
    }
}

fn filter_violations(prefix: &str, filter: &FilterSpec, n: Option<usize>, out: &mut Vec<String>) {
    match *filter {
        FilterSpec::IdealLowpass { keep } => {
            if keep == 0 {
                out.push(format!("{prefix}.keep: must be at least 1"));
            }
            if let Some(n) = n {
                if keep > n {
                    out.push(format!("{prefix}.keep: {keep} exceeds the {n} graph nodes"));
                }
            }
        }
        FilterSpec::Heat { t } | FilterSpec::Tikhonov { t } => {
            if !(t.is_finite() && t >= 0.0) {
                out.push(format!("{prefix}.t: must be finite and >= 0"));
            }
        }
        FilterSpec::Identity => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "graph": {"kind": "random", "n": 8, "edge_prob": 0.2, "seed": 1},
        "task": {"kind": "node_regression", "d": 2,
                 "signal": {"cutoff": 2, "coef_scale": 3.0, "noise_sd": 0.1},
                 "observations_per_node": 4},
        "optimizer": {"eta": 0.5, "lambda": 0.01, "max_steps": 5,
                      "filter": {"kind": "heat", "t": 0.3}},
        "seeds": [0, 1]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(cfg.variants, Variant::ALL.to_vec());
        assert_eq!(cfg.task.sample_fraction(), 1.0);
        assert_eq!(cfg.optimizer.filter_target, FilterTarget::TaskGradient);
        assert!(
            cfg.violations(None).is_empty(),
            "{:?}",
            cfg.violations(None)
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("\"seeds\"", "\"seedz\": [1], \"seeds\"");
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("seedz"), "{err}");
        let text = BASE.replace("\"max_steps\"", "\"max_step\": 1, \"max_steps\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn lists_every_violation() {
        let mut cfg = ExperimentConfig::from_json(BASE).unwrap();
        cfg.seeds.clear();
        cfg.optimizer.eta = 0.0;
        cfg.optimizer.max_steps = 0;
        cfg.optimizer.filter = FilterSpec::IdealLowpass { keep: 9 };
        let v = cfg.violations(None);
        assert_eq!(v.len(), 4, "{v:?}");
        assert!(v.iter().any(|e| e.starts_with("seeds")));
        assert!(v.iter().any(|e| e.starts_with("optimizer.eta")));
        assert!(v.iter().any(|e| e.starts_with("optimizer.max_steps")));
        assert!(v.iter().any(|e| e.starts_with("optimizer.filter.keep")));
    }

    #[test]
    fn variant_optimizers() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        let t = Variant::TaskOnly.optimizer(&cfg.optimizer, 0);
        assert_eq!((t.loss.lambda, t.filter), (0.0, FilterSpec::Identity));
        let j = Variant::Joint.optimizer(&cfg.optimizer, 0);
        assert_eq!((j.loss.lambda, j.filter), (0.01, FilterSpec::Identity));
        let f = Variant::JointFiltered.optimizer(&cfg.optimizer, 0);
        assert_eq!(f.filter, FilterSpec::Heat { t: 0.3 });
    }

    #[test]
    fn axis_values() {
        let cfg = ExperimentConfig::from_json(BASE).unwrap();
        let c = cfg.with_axis_value(SweepAxis::FilterParam, 1.5).unwrap();
        assert_eq!(c.optimizer.filter, FilterSpec::Heat { t: 1.5 });
        let c = cfg.with_axis_value(SweepAxis::SampleFraction, 0.5).unwrap();
        assert_eq!(c.task.sample_fraction(), 0.5);
        assert!(!cfg
            .sweep_violations(SweepAxis::Lambda, &[-1.0], None)
            .is_empty());
        assert!(!cfg
            .sweep_violations(SweepAxis::Lambda, &[], None)
            .is_empty());

        let mut ideal = cfg.clone();
        ideal.optimizer.filter = FilterSpec::IdealLowpass { keep: 2 };
        assert!(ideal.with_axis_value(SweepAxis::FilterParam, 2.5).is_err());
        let mut plain = cfg;
        plain.optimizer.filter = FilterSpec::Identity;
        assert!(plain.with_axis_value(SweepAxis::FilterParam, 1.0).is_err());
    }

    #[test]
    fn seed_offset() {
        let mut cfg = ExperimentConfig::from_json(BASE).unwrap();
        cfg.apply_seed_offset(10).unwrap();
        assert_eq!(cfg.seeds, vec![10, 11]);
        assert!(matches!(cfg.graph, GraphSpec::Random { seed: 11, .. }));
        assert!(cfg.apply_seed_offset(-100).is_err());
    }

    #[test]
    fn similarity_needs_tiny_net() {
        let text = BASE.replace(
            r#"{"kind": "random", "n": 8, "edge_prob": 0.2, "seed": 1}"#,
            r#"{"kind": "similarity", "k": 2, "sigma": 1.0}"#,
        );
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert!(cfg.violations(None).iter().any(|e| e.contains("tiny_net")));
    }
}
