//! Differentiable desk-scale tasks with exact gradients.
//!
//! Two tasks are provided:
//!
//! * [`NodeRegression`]: every node observes noisy linear projections of a
//!   graph-smooth ground truth. The spectral prior is correct by construction.
//! * [`TinyNet`]: a one-hidden-layer tanh classifier whose hidden units are the
//!   graph nodes. Node `i` owns its incoming weights followed by its outgoing
//!   weights, so `d = inputs + classes`.
//!
//! Both subsample their training data with a seeded permutation, so the data
//! kept at a smaller `sample_fraction` is always a subset of the data kept at
//! a larger one.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{check_rows, ParameterMatrix, SpectralBasis};

/// A differentiable loss over an `N x d` parameter matrix.
pub trait Objective {
    /// `(N, d)`.
    fn shape(&self) -> (usize, usize);

    /// Loss and its exact gradient. Panics if `theta` does not have
    /// [`shape`](Objective::shape).
    fn loss_and_grad(&self, theta: &DMatrix<f64>) -> (f64, DMatrix<f64>);

    fn loss(&self, theta: &DMatrix<f64>) -> f64 {
        self.loss_and_grad(theta).0
    }
}

/// Independent random streams derived from one experiment seed.
pub(crate) mod stream {
    pub const GROUND_TRUTH: u64 = 1;
    pub const OBSERVATIONS: u64 = 2;
    pub const SUBSET: u64 = 3;
    pub const INIT: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const DATASET: u64 = 6;
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Number of items kept out of `total` at `fraction`, i.e. `ceil(fraction * total)`
/// with a little slack so that products like `0.6 * 5` do not round up.
pub fn retained_count(fraction: f64, total: usize) -> usize {
    ((fraction * total as f64) - 1e-9).ceil().max(0.0) as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(())
    } else {
        Err(invalid(
            "sample_fraction",
            format!("must lie in (0, 1], got {fraction}"),
        ))
    }
}

/// Ground-truth signal occupying only the `cutoff` lowest graph frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSignalSpec {
    pub cutoff: usize,
    #[serde(default = "one")]
    pub coef_scale: f64,
    #[serde(default)]
    pub noise_sd: f64,
}

fn one() -> f64 {
    1.0
}

/// `Theta* = U C` where rows `k < cutoff` of `C` are i.i.d. normal with
/// standard deviation `coef_scale` and all other rows are zero.
pub fn gen_smooth_signal(
    basis: &SpectralBasis,
    spec: &SmoothSignalSpec,
    d: usize,
    seed: u64,
) -> Result<ParameterMatrix> {
    let n = basis.dim();
    if spec.cutoff == 0 || spec.cutoff > n {
        return Err(invalid(
            "cutoff",
            format!("must satisfy 1 <= cutoff <= {n}, got {}", spec.cutoff),
        ));
    }
    if !spec.coef_scale.is_finite() {
        return Err(Error::NonFinite("coef_scale"));
    }
    let mut rng = rng_for(seed, stream::GROUND_TRUTH);
    let mut coeffs = DMatrix::zeros(n, d);
    for k in 0..spec.cutoff {
        for j in 0..d {
            coeffs[(k, j)] = spec.coef_scale * normal(&mut rng);
        }
    }
    ParameterMatrix::new(basis.eigenvectors() * coeffs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub node: usize,
    pub probe: Vec<f64>,
    pub target: f64,
}

/// Least-squares fit of per-node linear observations,
/// `(1/M) sum (a^T theta_i - y)^2` over the `M` retained observations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeRegression {
    n: usize,
    d: usize,
    seed: Option<u64>,
    noise_sd: f64,
    sample_fraction: f64,
    #[serde(skip)]
    ground_truth: Option<DMatrix<f64>>,
    observations: Vec<Observation>,
}

impl NodeRegression {
    /// Generates `m` observations per node with unit-norm random probes and
    /// keeps `ceil(sample_fraction * m)` of them per node.
    pub fn generate(
        ground_truth: &ParameterMatrix,
        noise_sd: f64,
        m: usize,
        sample_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(invalid("observations_per_node", "must be at least 1"));
        }
        check_fraction(sample_fraction)?;
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(invalid(
                "noise_sd",
                format!("must be finite and >= 0, got {noise_sd}"),
            ));
        }
        let keep = retained_count(sample_fraction, m);
        if keep == 0 {
            return Err(invalid("sample_fraction", "retains zero observations"));
        }
        let (n, d) = (ground_truth.nrows(), ground_truth.ncols());
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        let truth = ground_truth.as_matrix();
        let mut obs_rng = rng_for(seed, stream::OBSERVATIONS);
        let mut subset_rng = rng_for(seed, stream::SUBSET);
        let mut observations = Vec::with_capacity(n * keep);
        let mut order: Vec<usize> = (0..m).collect();
        for node in 0..n {
            let all: Vec<Observation> = (0..m)
                .map(|_| {
                    let mut probe: Vec<f64> = (0..d).map(|_| normal(&mut obs_rng)).collect();
                    let norm = probe.iter().map(|x| x * x).sum::<f64>().sqrt();
                    probe.iter_mut().for_each(|x| *x /= norm);
                    let clean: f64 = probe
                        .iter()
                        .zip(truth.row(node).iter())
                        .map(|(a, t)| a * t)
                        .sum();
                    let target = clean + noise_sd * normal(&mut obs_rng);
                    Observation {
                        node,
                        probe,
                        target,
                    }
                })
                .collect();
            order.shuffle(&mut subset_rng);
            let mut kept: Vec<usize> = order[..keep].to_vec();
            kept.sort_unstable();
            observations.extend(kept.into_iter().map(|r| all[r].clone()));
        }
        Ok(Self {
            n,
            d,
            seed: Some(seed),
            noise_sd,
            sample_fraction,
            ground_truth: Some(truth.clone()),
            observations,
        })
    }

    /// Task over explicitly supplied observations.
    pub fn from_observations(n: usize, d: usize, observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(invalid(
                "observations",
                "at least one observation is required",
            ));
        }
        for o in &observations {
            if o.node >= n {
                return Err(Error::NodeOutOfRange { index: o.node, n });
            }
            check_rows("probe length", d, o.probe.len())?;
        }
        Ok(Self {
            n,
            d,
            seed: None,
            noise_sd: 0.0,
            sample_fraction: 1.0,
            ground_truth: None,
            observations,
        })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Expected loss on a fresh observation drawn like the training ones,
    /// `mean_i |theta_i - theta*_i|^2 / d + noise_sd^2`. Unit probes are
    /// isotropic, so `E[(a^T v)^2] = |v|^2 / d`. `None` for tasks built from
    /// explicit observations.
    pub fn expected_loss(&self, theta: &DMatrix<f64>) -> Option<f64> {
        let truth = self.ground_truth.as_ref()?;
        let err = (theta - truth).norm_squared() / (self.n * self.d) as f64;
        Some(err + self.noise_sd * self.noise_sd)
    }

    /// Upper bound on the largest Hessian eigenvalue of the task loss: each
    /// unit probe adds at most `2/M` along its own direction.
    pub fn curvature_bound(&self) -> f64 {
        let mut per_node = vec![0usize; self.n];
        for o in &self.observations {
            per_node[o.node] += 1;
        }
        let max = per_node.into_iter().max().unwrap_or(0);
        2.0 * max as f64 / self.observations.len() as f64
    }
}

impl Objective for NodeRegression {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    fn loss_and_grad(&self, theta: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        assert_eq!(theta.shape(), (self.n, self.d), "parameter shape");
        let scale = 1.0 / self.observations.len() as f64;
        let mut loss = 0.0;
        let mut grad = DMatrix::zeros(self.n, self.d);
        for o in &self.observations {
            let pred: f64 = o
                .probe
                .iter()
                .zip(theta.row(o.node).iter())
                .map(|(a, t)| a * t)
                .sum();
            let r = pred - o.target;
            loss += r * r;
            for (j, a) in o.probe.iter().enumerate() {
                grad[(o.node, j)] += 2.0 * scale * r * a;
            }
        }
        (loss * scale, grad)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub label: usize,
}

/// One-hidden-layer tanh network with softmax cross-entropy loss.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TinyNet {
    inputs: usize,
    hidden: usize,
    classes: usize,
    dataset_seed: u64,
    sample_fraction: f64,
    samples: Vec<Sample>,
}

impl TinyNet {
    /// Gaussian-blob classification set: one random centre per class
    /// (standard deviation 2), unit-variance points around it, labels
    /// assigned round-robin. `ceil(sample_fraction * n_samples)` points are
    /// kept.
    pub fn generate(
        widths: [usize; 3],
        n_samples: usize,
        dataset_seed: u64,
        sample_fraction: f64,
    ) -> Result<Self> {
        let [inputs, hidden, classes] = widths;
        if inputs == 0 || hidden == 0 {
            return Err(invalid(
                "widths",
                "input and hidden widths must be positive",
            ));
        }
        if classes < 2 {
            return Err(invalid("widths", "need at least two classes"));
        }
        check_fraction(sample_fraction)?;
        let keep = retained_count(sample_fraction, n_samples);
        if keep == 0 {
            return Err(invalid("sample_fraction", "retains zero samples"));
        }

        let mut rng = rng_for(dataset_seed, stream::DATASET);
        let centres: Vec<Vec<f64>> = (0..classes)
            .map(|_| (0..inputs).map(|_| 2.0 * normal(&mut rng)).collect())
            .collect();
        let all: Vec<Sample> = (0..n_samples)
            .map(|s| {
                let label = s % classes;
                let x = centres[label]
                    .iter()
                    .map(|c| c + normal(&mut rng))
                    .collect();
                Sample { x, label }
            })
            .collect();
        let mut order: Vec<usize> = (0..n_samples).collect();
        order.shuffle(&mut rng_for(dataset_seed, stream::SUBSET));
        let mut kept = order[..keep].to_vec();
        kept.sort_unstable();
        let samples = kept.into_iter().map(|s| all[s].clone()).collect();
        Ok(Self {
            inputs,
            hidden,
            classes,
            dataset_seed,
            sample_fraction,
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Logits of one sample plus the hidden activations used to produce them.
    fn forward(&self, theta: &DMatrix<f64>, x: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let hidden = DVector::from_fn(self.hidden, |i, _| {
            let pre: f64 = (0..self.inputs).map(|j| theta[(i, j)] * x[j]).sum();
            pre.tanh()
        });
        let logits = DVector::from_fn(self.classes, |k, _| {
            (0..self.hidden)
                .map(|i| theta[(i, self.inputs + k)] * hidden[i])
                .sum()
        });
        (hidden, logits)
    }

    /// Fraction of retained samples whose arg-max logit is the true label.
    pub fn accuracy(&self, theta: &DMatrix<f64>) -> f64 {
        assert_eq!(theta.shape(), self.shape(), "parameter shape");
        let correct = self
            .samples
            .iter()
            .filter(|s| self.forward(theta, &s.x).1.argmax().0 == s.label)
            .count();
        correct as f64 / self.samples.len() as f64
    }
}

fn softmax(logits: &DVector<f64>) -> DVector<f64> {
    let max = logits.max();
    let exp = logits.map(|z| (z - max).exp());
    let sum = exp.sum();
    exp / sum
}

impl Objective for TinyNet {
    fn shape(&self) -> (usize, usize) {
        (self.hidden, self.inputs + self.classes)
    }

    fn loss_and_grad(&self, theta: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        assert_eq!(theta.shape(), self.shape(), "parameter shape");
        let scale = 1.0 / self.samples.len() as f64;
        let mut loss = 0.0;
        let mut grad = DMatrix::zeros(self.hidden, self.inputs + self.classes);
        for s in &self.samples {
            let (h, logits) = self.forward(theta, &s.x);
            let p = softmax(&logits);
            loss -= p[s.label].ln();
            let mut dz = p;
            dz[s.label] -= 1.0;
            for i in 0..self.hidden {
                let mut dh = 0.0;
                for k in 0..self.classes {
                    grad[(i, self.inputs + k)] += scale * dz[k] * h[i];
                    dh += theta[(i, self.inputs + k)] * dz[k];
                }
                let da = dh * (1.0 - h[i] * h[i]);
                for j in 0..self.inputs {
                    grad[(i, j)] += scale * da * s.x[j];
                }
            }
        }
        (loss * scale, grad)
    }
}

/// The tasks an experiment can train on.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToyTask {
    NodeRegression(NodeRegression),
    TinyNet(TinyNet),
}

impl ToyTask {
    /// Classification accuracy, when the task has one.
    pub fn accuracy(&self, theta: &DMatrix<f64>) -> Option<f64> {
        match self {
            ToyTask::NodeRegression(_) => None,
            ToyTask::TinyNet(net) => Some(net.accuracy(theta)),
        }
    }

    /// Expected loss on fresh data, for tasks with a known ground truth.
    pub fn expected_loss(&self, theta: &DMatrix<f64>) -> Option<f64> {
        match self {
            ToyTask::NodeRegression(t) => t.expected_loss(theta),
            ToyTask::TinyNet(_) => None,
        }
    }

    /// Audit dump of the generated dataset.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dataset serialization cannot fail")
    }
}

impl Objective for ToyTask {
    fn shape(&self) -> (usize, usize) {
        match self {
            ToyTask::NodeRegression(t) => t.shape(),
            ToyTask::TinyNet(t) => t.shape(),
        }
    }

    fn loss_and_grad(&self, theta: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        match self {
            ToyTask::NodeRegression(t) => t.loss_and_grad(theta),
            ToyTask::TinyNet(t) => t.loss_and_grad(theta),
        }
    }
}
