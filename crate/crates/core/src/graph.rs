//! Weighted parameter graphs and their Laplacians.
//!
//! A node is one parameter *vector* (a row of a [`ParameterMatrix`]); edge
//! weights encode how strongly two parameter vectors should move together.
//! Storage is dense: graphs at this scale have at most a few hundred nodes
//! and the eigendecomposition is dense anyway.
//!
//! [`ParameterMatrix`]: crate::spectral::ParameterMatrix

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Weighted undirected graph over parameter nodes.
///
/// The weight matrix is symmetric with a zero diagonal and nonnegative
/// entries; the degree vector and Laplacian `L = D - W` are derived once at
/// construction and never change.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterGraph {
    weights: DMatrix<f64>,
    degree: Vec<f64>,
    laplacian: DMatrix<f64>,
}

impl ParameterGraph {
    /// Builds a graph from an explicit list of `(i, j, w)` edges.
    ///
    /// Each unordered pair may appear at most once, in either orientation.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "graph must have at least one node"));
        }
        let mut weights = DMatrix::zeros(n, n);
        let mut seen = HashSet::with_capacity(edges.len());
        for &(i, j, w) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::NodeOutOfRange { index, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop { i, j });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight { i, j, weight: w });
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge { i, j });
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Ok(Self::from_weights_unchecked(weights))
    }

    /// Layered structural prior: nodes in the same layer are fully connected
    /// with weight `intra_w`, nodes in adjacent layers with weight `inter_w`.
    pub fn layer_chain(group_sizes: &[usize], intra_w: f64, inter_w: f64) -> Result<Self> {
        if group_sizes.is_empty() {
            return Err(invalid("group_sizes", "at least one layer is required"));
        }
        if group_sizes.contains(&0) {
            return Err(invalid(
                "group_sizes",
                "every layer needs at least one node",
            ));
        }
        for (name, w) in [("intra_w", intra_w), ("inter_w", inter_w)] {
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(
                    name,
                    format!("weight must be finite and >= 0, got {w}"),
                ));
            }
        }

        let n: usize = group_sizes.iter().sum();
        let mut offsets = Vec::with_capacity(group_sizes.len());
        let mut start = 0;
        for &size in group_sizes {
            offsets.push(start..start + size);
            start += size;
        }

        let mut weights = DMatrix::zeros(n, n);
        for (layer, range) in offsets.iter().enumerate() {
            for i in range.clone() {
                for j in range.clone().filter(|&j| j != i) {
                    weights[(i, j)] = intra_w;
                }
                if let Some(next) = offsets.get(layer + 1) {
                    for j in next.clone() {
                        weights[(i, j)] = inter_w;
                        weights[(j, i)] = inter_w;
                    }
                }
            }
        }
        Ok(Self::from_weights_unchecked(weights))
    }

    /// Gaussian-kernel k-nearest-neighbour graph over the rows of `vectors`.
    ///
    /// An edge `(i, j)` is kept when `j` is among the `k` nearest rows of `i`
    /// or vice versa, with weight `exp(-|v_i - v_j|^2 / (2 sigma^2))`. Rows at
    /// exactly the k-th smallest distance are all kept, so the construction
    /// does not depend on row order.
    pub fn similarity(vectors: &DMatrix<f64>, k: usize, sigma: f64) -> Result<Self> {
        let n = vectors.nrows();
        if n < 2 {
            return Err(invalid("vectors", "need at least two rows"));
        }
        if k == 0 || k >= n {
            return Err(invalid("k", format!("must satisfy 1 <= k < {n}, got {k}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("similarity vectors"));
        }

        let mut dist2 = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d: f64 = vectors
                    .row(i)
                    .iter()
                    .zip(vectors.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                dist2[(i, j)] = d;
                dist2[(j, i)] = d;
            }
        }

        let mut keep = vec![false; n * n];
        let mut others: Vec<f64> = Vec::with_capacity(n - 1);
        for i in 0..n {
            others.clear();
            others.extend((0..n).filter(|&j| j != i).map(|j| dist2[(i, j)]));
            others.sort_by(f64::total_cmp);
            let radius = others[k - 1];
            for j in (0..n).filter(|&j| j != i && dist2[(i, j)] <= radius) {
                keep[i * n + j] = true;
                keep[j * n + i] = true;
            }
        }

        let two_sigma2 = 2.0 * sigma * sigma;
        let weights = DMatrix::from_fn(n, n, |i, j| {
            if keep[i * n + j] {
                (-dist2[(i, j)] / two_sigma2).exp()
            } else {
                0.0
            }
        });
        Ok(Self::from_weights_unchecked(weights))
    }

    /// Random connected graph: a random spanning tree plus Erdős–Rényi extra
    /// edges with probability `edge_prob`, weights uniform in `weight_range`.
    pub fn random_connected(
        n: usize,
        edge_prob: f64,
        weight_range: (f64, f64),
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "graph must have at least one node"));
        }
        if !(0.0..=1.0).contains(&edge_prob) {
            return Err(invalid(
                "edge_prob",
                format!("must lie in [0, 1], got {edge_prob}"),
            ));
        }
        let (lo, hi) = weight_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(invalid(
                "weight_range",
                format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
            ));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weight = |rng: &mut ChaCha8Rng| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..hi)
            }
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);

        let mut weights = DMatrix::zeros(n, n);
        for pos in 1..n {
            let parent = order[rng.random_range(0..pos)];
            let child = order[pos];
            let w = weight(&mut rng);
            weights[(parent, child)] = w;
            weights[(child, parent)] = w;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(edge_prob) && weights[(i, j)] == 0.0 {
                    let w = weight(&mut rng);
                    weights[(i, j)] = w;
                    weights[(j, i)] = w;
                }
            }
        }
        Ok(Self::from_weights_unchecked(weights))
    }

    // Callers guarantee symmetry, zero diagonal and nonnegative entries.
    fn from_weights_unchecked(weights: DMatrix<f64>) -> Self {
        let n = weights.nrows();
        let degree: Vec<f64> = (0..n).map(|i| weights.row(i).sum()).collect();
        let mut laplacian = -weights.clone();
        for (i, d) in degree.iter().enumerate() {
            laplacian[(i, i)] = *d;
        }
        Self {
            weights,
            degree,
            laplacian,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Weighted degrees, the diagonal of `D`.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// Edges `(i, j, w)` with `i < j` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_nodes();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Connected components under edges with positive weight.
    pub fn connected_components(&self) -> Components {
        let n = self.n_nodes();
        let mut labels = vec![usize::MAX; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if labels[start] != usize::MAX {
                continue;
            }
            labels[start] = count;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, label) in labels.iter_mut().enumerate() {
                    if *label == usize::MAX && self.weights[(u, v)] > 0.0 {
                        *label = count;
                        queue.push_back(v);
                    }
                }
            }
            count += 1;
        }
        Components { count, labels }
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.n_nodes(),
            edges: self.edges(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        file.build()
    }
}

/// Component count and per-node component labels, numbered in order of the
/// lowest node index they contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    pub labels: Vec<usize>,
}

/// On-disk graph form: `{"n": 3, "edges": [[0, 1, 1.0], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphFile {
    pub fn build(&self) -> Result<ParameterGraph> {
        ParameterGraph::from_edge_list(self.n, &self.edges)
    }
}
