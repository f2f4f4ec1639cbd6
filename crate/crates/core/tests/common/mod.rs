//! Oracles shared by the integration tests. Nothing here calls the solver or
//! the loss code under test.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specopt::ParameterGraph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller keeps the oracle side free of rand_distr.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| gaussian(rng))
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n, n);
    (&a + a.transpose()) * 0.5
}

/// Graph with independent edges, possibly disconnected.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> ParameterGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, rng.random_range(0.1..3.0)));
            }
        }
    }
    ParameterGraph::from_edge_list(n, &edges).expect("valid random graph")
}

/// Component count by union-find over the edge list.
pub fn component_count(n: usize, edges: &[(usize, usize, f64)]) -> usize {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for &(i, j, _) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// `sum_{i<j} w_ij |theta_i - theta_j|^2` straight from the edge list.
pub fn pairwise_dirichlet(edges: &[(usize, usize, f64)], theta: &DMatrix<f64>) -> f64 {
    edges
        .iter()
        .map(|&(i, j, w)| w * (theta.row(i) - theta.row(j)).norm_squared())
        .sum()
}

/// Laplacian assembled from an edge list.
pub fn laplacian_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for &(i, j, w) in edges {
        l[(i, j)] -= w;
        l[(j, i)] -= w;
        l[(i, i)] += w;
        l[(j, j)] += w;
    }
    l
}

/// Central finite-difference gradient.
pub fn finite_difference(
    f: impl Fn(&DMatrix<f64>) -> f64,
    x: &DMatrix<f64>,
    h: f64,
) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x.nrows(), x.ncols());
    let mut probe = x.clone();
    for idx in 0..x.len() {
        let orig = probe[idx];
        probe[idx] = orig + h;
        let up = f(&probe);
        probe[idx] = orig - h;
        let down = f(&probe);
        probe[idx] = orig;
        g[idx] = (up - down) / (2.0 * h);
    }
    g
}

/// `|a - b|_F / max(|a|_F, |b|_F, floor)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

/// Eigenvalues of a symmetric matrix by Householder tridiagonalization and
/// Sturm-count bisection, ascending.
pub fn bisection_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let (diag, off) = tridiagonalize(a);
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            diag[i].abs() + l + r
        })
        .fold(0.0f64, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            // Smallest x with more than k eigenvalues below it.
            let (mut lo, mut hi) = (-radius, radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if sturm_count(&diag, &off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * radius {
                    break;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonalize(a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| m[(i, k)]).collect();
        let alpha = -x[0].signum() * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = x.clone();
        v[0] -= alpha;
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|t| *t /= vn);
        let mut h = DMatrix::<f64>::identity(n, n);
        for (a_i, vi) in v.iter().enumerate() {
            for (b_j, vj) in v.iter().enumerate() {
                h[(k + 1 + a_i, k + 1 + b_j)] -= 2.0 * vi * vj;
            }
        }
        m = &h * &m * &h;
    }
    let diag = (0..n).map(|i| m[(i, i)]).collect();
    let off = (0..n.saturating_sub(1)).map(|i| m[(i + 1, i)]).collect();
    (diag, off)
}

/// Plain gradient descent on a node-regression loss written out by hand:
/// `(1/M) sum (a^T theta_node - y)^2`, from zero. Returns the loss and the
/// iterate after each step.
pub fn plain_gd_regression(
    n: usize,
    d: usize,
    obs: &[(usize, Vec<f64>, f64)],
    eta: f64,
    steps: usize,
) -> (Vec<f64>, Vec<DMatrix<f64>>) {
    let m = obs.len() as f64;
    let mut theta = DMatrix::<f64>::zeros(n, d);
    let loss = |t: &DMatrix<f64>| {
        obs.iter()
            .map(|(node, a, y)| {
                let r: f64 = (0..d).map(|c| a[c] * t[(*node, c)]).sum::<f64>() - y;
                r * r
            })
            .sum::<f64>()
            / m
    };
    let mut losses = Vec::with_capacity(steps);
    let mut path = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut grad = DMatrix::<f64>::zeros(n, d);
        for (node, a, y) in obs {
            let r: f64 = (0..d).map(|c| a[c] * theta[(*node, c)]).sum::<f64>() - y;
            for c in 0..d {
                grad[(*node, c)] += 2.0 * r * a[c] / m;
            }
        }
        theta -= grad * eta;
        losses.push(loss(&theta));
        path.push(theta.clone());
    }
    (losses, path)
}

/// `P A P^T` for the permutation sending node `i` to `perm[i]`.
pub fn permute_symmetric(a: &DMatrix<f64>, perm: &[usize]) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = a[(i, j)];
        }
    }
    out
}
