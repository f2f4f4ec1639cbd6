//! Cyclic Jacobi eigensolver for dense real symmetric matrices.
//!
//! Each rotation annihilates one off-diagonal pair; sweeps visit every pair
//! `(p, q)` with `p < q` in row order. Accumulating the rotations yields an
//! orthonormal eigenvector matrix. Iteration stops once the off-diagonal
//! Frobenius norm drops to `tol * |A|_F`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JacobiOptions {
    /// Relative off-diagonal tolerance.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_sweeps: 64,
        }
    }
}

/// Eigenpairs sorted by ascending eigenvalue; column `k` of `vectors`
/// belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Largest tolerated asymmetry, relative to `max(1, max |a_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-10;

pub fn symmetric_eigen(a: &DMatrix<f64>, opts: JacobiOptions) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "eigendecomposition (square matrix)",
            expected: n,
            actual: a.ncols(),
        });
    }
    if n == 0 {
        return Err(crate::error::invalid("matrix", "must be at least 1x1"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("eigendecomposition input"));
    }
    check_symmetric(a)?;

    // Row-major working copy, symmetrized so round-off asymmetry cannot bias
    // the rotations.
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let norm = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let threshold = opts.tol * norm;
    let mut sweeps = 0;
    let mut off = off_norm(&m, n);
    while off > threshold {
        if sweeps == opts.max_sweeps {
            return Err(Error::NotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweep(&mut m, &mut v, n);
        sweeps += 1;
        off = off_norm(&m, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x * n + x].total_cmp(&m[y * n + y]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let vectors = DMatrix::from_fn(n, n, |row, col| v[row * n + order[col]]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let scale = a.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let deviation = (a[(i, j)] - a[(j, i)]).abs();
            if deviation > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric { i, j, deviation });
            }
        }
    }
    Ok(())
}

fn off_norm(m: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += m[p * n + q] * m[p * n + q];
        }
    }
    (2.0 * sum).sqrt()
}

fn sweep(m: &mut [f64], v: &mut [f64], n: usize) {
    for p in 0..n.saturating_sub(1) {
        for q in (p + 1)..n {
            let apq = m[p * n + q];
            if apq == 0.0 {
                continue;
            }
            let app = m[p * n + p];
            let aqq = m[q * n + q];
            let theta = (aqq - app) / (2.0 * apq);
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            let t = sign / (theta.abs() + theta.hypot(1.0));
            let c = 1.0 / t.hypot(1.0);
            let s = t * c;

            for k in 0..n {
                if k == p || k == q {
                    continue;
                }
                let akp = m[k * n + p];
                let akq = m[k * n + q];
                let new_kp = c * akp - s * akq;
                let new_kq = s * akp + c * akq;
                m[k * n + p] = new_kp;
                m[p * n + k] = new_kp;
                m[k * n + q] = new_kq;
                m[q * n + k] = new_kq;
            }
            m[p * n + p] = app - t * apq;
            m[q * n + q] = aqq + t * apq;
            m[p * n + q] = 0.0;
            m[q * n + p] = 0.0;

            for k in 0..n {
                let vkp = v[k * n + p];
                let vkq = v[k * n + q];
                v[k * n + p] = c * vkp - s * vkq;
                v[k * n + q] = s * vkp + c * vkq;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn reconstruction_error(a: &DMatrix<f64>, e: &SymmetricEigen) -> f64 {
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
        (a - &e.vectors * lambda * e.vectors.transpose()).norm()
    }

    #[test]
    fn two_by_two() {
        let a = dmatrix![1.0, -1.0; -1.0, 1.0];
        let e = symmetric_eigen(&a, JacobiOptions::default()).unwrap();
        assert!(e.values[0].abs() < 1e-15);
        assert!((e.values[1] - 2.0).abs() < 1e-15);
        assert!(reconstruction_error(&a, &e) < 1e-14);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let a = dmatrix![3.0, 0.0; 0.0, -1.0];
        let e = symmetric_eigen(&a, JacobiOptions::default()).unwrap();
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.values, vec![-1.0, 3.0]);
        assert_eq!(e.vectors, dmatrix![0.0, 1.0; 1.0, 0.0]);
    }

    #[test]
    fn zero_matrix() {
        let e = symmetric_eigen(&DMatrix::zeros(3, 3), JacobiOptions::default()).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn rejects_asymmetric_and_non_square() {
        let a = dmatrix![1.0, 2.0; 2.1, 1.0];
        assert!(matches!(
            symmetric_eigen(&a, JacobiOptions::default()),
            Err(Error::NotSymmetric { i: 0, j: 1, .. })
        ));
        let b = DMatrix::<f64>::zeros(2, 3);
        assert!(symmetric_eigen(&b, JacobiOptions::default()).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let a = DMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let opts = JacobiOptions {
            tol: 1e-12,
            max_sweeps: 1,
        };
        match symmetric_eigen(&a, opts) {
            Err(Error::NotConverged { sweeps, off_norm }) => {
                assert_eq!(sweeps, 1);
                assert!(off_norm > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn hilbert_like_matrix_reconstructs() {
        let a = DMatrix::from_fn(8, 8, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e = symmetric_eigen(&a, JacobiOptions::default()).unwrap();
        assert!(reconstruction_error(&a, &e) < 1e-12);
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - DMatrix::identity(8, 8)).norm() < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
