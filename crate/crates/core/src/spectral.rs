//! Graph Fourier basis, spectral transforms and low-pass filters.
//!
//! The eigenvectors of the Laplacian form an orthonormal basis ordered by
//! graph frequency (eigenvalue). Row `k` of `U^T X` is the component of the
//! node signal `X` at frequency `lambda_k`; filters rescale those rows by a
//! gain `g(lambda_k)` before mapping back with `U`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::ParameterGraph;
use crate::jacobi::{symmetric_eigen, JacobiOptions};

/// Eigenvalues below `-PSD_TOL * max(1, |L|_F)` are treated as a real
/// violation of positive semidefiniteness rather than round-off.
const PSD_TOL: f64 = 1e-8;

/// Stack of per-node parameter vectors; row `i` is node `i`'s vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterMatrix(DMatrix<f64>);

impl ParameterMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameter matrix"));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self(DMatrix::zeros(n, d))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Frequency-domain coefficients `U^T Theta`; row `k` sits at `lambda_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSignal(DMatrix<f64>);

impl SpectralSignal {
    pub fn new(values: DMatrix<f64>) -> Self {
        Self(values)
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Eigenpairs of a graph Laplacian, eigenvalues ascending and nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralBasis {
    pub fn of_graph(graph: &ParameterGraph) -> Result<Self> {
        eigendecompose(graph.laplacian(), JacobiOptions::default())
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `k` is the eigenvector of `eigenvalues()[k]`.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn to_file(&self) -> BasisFile {
        BasisFile {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self
                .eigenvectors
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("basis serialization cannot fail")
    }

    /// `sum_k lambda_k |row k of U^T X|^2`, the Dirichlet energy evaluated
    /// in the frequency domain.
    pub fn spectral_energy(&self, x: &DMatrix<f64>) -> Result<f64> {
        check_rows("spectral energy", self.dim(), x.nrows())?;
        let coeffs = self.eigenvectors.tr_mul(x);
        Ok(self
            .eigenvalues
            .iter()
            .zip(coeffs.row_iter())
            .map(|(lambda, row)| lambda * row.norm_squared())
            .sum())
    }
}

/// Serialized basis: eigenvalues and the eigenvectors as a list of columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisFile {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl BasisFile {
    pub fn build(&self) -> Result<SpectralBasis> {
        let n = self.eigenvalues.len();
        check_rows("basis columns", n, self.eigenvectors.len())?;
        for col in &self.eigenvectors {
            check_rows("basis column length", n, col.len())?;
        }
        if self
            .eigenvalues
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(invalid("eigenvalues", "must be finite and nonnegative"));
        }
        if self.eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("eigenvalues", "must be sorted ascending"));
        }
        Ok(SpectralBasis {
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: DMatrix::from_fn(n, n, |i, k| self.eigenvectors[k][i]),
        })
    }
}

/// Eigendecomposition of a Laplacian `L = U diag(lambda) U^T`.
///
/// Eigenvalues come back ascending with round-off negatives clamped to zero.
/// Each eigenvector is signed so that its largest-magnitude entry (first one
/// on ties) is positive, which makes serialized bases reproducible.
pub fn eigendecompose(laplacian: &DMatrix<f64>, opts: JacobiOptions) -> Result<SpectralBasis> {
    let eig = symmetric_eigen(laplacian, opts)?;
    let floor = -PSD_TOL * laplacian.norm().max(1.0);
    if let Some(&bad) = eig.values.iter().find(|&&v| v < floor) {
        return Err(Error::NotPositiveSemidefinite { value: bad });
    }
    let eigenvalues = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let mut eigenvectors = eig.vectors;
    for mut col in eigenvectors.column_iter_mut() {
        let mut pivot = 0.0_f64;
        for &x in col.iter() {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    Ok(SpectralBasis {
        eigenvalues,
        eigenvectors,
    })
}

/// `Theta' = U^T Theta`.
pub fn to_spectral(basis: &SpectralBasis, theta: &ParameterMatrix) -> Result<SpectralSignal> {
    check_rows("to_spectral", basis.dim(), theta.nrows())?;
    Ok(SpectralSignal(basis.eigenvectors.tr_mul(theta.as_matrix())))
}

/// `Theta = U Theta'`.
pub fn from_spectral(basis: &SpectralBasis, signal: &SpectralSignal) -> Result<ParameterMatrix> {
    check_rows("from_spectral", basis.dim(), signal.0.nrows())?;
    ParameterMatrix::new(&basis.eigenvectors * &signal.0)
}

/// Spectral gain function `g(lambda)`, nonincreasing with `0 <= g <= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FilterSpec {
    Identity,
    /// Keep the `keep` lowest frequencies, drop the rest.
    IdealLowpass {
        keep: usize,
    },
    /// Heat kernel `exp(-t lambda)`.
    Heat {
        t: f64,
    },
    /// `1 / (1 + t lambda)`.
    Tikhonov {
        t: f64,
    },
}

impl FilterSpec {
    /// Checks the filter against a basis of dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            FilterSpec::Identity => Ok(()),
            FilterSpec::IdealLowpass { keep } => {
                if keep == 0 {
                    Err(invalid(
                        "keep",
                        "ideal low-pass with keep = 0 annihilates every signal",
                    ))
                } else if keep > n {
                    Err(invalid(
                        "keep",
                        format!("keep = {keep} exceeds the {n} available frequencies"),
                    ))
                } else {
                    Ok(())
                }
            }
            FilterSpec::Heat { t } | FilterSpec::Tikhonov { t } => {
                if t.is_finite() && t >= 0.0 {
                    Ok(())
                } else {
                    Err(invalid("t", format!("must be finite and >= 0, got {t}")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterSpec::Identity => "identity",
            FilterSpec::IdealLowpass { .. } => "ideal_lowpass",
            FilterSpec::Heat { .. } => "heat",
            FilterSpec::Tikhonov { .. } => "tikhonov",
        }
    }
}

/// Gain for every eigenvalue. For the ideal low-pass the rank of an
/// eigenvalue is its position in ascending order (first-come on ties).
pub fn filter_gains(filter: &FilterSpec, eigenvalues: &[f64]) -> Result<Vec<f64>> {
    filter.validate(eigenvalues.len())?;
    if eigenvalues.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("eigenvalues", "must be finite and nonnegative"));
    }
    let gains = match *filter {
        FilterSpec::Identity => vec![1.0; eigenvalues.len()],
        FilterSpec::IdealLowpass { keep } => {
            let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
            let mut gains = vec![0.0; eigenvalues.len()];
            for &idx in &order[..keep] {
                gains[idx] = 1.0;
            }
            gains
        }
        FilterSpec::Heat { t } => eigenvalues.iter().map(|l| (-t * l).exp()).collect(),
        FilterSpec::Tikhonov { t } => eigenvalues.iter().map(|l| 1.0 / (1.0 + t * l)).collect(),
    };
    Ok(gains)
}

/// `U diag(g(lambda)) U^T X`. The identity filter returns `X` unchanged.
pub fn apply_filter(
    basis: &SpectralBasis,
    filter: &FilterSpec,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_rows("apply_filter", basis.dim(), x.nrows())?;
    let gains = filter_gains(filter, &basis.eigenvalues)?;
    if matches!(filter, FilterSpec::Identity) {
        return Ok(x.clone());
    }
    let mut coeffs = basis.eigenvectors.tr_mul(x);
    for (mut row, g) in coeffs.row_iter_mut().zip(&gains) {
        row *= *g;
    }
    Ok(&basis.eigenvectors * coeffs)
}

/// `U diag(g) U^T` as an explicit matrix.
pub fn filter_matrix(basis: &SpectralBasis, filter: &FilterSpec) -> Result<DMatrix<f64>> {
    let gains = DVector::from_vec(filter_gains(filter, &basis.eigenvalues)?);
    let u = &basis.eigenvectors;
    Ok(u * DMatrix::from_diagonal(&gains) * u.transpose())
}

pub(crate) fn check_rows(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}
