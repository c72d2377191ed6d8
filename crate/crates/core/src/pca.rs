//! Principal components from a covariance estimate.

use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{eigen_sym, Matrix};
use crate::pairwise::CovarianceEstimate;
use crate::scalar::Real;

/// Eigenvalues above this negative bound are rounding noise and clamp to 0.
const EIGEN_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel<T> {
    /// Columns are the principal directions, in eigenvalue order.
    pub loadings: Matrix<T>,
    pub eigenvalues: Vec<T>,
    pub center: Vec<T>,
    pub scale: Vec<T>,
    /// `((x − center) / scale) · loadings`, one row per observation.
    pub scores: Matrix<T>,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub estimator_tag: String,
}

/// Points and variable arrows for one pair of components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Biplot<T> {
    pub components: (usize, usize),
    pub points: Vec<(String, T, T)>,
    pub arrows: Vec<(String, T, T)>,
}

impl<T: Real> PcaModel<T> {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Euclidean norm of each row's scores on components `i` and `j`.
    pub fn score_norms(&self, i: usize, j: usize) -> Result<Vec<T>> {
        let p = self.n_components();
        for k in [i, j] {
            if k >= p {
                return Err(Error::IndexOutOfRange { index: k, dim: p });
            }
        }
        Ok((0..self.scores.nrows())
            .map(|r| self.scores[(r, i)].hypot(self.scores[(r, j)]))
            .collect())
    }

    /// Share of the total eigenvalue sum carried by each component.
    pub fn explained_fraction(&self) -> Vec<T> {
        let total: T = self.eigenvalues.iter().copied().sum();
        self.eigenvalues.iter().map(|&v| v / total).collect()
    }
}

/// Eigendecomposition of the estimate's matrix, or of its correlation form
/// when `use_correlation` is set, with scores of every row of `m`.
///
/// Correlation mode centres at the estimate's location and scales by the
/// square roots of its diagonal; covariance mode only centres.
pub fn pca_fit<T: Real>(m: &DataMatrix<T>, estimate: &CovarianceEstimate<T>, use_correlation: bool) -> Result<PcaModel<T>> {
    let p = m.ncols();
    if estimate.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: estimate.dim(),
        });
    }
    let x = m.to_matrix()?;
    let (target, scale) = if use_correlation {
        let diag = estimate.matrix.diagonal();
        if let Some(j) = diag.iter().position(|&d| !(d > T::zero())) {
            return Err(Error::ZeroScale(format!("variance of column `{}` is not positive", m.col_ids()[j])));
        }
        (estimate.matrix.to_correlation()?, diag.iter().map(|d| d.sqrt()).collect())
    } else {
        (estimate.matrix.clone(), vec![T::one(); p])
    };
    let eig = eigen_sym(&target)?;
    let floor = T::of(EIGEN_FLOOR);
    let eigenvalues = eig
        .values
        .iter()
        .map(|&v| {
            if v < T::zero() && v >= floor {
                T::zero()
            } else {
                v
            }
        })
        .collect();
    let loadings = eig.vectors;
    let center = estimate.location.clone();
    let scores = Matrix::from_fn(x.nrows(), p, |r, k| {
        (0..p)
            .map(|j| (x[(r, j)] - center[j]) / scale[j] * loadings[(j, k)])
            .sum()
    });
    Ok(PcaModel {
        loadings,
        eigenvalues,
        center,
        scale,
        scores,
        row_ids: m.row_ids().to_vec(),
        col_ids: m.col_ids().to_vec(),
        estimator_tag: estimate.estimator_tag.clone(),
    })
}

/// Scores on components `i`, `j` and loading arrows scaled by the square
/// root of each component's eigenvalue.
pub fn biplot_data<T: Real>(model: &PcaModel<T>, i: usize, j: usize) -> Result<Biplot<T>> {
    let p = model.n_components();
    for k in [i, j] {
        if k >= p {
            return Err(Error::IndexOutOfRange { index: k, dim: p });
        }
    }
    if i == j {
        return Err(Error::InvalidArgument("biplot components must differ".into()));
    }
    let si = model.eigenvalues[i].max(T::zero()).sqrt();
    let sj = model.eigenvalues[j].max(T::zero()).sqrt();
    let points = (0..model.scores.nrows())
        .map(|r| (model.row_ids[r].clone(), model.scores[(r, i)], model.scores[(r, j)]))
        .collect();
    let arrows = (0..p)
        .map(|v| (model.col_ids[v].clone(), model.loadings[(v, i)] * si, model.loadings[(v, j)] * sj))
        .collect();
    Ok(Biplot {
        components: (i, j),
        points,
        arrows,
    })
}
