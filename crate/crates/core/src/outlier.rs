//! Mahalanobis distances and χ²-based flagging.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{chisq_quantile, Cholesky, SymMatrix};
use crate::pairwise::CovarianceEstimate;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Inlier,
    Warn95,
    Action99,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Inlier => "inlier",
            Flag::Warn95 => "warn95",
            Flag::Action99 => "action99",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreenedRow<T> {
    pub row_id: String,
    pub distance_sq: T,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport<T> {
    pub rows: Vec<ScreenedRow<T>>,
    pub crit95: T,
    pub crit99: T,
    pub estimator_tag: String,
}

impl<T: Real> OutlierReport<T> {
    /// Ids of rows flagged at `level` or above.
    pub fn at_least(&self, level: Flag) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|r| r.flag >= level)
            .map(|r| r.row_id.as_str())
            .collect()
    }

    pub fn flag_of(&self, row_id: &str) -> Option<Flag> {
        self.rows.iter().find(|r| r.row_id == row_id).map(|r| r.flag)
    }

    /// Row with the largest distance (first on ties).
    pub fn most_extreme(&self) -> Option<&ScreenedRow<T>> {
        self.rows.iter().fold(None, |best: Option<&ScreenedRow<T>>, r| match best {
            Some(b) if b.distance_sq >= r.distance_sq => Some(b),
            _ => Some(r),
        })
    }
}

/// `(z − μ)ᵀ V⁻¹ (z − μ)`.
pub fn mahalanobis_sq<T: Real>(z: &[T], location: &[T], v: &SymMatrix<T>) -> Result<T> {
    let p = v.dim();
    for len in [z.len(), location.len()] {
        if len != p {
            return Err(Error::DimensionMismatch { expected: p, found: len });
        }
    }
    let chol = Cholesky::factor(v)?;
    let d: Vec<T> = z.iter().zip(location).map(|(&a, &b)| a - b).collect();
    Ok(chol.inverse_quad_form(&d))
}

pub fn classify<T: Real>(distance_sq: T, crit95: T, crit99: T) -> Flag {
    if distance_sq > crit99 {
        Flag::Action99
    } else if distance_sq > crit95 {
        Flag::Warn95
    } else {
        Flag::Inlier
    }
}

/// Scores every row of `m` against `estimate` with χ²(p) cutoffs at 0.95 and
/// 0.99.
pub fn screen<T: Real>(m: &DataMatrix<T>, estimate: &CovarianceEstimate<T>) -> Result<OutlierReport<T>> {
    let p = m.ncols();
    if estimate.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: estimate.dim(),
        });
    }
    let x = m.to_matrix()?;
    let chol = Cholesky::factor(&estimate.matrix)?;
    let crit95 = chisq_quantile(T::of(0.95), p)?;
    let crit99 = chisq_quantile(T::of(0.99), p)?;
    let rows = (0..m.nrows())
        .into_par_iter()
        .map(|i| {
            let d: Vec<T> = x.row(i).iter().zip(&estimate.location).map(|(&a, &b)| a - b).collect();
            let distance_sq = chol.inverse_quad_form(&d);
            ScreenedRow {
                row_id: m.row_ids()[i].clone(),
                distance_sq,
                flag: classify(distance_sq, crit95, crit99),
            }
        })
        .collect();
    Ok(OutlierReport {
        rows,
        crit95,
        crit99,
        estimator_tag: estimate.estimator_tag.clone(),
    })
}
