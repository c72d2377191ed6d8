//! Robust covariance, correlation and outlier screening for
//! inter-laboratory study data.
//!
//! Every estimator is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the scalar for the common case.

pub mod dataset;
pub mod ellipse;
pub mod error;
pub mod export;
pub mod mcd;
pub mod numerics;
pub mod ogk;
pub mod outlier;
pub mod pairwise;
pub mod pca;
pub mod scalar;
pub mod scale;

pub use dataset::{
    fixture, impute_median, impute_median_capped, parse_csv, read_csv, DataMatrix, Fixture, ImputationRecord,
    ImputedCell,
};
pub use ellipse::{ellipse_points, ellipse_t_sq, point_in_ellipse, EllipsePolygon};
pub use error::{Error, Result};
pub use mcd::{c_step, cov_mcd, mcd_consistency_factor, McdConfig, McdResult};
pub use numerics::{EigenDecomposition, Matrix, SymMatrix};
pub use ogk::{cov_ogk, ogk_distances, ogk_fit, OgkConfig, OgkFit};
pub use outlier::{mahalanobis_sq, screen, Flag, OutlierReport};
pub use pairwise::{classical_estimate, pairwise_matrix, CovarianceEstimate, PairwiseKind, RankMethod};
pub use pca::{biplot_data, pca_fit, Biplot, PcaModel};
pub use scalar::Real;
pub use scale::ScaleEstimator;

pub type Data64 = DataMatrix<f64>;
pub type Data32 = DataMatrix<f32>;
pub type SymMatrix64 = SymMatrix<f64>;
pub type SymMatrix32 = SymMatrix<f32>;
pub type Estimate64 = CovarianceEstimate<f64>;
pub type Estimate32 = CovarianceEstimate<f32>;
pub type Report64 = OutlierReport<f64>;
pub type Pca64 = PcaModel<f64>;
pub type Ellipse64 = EllipsePolygon<f64>;
pub type Mcd64 = McdResult<f64>;
