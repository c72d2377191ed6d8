//! Dense symmetric linear algebra and distribution quantiles.

mod cholesky;
mod distributions;
mod eigen;
mod matrix;
mod special;

pub use cholesky::{det_and_inverse, is_positive_definite, Cholesky};
pub use distributions::{
    chisq_cdf, chisq_quantile, f_cdf, f_quantile, normal_cdf, normal_quantile,
};
pub use eigen::{eigen_sym, EigenDecomposition};
pub use matrix::{Matrix, SymMatrix};
pub use special::{ln_gamma, regularized_beta, regularized_gamma_p};
