//! Orthogonalized Gnanadesikan–Kettenring covariance.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{chisq_quantile, eigen_sym, Cholesky, Matrix, SymMatrix};
use crate::pairwise::{mean_cov_rows, CovarianceEstimate};
use crate::scalar::Real;
use crate::scale::{location_and_scale, ScaleEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OgkConfig {
    pub scale: ScaleEstimator,
    /// Number of orthogonalization passes.
    pub iterations: usize,
    /// Replace the raw estimate by the classical estimate of the rows that
    /// pass the distance cutoff.
    pub reweight: bool,
    /// Quantile level of the reweighting cutoff.
    pub beta: f64,
}

impl Default for OgkConfig {
    fn default() -> Self {
        OgkConfig {
            scale: ScaleEstimator::tau(),
            iterations: 2,
            reweight: false,
            beta: 0.9,
        }
    }
}

/// Raw and (optionally) reweighted OGK estimates with the raw distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OgkFit<T> {
    /// Reweighted estimate when reweighting is on, otherwise equal to `raw`.
    pub estimate: CovarianceEstimate<T>,
    pub raw: CovarianceEstimate<T>,
    /// Squared distances of every row from the raw estimate.
    pub raw_distances: Vec<T>,
    /// Rows kept by the reweighting step (all rows when it is off).
    pub kept: Vec<bool>,
}

fn column_scale<T: Real>(est: ScaleEstimator, x: &[T], what: impl FnOnce() -> String) -> Result<(T, T)> {
    let (loc, s) = location_and_scale(est, x)?;
    if s > T::zero() {
        Ok((loc, s))
    } else {
        Err(Error::ZeroScale(what()))
    }
}

/// `s*(a + b)² − s*(a − b)²` over four, for standardized columns.
fn gk_entry<T: Real>(est: ScaleEstimator, a: &[T], b: &[T]) -> Result<T> {
    let plus: Vec<T> = a.iter().zip(b).map(|(&u, &v)| u + v).collect();
    let minus: Vec<T> = a.iter().zip(b).map(|(&u, &v)| u - v).collect();
    let sp = location_and_scale(est, &plus)?.1;
    let sm = location_and_scale(est, &minus)?.1;
    Ok((sp * sp - sm * sm) / T::of(4.0))
}

fn check_shape<T: Real>(m: &DataMatrix<T>) -> Result<Matrix<T>> {
    let (n, p) = (m.nrows(), m.ncols());
    if n <= p || n < 2 {
        return Err(Error::TooFewObservations {
            needed: (p + 1).max(2),
            got: n,
        });
    }
    m.to_matrix()
}

/// Fits OGK and keeps both the raw and the reweighted estimates.
pub fn ogk_fit<T: Real>(m: &DataMatrix<T>, cfg: &OgkConfig) -> Result<OgkFit<T>> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument("OGK needs at least one iteration".into()));
    }
    if !(cfg.beta > 0.0 && cfg.beta < 1.0) {
        return Err(Error::ProbabilityOutOfRange(cfg.beta));
    }
    let x = check_shape(m)?;
    let (n, p) = (x.nrows(), x.ncols());
    let est = cfg.scale;

    // columns of the current working data Z, and the accumulated map A with X ≈ Z·Aᵀ
    let mut z: Vec<Vec<T>> = x.columns();
    let mut a: Matrix<T> = Matrix::identity(p);
    for pass in 0..cfg.iterations {
        let scales: Vec<T> = z
            .iter()
            .enumerate()
            .map(|(j, c)| {
                column_scale(est, c, || {
                    if pass == 0 {
                        format!("{est} of column `{}` is zero", m.col_ids()[j])
                    } else {
                        format!("{est} of orthogonalized component {} is zero", j + 1)
                    }
                })
                .map(|r| r.1)
            })
            .collect::<Result<_>>()?;
        let y: Vec<Vec<T>> = z
            .iter()
            .zip(&scales)
            .map(|(c, &s)| c.iter().map(|&v| v / s).collect())
            .collect();

        let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let off: Vec<T> = pairs
            .par_iter()
            .map(|&(i, j)| gk_entry(est, &y[i], &y[j]))
            .collect::<Result<_>>()?;
        let mut u = Matrix::identity(p);
        for (&(i, j), &v) in pairs.iter().zip(&off) {
            u[(i, j)] = v;
            u[(j, i)] = v;
        }
        let eig = eigen_sym(&SymMatrix::new(u)?)?;
        let e = &eig.vectors;

        // A ← A·D·E and Z ← Y·E
        let mut ad = a.clone();
        for i in 0..p {
            for j in 0..p {
                ad[(i, j)] *= scales[j];
            }
        }
        a = ad.matmul(e)?;
        z = (0..p)
            .map(|k| (0..n).map(|r| (0..p).map(|j| y[j][r] * e[(j, k)]).sum()).collect())
            .collect();
    }

    let mut mu_z = Vec::with_capacity(p);
    let mut gamma = Vec::with_capacity(p);
    for (k, c) in z.iter().enumerate() {
        let (loc, s) = column_scale(est, c, || format!("{est} of orthogonalized component {} is zero", k + 1))?;
        mu_z.push(loc);
        gamma.push(s * s);
    }
    let v = SymMatrix::from_lower(p, |i, j| (0..p).map(|k| a[(i, k)] * gamma[k] * a[(j, k)]).sum());
    let location = a.mul_vec(&mu_z)?;
    let tag = format!("ogk({est})");
    let raw = CovarianceEstimate::new(location, v, tag.clone(), n);

    let chol = Cholesky::factor(&raw.matrix)?;
    let raw_distances: Vec<T> = (0..n)
        .map(|i| {
            let d: Vec<T> = x.row(i).iter().zip(&raw.location).map(|(&xi, &mi)| xi - mi).collect();
            chol.inverse_quad_form(&d)
        })
        .collect();

    if !cfg.reweight {
        return Ok(OgkFit {
            estimate: raw.clone(),
            raw,
            raw_distances,
            kept: vec![true; n],
        });
    }

    let med = crate::scale::median(&raw_distances)?;
    let cutoff = chisq_quantile(T::of(cfg.beta), p)? * med / chisq_quantile(T::of(0.5), p)?;
    let kept: Vec<bool> = raw_distances.iter().map(|&d| d <= cutoff).collect();
    let rows: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    if rows.len() < 2 {
        return Err(Error::AllRowsRejected);
    }
    let (mu, w) = mean_cov_rows(&x, &rows);
    let estimate = CovarianceEstimate::new(mu, w, format!("{tag}+rew"), n);
    Ok(OgkFit {
        estimate,
        raw,
        raw_distances,
        kept,
    })
}

/// OGK estimate with explicit settings.
pub fn cov_ogk<T: Real>(
    m: &DataMatrix<T>,
    est: ScaleEstimator,
    iterations: usize,
    reweight: bool,
    beta: f64,
) -> Result<CovarianceEstimate<T>> {
    let cfg = OgkConfig {
        scale: est,
        iterations,
        reweight,
        beta,
    };
    Ok(ogk_fit(m, &cfg)?.estimate)
}

/// Squared distances from the raw OGK estimate (default iterations).
pub fn ogk_distances<T: Real>(m: &DataMatrix<T>, est: ScaleEstimator) -> Result<Vec<T>> {
    let cfg = OgkConfig {
        scale: est,
        ..OgkConfig::default()
    };
    Ok(ogk_fit(m, &cfg)?.raw_distances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::robust_scale;

    fn data(cols: &[Vec<f64>]) -> DataMatrix<f64> {
        DataMatrix::from_unlabeled_columns(cols).unwrap()
    }

    #[test]
    fn single_column_is_squared_scale() {
        let x = vec![1.0, 2.5, 2.0, 4.0, 7.0, 3.0];
        for est in [ScaleEstimator::tau(), ScaleEstimator::Made, ScaleEstimator::Qn] {
            let e = cov_ogk(&data(std::slice::from_ref(&x)), est, 2, false, 0.9).unwrap();
            let s = robust_scale(est, &x).unwrap();
            assert!((e.matrix[(0, 0)] - s * s).abs() < 1e-12 * s * s, "{est}");
        }
    }

    #[test]
    fn too_few_rows() {
        let m = data(&[vec![1.0, 2.0], vec![3.0, 1.0]]);
        assert!(matches!(
            cov_ogk(&m, ScaleEstimator::tau(), 2, false, 0.9),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn constant_column_names_the_column() {
        let m = DataMatrix::from_columns(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec!["flat".into(), "ok".into()],
            &[vec![1.0; 4], vec![1.0, 2.0, 3.0, 5.0]],
        )
        .unwrap();
        match cov_ogk(&m, ScaleEstimator::Made, 2, false, 0.9) {
            Err(Error::ZeroScale(msg)) => assert!(msg.contains("flat"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn raw_distances_match_returned_estimate() {
        let a = vec![1.0, 2.0, 3.5, 4.0, 5.5, 6.0, 7.5, 9.0, 2.2, 30.0];
        let b = vec![2.0, 1.5, 4.0, 3.0, 6.5, 5.0, 8.0, 8.5, 1.0, -4.0];
        let m = data(&[a, b]);
        let fit = ogk_fit(&m, &OgkConfig::default()).unwrap();
        let inv = crate::numerics::det_and_inverse(&fit.raw.matrix).unwrap().1;
        let x = m.to_matrix().unwrap();
        for (i, &d) in fit.raw_distances.iter().enumerate() {
            let r: Vec<f64> = x.row(i).iter().zip(&fit.raw.location).map(|(u, v)| u - v).collect();
            assert!((inv.quad_form(&r) - d).abs() < 1e-8 * d.max(1.0));
        }
        assert_eq!(fit.estimate, fit.raw);
    }

    #[test]
    fn reweighting_drops_the_gross_outlier() {
        let a = vec![1.0, 2.0, 3.5, 4.0, 5.5, 6.0, 7.5, 9.0, 2.2, 30.0, 4.4, 6.1];
        let b = vec![2.0, 1.5, 4.0, 3.0, 6.5, 5.0, 8.0, 8.5, 1.0, -4.0, 4.0, 6.3];
        let cfg = OgkConfig {
            reweight: true,
            ..OgkConfig::default()
        };
        let fit = ogk_fit(&data(&[a, b]), &cfg).unwrap();
        assert!(!fit.kept[9]);
        assert!(fit.estimate.positive_definite);
        assert!(fit.estimate.estimator_tag.ends_with("+rew"));
    }

    #[test]
    fn works_in_single_precision() {
        let a: Vec<f32> = vec![1.0, 2.0, 3.5, 4.0, 5.5, 6.0, 7.5, 9.0];
        let b: Vec<f32> = vec![2.0, 1.5, 4.0, 3.0, 6.5, 5.0, 8.0, 8.5];
        let m = DataMatrix::from_unlabeled_columns(&[a, b]).unwrap();
        let e = cov_ogk(&m, ScaleEstimator::tau(), 2, false, 0.9).unwrap();
        assert!(e.positive_definite);
        assert!(e.correlation(0, 1) > 0.5);
    }
}
