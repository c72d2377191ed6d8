//! Pairwise covariance and correlation estimators and their assembly into
//! full p×p matrices.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{is_positive_definite, Matrix, SymMatrix};
use crate::scalar::Real;
use crate::scale::{robust_location, robust_scale, ScaleEstimator};

/// Location, covariance matrix and provenance of a multivariate estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceEstimate<T> {
    pub location: Vec<T>,
    pub matrix: SymMatrix<T>,
    pub estimator_tag: String,
    /// Rows that fed the estimator.
    pub n_used: usize,
    /// Whether `matrix` admits a Cholesky factorization.
    pub positive_definite: bool,
}

impl<T: Real> CovarianceEstimate<T> {
    pub fn new(location: Vec<T>, matrix: SymMatrix<T>, estimator_tag: impl Into<String>, n_used: usize) -> Self {
        let positive_definite = is_positive_definite(&matrix);
        CovarianceEstimate {
            location,
            matrix,
            estimator_tag: estimator_tag.into(),
            n_used,
            positive_definite,
        }
    }

    pub fn dim(&self) -> usize {
        self.location.len()
    }

    /// `V_ij / sqrt(V_ii V_jj)`.
    pub fn correlation(&self, i: usize, j: usize) -> T {
        let m = &self.matrix;
        m[(i, j)] / (m[(i, i)] * m[(j, j)]).sqrt()
    }

    pub fn correlation_matrix(&self) -> Result<SymMatrix<T>> {
        self.matrix.to_correlation()
    }

    /// Restriction to the variables `i` and `j`.
    pub fn bivariate(&self, i: usize, j: usize) -> Self {
        let idx = [i, j];
        CovarianceEstimate {
            location: vec![self.location[i], self.location[j]],
            matrix: SymMatrix::from_lower(2, |a, b| self.matrix[(idx[a], idx[b])]),
            estimator_tag: self.estimator_tag.clone(),
            n_used: self.n_used,
            positive_definite: is_positive_definite(&SymMatrix::from_lower(2, |a, b| {
                self.matrix[(idx[a], idx[b])]
            })),
        }
    }
}

fn check_pair<T>(x: &[T], y: &[T], min_n: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < min_n {
        return Err(Error::TooFewObservations {
            needed: min_n,
            got: x.len(),
        });
    }
    Ok(())
}

fn mean<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::of_usize(x.len())
}

fn clamp_unit<T: Real>(r: T) -> T {
    // only rounding excess is trimmed
    if r > T::one() && r - T::one() < T::of(1e-12) {
        T::one()
    } else if r < -T::one() && -T::one() - r < T::of(1e-12) {
        -T::one()
    } else {
        r
    }
}

/// Sample covariance with the n − 1 divisor.
pub fn cov_classical<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 2)?;
    let (mx, my) = (mean(x), mean(y));
    let s: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    Ok(s / T::of_usize(x.len() - 1))
}

/// Pearson product-moment correlation.
pub fn pearson_r<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 2)?;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    let mut syy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::ConstantInput);
    }
    let denom = match (sxx * syy).sqrt() {
        d if d.is_finite() => d,
        _ => sxx.sqrt() * syy.sqrt(),
    };
    Ok(clamp_unit(sxy / denom))
}

/// Average ranks, 1-based; tied values share the mean of their positions.
pub fn average_ranks<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank (i + j)/2 + 1
        let r = T::of((i + j) as f64 / 2.0 + 1.0);
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson correlation of the average ranks.
pub fn spearman_rho<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 3)?;
    pearson_r(&average_ranks(x), &average_ranks(y))
}

/// Kendall's τ with tied pairs (in either coordinate) left uncounted:
/// `(N_c − N_d)/(N_c + N_d)`.
pub fn kendall_tau<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 3)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0usize, 0usize);
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (x[j] - x[i]) * (y[j] - y[i]);
            if s > T::zero() {
                concordant += 1;
            } else if s < T::zero() {
                discordant += 1;
            }
        }
    }
    let total = concordant + discordant;
    if total == 0 {
        return Err(Error::AllPairsTied);
    }
    Ok(T::of((concordant as f64 - discordant as f64) / total as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RankMethod {
    Spearman,
    Kendall,
}

impl RankMethod {
    pub fn correlation<T: Real>(self, x: &[T], y: &[T]) -> Result<T> {
        match self {
            RankMethod::Spearman => spearman_rho(x, y),
            RankMethod::Kendall => kendall_tau(x, y),
        }
    }
}

fn positive_scale<T: Real>(est: ScaleEstimator, x: &[T], what: &str) -> Result<T> {
    let s = robust_scale(est, x)?;
    if s > T::zero() {
        Ok(s)
    } else {
        Err(Error::ZeroScale(format!("{est} of {what} is zero")))
    }
}

/// Rank correlation times the two robust scales.
pub fn cov_rank<T: Real>(method: RankMethod, est: ScaleEstimator, x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 3)?;
    let sx = positive_scale(est, x, "x")?;
    let sy = positive_scale(est, y, "y")?;
    Ok(method.correlation(x, y)? * sx * sy)
}

/// Gnanadesikan–Kettenring covariance `(s*(x+y)² − s*(x−y)²)/4`.
pub fn cov_gk<T: Real>(est: ScaleEstimator, x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 2)?;
    let sum: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a + b).collect();
    let diff: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
    let s1 = robust_scale(est, &sum)?;
    let s2 = robust_scale(est, &diff)?;
    Ok((s1 * s1 - s2 * s2) / T::of(4.0))
}

/// Bounded Gnanadesikan–Kettenring correlation computed on data standardized
/// by their own robust scales.
pub fn cor_gk<T: Real>(est: ScaleEstimator, x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 2)?;
    let sx = positive_scale(est, x, "x")?;
    let sy = positive_scale(est, y, "y")?;
    cor_gk_scaled(est, x, y, sx, sy)
}

fn cor_gk_scaled<T: Real>(est: ScaleEstimator, x: &[T], y: &[T], sx: T, sy: T) -> Result<T> {
    let plus: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a / sx + b / sy).collect();
    let minus: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a / sx - b / sy).collect();
    let sp = robust_scale(est, &plus)?;
    let sm = robust_scale(est, &minus)?;
    let (vp, vm) = (sp * sp, sm * sm);
    if vp + vm == T::zero() {
        return Err(Error::ZeroScale("both standardized sum and difference have zero scale".into()));
    }
    Ok(((vp - vm) / (vp + vm)).max(-T::one()).min(T::one()))
}

/// `cor_gk(x, y) · s*(x) · s*(y)`.
pub fn cov_rgk<T: Real>(est: ScaleEstimator, x: &[T], y: &[T]) -> Result<T> {
    check_pair(x, y, 2)?;
    let sx = positive_scale(est, x, "x")?;
    let sy = positive_scale(est, y, "y")?;
    Ok(cor_gk_scaled(est, x, y, sx, sy)? * sx * sy)
}

/// Which pairwise estimator fills the off-diagonal of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairwiseKind {
    Classical,
    Rank(RankMethod),
    Gk,
    Rgk,
}

impl PairwiseKind {
    pub fn tag(&self, est: ScaleEstimator) -> String {
        match self {
            PairwiseKind::Classical => "classical".to_string(),
            PairwiseKind::Rank(RankMethod::Spearman) => format!("rank_spearman({est})"),
            PairwiseKind::Rank(RankMethod::Kendall) => format!("rank_kendall({est})"),
            PairwiseKind::Gk => format!("gk({est})"),
            PairwiseKind::Rgk => format!("rgk({est})"),
        }
    }
}

impl fmt::Display for PairwiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairwiseKind::Classical => "classical",
            PairwiseKind::Rank(RankMethod::Spearman) => "rank_spearman",
            PairwiseKind::Rank(RankMethod::Kendall) => "rank_kendall",
            PairwiseKind::Gk => "gk",
            PairwiseKind::Rgk => "rgk",
        })
    }
}

impl FromStr for PairwiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(PairwiseKind::Classical),
            "rank_spearman" | "spearman" => Ok(PairwiseKind::Rank(RankMethod::Spearman)),
            "rank_kendall" | "kendall" => Ok(PairwiseKind::Rank(RankMethod::Kendall)),
            "gk" => Ok(PairwiseKind::Gk),
            "rgk" => Ok(PairwiseKind::Rgk),
            other => Err(Error::InvalidArgument(format!("unknown pairwise estimator `{other}`"))),
        }
    }
}

/// Applies a pairwise estimator to every column pair of a complete matrix.
///
/// The diagonal holds `s*(x_j)²` (the variance for the classical kind) and
/// the location is the location paired with `est`. Positive definiteness is
/// reported, not enforced.
pub fn pairwise_matrix<T: Real>(kind: PairwiseKind, est: ScaleEstimator, m: &DataMatrix<T>) -> Result<CovarianceEstimate<T>> {
    let n = m.nrows();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    if kind == PairwiseKind::Classical {
        return classical_estimate(m);
    }
    let cols = m.columns()?;
    let p = cols.len();
    let location: Vec<T> = cols
        .iter()
        .map(|c| robust_location(est, c))
        .collect::<Result<_>>()?;
    let scales: Vec<T> = cols
        .iter()
        .zip(m.col_ids())
        .map(|(c, id)| positive_scale(est, c, &format!("column `{id}`")))
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let off: Vec<T> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (x, y) = (&cols[i], &cols[j]);
            match kind {
                PairwiseKind::Classical => unreachable!(),
                PairwiseKind::Rank(method) => Ok(method.correlation(x, y)? * scales[i] * scales[j]),
                PairwiseKind::Gk => cov_gk(est, x, y),
                PairwiseKind::Rgk => Ok(cor_gk_scaled(est, x, y, scales[i], scales[j])? * scales[i] * scales[j]),
            }
        })
        .collect::<Result<_>>()?;

    let mut k = 0;
    let mut lower = vec![vec![T::zero(); p]; p];
    for &(i, j) in &pairs {
        lower[i][j] = off[k];
        k += 1;
    }
    let matrix = SymMatrix::from_lower(p, |i, j| if i == j { scales[i] * scales[i] } else { lower[i][j] });
    Ok(CovarianceEstimate::new(location, matrix, kind.tag(est), n))
}

/// Mean vector and (n − 1)-divisor covariance of the selected rows of `x`.
pub(crate) fn mean_cov_rows<T: Real>(x: &Matrix<T>, rows: &[usize]) -> (Vec<T>, SymMatrix<T>) {
    let p = x.ncols();
    let h = T::of_usize(rows.len());
    let mut mu = vec![T::zero(); p];
    for &i in rows {
        for (m, &v) in mu.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= h);
    let mut acc: Matrix<T> = Matrix::zeros(p, p);
    for &i in rows {
        let r = x.row(i);
        for a in 0..p {
            let da = r[a] - mu[a];
            for b in 0..=a {
                acc[(a, b)] += da * (r[b] - mu[b]);
            }
        }
    }
    let d = h - T::one();
    (mu, SymMatrix::from_lower(p, |a, b| acc[(a, b)] / d))
}

/// Sample mean and covariance of a complete matrix.
pub fn classical_estimate<T: Real>(m: &DataMatrix<T>) -> Result<CovarianceEstimate<T>> {
    let n = m.nrows();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let x = m.to_matrix()?;
    let all: Vec<usize> = (0..n).collect();
    let (mu, v) = mean_cov_rows(&x, &all);
    Ok(CovarianceEstimate::new(mu, v, "classical", n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_basics() {
        assert_eq!(cov_classical(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0);
        assert!(cov_classical(&[1.0], &[1.0]).is_err());
        assert_eq!(cov_classical(&[1.0, 2.0], &[1.0]).unwrap_err(), Error::LengthMismatch(2, 1));
        assert_eq!(pearson_r(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap(), 1.0);
        assert_eq!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 4.0]).unwrap_err(), Error::ConstantInput);
    }

    #[test]
    fn spearman_three_point() {
        // d = (0, -1, 1): 1 - 6·2/(3·8) = 0.5
        assert!((spearman_rho(&[1.0_f64, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[2.0, 5.0, 9.0]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&[1.0, 1.0, 1.0], &[2.0, 5.0, 9.0]).unwrap_err(), Error::ConstantInput);
    }

    #[test]
    fn kendall_hand_enumeration() {
        let x = [1.0_f64, 2.0, 3.0];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((kendall_tau(&x, &[1.0, 3.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // ties are not counted: only the (1,3) pair is usable
        assert_eq!(kendall_tau(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(kendall_tau(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(), Error::AllPairsTied);
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn gk_identities() {
        let x = [1.0_f64, 4.0, 2.0, 8.0, 5.0, 7.0];
        let y = [2.0, 3.0, 1.0, 9.0, 4.0, 6.0];
        let sd = ScaleEstimator::ClassicalSd;
        let c = cov_classical(&x, &y).unwrap();
        assert!((cov_gk(sd, &x, &y).unwrap() - c).abs() < 1e-12);
        for est in [ScaleEstimator::Made, ScaleEstimator::Qn, ScaleEstimator::tau(), sd] {
            let s = robust_scale(est, &x).unwrap();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            assert!((cov_gk(est, &x, &x).unwrap() - s * s).abs() < 1e-12);
            assert!((cov_gk(est, &x, &neg).unwrap() + s * s).abs() < 1e-12);
            assert_eq!(cor_gk(est, &x, &x).unwrap(), 1.0);
            assert_eq!(cor_gk(est, &x, &neg).unwrap(), -1.0);
            assert!((cov_rgk(est, &x, &x).unwrap() - s * s).abs() < 1e-12);
        }
    }

    #[test]
    fn rgk_is_antisymmetric() {
        let x = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0, 3.0];
        let y = [2.0, 3.0, 1.0, 9.0, 4.0, 6.0, 6.5];
        let ny: Vec<f64> = y.iter().map(|v| -v).collect();
        let a = cov_rgk(ScaleEstimator::Made, &x, &y).unwrap();
        let b = cov_rgk(ScaleEstimator::Made, &x, &ny).unwrap();
        assert!((a + b).abs() < 1e-10);
    }

    #[test]
    fn zero_scale_is_reported() {
        let x = [1.0, 1.0, 1.0, 1.0, 5.0];
        let y = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(matches!(cor_gk(ScaleEstimator::Made, &x, &y), Err(Error::ZeroScale(_))));
        assert!(matches!(
            cov_rank(RankMethod::Spearman, ScaleEstimator::Made, &x, &y),
            Err(Error::ZeroScale(_))
        ));
    }

    #[test]
    fn single_column_matrix() {
        let m = DataMatrix::from_unlabeled_columns(&[vec![1.0, 2.0, 4.0, 7.0]]).unwrap();
        for kind in [PairwiseKind::Classical, PairwiseKind::Gk, PairwiseKind::Rgk] {
            let e = pairwise_matrix(kind, ScaleEstimator::Made, &m).unwrap();
            assert_eq!(e.dim(), 1);
        }
        let e = pairwise_matrix(PairwiseKind::Rgk, ScaleEstimator::Made, &m).unwrap();
        let s = robust_scale(ScaleEstimator::Made, &[1.0, 2.0, 4.0, 7.0]).unwrap();
        assert_eq!(e.matrix[(0, 0)], s * s);
        assert_eq!(e.location, vec![3.0]);
    }

    #[test]
    fn kind_names_round_trip() {
        for s in ["classical", "rank_spearman", "rank_kendall", "gk", "rgk"] {
            assert_eq!(s.parse::<PairwiseKind>().unwrap().to_string(), s);
        }
    }
}
