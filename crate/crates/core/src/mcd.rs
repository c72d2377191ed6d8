//! Minimum covariance determinant estimator.
//!
//! Small problems are solved by enumerating every h-subset; larger ones by
//! concentration steps from seeded random starts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::{chisq_cdf, chisq_quantile, Cholesky, Matrix, SymMatrix};
use crate::pairwise::{mean_cov_rows, CovarianceEstimate};
use crate::scalar::Real;
use crate::scale::median;

const MAX_C_STEPS: usize = 200;
/// Length of the index prefixes handed to worker threads during enumeration.
const PREFIX_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McdConfig {
    pub h_fraction: f64,
    pub n_starts: usize,
    /// Enumerate all subsets when their count is at most this.
    pub exhaustive_limit: u64,
    pub seed: u64,
    pub reweight: bool,
}

impl Default for McdConfig {
    fn default() -> Self {
        McdConfig {
            h_fraction: 0.5,
            n_starts: 500,
            exhaustive_limit: 6_000_000,
            seed: 0,
            reweight: true,
        }
    }
}

impl McdConfig {
    /// Subset size for `n` rows and `p` columns.
    pub fn subset_size(&self, n: usize, p: usize) -> usize {
        let from_fraction = (self.h_fraction * n as f64).floor() as usize;
        from_fraction.max((n + p).div_ceil(2)).min(n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McdResult<T> {
    /// Final estimate: reweighted when requested, otherwise the raw one.
    pub estimate: CovarianceEstimate<T>,
    /// Consistency-scaled estimate from the optimal subset.
    pub raw: CovarianceEstimate<T>,
    /// Optimal h-subset, ascending row indices.
    pub subset: Vec<usize>,
    /// Determinant of the subset's unscaled sample covariance.
    pub raw_determinant: T,
    pub exhaustive: bool,
    /// Squared distances of every row from the raw estimate.
    pub raw_distances: Vec<T>,
    /// Rows kept by reweighting (all rows when it is off).
    pub kept: Vec<bool>,
}

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Factor that makes the covariance of the `h_over_n` fraction of points
/// closest to the centre consistent at the multivariate normal:
/// `α / F_{p+2}(q_α(p))` with `q_α(p)` the χ²(p) α-quantile.
pub fn mcd_consistency_factor(h_over_n: f64, p: usize) -> Result<f64> {
    if !(0.5..=1.0).contains(&h_over_n) {
        return Err(Error::InvalidArgument(format!(
            "subset fraction {h_over_n} outside [0.5, 1]"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    if h_over_n == 1.0 {
        return Ok(1.0);
    }
    let q: f64 = chisq_quantile(h_over_n, p)?;
    Ok(h_over_n / chisq_cdf(q, p + 2))
}

/// Relative pivot below which a subset covariance counts as singular.
fn pivot_tolerance<T: Real>() -> T {
    T::of(1e-12).max(T::epsilon() * T::of(64.0))
}

/// Determinant of a covariance matrix, or `None` when it is numerically
/// singular.
fn pd_determinant<T: Real>(v: &SymMatrix<T>) -> Option<T> {
    let c = Cholesky::factor(v).ok()?;
    let l = c.lower();
    let tol = pivot_tolerance::<T>();
    let mut det = T::one();
    for j in 0..v.dim() {
        let pivot = l[(j, j)] * l[(j, j)];
        if !(pivot > tol * v[(j, j)]) {
            return None;
        }
        det *= pivot;
    }
    Some(det).filter(|d| d.is_finite())
}

fn distances_from<T: Real>(x: &Matrix<T>, mu: &[T], chol: &Cholesky<T>) -> Vec<T> {
    (0..x.nrows())
        .map(|i| {
            let d: Vec<T> = x.row(i).iter().zip(mu).map(|(&a, &b)| a - b).collect();
            chol.inverse_quad_form(&d)
        })
        .collect()
}

/// Indices of the `h` smallest distances (ties broken by index), ascending.
fn smallest<T: Real>(d: &[T], h: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut out = order[..h].to_vec();
    out.sort_unstable();
    out
}

fn c_step_matrix<T: Real>(x: &Matrix<T>, subset: &[usize]) -> Result<Vec<usize>> {
    let (mu, v) = mean_cov_rows(x, subset);
    let chol = Cholesky::factor(&v)?;
    Ok(smallest(&distances_from(x, &mu, &chol), subset.len()))
}

/// One concentration step: the `|subset|` rows closest to the subset's own
/// mean under its covariance, as ascending indices.
pub fn c_step<T: Real>(m: &DataMatrix<T>, subset: &[usize]) -> Result<Vec<usize>> {
    let x = m.to_matrix()?;
    let n = x.nrows();
    if subset.is_empty() || subset.len() > n {
        return Err(Error::InvalidArgument(format!("subset size {} for {n} rows", subset.len())));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, dim: n });
    }
    c_step_matrix(&x, subset)
}

fn subset_determinant<T: Real>(x: &Matrix<T>, subset: &[usize]) -> Option<T> {
    pd_determinant(&mean_cov_rows(x, subset).1)
}

/// Better candidate: smaller determinant, then lexicographically smaller subset.
fn better<T: Real>(a: (T, Vec<usize>), b: (T, Vec<usize>)) -> (T, Vec<usize>) {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => a,
        Some(std::cmp::Ordering::Greater) => b,
        _ => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

fn fold_best<T: Real>(acc: Option<(T, Vec<usize>)>, c: Option<(T, Vec<usize>)>) -> Option<(T, Vec<usize>)> {
    match (acc, c) {
        (Some(a), Some(b)) => Some(better(a, b)),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Running sums along one branch of the enumeration.
struct Accumulator<T> {
    p: usize,
    /// `depth × p` column sums.
    s1: Vec<T>,
    /// `depth × p(p+1)/2` packed lower-triangle cross products.
    s2: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Real> Accumulator<T> {
    fn new(p: usize, h: usize) -> Self {
        let t = p * (p + 1) / 2;
        Accumulator {
            p,
            s1: vec![T::zero(); (h + 1) * p],
            s2: vec![T::zero(); (h + 1) * t],
            scratch: vec![T::zero(); p * p],
        }
    }

    /// Level `depth + 1` = level `depth` plus row `r`.
    fn push(&mut self, depth: usize, r: &[T]) {
        let p = self.p;
        let t = p * (p + 1) / 2;
        for a in 0..p {
            self.s1[(depth + 1) * p + a] = self.s1[depth * p + a] + r[a];
        }
        let mut k = 0;
        for a in 0..p {
            for b in 0..=a {
                self.s2[(depth + 1) * t + k] = self.s2[depth * t + k] + r[a] * r[b];
                k += 1;
            }
        }
    }

    /// Determinant of the sample covariance at level `h`, if positive.
    fn determinant(&mut self, h: usize) -> Option<T> {
        let p = self.p;
        let t = p * (p + 1) / 2;
        let hh = T::of_usize(h);
        let denom = T::of_usize(h - 1);
        let s1 = &self.s1[h * p..(h + 1) * p];
        let s2 = &self.s2[h * t..(h + 1) * t];
        let a = &mut self.scratch;
        let mut k = 0;
        for i in 0..p {
            for j in 0..=i {
                let v = (s2[k] - s1[i] * s1[j] / hh) / denom;
                a[i * p + j] = v;
                a[j * p + i] = v;
                k += 1;
            }
        }
        // in-place Cholesky; the determinant is the product of squared pivots
        let tol = pivot_tolerance::<T>();
        let mut det = T::one();
        for j in 0..p {
            let mut d = a[j * p + j];
            for q in 0..j {
                d -= a[j * p + q] * a[j * p + q];
            }
            if !(d > tol * a[j * p + j]) {
                return None;
            }
            det *= d;
            let djj = d.sqrt();
            a[j * p + j] = djj;
            for i in (j + 1)..p {
                let mut s = a[i * p + j];
                for q in 0..j {
                    s -= a[i * p + q] * a[j * p + q];
                }
                a[i * p + j] = s / djj;
            }
        }
        if det.is_finite() {
            Some(det)
        } else {
            None
        }
    }
}

/// Depth-first enumeration of all h-subsets that extend `prefix`.
fn enumerate_from<T: Real>(y: &Matrix<T>, h: usize, prefix: &[usize]) -> Option<(T, Vec<usize>)> {
    let n = y.nrows();
    let mut acc = Accumulator::new(y.ncols(), h);
    let mut idx = vec![0usize; h];
    for (d, &i) in prefix.iter().enumerate() {
        idx[d] = i;
        acc.push(d, y.row(i));
    }
    let mut best: Option<(T, Vec<usize>)> = None;
    let start = prefix.len();
    if start == h {
        return acc.determinant(h).map(|d| (d, idx));
    }
    // idx[start..] walks combinations in lexicographic order
    let mut depth = start;
    let mut next = prefix.last().map_or(0, |&i| i + 1);
    loop {
        if depth == h {
            if let Some(d) = acc.determinant(h) {
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, idx.clone()));
                }
            }
            depth -= 1;
            next = idx[depth] + 1;
        } else if n - next < h - depth {
            if depth == start {
                break;
            }
            depth -= 1;
            next = idx[depth] + 1;
        } else {
            idx[depth] = next;
            acc.push(depth, y.row(next));
            depth += 1;
            next += 1;
        }
    }
    best
}

/// Prefixes of length `k` whose completion to an h-subset is possible.
fn prefixes(n: usize, h: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, h: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let slots_after = h - cur.len() - 1;
        for i in from..n {
            if i + slots_after >= n {
                break;
            }
            cur.push(i);
            rec(n, h, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, h, k, 0, &mut cur, &mut out);
    out
}

fn exhaustive_search<T: Real>(x: &Matrix<T>, h: usize) -> Result<(T, Vec<usize>)> {
    let (n, p) = (x.nrows(), x.ncols());
    // centring at the column medians keeps the running sums well conditioned
    let centre: Vec<T> = (0..p).map(|j| median(&x.column(j))).collect::<Result<_>>()?;
    let y = Matrix::from_fn(n, p, |i, j| x[(i, j)] - centre[j]);
    let best = prefixes(n, h, PREFIX_LEN.min(h))
        .par_iter()
        .map(|pre| enumerate_from(&y, h, pre))
        .reduce(|| None, fold_best)
        .ok_or(Error::DegenerateSubsets)?;
    // report the determinant of the subset computed directly
    let det = subset_determinant(x, &best.1).ok_or(Error::DegenerateSubsets)?;
    Ok((det, best.1))
}

/// Random start: `p + 1` rows of a seeded permutation, extended along that
/// permutation until the covariance is nonsingular.
fn initial_subset<T: Real>(x: &Matrix<T>, perm: &[usize]) -> Option<Vec<usize>> {
    let p = x.ncols();
    for k in (p + 1)..=perm.len() {
        let mut s = perm[..k].to_vec();
        s.sort_unstable();
        if subset_determinant(x, &s).is_some() {
            return Some(s);
        }
    }
    None
}

fn concentrate<T: Real>(x: &Matrix<T>, h: usize, start: Vec<usize>) -> Option<(T, Vec<usize>)> {
    // first step from the small start straight to size h
    let (mu, v) = mean_cov_rows(x, &start);
    let chol = Cholesky::factor(&v).ok()?;
    let mut cur = smallest(&distances_from(x, &mu, &chol), h);
    let mut det = subset_determinant(x, &cur)?;
    for _ in 0..MAX_C_STEPS {
        let next = match c_step_matrix(x, &cur) {
            Ok(s) => s,
            Err(_) => break,
        };
        if next == cur {
            break;
        }
        match subset_determinant(x, &next) {
            Some(d) if d < det => {
                det = d;
                cur = next;
            }
            _ => break,
        }
    }
    Some((det, cur))
}

fn concentration_search<T: Real>(x: &Matrix<T>, h: usize, cfg: &McdConfig) -> Result<(T, Vec<usize>)> {
    let n = x.nrows();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.seed);
    let perms: Vec<Vec<usize>> = (0..cfg.n_starts)
        .map(|_| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect();
    perms
        .par_iter()
        .map(|perm| initial_subset(x, perm).and_then(|s| concentrate(x, h, s)))
        .reduce(|| None, fold_best)
        .ok_or(Error::DegenerateSubsets)
}

/// Fits the MCD estimator.
pub fn cov_mcd<T: Real>(m: &DataMatrix<T>, cfg: &McdConfig) -> Result<McdResult<T>> {
    if !(0.5..=1.0).contains(&cfg.h_fraction) {
        return Err(Error::InvalidArgument(format!(
            "h fraction {} outside [0.5, 1]",
            cfg.h_fraction
        )));
    }
    let x = m.to_matrix()?;
    let (n, p) = (x.nrows(), x.ncols());
    if n < p + 2 {
        return Err(Error::TooFewObservations { needed: p + 2, got: n });
    }
    let h = cfg.subset_size(n, p);
    if p >= h {
        return Err(Error::InvalidArgument(format!("subset size {h} must exceed the dimension {p}")));
    }
    if cfg.n_starts == 0 && binomial(n, h) > cfg.exhaustive_limit {
        return Err(Error::InvalidArgument("n_starts must be positive".into()));
    }

    let exhaustive = binomial(n, h) <= cfg.exhaustive_limit;
    let (raw_determinant, subset) = if exhaustive {
        exhaustive_search(&x, h)?
    } else {
        concentration_search(&x, h, cfg)?
    };

    let (mu, cov_h) = mean_cov_rows(&x, &subset);
    let c_raw = T::of(mcd_consistency_factor(h as f64 / n as f64, p)?);
    let tag = format!("mcd(h={h})");
    let raw = CovarianceEstimate::new(mu, cov_h.scaled(c_raw), tag.clone(), n);
    let chol = Cholesky::factor(&raw.matrix)?;
    let raw_distances = distances_from(&x, &raw.location, &chol);

    if !cfg.reweight {
        return Ok(McdResult {
            estimate: raw.clone(),
            raw,
            subset,
            raw_determinant,
            exhaustive,
            raw_distances,
            kept: vec![true; n],
        });
    }

    let cutoff: T = chisq_quantile(T::of(0.975), p)?;
    let kept: Vec<bool> = raw_distances.iter().map(|&d| d <= cutoff).collect();
    let rows: Vec<usize> = (0..n).filter(|&i| kept[i]).collect();
    if rows.len() <= p {
        return Err(Error::AllRowsRejected);
    }
    let (mu_w, cov_w) = mean_cov_rows(&x, &rows);
    let c_rew = T::of(mcd_consistency_factor(0.975, p)?);
    let estimate = CovarianceEstimate::new(mu_w, cov_w.scaled(c_rew), format!("{tag}+rew"), n);
    Ok(McdResult {
        estimate,
        raw,
        subset,
        raw_determinant,
        exhaustive,
        raw_distances,
        kept,
    })
}
