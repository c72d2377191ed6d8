#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use robcov::{impute_median, Data64, DataMatrix, Fixture};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut Xoshiro256PlusPlus, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `p` correlated normal columns of length `n`.
pub fn normal_columns(rng: &mut Xoshiro256PlusPlus, n: usize, p: usize) -> Vec<Vec<f64>> {
    let base: Vec<Vec<f64>> = (0..p).map(|_| normal_vec(rng, n)).collect();
    let mix: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if j <= i { rng.gen_range(-1.0..1.0) + if i == j { 1.5 } else { 0.0 } } else { 0.0 }).collect())
        .collect();
    (0..p)
        .map(|i| (0..n).map(|r| (0..p).map(|j| mix[i][j] * base[j][r]).sum::<f64>() + 10.0 * i as f64).collect())
        .collect()
}

pub fn matrix_from(cols: &[Vec<f64>]) -> Data64 {
    DataMatrix::from_unlabeled_columns(cols).unwrap()
}

pub fn potassium() -> Data64 {
    Fixture::Potassium.load()
}

pub fn eight_elements_imputed() -> Data64 {
    impute_median(&Fixture::EightElements.load::<f64>()).unwrap().0
}

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * cofactor_det(&minor)
        })
        .sum()
}

/// Two-pass sample covariance of the given rows.
pub fn subset_cov(rows: &[Vec<f64>], subset: &[usize]) -> Vec<Vec<f64>> {
    let p = rows[0].len();
    let h = subset.len() as f64;
    let mu: Vec<f64> = (0..p).map(|j| subset.iter().map(|&i| rows[i][j]).sum::<f64>() / h).collect();
    (0..p)
        .map(|a| {
            (0..p)
                .map(|b| subset.iter().map(|&i| (rows[i][a] - mu[a]) * (rows[i][b] - mu[b])).sum::<f64>() / (h - 1.0))
                .collect()
        })
        .collect()
}

/// Next k-combination of 0..n in lexicographic order.
pub fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum-determinant h-subset by plain enumeration.
pub fn brute_force_mcd(rows: &[Vec<f64>], h: usize) -> (f64, Vec<usize>) {
    let n = rows.len();
    let mut c: Vec<usize> = (0..h).collect();
    let mut best = (f64::INFINITY, c.clone());
    loop {
        let d = cofactor_det(&subset_cov(rows, &c));
        if d > 0.0 && d < best.0 {
            best = (d, c.clone());
        }
        if !next_combination(&mut c, n) {
            break;
        }
    }
    best
}

pub fn rows_of(m: &Data64) -> Vec<Vec<f64>> {
    m.to_matrix().unwrap().to_rows()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
