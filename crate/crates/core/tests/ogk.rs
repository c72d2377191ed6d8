mod common;

use common::{eight_elements_imputed, matrix_from, normal_columns, normal_vec, potassium, rel_close, rng};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use robcov::numerics::Cholesky;
use robcov::ogk::{cov_ogk, ogk_distances, ogk_fit, OgkConfig};
use robcov::pairwise::classical_estimate;
use robcov::scale::robust_scale;
use robcov::{Data64, Error, ScaleEstimator};

fn default_estimate(m: &Data64) -> robcov::Estimate64 {
    ogk_fit(m, &OgkConfig::default()).unwrap().estimate
}

/// Bivariate normal sample with correlation `rho`.
fn correlated_pair(seed: u64, n: usize, rho: f64) -> Data64 {
    let mut r = rng(seed);
    let x = normal_vec(&mut r, n);
    let e = normal_vec(&mut r, n);
    let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b).collect();
    matrix_from(&[x, y])
}

#[test]
fn potassium_implied_correlation() {
    let e = default_estimate(&potassium());
    assert!((e.correlation(0, 1) - 0.81).abs() < 0.02, "{}", e.correlation(0, 1));
    assert!(e.positive_definite);
    assert_eq!(e.n_used, 25);
}

#[test]
fn reweighted_variant_runs_on_potassium() {
    let e = cov_ogk(&potassium(), ScaleEstimator::tau(), 2, true, 0.9).unwrap();
    assert!(e.estimator_tag.ends_with("+rew"));
    assert!(e.correlation(0, 1) > 0.6);
}

#[test]
fn uncorrelated_sample() {
    let e = default_estimate(&correlated_pair(500, 500, 0.0));
    assert!(e.correlation(0, 1).abs() < 0.15);
}

#[test]
fn single_column_is_squared_scale() {
    let x = normal_vec(&mut rng(3), 40);
    for est in [ScaleEstimator::Made, ScaleEstimator::Qn, ScaleEstimator::tau()] {
        let e = cov_ogk(&matrix_from(std::slice::from_ref(&x)), est, 2, false, 0.9).unwrap();
        let s = robust_scale(est, &x).unwrap();
        assert!(rel_close(e.matrix[(0, 0)], s * s, 1e-10), "{est}");
    }
}

#[test]
fn errors() {
    let tiny = matrix_from(&[vec![1.0, 2.0], vec![3.0, 5.0]]);
    assert!(matches!(default_estimate_err(&tiny), Error::TooFewObservations { .. }));
    let flat = matrix_from(&[vec![1.0, 1.0, 1.0, 1.0, 2.0], vec![1.0, 2.0, 3.0, 4.0, 5.0]]);
    assert!(matches!(default_estimate_err(&flat), Error::ZeroScale(_)));
    let missing: Data64 = robcov::Fixture::EightElements.load();
    assert!(matches!(default_estimate_err(&missing), Error::MissingCells { .. }));
}

fn default_estimate_err(m: &Data64) -> Error {
    ogk_fit(m, &OgkConfig::default()).unwrap_err()
}

#[test]
fn positive_definite_on_random_data() {
    let mut r = rng(11);
    for k in 0..200 {
        let n = r.gen_range(10..=60);
        let p = r.gen_range(2..=6).min(n - 1);
        let mut cols = normal_columns(&mut r, n, p);
        if k % 2 == 1 {
            let bad = (n / 10).max(1);
            for i in 0..bad {
                for c in cols.iter_mut() {
                    c[i] += 50.0 + 10.0 * i as f64;
                }
            }
        }
        let m = matrix_from(&cols);
        let e = default_estimate(&m);
        assert!(Cholesky::factor(&e.matrix).is_ok(), "dataset {k}");
        assert!(e.positive_definite);
    }
}

#[test]
fn row_permutation_invariance() {
    let mut r = rng(21);
    for _ in 0..10 {
        let cols = normal_columns(&mut r, 30, 3);
        let mut order: Vec<usize> = (0..30).collect();
        order.shuffle(&mut r);
        let shuffled: Vec<Vec<f64>> = cols.iter().map(|c| order.iter().map(|&i| c[i]).collect()).collect();
        let a = default_estimate(&matrix_from(&cols));
        let b = default_estimate(&matrix_from(&shuffled));
        for i in 0..3 {
            assert!(rel_close(a.location[i], b.location[i], 1e-10));
            for j in 0..3 {
                assert!((a.matrix[(i, j)] - b.matrix[(i, j)]).abs() <= 1e-10 * a.matrix[(i, i)].max(a.matrix[(j, j)]));
            }
        }
    }
}

#[test]
fn column_scaling_equivariance() {
    let mut r = rng(31);
    for _ in 0..10 {
        let cols = normal_columns(&mut r, 40, 3);
        let factor: f64 = r.gen_range(0.01..100.0);
        let mut scaled = cols.clone();
        scaled[1].iter_mut().for_each(|v| *v *= factor);
        let a = default_estimate(&matrix_from(&cols));
        let b = default_estimate(&matrix_from(&scaled));
        for i in 0..3 {
            for j in 0..3 {
                let k = [i, j].iter().filter(|&&c| c == 1).count() as i32;
                let expect = a.matrix[(i, j)] * factor.powi(k);
                let size = (b.matrix[(i, i)] * b.matrix[(j, j)]).sqrt();
                assert!((b.matrix[(i, j)] - expect).abs() <= 1e-8 * size, "({i},{j})");
            }
        }
    }
}

#[test]
fn breakdown_smoke() {
    let clean = correlated_pair(41, 25, 0.8);
    let mut cols = clean.columns().unwrap();
    for c in cols.iter_mut() {
        for v in c.iter_mut().take(5) {
            *v = 1e9;
        }
    }
    let dirty = matrix_from(&cols);
    let before = default_estimate(&clean);
    let after = default_estimate(&dirty);
    assert!((after.correlation(0, 1) - before.correlation(0, 1)).abs() < 0.2);
    for j in 0..2 {
        assert!(after.matrix[(j, j)] < 10.0 * before.matrix[(j, j)]);
        assert!(after.matrix[(j, j)] > before.matrix[(j, j)] / 10.0);
    }
    let classical = classical_estimate(&dirty).unwrap();
    assert!(classical.correlation(0, 1) > 0.99);
    assert!(classical.matrix[(0, 0)] > 1e10);
}

#[test]
fn eight_elements_lab9_is_most_distant() {
    let m = eight_elements_imputed();
    let d = ogk_distances(&m, ScaleEstimator::tau()).unwrap();
    let top = (0..d.len()).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
    assert_eq!(m.row_ids()[top], "Lab9");
}

#[test]
fn distances_match_independent_inverse() {
    let m = eight_elements_imputed();
    let fit = ogk_fit(&m, &OgkConfig::default()).unwrap();
    let p = m.ncols();
    let v = DMatrix::from_fn(p, p, |i, j| fit.raw.matrix[(i, j)]);
    let inv = v.try_inverse().unwrap();
    let x = m.to_matrix().unwrap();
    for (i, &d) in fit.raw_distances.iter().enumerate() {
        let z = nalgebra::DVector::from_fn(p, |j, _| x[(i, j)] - fit.raw.location[j]);
        let oracle = (z.transpose() * &inv * &z)[(0, 0)];
        assert!(rel_close(d, oracle, 1e-8), "row {i}: {d} vs {oracle}");
    }
}

#[test]
fn location_has_zero_distance() {
    let e = default_estimate(&potassium());
    assert_eq!(robcov::mahalanobis_sq(&e.location, &e.location, &e.matrix).unwrap(), 0.0);
}

#[test]
fn single_precision_agrees() {
    let m64 = potassium();
    let m32: robcov::Data32 = robcov::Fixture::Potassium.load();
    let a = default_estimate(&m64).correlation(0, 1);
    let b = ogk_fit(&m32, &OgkConfig::default()).unwrap().estimate.correlation(0, 1);
    assert!((a - f64::from(b)).abs() < 1e-3);
}
