mod common;

use common::{brute_force_mcd, cofactor_det, matrix_from, normal_columns, normal_vec, potassium, rel_close, rng, rows_of, subset_cov};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use robcov::mcd::{binomial, c_step, cov_mcd, mcd_consistency_factor, McdConfig};
use robcov::numerics::chisq_quantile;
use robcov::pairwise::classical_estimate;
use robcov::{Data64, Error};

fn exhaustive(reweight: bool) -> McdConfig {
    McdConfig {
        exhaustive_limit: u64::MAX,
        reweight,
        ..McdConfig::default()
    }
}

fn search_only(seed: u64) -> McdConfig {
    McdConfig {
        exhaustive_limit: 0,
        seed,
        ..McdConfig::default()
    }
}

#[test]
fn potassium_exhaustive_correlation() {
    let r = cov_mcd(&potassium(), &McdConfig::default()).unwrap();
    assert!(r.exhaustive);
    assert_eq!(r.subset.len(), 14);
    assert!((r.estimate.correlation(0, 1) - 0.86).abs() < 0.02, "{}", r.estimate.correlation(0, 1));
    assert!(r.estimate.positive_definite);
}

#[test]
fn matches_brute_force_oracle() {
    let mut r = rng(15);
    for _ in 0..3 {
        let m = matrix_from(&normal_columns(&mut r, 15, 2));
        let res = cov_mcd(&m, &exhaustive(false)).unwrap();
        let (det, subset) = brute_force_mcd(&rows_of(&m), res.subset.len());
        assert_eq!(res.subset, subset);
        assert!(rel_close(res.raw_determinant, det, 1e-10));
    }
}

#[test]
fn raw_determinant_is_subset_determinant() {
    let m = potassium();
    let res = cov_mcd(&m, &McdConfig::default()).unwrap();
    let oracle = cofactor_det(&subset_cov(&rows_of(&m), &res.subset));
    assert!(rel_close(res.raw_determinant, oracle, 1e-10));
}

#[test]
fn search_agrees_with_enumeration() {
    let mut r = rng(50);
    let mut hits = 0;
    for k in 0..50 {
        let n = r.gen_range(12..=18);
        let mut cols = normal_columns(&mut r, n, 2);
        if k % 3 == 0 {
            cols[1][0] += 8.0;
            cols[0][1] -= 6.0;
        }
        let m = matrix_from(&cols);
        let full = cov_mcd(&m, &exhaustive(false)).unwrap();
        let fast = cov_mcd(&m, &McdConfig { reweight: false, ..search_only(k) }).unwrap();
        assert!(full.exhaustive && !fast.exhaustive);
        assert!(fast.raw_determinant >= full.raw_determinant * (1.0 - 1e-12), "dataset {k}");
        if fast.subset == full.subset {
            hits += 1;
        }
    }
    assert!(hits >= 49, "{hits}/50");
}

#[test]
fn c_step_never_increases_determinant() {
    let m = potassium();
    let rows = rows_of(&m);
    let h = McdConfig::default().subset_size(25, 2);
    let mut r = rng(1000);
    let mut order: Vec<usize> = (0..25).collect();
    for _ in 0..1000 {
        order.shuffle(&mut r);
        let mut subset: Vec<usize> = order[..h].to_vec();
        subset.sort_unstable();
        let mut det = cofactor_det(&subset_cov(&rows, &subset));
        for _ in 0..20 {
            let next = c_step(&m, &subset).unwrap();
            let d = cofactor_det(&subset_cov(&rows, &next));
            assert!(d <= det * (1.0 + 1e-12), "{d} > {det}");
            if next == subset {
                break;
            }
            subset = next;
            det = d;
        }
    }
}

#[test]
fn c_step_fixed_points() {
    let m = potassium();
    let best = cov_mcd(&m, &exhaustive(false)).unwrap();
    assert_eq!(c_step(&m, &best.subset).unwrap(), best.subset);
    let all: Vec<usize> = (0..25).collect();
    assert_eq!(c_step(&m, &all).unwrap(), all);
    assert!(matches!(c_step(&m, &[0, 1, 30]), Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn seed_determinism() {
    let m = matrix_from(&normal_columns(&mut rng(77), 40, 3));
    let a = cov_mcd(&m, &search_only(9)).unwrap();
    let b = cov_mcd(&m, &search_only(9)).unwrap();
    assert!(!a.exhaustive);
    assert_eq!(a, b);
    assert_eq!(a.raw_determinant.to_bits(), b.raw_determinant.to_bits());
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(a.estimate.matrix[(i, j)].to_bits(), b.estimate.matrix[(i, j)].to_bits());
        }
    }
}

#[test]
fn raw_estimate_is_affine_equivariant() {
    let mut r = rng(88);
    for _ in 0..5 {
        let cols = normal_columns(&mut r, 16, 2);
        let a = [[r.gen_range(0.5..3.0), r.gen_range(-1.0..1.0)], [r.gen_range(-1.0..1.0), r.gen_range(0.5..3.0)]];
        let b = [r.gen_range(-100.0..100.0), r.gen_range(-100.0..100.0)];
        let moved: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..16).map(|k| a[i][0] * cols[0][k] + a[i][1] * cols[1][k] + b[i]).collect())
            .collect();
        let before = cov_mcd(&matrix_from(&cols), &exhaustive(false)).unwrap();
        let after = cov_mcd(&matrix_from(&moved), &exhaustive(false)).unwrap();
        assert_eq!(before.subset, after.subset);
        for i in 0..2 {
            let loc = a[i][0] * before.raw.location[0] + a[i][1] * before.raw.location[1] + b[i];
            assert!(rel_close(after.raw.location[i], loc, 1e-6));
            for j in 0..2 {
                let mut v = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        v += a[i][k] * before.raw.matrix[(k, l)] * a[j][l];
                    }
                }
                assert!(rel_close(after.raw.matrix[(i, j)], v, 1e-6));
            }
        }
    }
}

#[test]
fn breakdown_keeps_contamination_out() {
    let mut r = rng(30);
    let mut cols = normal_columns(&mut r, 30, 2);
    let h = McdConfig::default().subset_size(30, 2);
    let bad = 30 - h;
    for c in cols.iter_mut() {
        for v in c.iter_mut().take(bad) {
            let noise: f64 = StandardNormal.sample(&mut r);
            *v = 1e9 + noise;
        }
    }
    let m = matrix_from(&cols);
    let res = cov_mcd(&m, &McdConfig { seed: 3, ..McdConfig::default() }).unwrap();
    assert!(res.subset.iter().all(|&i| i >= bad), "{:?}", res.subset);
    let clean = cov_mcd(&m.select_rows(&(bad..30).collect::<Vec<_>>()).unwrap(), &McdConfig::default()).unwrap();
    for j in 0..2 {
        assert!(res.estimate.matrix[(j, j)] < 10.0 * clean.estimate.matrix[(j, j)]);
    }
    assert!(classical_estimate(&m).unwrap().matrix[(0, 0)] > 1e10);
}

#[test]
fn full_subset_is_classical() {
    let m = potassium();
    let res = cov_mcd(&m, &McdConfig { h_fraction: 1.0, reweight: false, ..McdConfig::default() }).unwrap();
    let c = classical_estimate(&m).unwrap();
    assert_eq!(res.subset, (0..25).collect::<Vec<_>>());
    for i in 0..2 {
        assert!(rel_close(res.estimate.location[i], c.location[i], 1e-14));
        for j in 0..2 {
            assert!(rel_close(res.estimate.matrix[(i, j)], c.matrix[(i, j)], 1e-12));
        }
    }
}

#[test]
fn consistency_factor_against_monte_carlo() {
    let mut r = rng(5);
    for (alpha, p) in [(0.5, 2), (0.75, 1), (0.5, 4), (0.975, 2)] {
        let q: f64 = chisq_quantile(alpha, p).unwrap();
        let mut kept = 0usize;
        let mut sum = 0.0;
        let draws = 400_000;
        for _ in 0..draws {
            let z = normal_vec(&mut r, p);
            let d: f64 = z.iter().map(|v| v * v).sum();
            if d <= q {
                kept += 1;
                sum += z[0] * z[0];
            }
        }
        let c = mcd_consistency_factor(alpha, p).unwrap();
        let truncated_var = sum / kept as f64;
        assert!(rel_close(1.0 / truncated_var, c, 0.02), "({alpha},{p}): {} vs {c}", 1.0 / truncated_var);
    }
}

#[test]
fn consistency_factor_ordering() {
    for p in [1, 2, 4] {
        let a = mcd_consistency_factor(0.5, p).unwrap();
        let b = mcd_consistency_factor(0.75, p).unwrap();
        assert!(a > b && b > 1.0);
        assert_eq!(mcd_consistency_factor(1.0, p).unwrap(), 1.0);
    }
    assert!(mcd_consistency_factor(1.2, 2).is_err());
}

#[test]
fn error_paths() {
    let tiny = matrix_from(&[vec![1.0, 2.0, 3.0], vec![2.0, 1.0, 5.0]]);
    assert!(matches!(cov_mcd(&tiny, &McdConfig::default()), Err(Error::TooFewObservations { .. })));
    let x: Vec<f64> = (0..12).map(f64::from).collect();
    let line = matrix_from(&[x.clone(), x.iter().map(|v| 2.0 * v + 1.0).collect()]);
    assert_eq!(cov_mcd(&line, &McdConfig::default()).unwrap_err(), Error::DegenerateSubsets);
    let missing: Data64 = robcov::Fixture::EightElements.load();
    assert!(matches!(cov_mcd(&missing, &McdConfig::default()), Err(Error::MissingCells { .. })));
    assert_eq!(binomial(29, 19), 20_030_010);
}
