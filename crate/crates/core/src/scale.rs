//! Univariate robust location and scale.
//!
//! Every scale estimator here is consistency-scaled so that it estimates the
//! standard deviation for normal data. Constant input yields a scale of 0;
//! callers that divide by a scale check for that themselves.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_quantile};
use crate::scalar::Real;

/// Normal-consistency factor for the median absolute deviation.
pub const MADE_FACTOR: f64 = 1.4826;

/// Asymptotic normal-consistency constant of Qn.
pub const QN_FACTOR: f64 = 2.2219;

pub const TAU_C1: f64 = 4.5;
pub const TAU_C2: f64 = 3.0;

/// Finite-sample correction of Qn for n = 2..=9.
const QN_SMALL_SAMPLE: [f64; 8] = [0.399, 0.994, 0.512, 0.844, 0.611, 0.857, 0.669, 0.872];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
#[derive(Default)]
pub enum ScaleEstimator {
    /// Median absolute deviation scaled by 1.4826.
    #[default]
    Made,
    /// Qn, from pairwise absolute differences.
    Qn,
    /// Yohai–Zamar τ-scale with weight cutoff `c1` and truncation `c2`.
    Tau { c1: f64, c2: f64 },
    /// Sample standard deviation (n − 1 divisor).
    ClassicalSd,
}

impl ScaleEstimator {
    pub const fn tau() -> Self {
        ScaleEstimator::Tau {
            c1: TAU_C1,
            c2: TAU_C2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScaleEstimator::Made => "MADe",
            ScaleEstimator::Qn => "Qn",
            ScaleEstimator::Tau { .. } => "tau",
            ScaleEstimator::ClassicalSd => "SD",
        }
    }
}


impl fmt::Display for ScaleEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ScaleEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "made" | "mad" => Ok(ScaleEstimator::Made),
            "qn" => Ok(ScaleEstimator::Qn),
            "tau" => Ok(ScaleEstimator::tau()),
            "sd" | "classical" | "classicalsd" => Ok(ScaleEstimator::ClassicalSd),
            other => Err(Error::InvalidArgument(format!(
                "unknown scale estimator `{other}` (made, qn, tau, sd)"
            ))),
        }
    }
}

fn total_cmp<T: Real>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Sample median; the mean of the two central order statistics for even length.
pub fn median<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut v = x.to_vec();
    Ok(median_in_place(&mut v))
}

pub(crate) fn median_in_place<T: Real>(v: &mut [T]) -> T {
    let n = v.len();
    let mid = n / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(T::neg_infinity(), T::max);
        (lower + upper) * T::of(0.5)
    }
}

pub fn mean<T: Real>(x: &[T]) -> Result<T> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(x.iter().copied().sum::<T>() / T::of_usize(x.len()))
}

/// Unscaled median absolute deviation about the median.
pub fn mad<T: Real>(x: &[T]) -> Result<T> {
    let m = median(x)?;
    let mut dev: Vec<T> = x.iter().map(|&v| (v - m).abs()).collect();
    Ok(median_in_place(&mut dev))
}

fn classical_sd<T: Real>(x: &[T]) -> T {
    let m = x.iter().copied().sum::<T>() / T::of_usize(x.len());
    let ss: T = x.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::of_usize(x.len() - 1)).sqrt()
}

fn qn<T: Real>(x: &[T]) -> T {
    let n = x.len();
    let h = n / 2 + 1;
    let k = h * (h - 1) / 2;
    let mut diffs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            diffs.push((x[i] - x[j]).abs());
        }
    }
    let (_, &mut kth, _) = diffs.select_nth_unstable_by(k - 1, total_cmp);
    let correction = if n <= 9 {
        QN_SMALL_SAMPLE[n - 2]
    } else if n % 2 == 1 {
        n as f64 / (n as f64 + 1.4)
    } else {
        n as f64 / (n as f64 + 3.8)
    };
    T::of(QN_FACTOR * correction) * kth
}

/// `E[min(Z², b²)]` for standard normal `Z`.
fn truncated_second_moment(b: f64) -> f64 {
    let phi = normal_cdf(b);
    let density = (-0.5 * b * b).exp() / (2.0 * std::f64::consts::PI).sqrt();
    2.0 * ((1.0 - b * b) * phi - b * density + b * b) - 1.0
}

/// τ-scale location and scale.
///
/// `s0` is the raw MAD. Observations get weights `(1 − (u/c1)²)²` for
/// `|u| ≤ c1`, `u = (x − median)/s0`, giving the weighted-mean location; the
/// scale is `s0·sqrt(mean(min(((x − loc)/s0)², c2²)) / E)` where `E` makes it
/// consistent for the normal standard deviation.
fn tau_location_scale<T: Real>(x: &[T], c1: f64, c2: f64) -> Result<(T, T)> {
    let med = median(x)?;
    let s0 = mad(x)?;
    if s0 == T::zero() {
        return Ok((med, T::zero()));
    }
    let c1 = T::of(c1);
    let mut wsum = T::zero();
    let mut wx = T::zero();
    for &v in x {
        let u = (v - med) / (s0 * c1);
        if u.abs() <= T::one() {
            let w = (T::one() - u * u) * (T::one() - u * u);
            wsum += w;
            wx += w * v;
        }
    }
    let loc = wx / wsum;
    let c2sq = T::of(c2 * c2);
    let rho: T = x
        .iter()
        .map(|&v| {
            let r = (v - loc) / s0;
            (r * r).min(c2sq)
        })
        .sum();
    let q3: f64 = normal_quantile(0.75)?;
    let expected = T::of(truncated_second_moment(c2 * q3));
    let scale = s0 * (rho / (T::of_usize(x.len()) * expected)).sqrt();
    Ok((loc, scale))
}

/// Robust estimate of the standard deviation.
pub fn robust_scale<T: Real>(est: ScaleEstimator, x: &[T]) -> Result<T> {
    if x.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: x.len(),
        });
    }
    match est {
        ScaleEstimator::Made => Ok(T::of(MADE_FACTOR) * mad(x)?),
        ScaleEstimator::Qn => Ok(qn(x)),
        ScaleEstimator::Tau { c1, c2 } => Ok(tau_location_scale(x, c1, c2)?.1),
        ScaleEstimator::ClassicalSd => Ok(classical_sd(x)),
    }
}

/// Location paired with each scale estimator: the median for MADe and Qn,
/// the τ weighted mean for τ, the arithmetic mean for the classical SD.
pub fn robust_location<T: Real>(est: ScaleEstimator, x: &[T]) -> Result<T> {
    match est {
        ScaleEstimator::Made | ScaleEstimator::Qn => median(x),
        ScaleEstimator::Tau { c1, c2 } => Ok(tau_location_scale(x, c1, c2)?.0),
        ScaleEstimator::ClassicalSd => mean(x),
    }
}

/// Location and scale in one pass (the τ estimator shares its work).
pub fn location_and_scale<T: Real>(est: ScaleEstimator, x: &[T]) -> Result<(T, T)> {
    match est {
        ScaleEstimator::Tau { c1, c2 } => {
            if x.len() < 2 {
                return Err(Error::TooFewObservations {
                    needed: 2,
                    got: x.len(),
                });
            }
            tau_location_scale(x, c1, c2)
        }
        _ => Ok((robust_location(est, x)?, robust_scale(est, x)?)),
    }
}
