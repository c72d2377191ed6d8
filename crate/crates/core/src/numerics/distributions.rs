//! CDFs and quantiles for the χ², F and standard normal distributions.

use crate::error::{Error, Result};
use crate::numerics::special::{regularized_beta, regularized_gamma_p};
use crate::scalar::Real;

const MAX_BISECTIONS: usize = 400;

fn check_prob<T: Real>(prob: T) -> Result<()> {
    if prob > T::zero() && prob < T::one() {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(prob.as_f64()))
    }
}

fn check_df(df: usize) -> Result<()> {
    if df == 0 {
        return Err(Error::InvalidArgument("degrees of freedom must be positive".into()));
    }
    Ok(())
}

pub fn chisq_cdf<T: Real>(x: T, df: usize) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let half = T::of(0.5);
    regularized_gamma_p(T::of_usize(df) * half, x * half)
}

pub fn f_cdf<T: Real>(x: T, df1: usize, df2: usize) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let (d1, d2) = (T::of_usize(df1), T::of_usize(df2));
    let half = T::of(0.5);
    regularized_beta(d1 * x / (d1 * x + d2), d1 * half, d2 * half)
}

pub fn normal_cdf<T: Real>(z: T) -> T {
    let half = T::of(0.5);
    let p = regularized_gamma_p(half, z * z * half);
    if z < T::zero() {
        half * (T::one() - p)
    } else {
        half * (T::one() + p)
    }
}

/// Inverts a nondecreasing CDF on `[lo, ∞)` by bracketing and bisection.
fn invert<T: Real>(prob: T, lo: T, start: T, cdf: impl Fn(T) -> T) -> T {
    let mut lo = lo;
    let mut hi = start;
    while cdf(hi) < prob {
        lo = hi;
        hi *= T::of(2.0);
        if !hi.is_finite() {
            return T::infinity();
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + (hi - lo) * T::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + (hi - lo) * T::of(0.5)
}

/// Lower-tail quantile of χ²(df).
pub fn chisq_quantile<T: Real>(prob: T, df: usize) -> Result<T> {
    check_prob(prob)?;
    check_df(df)?;
    Ok(invert(prob, T::zero(), T::of_usize(df).max(T::one()), |x| chisq_cdf(x, df)))
}

/// Lower-tail quantile of F(df1, df2).
pub fn f_quantile<T: Real>(prob: T, df1: usize, df2: usize) -> Result<T> {
    check_prob(prob)?;
    check_df(df1)?;
    check_df(df2)?;
    Ok(invert(prob, T::zero(), T::one(), |x| f_cdf(x, df1, df2)))
}

pub fn normal_quantile<T: Real>(prob: T) -> Result<T> {
    check_prob(prob)?;
    let shift = T::of(40.0);
    Ok(invert(prob, T::zero(), shift, |x| normal_cdf(x - shift)) - shift)
}
