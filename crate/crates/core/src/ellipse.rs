//! Data ellipses for Youden plots.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{chisq_quantile, f_quantile, Cholesky};
use crate::pairwise::CovarianceEstimate;
use crate::scalar::Real;

pub const DEFAULT_POINTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipsePolygon<T> {
    /// Upper arc from θ = π to θ = 0, then the lower arc back towards π
    /// without repeating either end point.
    pub points: Vec<(T, T)>,
    pub coverage: T,
    pub t_sq: T,
    pub source: CovarianceEstimate<T>,
    pub n: usize,
}

impl<T: Real> EllipsePolygon<T> {
    /// Vertices with the first one repeated at the end.
    pub fn closed(&self) -> Vec<(T, T)> {
        let mut v = self.points.clone();
        if let Some(&first) = self.points.first() {
            v.push(first);
        }
        v
    }

    /// Shoelace area of the polygon.
    pub fn area(&self) -> T {
        let pts = self.closed();
        let twice: T = pts.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum();
        twice.abs() / T::of(2.0)
    }
}

/// Squared radius of the data ellipse.
///
/// With estimated parameters this is `2(n − 1)·F_cov(2, n − 1)/(n − 2)`;
/// with `known_params` it is the χ²(2) quantile at `coverage`.
pub fn ellipse_t_sq<T: Real>(coverage: T, n: usize, known_params: bool) -> Result<T> {
    if !(coverage > T::zero() && coverage < T::one()) {
        return Err(Error::ProbabilityOutOfRange(coverage.as_f64()));
    }
    if known_params {
        return chisq_quantile(coverage, 2);
    }
    if n < 4 {
        return Err(Error::TooFewObservations { needed: 4, got: n });
    }
    let f = f_quantile(coverage, 2, n - 1)?;
    Ok(T::of(2.0) * T::of_usize(n - 1) * f / T::of_usize(n - 2))
}

struct Bivariate<T> {
    cx: T,
    cy: T,
    sx: T,
    sy: T,
    r: T,
}

fn bivariate<T: Real>(estimate: &CovarianceEstimate<T>) -> Result<Bivariate<T>> {
    if estimate.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: estimate.dim(),
        });
    }
    let v = &estimate.matrix;
    let (vx, vy) = (v[(0, 0)], v[(1, 1)]);
    if !(vx > T::zero() && vy > T::zero()) {
        return Err(Error::ZeroScale("ellipse needs positive variances".into()));
    }
    let (sx, sy) = (vx.sqrt(), vy.sqrt());
    let r = v[(0, 1)] / (sx * sy);
    if !(r.abs() < T::one()) {
        return Err(Error::DegenerateCorrelation(r.as_f64()));
    }
    Ok(Bivariate {
        cx: estimate.location[0],
        cy: estimate.location[1],
        sx,
        sy,
        r,
    })
}

/// Ellipse vertices for `coverage` from a two-variable estimate.
///
/// For `n_points` angles θ from π down to 0, `z_x = T cos θ` and
/// `z_y = r z_x ± sqrt((1 − r²)(T² − z_x²))`, a negative radicand being set
/// to zero; vertices are `(ŝ_x z_x + x̄, ŝ_y z_y + ȳ)`.
pub fn ellipse_points<T: Real>(
    estimate: &CovarianceEstimate<T>,
    coverage: T,
    n: usize,
    n_points: usize,
) -> Result<EllipsePolygon<T>> {
    if n_points < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 ellipse points, got {n_points}")));
    }
    let b = bivariate(estimate)?;
    let t_sq = ellipse_t_sq(coverage, n, false)?;
    let t = t_sq.sqrt();
    let one_minus_r2 = T::one() - b.r * b.r;
    let step = T::of(std::f64::consts::PI) / T::of_usize(n_points - 1);

    let arm = |k: usize| {
        let theta = T::of(std::f64::consts::PI) - step * T::of_usize(k);
        let zx = t * theta.cos();
        // T² − z_x² evaluated as (T sin θ)²
        let rest = t * theta.sin();
        let root = (one_minus_r2 * rest * rest).max(T::zero()).sqrt();
        (zx, b.r * zx, root)
    };
    let place = |zx: T, zy: T| (b.sx * zx + b.cx, b.sy * zy + b.cy);

    let mut points = Vec::with_capacity(2 * n_points - 2);
    for k in 0..n_points {
        let (zx, base, root) = arm(k);
        points.push(place(zx, base + root));
    }
    for k in (1..n_points - 1).rev() {
        let (zx, base, root) = arm(k);
        points.push(place(zx, base - root));
    }
    Ok(EllipsePolygon {
        points,
        coverage,
        t_sq,
        source: estimate.clone(),
        n,
    })
}

/// Quadratic form `(q − c)ᵀ V⁻¹ (q − c)` of a point against a two-variable
/// estimate.
pub fn ellipse_form<T: Real>(q: (T, T), estimate: &CovarianceEstimate<T>) -> Result<T> {
    if estimate.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: estimate.dim(),
        });
    }
    let chol = Cholesky::factor(&estimate.matrix)?;
    Ok(chol.inverse_quad_form(&[q.0 - estimate.location[0], q.1 - estimate.location[1]]))
}

/// True when `q` lies inside or on the ellipse of squared radius `t_sq`.
pub fn point_in_ellipse<T: Real>(q: (T, T), estimate: &CovarianceEstimate<T>, t_sq: T) -> Result<bool> {
    Ok(ellipse_form(q, estimate)? <= t_sq)
}
