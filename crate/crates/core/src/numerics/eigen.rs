use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.vectors.column(k)
    }

    /// `E · diag(values) · Eᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let p = self.values.len();
        Matrix::from_fn(p, p, |i, j| {
            (0..p)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)])
                .sum()
        })
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm falls below `1e-12` times
/// the diagonal norm (or the scalar type's resolution, whichever is coarser).
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive; among equal magnitudes the first index wins.
pub fn eigen_sym<T: Real>(m: &SymMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    if a.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteMatrix);
    }
    let mut v = Matrix::identity(n);
    let tol = T::of(1e-12).max(T::epsilon() * T::of(16.0));

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag += a[(i, i)] * a[(i, i)];
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() <= tol * diag.sqrt() {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::of(2.0) * apq);
                let t = if theta.abs() > T::of(1e150).min(T::max_value().sqrt()) {
                    T::one() / (T::of(2.0) * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s, t);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut lead = 0;
        for i in 1..n {
            if v[(i, src)].abs() > v[(lead, src)].abs() {
                lead = i;
            }
        }
        let sign = if v[(lead, src)] < T::zero() { -T::one() } else { T::one() };
        for i in 0..n {
            vectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

fn rotate<T: Real>(a: &mut Matrix<T>, p: usize, q: usize, c: T, s: T, t: T) {
    let n = a.nrows();
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = c * arq + s * arp;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
}
