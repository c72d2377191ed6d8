use crate::error::{Error, Result};
use crate::numerics::{Matrix, SymMatrix};
use crate::scalar::Real;

/// Lower-triangular Cholesky factor `V = L Lᵀ` of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: Matrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(m: &SymMatrix<T>) -> Result<Self> {
        let p = m.dim();
        let mut l = Matrix::zeros(p, p);
        for j in 0..p {
            let mut d = m[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..p {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn lower(&self) -> &Matrix<T> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn determinant(&self) -> T {
        let p = self.dim();
        (0..p).fold(T::one(), |acc, i| acc * self.lower[(i, i)] * self.lower[(i, i)])
    }

    pub fn ln_determinant(&self) -> T {
        let two = T::of(2.0);
        (0..self.dim()).map(|i| two * self.lower[(i, i)].ln()).sum()
    }

    /// Solves `L y = b` in place.
    fn forward(&self, b: &mut [T]) {
        let p = self.dim();
        for i in 0..p {
            let mut s = b[i];
            for k in 0..i {
                s -= self.lower[(i, k)] * b[k];
            }
            b[i] = s / self.lower[(i, i)];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    fn backward(&self, y: &mut [T]) {
        let p = self.dim();
        for i in (0..p).rev() {
            let mut s = y[i];
            for k in (i + 1)..p {
                s -= self.lower[(k, i)] * y[k];
            }
            y[i] = s / self.lower[(i, i)];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// `bᵀ V⁻¹ b`, computed as `|L⁻¹ b|²`.
    pub fn inverse_quad_form(&self, b: &[T]) -> T {
        let mut y = b.to_vec();
        self.forward(&mut y);
        y.iter().map(|&v| v * v).sum()
    }

    pub fn inverse(&self) -> SymMatrix<T> {
        let p = self.dim();
        let mut inv = Matrix::zeros(p, p);
        let mut e = vec![T::zero(); p];
        for j in 0..p {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..p {
                inv[(i, j)] = col[i];
            }
        }
        SymMatrix::symmetrize(&inv)
    }
}

/// Determinant and inverse of a symmetric positive definite matrix.
pub fn det_and_inverse<T: Real>(m: &SymMatrix<T>) -> Result<(T, SymMatrix<T>)> {
    let c = Cholesky::factor(m)?;
    Ok((c.determinant(), c.inverse()))
}

pub fn is_positive_definite<T: Real>(m: &SymMatrix<T>) -> bool {
    Cholesky::factor(m).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        let (d, inv) = det_and_inverse(&SymMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(inv, SymMatrix::identity(3));

        let (d, inv) = det_and_inverse(&SymMatrix::diagonal_from(&[2.0_f64, 8.0])).unwrap();
        assert!((d - 16.0).abs() < 1e-12);
        assert!((inv[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((inv[(1, 1)] - 0.125).abs() < 1e-15);
        assert_eq!(inv[(0, 1)], 0.0);
    }

    #[test]
    fn singular_is_rejected() {
        let m = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(det_and_inverse(&m).unwrap_err(), Error::NotPositiveDefinite);
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(!is_positive_definite(&m));
    }

    #[test]
    fn quad_form_matches_explicit_inverse() {
        let m = SymMatrix::from_rows(&[vec![4.0_f64, 1.0], vec![1.0, 3.0]]).unwrap();
        let c = Cholesky::factor(&m).unwrap();
        let b = [1.0, -2.0];
        let direct = c.inverse().quad_form(&b);
        assert!((c.inverse_quad_form(&b) - direct).abs() < 1e-14);
    }
}
