use crate::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix {
            n,
            data: rows.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `self * selfᵀ`.
    pub fn gram(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = (0..n).map(|k| self[(i, k)] * self[(j, k)]).sum();
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `y = self * x`, exploiting lower-triangular structure when present.
    pub fn mul_lower(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.n..i * self.n + i + 1];
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular `L` with `L Lᵀ = r`. Fails with the 1-based index of the
/// first leading minor that is not positive.
pub fn cholesky(r: &Matrix) -> Result<Matrix> {
    let n = r.dim();
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = r[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { minor: j + 1 });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = r[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

pub const JITTER_START: f64 = 1e-10;
pub const JITTER_MAX: f64 = 1e-4;

/// Factorizes `r`, adding `eps * I` with `eps` doubling from [`JITTER_START`]
/// up to [`JITTER_MAX`] when `r` is only semi-definite. Returns the factor
/// and the jitter used (0 when none was needed).
pub fn cholesky_regularized(r: &Matrix) -> Result<(Matrix, f64)> {
    let mut last = match cholesky(r) {
        Ok(l) => return Ok((l, 0.0)),
        Err(e) => e,
    };
    let mut eps = JITTER_START;
    while eps <= JITTER_MAX {
        let mut jittered = r.clone();
        for i in 0..r.dim() {
            jittered[(i, i)] += eps;
        }
        match cholesky(&jittered) {
            Ok(l) => return Ok((l, eps)),
            Err(e) => last = e,
        }
        eps *= 2.0;
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_factor_is_identity() {
        let i = Matrix::identity(4);
        assert_eq!(cholesky(&i).unwrap(), i);
    }

    #[test]
    fn two_by_two_closed_form() {
        for rho in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            let r = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]);
            let l = cholesky(&r).unwrap();
            let expected = Matrix::from_rows(&[vec![1.0, 0.0], vec![rho, (1.0 - rho * rho).sqrt()]]);
            assert!(l.max_abs_diff(&expected) < 1e-15);
            assert!(l.gram().max_abs_diff(&r) < 1e-15);
        }
    }

    #[test]
    fn random_psd_reconstructs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            // B Bᵀ + I is positive definite
            let b = Matrix::from_rows(
                &(0..5)
                    .map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect::<Vec<_>>(),
            );
            let mut r = b.gram();
            for i in 0..5 {
                r[(i, i)] += 1.0;
            }
            let l = cholesky(&r).unwrap();
            for i in 0..5 {
                for j in i + 1..5 {
                    assert_eq!(l[(i, j)], 0.0);
                }
            }
            assert!(l.gram().max_abs_diff(&r) < 1e-10);
        }
    }

    #[test]
    fn perfectly_correlated_needs_jitter() {
        let r = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(cholesky(&r), Err(Error::NotPositiveDefinite { minor: 2 })));
        let (l, eps) = cholesky_regularized(&r).unwrap();
        assert!(eps >= JITTER_START && eps <= JITTER_MAX);
        assert!(l.gram().max_abs_diff(&r) < 1e-8);
    }

    #[test]
    fn indefinite_fails_with_minor_index() {
        let r = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 2.0, 1.0],
        ]);
        assert!(matches!(
            cholesky_regularized(&r),
            Err(Error::NotPositiveDefinite { minor: 3 })
        ));
    }
}
