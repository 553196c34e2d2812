//! Small dense complex linear algebra, generic over the scalar.
//!
//! Sizes here are tiny (companion matrices, collocation systems of a few hundred
//! unknowns), so plain LU and Householder QR are enough. Norms and condition
//! numbers are diagnostics and go through `nalgebra` in double precision.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cx_f64, re, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![re(T::zero()); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(T::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows);
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..o.cols {
                    out.data[i * o.cols + j] = out.data[i * o.cols + j] + a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(re(T::zero()), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn to_f64(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| cx_f64(self[(i, j)]))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.to_f64().singular_values().max()
    }

    /// 2-norm condition number.
    pub fn condition(&self) -> f64 {
        let s = self.to_f64().singular_values();
        let lo = s.min();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            s.max() / lo
        }
    }

    /// Solves `A X = B` by LU with partial pivoting.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.rows, self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        let scale = a.max_abs();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[(i, col)].norm().partial_cmp(&a[(j, col)].norm()).unwrap())
                .unwrap();
            if !(a[(piv, col)].norm() > scale * T::epsilon()) {
                return Err(Error::IllConditionedFit { cond: f64::INFINITY });
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                }
                for j in 0..x.cols {
                    x.data.swap(piv * x.cols + j, col * x.cols + j);
                }
            }
            let inv = a[(col, col)].inv();
            for i in col + 1..n {
                let f = a[(i, col)] * inv;
                if f.norm() == T::zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(i, j)] = a[(i, j)] - f * v;
                }
                for j in 0..x.cols {
                    let v = x[(col, j)];
                    x[(i, j)] = x[(i, j)] - f * v;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = a[(col, col)].inv();
            for j in 0..x.cols {
                let mut s = x[(col, j)];
                for k in col + 1..n {
                    s = s - a[(col, k)] * x[(k, j)];
                }
                x[(col, j)] = s * inv;
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let bm = Self { rows: b.len(), cols: 1, data: b.to_vec() };
        Ok(self.solve(&bm)?.data)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solution of an overdetermined system.
#[derive(Clone, Debug)]
pub struct LstsqFit<T: Real> {
    pub coeffs: Vec<Complex<T>>,
    /// ‖A c − b‖ / ‖b‖.
    pub relative_residual: T,
    /// Condition number of the column-equilibrated design matrix.
    pub condition: f64,
}

/// Householder least squares with column equilibration.
pub fn lstsq<T: Real>(a: &CMat<T>, b: &[Complex<T>]) -> Result<LstsqFit<T>> {
    let (m, n) = (a.rows, a.cols);
    if m < n {
        return Err(Error::InvalidArgument(format!("{m} equations for {n} unknowns")));
    }
    let mut colscale = vec![T::one(); n];
    let mut r = a.clone();
    for j in 0..n {
        let s = (0..m).fold(T::zero(), |acc, i| acc + r[(i, j)].norm_sqr()).sqrt();
        if s > T::zero() {
            colscale[j] = s;
            for i in 0..m {
                r[(i, j)] = r[(i, j)] / s;
            }
        }
    }
    let condition = r.condition();
    let mut y = b.to_vec();
    for k in 0..n {
        let norm = (k..m).fold(T::zero(), |acc, i| acc + r[(i, k)].norm_sqr()).sqrt();
        if norm == T::zero() {
            return Err(Error::IllConditionedFit { cond: f64::INFINITY });
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == T::zero() { re(T::one()) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        let mut v: Vec<Complex<T>> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] = v[0] - alpha;
        let vn = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        if vn == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for j in k..n {
            let dot = (k..m).fold(re(T::zero()), |acc, i| acc + v[i - k].conj() * r[(i, j)]);
            let f = dot * two / vn;
            for i in k..m {
                r[(i, j)] = r[(i, j)] - v[i - k] * f;
            }
        }
        let dot = (k..m).fold(re(T::zero()), |acc, i| acc + v[i - k].conj() * y[i]);
        let f = dot * two / vn;
        for i in k..m {
            y[i] = y[i] - v[i - k] * f;
        }
    }
    let mut c = vec![re(T::zero()); n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for j in k + 1..n {
            s = s - r[(k, j)] * c[j];
        }
        c[k] = s / r[(k, k)];
    }
    for j in 0..n {
        c[j] = c[j] / colscale[j];
    }
    let bn = b.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let res = a
        .mul_vec(&c)
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (u, v)| acc + (u - v).norm_sqr())
        .sqrt();
    let relative_residual = if bn > T::zero() { res / bn } else { res };
    Ok(LstsqFit { coeffs: c, relative_residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMat<f64> {
        CMat::from_fn(m, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn lu_solves_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 12] {
            let a = random(&mut rng, n, n);
            let x = random(&mut rng, n, 2);
            let b = a.mul(&x);
            let got = a.solve(&b).unwrap();
            let err = got.data.iter().zip(&x.data).fold(0.0f64, |m, (u, v)| m.max((u - v).norm()));
            assert!(err < 1e-10 * a.condition(), "n = {n}: {err}");
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMat::from_fn(2, 2, |_, j| c(1.0 + j as f64, 0.0));
        assert!(a.solve(&CMat::identity(2)).is_err());
    }

    #[test]
    fn least_squares_recovers_consistent_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(&mut rng, 30, 4);
        let x: Vec<_> = (0..4).map(|k| c(k as f64, -0.5)).collect();
        let b = a.mul_vec(&x);
        let fit = lstsq(&a, &b).unwrap();
        for (u, v) in fit.coeffs.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
        assert!(fit.relative_residual < 1e-14);
        assert!(fit.condition.is_finite());
    }

    #[test]
    fn least_squares_residual_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random(&mut rng, 20, 3);
        let b: Vec<_> = (0..20).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let fit = lstsq(&a, &b).unwrap();
        let r: Vec<_> = a.mul_vec(&fit.coeffs).iter().zip(&b).map(|(u, v)| u - v).collect();
        for j in 0..3 {
            let dot = (0..20).fold(c(0.0, 0.0), |acc, i| acc + a[(i, j)].conj() * r[i]);
            assert!(dot.norm() < 1e-12);
        }
    }

    #[test]
    fn norms() {
        let a = CMat::from_fn(2, 2, |i, j| c(if i == j { 3.0 } else { 0.0 }, 0.0));
        assert!((a.spectral_norm() - 3.0).abs() < 1e-14);
        assert!((a.condition() - 1.0).abs() < 1e-14);
    }
}
