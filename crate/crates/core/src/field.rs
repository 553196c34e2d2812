//! Complex-valued smooth functions on an interval, stored as Chebyshev–Lobatto
//! interpolants.
//!
//! Nodes are ordered left to right, `x_j = mid − half·cos(jπ/N)`. Node values are
//! the primary data; Chebyshev coefficients are derived once at construction so
//! that differentiation and integration are exact operations on the interpolant.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{re, Real};

pub const DEFAULT_RESOLUTION: usize = 64;

#[derive(Clone, Debug)]
pub struct ScalarField<T: Real> {
    lo: T,
    hi: T,
    values: Vec<Complex<T>>,
    coeffs: Vec<Complex<T>>,
    unit: Vec<T>,
}

/// Pointwise operation selector for [`field_algebra`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Continuous logarithm of the second operand.
    Log,
    /// Exponential of the second operand.
    Exp,
    /// `f^g` on the continuous branch of `log f`.
    Pow,
}

fn cos_table<T: Real>(n: usize) -> Vec<T> {
    let pi_n = T::PI() / T::from_usize_(n);
    (0..2 * n).map(|m| (T::from_usize_(m) * pi_n).cos()).collect()
}

/// Unit Lobatto nodes in ascending order.
pub fn lobatto_nodes<T: Real>(n: usize) -> Vec<T> {
    let pi_n = T::PI() / T::from_usize_(n);
    (0..=n)
        .map(|j| {
            // symmetric evaluation keeps the grid exactly antisymmetric
            if 2 * j == n {
                T::zero()
            } else if 2 * j < n {
                -(T::from_usize_(j) * pi_n).cos()
            } else {
                (T::from_usize_(n - j) * pi_n).cos()
            }
        })
        .collect()
}

fn values_to_coeffs<T: Real>(values: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = values.len() - 1;
    if n == 0 {
        return values.to_vec();
    }
    let table = cos_table::<T>(n);
    let two_n = 2 * n;
    let scale = T::lit(2.0) / T::from_usize_(n);
    let half = T::lit(0.5);
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (j, v) in values.iter().enumerate() {
                // T_k(-cos θ_j) = (-1)^k cos(k θ_j)
                let mut w = table[(k * j) % two_n];
                if j == 0 || j == n {
                    w = w * half;
                }
                acc = acc + v * w;
            }
            let mut ck = acc * scale;
            if k % 2 == 1 {
                ck = -ck;
            }
            if k == 0 || k == n {
                ck = ck * half;
            }
            ck
        })
        .collect()
}

fn coeffs_to_values<T: Real>(coeffs: &[Complex<T>]) -> Vec<Complex<T>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return coeffs.to_vec();
    }
    let table = cos_table::<T>(n);
    let two_n = 2 * n;
    (0..=n)
        .into_par_iter()
        .map(|j| {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (k, c) in coeffs.iter().enumerate() {
                let w = table[(k * j) % two_n];
                acc = if k % 2 == 1 { acc - c * w } else { acc + c * w };
            }
            acc
        })
        .collect()
}

/// Barycentric interpolation through Lobatto data at unit abscissa `t`.
fn barycentric<T: Real>(nodes: &[T], values: &[Complex<T>], t: T) -> Complex<T> {
    let n = values.len() - 1;
    if n == 0 {
        return values[0];
    }
    let mut num = Complex::new(T::zero(), T::zero());
    let mut den = T::zero();
    for j in 0..=n {
        let d = t - nodes[j];
        if d == T::zero() {
            return values[j];
        }
        let mut w = if j % 2 == 0 { T::one() } else { -T::one() };
        if j == 0 || j == n {
            w = w * T::lit(0.5);
        }
        let q = w / d;
        num = num + values[j] * q;
        den = den + q;
    }
    num / den
}

/// Clenshaw summation of a Chebyshev series; stable also slightly off the interval.
fn clenshaw<T: Real>(coeffs: &[Complex<T>], t: T) -> Complex<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let (mut b1, mut b2) = (zero, zero);
    let two_t = t + t;
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * two_t - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + b1 * t - b2
}

impl<T: Real> ScalarField<T> {
    /// Field from values at the `N+1` ascending Lobatto nodes of `[lo, hi]`.
    pub fn from_values(lo: T, hi: T, values: Vec<Complex<T>>) -> Self {
        assert!(!values.is_empty(), "a field needs at least one node");
        assert!(hi > lo, "empty interval");
        let coeffs = values_to_coeffs(&values);
        let unit = lobatto_nodes(values.len() - 1);
        Self { lo, hi, values, coeffs, unit }
    }

    /// Field from Chebyshev coefficients on `[lo, hi]`.
    pub fn from_coeffs(lo: T, hi: T, coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty() && hi > lo);
        let values = coeffs_to_values(&coeffs);
        let unit = lobatto_nodes(values.len() - 1);
        Self { lo, hi, values, coeffs, unit }
    }

    pub fn constant(lo: T, hi: T, value: Complex<T>) -> Self {
        Self::from_values(lo, hi, vec![value; DEFAULT_RESOLUTION + 1])
    }

    /// The identity function `x ↦ x`.
    pub fn identity(lo: T, hi: T) -> Self {
        Self::from_fn_n(lo, hi, DEFAULT_RESOLUTION, re)
    }

    /// Samples `f` on a fixed resolution-`n` grid.
    pub fn from_fn_n<F>(lo: T, hi: T, n: usize, f: F) -> Self
    where
        F: Fn(T) -> Complex<T> + Sync,
    {
        let mid = (lo + hi) * T::lit(0.5);
        let half = (hi - lo) * T::lit(0.5);
        let values = lobatto_nodes::<T>(n)
            .into_par_iter()
            .map(|t| f(mid + half * t))
            .collect();
        Self::from_values(lo, hi, values)
    }

    /// Samples `f` adaptively: start at [`DEFAULT_RESOLUTION`] and double until the
    /// interpolant predicts the new midpoint samples to the scalar's field tolerance.
    pub fn from_fn<F>(lo: T, hi: T, f: F) -> Self
    where
        F: Fn(T) -> Complex<T> + Sync,
    {
        Self::from_fn_tol(lo, hi, T::field_tolerance(), f)
    }

    pub fn from_fn_tol<F>(lo: T, hi: T, tol: T, f: F) -> Self
    where
        F: Fn(T) -> Complex<T> + Sync,
    {
        Self::from_fn_floor(lo, hi, tol, T::zero(), f)
    }

    /// Adaptive sampling where agreement is measured against `max(sup|f|, floor)`;
    /// the floor stops refinement of functions that are zero up to cancellation noise.
    pub fn from_fn_floor<F>(lo: T, hi: T, tol: T, floor: T, f: F) -> Self
    where
        F: Fn(T) -> Complex<T> + Sync,
    {
        let mid = (lo + hi) * T::lit(0.5);
        let half = (hi - lo) * T::lit(0.5);
        let mut n = DEFAULT_RESOLUTION;
        let mut values: Vec<Complex<T>> = lobatto_nodes::<T>(n)
            .into_par_iter()
            .map(|t| f(mid + half * t))
            .collect();
        loop {
            let m = 2 * n;
            if m > T::max_resolution() {
                return Self::from_values(lo, hi, values);
            }
            let fine = lobatto_nodes::<T>(m);
            let coarse = lobatto_nodes::<T>(n);
            let odd: Vec<Complex<T>> = (0..n)
                .into_par_iter()
                .map(|i| f(mid + half * fine[2 * i + 1]))
                .collect();
            let scale = values
                .iter()
                .chain(odd.iter())
                .fold(floor.max(T::min_positive_value()), |a, v| a.max(v.norm()));
            let worst = (0..n)
                .into_par_iter()
                .map(|i| (barycentric(&coarse, &values, fine[2 * i + 1]) - odd[i]).norm())
                .reduce(T::zero, |a, b| a.max(b));
            let mut merged = Vec::with_capacity(m + 1);
            for i in 0..n {
                merged.push(values[i]);
                merged.push(odd[i]);
            }
            merged.push(values[n]);
            values = merged;
            n = m;
            if !(worst > tol * scale) {
                return Self::from_values(lo, hi, values);
            }
        }
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    /// Polynomial degree `N` of the interpolant.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn nodes(&self) -> Vec<T> {
        let mid = (self.lo + self.hi) * T::lit(0.5);
        let half = (self.hi - self.lo) * T::lit(0.5);
        self.unit.iter().map(|&t| mid + half * t).collect()
    }

    fn to_unit(&self, x: T) -> T {
        (x + x - self.lo - self.hi) / (self.hi - self.lo)
    }

    pub fn eval(&self, x: T) -> Complex<T> {
        let t = self.to_unit(x);
        if t.abs() <= T::one() {
            barycentric(&self.unit, &self.values, t)
        } else {
            clenshaw(&self.coeffs, t)
        }
    }

    /// Evaluates at many points, sharing the node table.
    pub fn eval_many(&self, xs: &[T]) -> Vec<Complex<T>> {
        xs.par_iter()
            .map(|&x| {
                let t = self.to_unit(x);
                if t.abs() <= T::one() {
                    barycentric(&self.unit, &self.values, t)
                } else {
                    clenshaw(&self.coeffs, t)
                }
            })
            .collect()
    }

    /// Coefficients with the rounding-noise tail removed.
    fn chopped(&self) -> Vec<Complex<T>> {
        let big = self.coeffs.iter().fold(T::zero(), |a, c| a.max(c.norm()));
        let floor = big * T::epsilon() * T::lit(16.0);
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.norm() > floor)
            .map_or(1, |p| p + 1);
        self.coeffs[..keep].to_vec()
    }

    pub fn derivative(&self) -> Self {
        let n = self.n();
        let zero = Complex::new(T::zero(), T::zero());
        let c = self.chopped();
        let m = c.len() - 1;
        let mut d = vec![zero; n + 1];
        if m >= 1 {
            let mut next2 = zero; // d_{k+1}
            let mut next1 = zero; // d_k
            for k in (1..=m).rev() {
                let dk1 = next2 + c[k] * T::from_usize_(2 * k);
                d[k - 1] = dk1;
                next2 = next1;
                next1 = dk1;
            }
            d[0] = d[0] * T::lit(0.5);
        }
        let s = T::lit(2.0) / (self.hi - self.lo);
        for v in d.iter_mut() {
            *v = *v * s;
        }
        Self::from_coeffs(self.lo, self.hi, d)
    }

    /// `k`-th derivative; fails once the order exceeds the polynomial degree.
    pub fn derivative_n(&self, k: usize) -> Result<Self> {
        if k > self.n() {
            return Err(Error::OrderOverflow { requested: k, capacity: self.n() });
        }
        let mut f = self.clone();
        for _ in 0..k {
            f = f.derivative();
        }
        Ok(f)
    }

    /// Antiderivative vanishing at `lo`.
    pub fn antiderivative(&self) -> Self {
        let n = self.n();
        let zero = Complex::new(T::zero(), T::zero());
        let c = |k: usize| if k <= n { self.coeffs[k] } else { zero };
        let mut b = vec![zero; n + 1];
        if n >= 1 {
            b[1] = c(0) - c(2) * T::lit(0.5);
            for k in 2..=n {
                b[k] = (c(k - 1) - c(k + 1)) / T::from_usize_(2 * k);
            }
        }
        let mut at_lo = zero;
        for (k, bk) in b.iter().enumerate().skip(1) {
            at_lo = if k % 2 == 1 { at_lo - bk } else { at_lo + bk };
        }
        b[0] = -at_lo;
        let s = (self.hi - self.lo) * T::lit(0.5);
        for v in b.iter_mut() {
            *v = *v * s;
        }
        Self::from_coeffs(self.lo, self.hi, b)
    }

    /// Antiderivative vanishing at `base`.
    pub fn antiderivative_from(&self, base: T) -> Self {
        let a = self.antiderivative();
        let shift = a.eval(base);
        a.map(|v| v - shift)
    }

    /// Definite integral over the whole interval.
    pub fn integral(&self) -> Complex<T> {
        self.antiderivative().values[self.n()]
    }

    /// Pointwise map on the node values.
    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self::from_values(self.lo, self.hi, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|v| v * s)
    }

    /// Same function re-sampled at resolution `n`.
    pub fn resample(&self, n: usize) -> Self {
        if n == self.n() {
            return self.clone();
        }
        let vals = lobatto_nodes::<T>(n)
            .into_iter()
            .map(|t| barycentric(&self.unit, &self.values, t))
            .collect();
        Self::from_values(self.lo, self.hi, vals)
    }

    /// Same function re-sampled on another interval (adaptively).
    pub fn restrict(&self, lo: T, hi: T) -> Self {
        Self::from_fn(lo, hi, |x| self.eval(x))
    }

    /// Largest node magnitude.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a.max(v.norm()))
    }

    /// Sup-norm distance to `g`, sampled on a grid twice as fine as either field.
    pub fn distance(&self, g: &Self) -> T {
        let n = 2 * self.n().max(g.n());
        let mid = (self.lo + self.hi) * T::lit(0.5);
        let half = (self.hi - self.lo) * T::lit(0.5);
        let pts: Vec<T> = lobatto_nodes::<T>(n).into_iter().map(|t| mid + half * t).collect();
        let a = self.eval_many(&pts);
        let b = g.eval_many(&pts);
        a.iter().zip(&b).fold(T::zero(), |m, (u, v)| m.max((u - v).norm()))
    }

    /// Scaled Taylor coefficients `f^(r)(x0)/r!` for `r = 0..=order`.
    pub fn taylor(&self, x0: T, order: usize) -> Result<Vec<Complex<T>>> {
        if order > self.n() {
            return Err(Error::OrderOverflow { requested: order, capacity: self.n() });
        }
        let mut out = Vec::with_capacity(order + 1);
        let mut f = self.clone();
        let mut fact = T::one();
        for r in 0..=order {
            if r > 0 {
                f = f.derivative();
                fact = fact * T::from_usize_(r);
            }
            out.push(f.eval(x0) / fact);
        }
        Ok(out)
    }

    /// Continuous branch of the logarithm, unwrapped left to right from the
    /// principal value at `lo`.
    pub fn log(&self) -> Result<Self> {
        let big = self.sup_norm();
        let nodes = self.nodes();
        let mut out = Vec::with_capacity(self.values.len());
        let mut prev_arg = T::zero();
        let mut prev_raw = T::zero();
        for (j, v) in self.values.iter().enumerate() {
            let r = v.norm();
            if !(r > big * T::epsilon() * T::lit(1e3)) {
                return Err(Error::BranchAmbiguity { x: nodes[j].as_f64() });
            }
            let raw = v.arg();
            let arg = if j == 0 {
                raw
            } else {
                let mut d = raw - prev_raw;
                let two_pi = T::PI() + T::PI();
                while d > T::PI() {
                    d = d - two_pi;
                }
                while d <= -T::PI() {
                    d = d + two_pi;
                }
                if d.abs() > T::FRAC_PI_2() {
                    return Err(Error::BranchAmbiguity { x: nodes[j].as_f64() });
                }
                prev_arg + d
            };
            prev_raw = raw;
            prev_arg = arg;
            out.push(Complex::new(r.ln(), arg));
        }
        Ok(Self::from_values(self.lo, self.hi, out))
    }

    pub fn exp(&self) -> Self {
        self.map(|v| v.exp())
    }

    fn aligned(&self, g: &Self) -> (Self, Self) {
        let same_interval = (self.lo - g.lo).abs() <= T::epsilon() * T::lit(8.0)
            && (self.hi - g.hi).abs() <= T::epsilon() * T::lit(8.0);
        let g = if same_interval {
            g.clone()
        } else {
            Self::from_fn_n(self.lo, self.hi, g.n(), |x| g.eval(x))
        };
        let n = self.n().max(g.n());
        (self.resample(n), g.resample(n))
    }

    fn zip(&self, g: &Self, op: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        let (a, b) = self.aligned(g);
        let vals = a.values.iter().zip(&b.values).map(|(&u, &v)| op(u, v)).collect();
        Self::from_values(a.lo, a.hi, vals)
    }

    pub fn add(&self, g: &Self) -> Self {
        self.zip(g, |u, v| u + v)
    }

    pub fn sub(&self, g: &Self) -> Self {
        self.zip(g, |u, v| u - v)
    }

    pub fn mul(&self, g: &Self) -> Self {
        self.zip(g, |u, v| u * v)
    }

    pub fn div(&self, g: &Self) -> Result<Self> {
        let (a, b) = self.aligned(g);
        let min = b.values.iter().fold(T::infinity(), |m, v| m.min(v.norm()));
        let big = b.sup_norm().max(T::min_positive_value());
        if !(min > big * T::epsilon().sqrt() * T::lit(1e-2)) {
            return Err(Error::NearZeroDivisor { min_abs: min.as_f64() });
        }
        Ok(a.zip(&b, |u, v| u / v))
    }

    pub fn pow(&self, g: &Self) -> Result<Self> {
        Ok(self.log()?.mul(g).exp())
    }
}

/// Pointwise algebra between fields. Unary operations (`Log`, `Exp`) act on `g`.
pub fn field_algebra<T: Real>(
    f: &ScalarField<T>,
    g: &ScalarField<T>,
    op: FieldOp,
) -> Result<ScalarField<T>> {
    match op {
        FieldOp::Add => Ok(f.add(g)),
        FieldOp::Sub => Ok(f.sub(g)),
        FieldOp::Mul => Ok(f.mul(g)),
        FieldOp::Div => f.div(g),
        FieldOp::Log => g.log(),
        FieldOp::Exp => Ok(g.exp()),
        FieldOp::Pow => f.pow(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;
    use num_traits::Float;

    fn exp_field(n: usize) -> ScalarField<f64> {
        ScalarField::from_fn_n(0.0, 1.0, n, |x| re(x.exp()))
    }

    #[test]
    fn nodes_reproduce_values() {
        let f = ScalarField::from_fn(0.0, 2.0, |x: f64| c(x.sin(), x * x));
        for (x, v) in f.nodes().iter().zip(f.values()) {
            assert!((f.eval(*x) - v).norm() <= 4.0 * f64::EPSILON * v.norm().max(1.0));
        }
        assert_relative_eq!(f.eval(1.3).re, 1.3f64.sin(), epsilon = 1e-14);
    }

    #[test]
    fn mul_by_one_is_identity() {
        let one = ScalarField::constant(0.0, 1.0, re(1.0));
        let x = ScalarField::identity(0.0, 1.0);
        let p = field_algebra(&one, &x, FieldOp::Mul).unwrap();
        for t in [0.0, 0.17, 0.5, 0.93, 1.0] {
            assert!((p.eval(t) - re(t)).norm() <= 1e-14);
        }
    }

    #[test]
    fn log_inverts_exp() {
        let g = exp_field(64);
        let l = field_algebra(&g, &g, FieldOp::Log).unwrap();
        for t in [0.0, 0.3, 0.71, 1.0] {
            assert!((l.eval(t) - re(t)).norm() <= 1e-12);
        }
    }

    #[test]
    fn log_of_constant() {
        let k = 2.0 + 3f64.sqrt();
        let g = ScalarField::constant(0.0, 1.0, re(k));
        let l = g.log().unwrap();
        assert_relative_eq!(l.eval(0.4).re, 1.316958, epsilon = 1e-6);
        assert_relative_eq!(l.eval(0.4).re, k.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_follows_winding_phase() {
        // e^{3ix} winds past ±π on [0, 2]; the branch must stay continuous
        let g = ScalarField::from_fn(0.0, 2.0, |x: f64| c(0.0, 3.0 * x).exp());
        let l = g.log().unwrap();
        assert_relative_eq!(l.eval(2.0).im, 6.0, epsilon = 1e-10);
    }

    #[test]
    fn log_detects_zero() {
        let g = ScalarField::from_fn_n(-1.0, 1.0, 64, |x: f64| re(x));
        assert!(matches!(g.log(), Err(Error::BranchAmbiguity { .. })));
    }

    #[test]
    fn div_guards_zero() {
        let x = ScalarField::from_fn_n(-1.0, 1.0, 32, |x: f64| re(x));
        let one = ScalarField::constant(-1.0, 1.0, re(1.0));
        assert!(matches!(one.div(&x), Err(Error::NearZeroDivisor { .. })));
        let q = one.div(&ScalarField::from_fn(-1.0, 1.0, |x: f64| re(x.exp()))).unwrap();
        assert_relative_eq!(q.eval(0.5).re, (-0.5f64).exp(), epsilon = 1e-13);
    }

    #[test]
    fn spectral_accuracy_at_32() {
        let f = exp_field(32);
        let d = f.derivative();
        let a = f.antiderivative();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            assert!((d.eval(x).re - x.exp()).abs() < 1e-12);
            assert!((a.eval(x).re - (x.exp() - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_then_derivative() {
        let f = ScalarField::from_fn(-1.0, 2.0, |x: f64| c((3.0 * x).cos(), 1.0 / (2.0 + x)));
        let back = f.antiderivative().derivative();
        let n = f.n() as f64;
        let bound = 10.0 * f64::EPSILON * n * n * f.sup_norm();
        assert!(back.distance(&f) <= bound, "{} > {}", back.distance(&f), bound);
    }

    #[test]
    fn adaptive_resolution_grows_for_rough_data() {
        let f = ScalarField::from_fn(0.0, 1.0, |x: f64| re(1.0 / (1.0 + 400.0 * (x - 0.5).powi(2))));
        assert!(f.n() > DEFAULT_RESOLUTION);
        assert_relative_eq!(f.eval(0.55).re, 1.0 / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn derivative_order_capacity() {
        let f = ScalarField::from_fn_n(0.0, 1.0, 8, |x: f64| re(x));
        assert!(matches!(f.derivative_n(9), Err(Error::OrderOverflow { .. })));
        let t = f.taylor(0.5, 2).unwrap();
        assert_relative_eq!(t[0].re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(t[1].re, 1.0, epsilon = 1e-13);
        assert!(t[2].norm() < 1e-12);
    }

    #[test]
    fn quad_precision_field() {
        type Q = f128::f128;
        let f = ScalarField::<Q>::from_fn(Q::lit(0.0), Q::lit(1.0), |x| re(x.exp()));
        let d = f.derivative();
        let x = Q::lit(0.3);
        assert!((d.eval(x).re - x.exp()).abs().as_f64() < 1e-25);
    }
}
