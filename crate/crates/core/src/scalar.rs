//! Scalar abstraction. Everything numeric in the crate is generic over [`Real`].

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by fields, jets and the iteration engines.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Agreement tolerance for adaptive field construction.
    fn field_tolerance() -> Self;

    /// Largest resolution the adaptive constructor will try.
    fn max_resolution() -> usize {
        2048
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("representable integer")
    }

    fn from_isize_(n: isize) -> Self {
        Self::from_isize(n).expect("representable integer")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Widening to quad precision (exact for every implementor).
    fn to_quad(self) -> f128::f128 {
        f128::f128::lit(self.as_f64())
    }

    fn from_quad(q: f128::f128) -> Self {
        Self::lit(q.as_f64())
    }
}

impl Real for f32 {
    fn field_tolerance() -> Self {
        1e-5
    }
    fn max_resolution() -> usize {
        512
    }
}

impl Real for f64 {
    fn field_tolerance() -> Self {
        1e-11
    }
}

impl Real for f128::f128 {
    fn field_tolerance() -> Self {
        Self::lit(1e-28)
    }
    fn to_quad(self) -> f128::f128 {
        self
    }
    fn from_quad(q: f128::f128) -> Self {
        q
    }
    fn max_resolution() -> usize {
        1024
    }
}

/// Complex number over `T`.
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Real embedded as a complex number.
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

pub fn cx_f64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.as_f64(), z.im.as_f64())
}

pub fn cx_from_f64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

/// n! as a `T` (exact for the small n used here).
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_(k))
}

pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for i in 0..k {
        acc = acc * T::from_usize_(n - i) / T::from_usize_(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_roundtrip() {
        assert_eq!(f64::lit(0.25), 0.25);
        assert_eq!(f128::f128::lit(0.25).as_f64(), 0.25);
        assert_eq!(factorial::<f64>(6), 720.0);
        assert_eq!(binomial::<f64>(7, 3), 35.0);
    }

    #[test]
    fn quad_is_finer_than_double() {
        assert!(<f128::f128 as Float>::epsilon().as_f64() < 1e-30);
    }
}
