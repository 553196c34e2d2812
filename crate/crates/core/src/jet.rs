//! Truncated bivariate power series `Σ c[r][t] h^r ε^t`.
//!
//! Functions of a jet are applied through the nilpotent split
//! `f(c₀ + N) = Σ f⁽ⁿ⁾(c₀) Nⁿ / n!`, which terminates because `N^{R+T+1} = 0`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::scalar::{factorial, re, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Real> {
    r: usize,
    t: usize,
    c: Vec<Complex<T>>,
}

impl<T: Real> Jet<T> {
    pub fn zeros(r: usize, t: usize) -> Self {
        Self { r, t, c: vec![Complex::new(T::zero(), T::zero()); (r + 1) * (t + 1)] }
    }

    pub fn constant(r: usize, t: usize, v: Complex<T>) -> Self {
        let mut j = Self::zeros(r, t);
        j.c[0] = v;
        j
    }

    /// The jet of `h` itself.
    pub fn h(r: usize, t: usize) -> Self {
        let mut j = Self::zeros(r, t);
        if r > 0 {
            j.set(1, 0, re(T::one()));
        }
        j
    }

    /// The jet of `ε` itself.
    pub fn eps(r: usize, t: usize) -> Self {
        let mut j = Self::zeros(r, t);
        if t > 0 {
            j.set(0, 1, re(T::one()));
        }
        j
    }

    /// Univariate ε-series `Σ coeffs[t] εᵗ`, truncated to order `t`.
    pub fn eps_series(coeffs: &[Complex<T>], t: usize) -> Self {
        let mut j = Self::zeros(0, t);
        for (i, v) in coeffs.iter().take(t + 1).enumerate() {
            j.c[i] = *v;
        }
        j
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.r, self.t)
    }

    pub fn get(&self, r: usize, t: usize) -> Complex<T> {
        if r > self.r || t > self.t {
            return Complex::new(T::zero(), T::zero());
        }
        self.c[r * (self.t + 1) + t]
    }

    pub fn set(&mut self, r: usize, t: usize, v: Complex<T>) {
        let w = self.t + 1;
        self.c[r * w + t] = v;
    }

    pub fn value(&self) -> Complex<T> {
        self.c[0]
    }

    /// ε-coefficients of the `h⁰` row.
    pub fn eps_coeffs(&self) -> Vec<Complex<T>> {
        (0..=self.t).map(|t| self.get(0, t)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Largest coefficient difference to `other`.
    pub fn distance(&self, other: &Self) -> T {
        let mut m = T::zero();
        for r in 0..=self.r.max(other.r) {
            for t in 0..=self.t.max(other.t) {
                m = m.max((self.get(r, t) - other.get(r, t)).norm());
            }
        }
        m
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { r: self.r, t: self.t, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn add_const(&self, s: Complex<T>) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0] + s;
        out
    }

    fn check(&self, o: &Self) {
        assert_eq!((self.r, self.t), (o.r, o.t), "jet orders differ");
    }

    /// Applies `f` given its scaled Taylor coefficients `f⁽ⁿ⁾(c₀)/n!` at the constant term.
    pub fn compose(&self, taylor: &[Complex<T>]) -> Self {
        let top = self.r + self.t;
        let mut nil = self.clone();
        nil.c[0] = Complex::new(T::zero(), T::zero());
        let coef = |n: usize| taylor.get(n).copied().unwrap_or(Complex::new(T::zero(), T::zero()));
        let mut acc = Self::constant(self.r, self.t, coef(top));
        for n in (0..top).rev() {
            acc = (&acc * &nil).add_const(coef(n));
        }
        acc
    }

    fn order(&self) -> usize {
        self.r + self.t
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let t: Vec<_> = (0..=self.order()).map(|n| e / factorial::<T>(n)).collect();
        self.compose(&t)
    }

    pub fn ln(&self) -> Self {
        let c0 = self.value();
        let mut t = vec![c0.ln()];
        let mut p = c0;
        for n in 1..=self.order() {
            let sign = if n % 2 == 1 { T::one() } else { -T::one() };
            t.push(re(sign / T::from_usize_(n)) / p);
            p = p * c0;
        }
        self.compose(&t)
    }

    /// Complex power `self^p` on the principal branch at the constant term.
    pub fn powc(&self, p: Complex<T>) -> Self {
        let c0 = self.value();
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut binom = re(T::one());
        for n in 0..=self.order() {
            if n > 0 {
                binom = binom * (p - re(T::from_usize_(n - 1))) / T::from_usize_(n);
            }
            t.push(binom * c0.powc(p - re(T::from_usize_(n))));
        }
        self.compose(&t)
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::constant(self.r, self.t, re(T::one()));
        let mut base = self.clone();
        let mut k = n as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    pub fn recip(&self) -> Self {
        let c0 = self.value();
        let inv = c0.inv();
        let mut t = Vec::with_capacity(self.order() + 1);
        let mut p = inv;
        for n in 0..=self.order() {
            t.push(if n % 2 == 0 { p } else { -p });
            p = p * inv;
        }
        self.compose(&t)
    }

    pub fn div(&self, o: &Self) -> Self {
        self * &o.recip()
    }

    pub fn sqrt(&self) -> Self {
        self.powc(re(T::lit(0.5)))
    }

    /// Taylor data of sin/cos/sinh/cosh: derivatives cycle with period 2 or 4.
    fn cyclic(&self, d0: Complex<T>, d1: Complex<T>, period4: bool) -> Self {
        let t: Vec<_> = (0..=self.order())
            .map(|n| {
                let v = if n % 2 == 0 { d0 } else { d1 };
                let v = if period4 && n % 4 >= 2 { -v } else { v };
                v / factorial::<T>(n)
            })
            .collect();
        self.compose(&t)
    }

    pub fn sin(&self) -> Self {
        let c0 = self.value();
        self.cyclic(c0.sin(), c0.cos(), true)
    }

    pub fn cos(&self) -> Self {
        let c0 = self.value();
        self.cyclic(c0.cos(), -c0.sin(), true)
    }

    pub fn sinh(&self) -> Self {
        let c0 = self.value();
        self.cyclic(c0.sinh(), c0.cosh(), false)
    }

    pub fn cosh(&self) -> Self {
        let c0 = self.value();
        self.cyclic(c0.cosh(), c0.sinh(), false)
    }
}

impl<T: Real> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, o: &Jet<T>) -> Jet<T> {
        self.check(o);
        Jet { r: self.r, t: self.t, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Real> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, o: &Jet<T>) -> Jet<T> {
        self.check(o);
        Jet { r: self.r, t: self.t, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Real> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet { r: self.r, t: self.t, c: self.c.iter().map(|a| -a).collect() }
    }
}

impl<T: Real> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, o: &Jet<T>) -> Jet<T> {
        self.check(o);
        let w = self.t + 1;
        let mut out = Jet::zeros(self.r, self.t);
        for ra in 0..=self.r {
            for ta in 0..=self.t {
                let a = self.c[ra * w + ta];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for rb in 0..=self.r - ra {
                    for tb in 0..=self.t - ta {
                        let k = (ra + rb) * w + ta + tb;
                        out.c[k] = out.c[k] + a * o.c[rb * w + tb];
                    }
                }
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl<T: Real> $tr for Jet<T> {
            type Output = Jet<T>;
            fn $m(self, o: Jet<T>) -> Jet<T> {
                (&self).$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl<T: Real> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

/// Exponent jet from point derivatives `derivs[t][r] = Φₜ⁽ʳ⁾(x0)`.
///
/// Returns the (h, ε) jet of `ε⁻¹ Σₜ [Φₜ(x0+h+jε) − Φₜ(x0+h)] εᵗ`.
pub fn exponent_jet<T: Real>(derivs: &[Vec<Complex<T>>], j: i64, r_ord: usize, t_ord: usize) -> Jet<T> {
    let mut out = Jet::zeros(r_ord, t_ord);
    let jt = T::from_i64(j).expect("step index");
    for (t, d) in derivs.iter().enumerate() {
        // ε power n = t + r − 1
        for r in 0..d.len() {
            if r == 0 {
                continue;
            }
            let n = t + r;
            if n == 0 || n - 1 > t_ord {
                continue;
            }
            let w = jt.powi(r as i32) / factorial::<T>(r);
            for q in 0..=r_ord {
                if r + q >= d.len() {
                    break;
                }
                let v = d[r + q] * (w / factorial::<T>(q));
                let old = out.get(q, n - 1);
                out.set(q, n - 1, old + v);
            }
        }
    }
    out
}

/// Jet of `exp(ε⁻¹ Σₜ Φₜ(x0 + h + jε) εᵗ)` relative to its value at `j = 0`.
///
/// The normalisation divides out `exp(ε⁻¹ Σₜ Φₜ(x0 + h) εᵗ)`, so the ε⁰ row is
/// `exp(jΦ₀′(x0 + h))` and `j = 0` gives exactly 1.
pub fn jet_compose_exponent<T: Real>(
    phi_list: &[ScalarField<T>],
    x0: T,
    j: i64,
    r_ord: usize,
    t_ord: usize,
) -> Result<Jet<T>> {
    if phi_list.is_empty() {
        return Err(Error::InvalidArgument("empty phase list".into()));
    }
    let need = r_ord + t_ord + 1;
    let mut derivs = Vec::with_capacity(phi_list.len());
    for (t, phi) in phi_list.iter().enumerate() {
        let top = need.saturating_sub(t);
        if top > phi.n() {
            return Err(Error::OrderOverflow { requested: top, capacity: phi.n() });
        }
        let tay = phi.taylor(x0, top)?;
        derivs.push(tay.iter().enumerate().map(|(r, v)| v * factorial::<T>(r)).collect::<Vec<_>>());
    }
    let e = exponent_jet(&derivs, j, r_ord, t_ord).exp();
    debug_assert!(e.is_finite());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn random_jet(vals: &[f64], r: usize, t: usize) -> Jet<f64> {
        let mut j = Jet::zeros(r, t);
        let mut it = vals.iter().cycle();
        for a in 0..=r {
            for b in 0..=t {
                j.set(a, b, c(*it.next().unwrap(), *it.next().unwrap()));
            }
        }
        j
    }

    #[test]
    fn product_is_truncated_full_product() {
        let a = random_jet(&[0.3, -1.2, 0.7, 2.0, 0.1], 2, 3);
        let b = random_jet(&[1.1, 0.4, -0.6, 0.9], 2, 3);
        let p = &a * &b;
        for r in 0..=2 {
            for t in 0..=3 {
                let mut s = c(0.0, 0.0);
                for r1 in 0..=r {
                    for t1 in 0..=t {
                        s += a.get(r1, t1) * b.get(r - r1, t - t1);
                    }
                }
                assert!((p.get(r, t) - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn exp_of_eps_matches_series() {
        let e = Jet::<f64>::eps(0, 6).exp();
        for t in 0..=6 {
            assert_relative_eq!(e.get(0, t).re, 1.0 / factorial::<f64>(t), epsilon = 1e-15);
        }
    }

    #[test]
    fn trig_identities() {
        let x = random_jet(&[0.4, 0.2, -0.3, 0.5], 2, 2);
        let s = x.sin();
        let co = x.cos();
        let one = &(&s * &s) + &(&co * &co);
        assert!(one.distance(&Jet::constant(2, 2, c(1.0, 0.0))) < 1e-13);
        let sh = x.sinh();
        let ch = x.cosh();
        let one = &(&ch * &ch) - &(&sh * &sh);
        assert!(one.distance(&Jet::constant(2, 2, c(1.0, 0.0))) < 1e-13);
        let sq = x.add_const(c(2.0, 0.0)).sqrt();
        assert!((&sq * &sq).distance(&x.add_const(c(2.0, 0.0))) < 1e-13);
    }

    #[test]
    fn constant_phase_derivative() {
        let l2 = 2f64.ln();
        let phi = ScalarField::from_fn(0.0, 1.0, |x: f64| re(x * l2));
        let j = jet_compose_exponent(&[phi], 0.5, 1, 0, 4).unwrap();
        assert_relative_eq!(j.get(0, 0).re, 2.0, epsilon = 1e-13);
        for t in 1..=4 {
            assert!(j.get(0, t).norm() < 1e-11);
        }
    }

    #[test]
    fn exponential_phase_leading_term() {
        let phi = ScalarField::from_fn(0.0, 1.0, |x: f64| re(x.exp() - 1.0));
        let j = jet_compose_exponent(std::slice::from_ref(&phi), 0.0, 1, 1, 3).unwrap();
        assert_relative_eq!(j.get(0, 0).re, std::f64::consts::E, epsilon = 1e-12);
        // ε¹ coefficient: e·Φ₀''(0)/2
        assert_relative_eq!(j.get(0, 1).re, std::f64::consts::E / 2.0, epsilon = 1e-10);
        // h¹ε⁰: d/dh exp(Φ₀'(h)) at 0 = e
        assert_relative_eq!(j.get(1, 0).re, std::f64::consts::E, epsilon = 1e-10);
    }

    #[test]
    fn zero_shift_only_sees_higher_phases() {
        let p0 = ScalarField::from_fn(0.0, 1.0, |x: f64| re(x.sin()));
        let p1 = ScalarField::from_fn(0.0, 1.0, |x: f64| re(0.5 * x));
        let j0 = jet_compose_exponent(&[p0.clone(), p1.clone()], 0.3, 0, 2, 3).unwrap();
        assert!(j0.distance(&Jet::constant(2, 3, c(1.0, 0.0))) < 1e-15);
        // with j = 1 the Φ₁ correction enters at ε¹ through Φ₁′ = 1/2
        let j1 = jet_compose_exponent(&[p0, p1], 0.3, 1, 0, 3).unwrap();
        let e0 = 0.3f64.cos().exp();
        assert_relative_eq!(j1.get(0, 0).re, e0, epsilon = 1e-13);
        assert_relative_eq!(j1.get(0, 1).re, e0 * (-0.3f64.sin() / 2.0 + 0.5), epsilon = 1e-12);
    }

    #[test]
    fn overflowing_order_is_reported() {
        let p = ScalarField::from_fn_n(0.0, 1.0, 4, |x: f64| re(x));
        assert!(matches!(
            jet_compose_exponent(&[p], 0.5, 1, 2, 4),
            Err(Error::OrderOverflow { .. })
        ));
    }

    proptest! {
        #[test]
        fn exp_inverts_log(v in proptest::collection::vec(-0.5f64..0.5, 12)) {
            let mut j = random_jet(&v, 2, 2);
            j.set(0, 0, c(1.0, 0.0));
            let back = j.ln().exp();
            prop_assert!(back.distance(&j) < 1e-12);
        }

        #[test]
        fn exp_times_exp_neg_is_one(v in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let j = random_jet(&v, 3, 2);
            let one = &j.exp() * &(-&j).exp();
            prop_assert!(one.distance(&Jet::constant(3, 2, c(1.0, 0.0))) < 1e-11);
        }

        #[test]
        fn powc_matches_powi(v in proptest::collection::vec(-0.3f64..0.3, 8), n in 1i32..5) {
            let j = random_jet(&v, 1, 3).add_const(c(1.5, 0.0));
            let a = j.powi(n);
            let b = j.powc(c(n as f64, 0.0));
            prop_assert!(a.distance(&b) < 1e-11);
        }
    }
}
