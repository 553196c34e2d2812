//! Airy functions of complex argument.
//!
//! Maclaurin series for |z| ≤ 8 and the large-argument expansions beyond, both
//! carried out in quad precision so that every scalar type gets double-precision
//! accurate values.

use f128::f128;
use num_traits::{Float, FloatConst};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::literal;
use crate::scalar::Real;

type Q = f128;
type C = Complex<Q>;

/// Largest |z| accepted by [`airy_eval`].
pub const AIRY_MAX_ABS: f64 = 30.0;
const SERIES_RADIUS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryValues<T> {
    pub ai: Complex<T>,
    pub bi: Complex<T>,
    pub ai_prime: Complex<T>,
    pub bi_prime: Complex<T>,
}

fn q(x: f64) -> Q {
    Q::lit(x)
}

fn ai0() -> Q {
    literal("0.355028053887817239260063186004183176398")
}

fn mai0() -> Q {
    literal("0.258819403792806798405183560189203963479")
}

fn series_real(x: Q) -> (Q, Q, Q, Q) {
    let mut out = [q(0.0); 4];
    for (slot, start) in [(0usize, 0usize), (2, 1)] {
        let mut coef = q(1.0);
        let mut n = start;
        let mut xn = if start == 0 { q(1.0) } else { x };
        let mut xd = if start == 0 { x * x } else { q(1.0) };
        let x3 = x * x * x;
        let (mut val, mut der, mut big) = (q(0.0), q(0.0), q(0.0));
        loop {
            let term = xn * coef;
            val += term;
            if n > 0 {
                der += xd * coef * Q::from_usize_(n);
                xd *= x3;
            }
            let m = term.abs();
            big = big.max(m);
            if n > 6 && m <= q(1e-40) * big.max(q(1.0)) {
                break;
            }
            coef /= Q::from_usize_(n + 3) * Q::from_usize_(n + 2);
            xn *= x3;
            n += 3;
            if n > 2000 {
                break;
            }
        }
        out[slot] = val;
        out[slot + 1] = der;
    }
    let (f, fp, g, gp) = (out[0], out[1], out[2], out[3]);
    let (c1, c2) = (ai0(), mai0());
    let s3 = q(3.0).sqrt();
    (f * c1 - g * c2, (f * c1 + g * c2) * s3, fp * c1 - gp * c2, (fp * c1 + gp * c2) * s3)
}

fn series(z: C) -> (C, C, C, C) {
    if z.im == q(0.0) {
        let (a, b, ap, bp) = series_real(z.re);
        let r = |v: Q| C::new(v, q(0.0));
        return (r(a), r(b), r(ap), r(bp));
    }
    // f, g: the solutions with (f, f') = (1, 0) and (g, g') = (0, 1) at 0
    let zero = C::new(q(0.0), q(0.0));
    let mut out = [zero; 4];
    for (slot, start) in [(0usize, 0usize), (2, 1)] {
        let mut coef = q(1.0);
        let mut n = start;
        let mut zn = if start == 0 { C::new(q(1.0), q(0.0)) } else { z };
        // z^{n−1} for the next term with n ≥ 1
        let mut zd = if start == 0 { z * z } else { C::new(q(1.0), q(0.0)) };
        let mut val = zero;
        let mut der = zero;
        let mut big = q(0.0);
        let tiny = q(1e-40);
        loop {
            let term = zn * coef;
            val += term;
            if n > 0 {
                der += zd * coef * Q::from_usize_(n);
                zd = zd * z * z * z;
            }
            let m = term.norm();
            big = big.max(m);
            if n > 6 && m <= tiny * big.max(q(1.0)) {
                break;
            }
            coef /= Q::from_usize_(n + 3) * Q::from_usize_(n + 2);
            zn = zn * z * z * z;
            n += 3;
            if n > 2000 {
                break;
            }
        }
        out[slot] = val;
        out[slot + 1] = der;
    }
    let (f, fp, g, gp) = (out[0], out[1], out[2], out[3]);
    let (c1, c2) = (ai0(), mai0());
    let s3 = q(3.0).sqrt();
    (f * c1 - g * c2, (f * c1 + g * c2) * s3, fp * c1 - gp * c2, (fp * c1 + gp * c2) * s3)
}

/// Ai and Ai′ from the large-|z| expansion, valid for |arg z| ≤ 2π/3.
fn ai_asymptotic(z: C) -> (C, C) {
    let lz = z.ln();
    let zeta = (lz * q(1.5)).exp() * (q(2.0) / q(3.0));
    let quarter = (lz * q(0.25)).exp();
    let pre = (-zeta).exp() / (<Q as FloatConst>::PI().sqrt() * q(2.0));
    let one = C::new(q(1.0), q(0.0));
    let mut u = q(1.0);
    let mut su = one;
    let mut sv = one;
    let mut zk = one;
    let mut last = Q::infinity();
    for k in 1..200usize {
        let kq = Q::from_usize_(k);
        u = u * (q(6.0) * kq - q(5.0)) * (q(6.0) * kq - q(3.0)) * (q(6.0) * kq - q(1.0))
            / ((q(2.0) * kq - q(1.0)) * q(216.0) * kq);
        let v = -u * (q(6.0) * kq + q(1.0)) / (q(6.0) * kq - q(1.0));
        zk = -zk / zeta;
        let tu = zk * u;
        let size = tu.norm();
        if size > last {
            break;
        }
        su += tu;
        sv += zk * v;
        last = size;
        if size < q(1e-36) {
            break;
        }
    }
    (pre * su / quarter, -pre * sv * quarter)
}

fn omega() -> C {
    let t = q(2.0) * <Q as FloatConst>::PI() / q(3.0);
    C::new(t.cos(), t.sin())
}

/// Ai, Ai′ for |z| > series radius, reducing to the principal sector.
fn ai_large(z: C) -> (C, C) {
    let limit = q(2.0) * <Q as FloatConst>::PI() / q(3.0);
    if z.arg().abs() <= limit {
        return ai_asymptotic(z);
    }
    let w = omega();
    let w2 = w * w;
    let (a1, d1) = ai_asymptotic(w * z);
    let (a2, d2) = ai_asymptotic(w2 * z);
    // Ai(z) + ω Ai(ωz) + ω² Ai(ω²z) = 0
    (-(w * a1) - w2 * a2, -(w2 * d1) - w * d2)
}

fn airy_quad(z: C) -> (C, C, C, C) {
    if z.norm() <= q(SERIES_RADIUS) {
        return series(z);
    }
    let w = omega();
    let wc = w.conj();
    let (a, ap) = ai_large(z);
    let (a1, d1) = ai_large(w * z);
    let (a2, d2) = ai_large(wc * z);
    let s = <Q as FloatConst>::PI() / q(6.0);
    let e = C::new(s.cos(), s.sin());
    let ec = e.conj();
    // Bi(z) = e^{iπ/6} Ai(ωz) + e^{−iπ/6} Ai(ω̄z)
    let bi = e * a1 + ec * a2;
    let bip = e * w * d1 + ec * wc * d2;
    (a, bi, ap, bip)
}

/// `(Ai, Bi, Ai′, Bi′)` at complex `z`, |z| ≤ 30.
pub fn airy_eval<T: Real>(z: Complex<T>) -> Result<AiryValues<T>> {
    let r = z.norm().as_f64();
    if !(r <= AIRY_MAX_ABS) {
        return Err(Error::OutOfRange(r));
    }
    let zq = C::new(z.re.to_quad(), z.im.to_quad());
    let (a, b, ap, bp) = airy_quad(zq);
    let back = |w: C| Complex::new(T::from_quad(w.re), T::from_quad(w.im));
    Ok(AiryValues { ai: back(a), bi: back(b), ai_prime: back(ap), bi_prime: back(bp) })
}

/// Solutions of `w″ = z w` used by the interior expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AiryFlavor {
    /// `Ai + i Bi`
    Plus,
    /// `Ai − i Bi`
    Minus,
    /// `Ai`, decaying along the positive real axis.
    Decaying,
}

impl AiryFlavor {
    /// `(w(z), w′(z))`.
    pub fn eval<T: Real>(self, z: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let v = airy_eval(z)?;
        let i = Complex::new(T::zero(), T::one());
        Ok(match self {
            AiryFlavor::Plus => (v.ai + i * v.bi, v.ai_prime + i * v.bi_prime),
            AiryFlavor::Minus => (v.ai - i * v.bi, v.ai_prime - i * v.bi_prime),
            AiryFlavor::Decaying => (v.ai, v.ai_prime),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex<f64>, b: Complex<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn values_at_zero() {
        let v = airy_eval(c(0.0, 0.0)).unwrap();
        assert!((v.ai.re - 0.3550280539).abs() < 1e-10);
        assert!((v.bi.re - 0.6149266274).abs() < 1e-10);
        assert!((v.ai_prime.re + 0.2588194038).abs() < 1e-10);
    }

    // references from an independent arbitrary-precision evaluation
    #[test]
    fn reference_values() {
        let ai8 = airy_eval(c(8.0, 0.0)).unwrap().ai;
        assert!(close(ai8, c(4.692_207_616_099_231_6e-8, 0.0), 1e-13));
        let bim8 = airy_eval(c(-8.0, 0.0)).unwrap().bi;
        assert!(close(bim8, c(-0.331_251_580_751_137_86, 0.0), 1e-13));
        let z = airy_eval(c(-20.0, 5.0)).unwrap().ai;
        assert!(close(z, c(412_260_594.923_949_7, 591_916_170.980_650_3), 1e-12));
        let b12 = airy_eval(c(12.0, 0.0)).unwrap().bi;
        assert!(close(b12, c(329_807_225_829.074_16, 0.0), 1e-12));
    }

    #[test]
    fn wronskian_is_one_over_pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let z = c(rng.gen_range(-15.0..15.0), rng.gen_range(-15.0..15.0));
            let v = airy_eval(z).unwrap();
            let w = v.ai * v.bi_prime - v.ai_prime * v.bi;
            let scale = (v.ai * v.bi_prime).norm() + (v.ai_prime * v.bi).norm();
            assert!((w - c(std::f64::consts::FRAC_1_PI, 0.0)).norm() <= 1e-10 * scale.max(1.0), "{z}: {w}");
        }
    }

    #[test]
    fn airy_equation_by_differences() {
        // Ai″(z) = z Ai(z), checked with centred differences of Ai′
        for z in [c(0.0, 0.0), c(2.0, 1.0), c(-6.0, 0.5), c(9.0, -3.0), c(-12.0, 0.0)] {
            let h = 1e-4;
            let p = airy_eval(z + c(h, 0.0)).unwrap().ai_prime;
            let m = airy_eval(z - c(h, 0.0)).unwrap().ai_prime;
            let v = airy_eval(z).unwrap();
            let lhs = (p - m) / (2.0 * h);
            assert!((lhs - z * v.ai).norm() <= 1e-6 * (z * v.ai).norm().max(1e-3), "{z}");
        }
    }

    #[test]
    fn both_regimes_agree_on_the_seam() {
        for t in 0..12 {
            let th = t as f64 * std::f64::consts::PI / 6.0;
            let z = C::new(q(8.0 * th.cos()), q(8.0 * th.sin()));
            let (a, b, ap, bp) = series(z);
            let (la, lap) = ai_large(z);
            assert!((a - la).norm() <= q(1e-12) * a.norm(), "Ai at angle {th}");
            assert!((ap - lap).norm() <= q(1e-12) * ap.norm());
            let _ = (b, bp);
        }
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(airy_eval(c(31.0, 0.0)), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn quad_accuracy_in_the_series_disc() {
        let v = airy_eval(Complex::new(Q::lit(1.0), Q::lit(0.0))).unwrap();
        let want: Q = literal("0.135292416312881415524147423515466");
        assert!((v.ai.re - want).abs() < Q::lit(1e-31));
    }
}
