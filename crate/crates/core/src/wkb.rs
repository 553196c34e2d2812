//! Order-by-order construction of `exp(ε⁻¹ Σₜ Φₜ(x) εᵗ)` along one root branch.
//!
//! `Φ₀′ = Log λ`; each further `Φ_{S+1}′` cancels the `ε^{S+1}` coefficient of
//! the residual, which is obtained at every grid point by jet arithmetic.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fit::{loglog_fit, require_span, SlopeFit};
use crate::jet::{exponent_jet, Jet};
use crate::recurrence::RecurrenceSpec;
use crate::roots::RootBranch;
use crate::scalar::{re, Real};

/// Highest transport order accepted by [`transport_next`].
pub const MAX_ORDER: usize = 8;

/// Relative size of the transport denominator below which a crossing is assumed.
pub const DENOMINATOR_GUARD: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct PhiExpansion<T: Real> {
    pub branch_id: usize,
    /// The root `λ(x)` the expansion follows.
    pub lambda: ScalarField<T>,
    /// Continuous `Log λ = Φ₀′`.
    pub log_lambda: ScalarField<T>,
    /// `Φ₀ ..= Φ_S`.
    pub phis: Vec<ScalarField<T>>,
    pub region: (T, T),
    /// Point where every phase vanishes.
    pub base_point: T,
}

impl<T: Real> PhiExpansion<T> {
    /// Truncation order `S`.
    pub fn order(&self) -> usize {
        self.phis.len() - 1
    }

    /// The expansion cut back to order `s`.
    pub fn truncated(&self, s: usize) -> Self {
        let mut p = self.clone();
        p.phis.truncate(s + 1);
        p
    }

    /// `ε⁻¹ Σₜ Φₜ(x) εᵗ`, the logarithm of the formal solution.
    pub fn log_value(&self, x: T, eps: T) -> Complex<T> {
        let mut acc = re(T::zero());
        let mut w = T::one() / eps;
        for phi in &self.phis {
            acc = acc + phi.eval(x) * w;
            w = w * eps;
        }
        acc
    }

    /// `Σ_{t≥1} Φₜ(x) ε^{t−1}`: the bounded part of [`Self::log_value`].
    pub fn amplitude_log(&self, x: T, eps: T) -> Complex<T> {
        let mut acc = re(T::zero());
        let mut w = T::one();
        for phi in self.phis.iter().skip(1) {
            acc = acc + phi.eval(x) * w;
            w = w * eps;
        }
        acc
    }

    /// `ε⁻¹[Φ₀(x + jε) − Φ₀(x)] + Σ_{t≥1} Φₜ(x + jε) ε^{t−1}`.
    pub fn shifted_log(&self, x: T, j: i64, eps: T) -> Complex<T> {
        let xj = x + eps * T::from_i64(j).unwrap();
        (self.phis[0].eval(xj) - self.phis[0].eval(x)) / eps + self.amplitude_log(xj, eps)
    }
}

/// `Φ₀(x) = ∫_{base}^{x} Log λ` on the branch's interval.
pub fn eikonal<T: Real>(branch: &RootBranch<T>, base_point: T) -> Result<ScalarField<T>> {
    Ok(branch.lambda.log()?.antiderivative_from(base_point))
}

/// Order-0 expansion of a branch.
pub fn start<T: Real>(branch: &RootBranch<T>, base_point: T) -> Result<PhiExpansion<T>> {
    let log_lambda = branch.lambda.log()?;
    let phi0 = log_lambda.antiderivative_from(base_point);
    Ok(PhiExpansion {
        branch_id: branch.branch_id,
        lambda: branch.lambda.clone(),
        log_lambda,
        phis: vec![phi0],
        region: (branch.lambda.lo(), branch.lambda.hi()),
        base_point,
    })
}

/// Derivative fields `Φₜ⁽ʳ⁾` for `1 ≤ r ≤ top − t` (index 0 unused).
fn derivative_table<T: Real>(phi: &PhiExpansion<T>, top: usize) -> Vec<Vec<ScalarField<T>>> {
    phi.phis
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let mut v = Vec::new();
            let first = if t == 0 { phi.log_lambda.clone() } else { f.derivative() };
            v.push(f.clone());
            if top > t {
                let mut d = first;
                v.push(d.clone());
                for _ in 2..=(top - t) {
                    d = d.derivative();
                    v.push(d.clone());
                }
            }
            v
        })
        .collect()
}

/// The ε-series of the normalised residual `Σⱼ a_j(x, ε) exp(…)` at `x`,
/// through order `t_ord`, together with the transport denominator and its scale.
fn residual_series<T: Real>(
    spec: &RecurrenceSpec<T>,
    table: &[Vec<ScalarField<T>>],
    x: T,
    t_ord: usize,
) -> (Jet<T>, Complex<T>, T) {
    let derivs: Vec<Vec<Complex<T>>> = table.iter().map(|fs| fs.iter().map(|f| f.eval(x)).collect()).collect();
    let mut total = Jet::zeros(0, t_ord);
    let mut den = re(T::zero());
    let mut scale = T::zero();
    for j in 0..=spec.order {
        let e = exponent_jet(&derivs, j as i64, 0, t_ord).exp();
        let a = spec.coeff_jet(j, x, 0, t_ord);
        let term = &a * &e;
        let lead = a.value() * e.value() * T::from_usize_(j);
        den = den + lead;
        scale = scale + lead.norm();
        total = &total + &term;
    }
    (total, den, scale)
}

/// Adds `Φ_{S+1}` to an order-`S` expansion.
pub fn transport_next<T: Real>(spec: &RecurrenceSpec<T>, phi: &PhiExpansion<T>) -> Result<PhiExpansion<T>> {
    let s = phi.order();
    if s + 1 > MAX_ORDER {
        return Err(Error::OrderOverflow { requested: s + 1, capacity: MAX_ORDER });
    }
    let t_ord = s + 1;
    let table = derivative_table(phi, t_ord + 1);
    let (lo, hi) = phi.region;
    // the new term is a cancelling sum of O(scale) contributions divided by den
    let mut noise = T::zero();
    for x in phi.lambda.nodes() {
        let (_, den, scale) = residual_series(spec, &table, x, 0);
        if !(den.norm() >= scale * T::lit(DENOMINATOR_GUARD)) {
            return Err(Error::DenominatorTooSmall { x: x.as_f64(), value: den.norm().as_f64() });
        }
        noise = noise.max(scale / den.norm());
    }
    let dphi = ScalarField::from_fn_floor(lo, hi, T::field_tolerance(), noise, |x| {
        let (series, den, _) = residual_series(spec, &table, x, t_ord);
        -series.get(0, t_ord) / den
    });
    let mut out = phi.clone();
    out.phis.push(dphi.antiderivative_from(phi.base_point));
    Ok(out)
}

/// Expansion of `branch` through order `order`.
pub fn expand<T: Real>(
    spec: &RecurrenceSpec<T>,
    branch: &RootBranch<T>,
    base_point: T,
    order: usize,
) -> Result<PhiExpansion<T>> {
    let mut phi = start(branch, base_point)?;
    for _ in 0..order {
        phi = transport_next(spec, &phi)?;
    }
    Ok(phi)
}

/// `Σⱼ a_j(kε, ε) exp(ε⁻¹ Σ_{t≤S} Φₜ((k+j)ε) εᵗ)` divided by `exp(ε⁻¹ Φ₀(kε))`.
pub fn formal_residual<T: Real>(spec: &RecurrenceSpec<T>, phi: &PhiExpansion<T>, eps: T, k: i64) -> Complex<T> {
    let x = eps * T::from_i64(k).unwrap();
    let mut acc = re(T::zero());
    for j in 0..=spec.order {
        acc = acc + spec.a(j, x, eps) * phi.shifted_log(x, j as i64, eps).exp();
    }
    acc
}

/// Residual slope for one truncation order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrderFit {
    pub order: usize,
    pub fit: SlopeFit,
    /// Residuals sit at the rounding floor for every ε: the expansion is exact.
    pub exact: bool,
}

/// Sample indices `k = round(x/ε)` with `kε` and `(k + l)ε` inside the region.
pub fn sample_ks<T: Real>(phi: &PhiExpansion<T>, l: usize, eps: T, xs: &[T]) -> Vec<i64> {
    let (lo, hi) = phi.region;
    xs.iter()
        .filter_map(|&x| {
            let k = (x / eps).round().to_i64()?;
            let xk = eps * T::from_i64(k)?;
            let xe = eps * T::from_i64(k + l as i64)?;
            (xk >= lo && xe <= hi).then_some(k)
        })
        .collect()
}

/// Log–log slope of the maximal residual over `sample_xs` for every order `s ≤ S`.
pub fn residual_order_fit<T: Real>(
    spec: &RecurrenceSpec<T>,
    phi: &PhiExpansion<T>,
    eps_list: &[f64],
    sample_xs: &[T],
) -> Result<Vec<OrderFit>> {
    require_span(eps_list, 3, 1.0)?;
    // ε⁻¹[Φ₀(x+jε) − Φ₀(x)] loses a factor 1/ε of relative accuracy
    let floor = |e: f64| T::epsilon().as_f64() * 1e3 / e;
    (0..=phi.order())
        .map(|s| {
            let p = phi.truncated(s);
            let errors: Vec<f64> = eps_list
                .iter()
                .map(|&e| {
                    let eps = T::lit(e);
                    sample_ks(&p, spec.order, eps, sample_xs)
                        .into_iter()
                        .map(|k| formal_residual(spec, &p, eps, k).norm().as_f64())
                        .fold(0.0, f64::max)
                })
                .collect();
            let exact = errors.iter().zip(eps_list).all(|(&r, &e)| r <= floor(e));
            Ok(OrderFit { order: s, fit: loglog_fit(eps_list, &errors), exact })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::preset;
    use crate::roots::track_branches;
    use approx::assert_relative_eq;

    type Spec = RecurrenceSpec<f64>;

    fn bernoulli(n: usize) -> Vec<f64> {
        // Σ_{k<m+1} C(m+1, k) B_k = 0
        let mut b = vec![1.0];
        for m in 1..=n {
            let mut s = 0.0;
            for (k, bk) in b.iter().enumerate() {
                s += crate::scalar::binomial::<f64>(m + 1, k) * bk;
            }
            b.push(-s / (m as f64 + 1.0));
        }
        b
    }

    #[test]
    fn bernoulli_oracle() {
        let b = bernoulli(6);
        assert_relative_eq!(b[1], -0.5);
        assert_relative_eq!(b[2], 1.0 / 6.0, epsilon = 1e-15);
        assert!(b[3].abs() < 1e-15 && b[5].abs() < 1e-15);
        assert_relative_eq!(b[4], -1.0 / 30.0, epsilon = 1e-15);
        assert_relative_eq!(b[6], 1.0 / 42.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_root_phase() {
        let s = Spec::parse("order 1\ninterval 0 1\ncoeff 0 epspow 0 : -2\ncoeff 1 epspow 0 : 1").unwrap();
        let br = track_branches(&s, 8).unwrap();
        let phi0 = eikonal(&br[0], 0.0).unwrap();
        assert_relative_eq!(phi0.eval(0.6).re, 0.6 * 2f64.ln(), epsilon = 1e-15);
        let phi = expand(&s, &br[0], 0.0, 3).unwrap();
        for t in 1..=3 {
            assert!(phi.phis[t].sup_norm() < 1e-14);
        }
        // only the rounding of ε⁻¹[Φ₀(x+ε) − Φ₀(x)] remains
        assert!(formal_residual(&s, &phi, 0.01, 37).norm() < 1e-12);
        let fits = residual_order_fit(&s, &phi, &[1e-2, 1e-3, 1e-4], &[0.2, 0.5]).unwrap();
        assert!(fits.iter().all(|f| f.exact));
    }

    #[test]
    fn euler_phases_are_bernoulli_multiples() {
        let s: Spec = preset("euler").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let phi = expand(&s, &br[0], 0.0, 4).unwrap();
        let b = bernoulli(4);
        let mut fact = 1.0;
        for (t, f) in phi.phis.iter().enumerate() {
            if t > 0 {
                fact *= t as f64;
            }
            for x in [0.0f64, 0.3, 1.0] {
                let want = b[t] / fact * (x.exp() - 1.0);
                assert!((f.eval(x).re - want).abs() < 1e-8, "t = {t}, x = {x}");
            }
        }
        // eikonal identity
        for (x, v) in phi.log_lambda.nodes().iter().zip(phi.log_lambda.values()) {
            assert!((v.exp() - phi.lambda.eval(*x)).norm() <= 1e-10 * phi.lambda.eval(*x).norm());
        }
    }

    #[test]
    fn bessel_amplitude() {
        let s: Spec = preset("bessel").unwrap();
        let br = track_branches(&s, 32).unwrap();
        for b in &br {
            let phi = expand(&s, b, 0.5, 1).unwrap();
            let sinh_a = |x: f64| ((1.0 + x).powi(2) - 1.0).sqrt();
            let want = -0.5 * sinh_a(1.0).ln() + 0.5 * sinh_a(0.5).ln();
            assert_relative_eq!(phi.phis[1].eval(1.0).re, want, epsilon = 1e-10);
            assert_relative_eq!(sinh_a(1.0), 3f64.sqrt(), epsilon = 1e-15);
        }
        let big = br.iter().find(|b| b.lambda.eval(1.0).norm() > 1.0).unwrap();
        let p0 = start(big, 0.5).unwrap();
        assert_relative_eq!(p0.log_lambda.eval(1.0).re, 1.316958, epsilon = 1e-6);
    }

    #[test]
    fn gauge_constant_only_rescales() {
        let s: Spec = preset("bessel").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let phi = expand(&s, &br[1], 0.5, 2).unwrap();
        let eps = 0.01;
        let k = 80;
        let x = eps * k as f64;
        let norm = |p: &PhiExpansion<f64>| formal_residual(&s, p, eps, k) / p.amplitude_log(x, eps).exp();
        for t in [1, 2] {
            let mut shifted = phi.clone();
            shifted.phis[t] = shifted.phis[t].map(|v| v + re(0.7));
            let (a, b) = (norm(&phi), norm(&shifted));
            // the residual is a cancelling sum of O(1) terms; compare at that scale
            assert!((a - b).norm() <= 1e-12, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn euler_residual_shrinks_with_order() {
        let s: Spec = preset("euler").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let phi = expand(&s, &br[0], 0.0, 1).unwrap();
        let r0 = formal_residual(&s, &phi.truncated(0), 1e-3, 500).norm();
        assert!(r0 < 1e-3 * 10.0, "{r0}");
        let fits = residual_order_fit(&s, &phi, &[1e-2, 1e-3, 1e-4], &[0.25, 0.5, 0.75]).unwrap();
        assert!((fits[0].fit.slope - 1.0).abs() < 0.15);
        assert!((fits[1].fit.slope - 2.0).abs() < 0.15, "{:?}", fits[1].fit);
    }

    #[test]
    fn order_cap_and_crossing_guard() {
        let s: Spec = preset("euler").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let mut phi = start(&br[0], 0.0).unwrap();
        phi.phis = vec![phi.phis[0].clone(); MAX_ORDER + 1];
        assert!(matches!(transport_next(&s, &phi), Err(Error::OrderOverflow { .. })));
        let b: Spec = crate::recurrence::bessel(1e-8, 0.5).unwrap();
        let br = track_branches(&b, 64).unwrap();
        let p = start(&br[0], 1e-8).unwrap();
        assert!(matches!(transport_next(&b, &p), Err(Error::DenominatorTooSmall { .. })));
    }

    #[test]
    fn too_few_decades() {
        let s: Spec = preset("euler").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let phi = start(&br[0], 0.0).unwrap();
        assert!(matches!(
            residual_order_fit(&s, &phi, &[1e-2, 5e-3], &[0.5]),
            Err(Error::InsufficientDecades { .. })
        ));
    }
}
