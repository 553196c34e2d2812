//! Difference schemes for ODEs: recurrences whose characteristic roots cluster
//! at 1 as ε → 0. Solutions admit a regular expansion `y_k ≈ Σ εᵐ Ξ_m(kε)`;
//! the levels `Ξ_m` solve second-order ODEs obtained by Taylor-expanding the
//! scheme itself.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{iterate, Direction};
use crate::field::{lobatto_nodes, ScalarField};
use crate::fit::{linear_fit, loglog_fit, require_span, SlopeFit};
use crate::linalg::CMat;
use crate::recurrence::RecurrenceSpec;
use crate::roots::char_roots_at;
use crate::scalar::{factorial, re, Real};

/// Grid used for the scheme coefficients and every level `Ξ_m`.
pub const SCHEME_RESOLUTION: usize = 64;
const DEGENERACY_SAMPLES: usize = 24;

/// Root clustering `λ_m(x, ε) − 1 ≈ ε^q Q_m(x)` of the degenerate roots.
#[derive(Clone, Debug)]
pub struct Degeneracy<T: Real> {
    pub q: usize,
    /// Fitted exponent before rounding (worst sample).
    pub fitted: f64,
    /// `Q_m` for each clustered root, ordered by decreasing real part.
    pub fields: Vec<ScalarField<T>>,
    /// `min_x min(|Q_m − Q_n|, |Q_m|)`.
    pub separation: f64,
}

fn cluster_size<T: Real>(spec: &RecurrenceSpec<T>, x: T) -> Result<usize> {
    let set = char_roots_at(spec, x, T::zero(), false)?;
    let tol = T::lit(1e-6);
    Ok(set.roots.iter().filter(|r| (**r - re(T::one())).norm() < tol).count())
}

/// Clustered roots at `(x, ε)` shifted by 1, ordered by real part then imaginary part.
fn clustered_offsets<T: Real>(spec: &RecurrenceSpec<T>, x: T, eps: T, count: usize) -> Result<Vec<Complex<T>>> {
    let mut roots: Vec<Complex<T>> = char_roots_at(spec, x, eps, true)?
        .roots
        .into_iter()
        .map(|r| r - re(T::one()))
        .collect();
    roots.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    roots.truncate(count);
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re).unwrap().then(b.im.partial_cmp(&a.im).unwrap())
    });
    Ok(roots)
}

/// Fits the common clustering exponent `q` over `eps_list` and returns the
/// fields `Q_m(x) = (λ_m(x, ε) − 1)/ε^q` at the smallest ε.
pub fn check_degeneracy<T: Real>(spec: &RecurrenceSpec<T>, eps_list: &[f64]) -> Result<Degeneracy<T>> {
    require_span(eps_list, 2, 0.3)?;
    let (lo, hi) = spec.interval;
    let mid = (lo + hi) * T::lit(0.5);
    let half = (hi - lo) * T::lit(0.5);
    let xs: Vec<T> = lobatto_nodes::<T>(DEGENERACY_SAMPLES).into_iter().map(|t| mid + half * t).collect();
    let count = cluster_size(spec, mid)?;
    if count == 0 {
        return Err(Error::DegeneracyMismatch(format!(
            "no characteristic root equals 1 at x = {}",
            mid.as_f64()
        )));
    }
    for &x in &xs {
        let c = cluster_size(spec, x)?;
        if c != count {
            return Err(Error::DegeneracyMismatch(format!(
                "{c} roots at 1 near x = {}, {count} at the midpoint",
                x.as_f64()
            )));
        }
    }
    let logs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let mut slopes = Vec::new();
    for &x in &xs {
        let offs: Vec<Vec<Complex<T>>> = eps_list
            .iter()
            .map(|&e| clustered_offsets(spec, x, T::lit(e), count))
            .collect::<Result<_>>()?;
        for m in 0..count {
            let ys: Vec<f64> = offs.iter().map(|o| o[m].norm().as_f64().max(1e-300).ln()).collect();
            slopes.push(linear_fit(&logs, &ys).0);
        }
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let q = mean.round().max(1.0);
    let worst = slopes.iter().cloned().fold(q, |w, s| if (s - q).abs() > (w - q).abs() { s } else { w });
    if (worst - q).abs() > 0.25 {
        return Err(Error::DegeneracyMismatch(format!(
            "clustering exponent varies: {worst:.3} against {q}"
        )));
    }
    let q = q as usize;
    let e = eps_list.iter().cloned().fold(f64::MAX, f64::min);
    let scale = T::lit(e).powi(q as i32);
    let fields: Vec<ScalarField<T>> = (0..count)
        .map(|m| {
            ScalarField::from_fn_n(lo, hi, DEGENERACY_SAMPLES, |x| {
                clustered_offsets(spec, x, T::lit(e), count).map(|o| o[m] / scale).unwrap_or(re(T::nan()))
            })
        })
        .collect();
    let mut sep = f64::INFINITY;
    let mut big = 0.0f64;
    for f in &fields {
        big = big.max(f.sup_norm().as_f64());
        sep = sep.min(f.values().iter().fold(f64::INFINITY, |a, v| a.min(v.norm().as_f64())));
    }
    for a in 0..count {
        for b in a + 1..count {
            let d = fields[a].values().iter().zip(fields[b].values()).fold(f64::INFINITY, |acc, (u, v)| {
                acc.min((u - v).norm().as_f64())
            });
            sep = sep.min(d);
        }
    }
    if !(sep > 1e-3 * big.max(1e-300)) {
        return Err(Error::SeparationFailure(format!("min separation {sep:e} against scale {big:e}")));
    }
    Ok(Degeneracy { q, fitted: worst, fields, separation: sep })
}

/// Cauchy data `(y(x_0), y′(x_0))` at the left end: `y_{k0} = y0`, `y_{k0+1} = y0 + ε·dy0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cauchy {
    pub y0: f64,
    pub dy0: f64,
}

/// Regular expansion `Γ(x; ε) = Σ εᵐ Ξ_m(x)` of the scheme solution with Cauchy data.
#[derive(Clone, Debug)]
pub struct SchemeSeries<T: Real> {
    pub xis: Vec<ScalarField<T>>,
    pub scheme: RecurrenceSpec<T>,
    pub q: usize,
    pub init: Cauchy,
    /// `b[s][r] = Σ_j a_{j,s} j^r / r!` on the common grid.
    pub b: Vec<Vec<ScalarField<T>>>,
}

impl<T: Real> SchemeSeries<T> {
    pub fn order(&self) -> usize {
        self.xis.len() - 1
    }

    /// Truncation `Γ_s(x; ε) = Σ_{m ≤ s} εᵐ Ξ_m(x)`.
    pub fn gamma(&self, s: usize, x: T, eps: T) -> Complex<T> {
        let mut acc = re(T::zero());
        let mut p = T::one();
        for xi in self.xis.iter().take(s + 1) {
            acc = acc + xi.eval(x) * p;
            p = p * eps;
        }
        acc
    }

    /// Right-hand side of the `Ξ_m(x_0)`, `Ξ_m′(x_0)` conditions implied by the Cauchy data.
    pub fn initial_slope(&self, m: usize) -> Complex<T> {
        initial_slope(&self.xis, m, self.xis[0].lo(), self.init)
    }
}

fn initial_slope<T: Real>(xis: &[ScalarField<T>], m: usize, x0: T, init: Cauchy) -> Complex<T> {
    if m == 0 {
        return re(T::lit(init.dy0));
    }
    let mut acc = re(T::zero());
    for k in 1..=m {
        let d = xis[m - k].derivative_n(k + 1).expect("derivative order within grid");
        acc = acc - d.eval(x0) / factorial::<T>(k + 1);
    }
    acc
}

/// Integration matrix on the Lobatto grid: `(J v)_i = ∫_{x_0}^{x_i} v`.
fn integration_matrix<T: Real>(lo: T, hi: T, n: usize) -> CMat<T> {
    let cols: Vec<Vec<Complex<T>>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut e = vec![re(T::zero()); n + 1];
            e[i] = re(T::one());
            ScalarField::from_values(lo, hi, e).antiderivative().values().to_vec()
        })
        .collect();
    CMat::from_fn(n + 1, n + 1, |r, c| cols[c][r])
}

/// Solves `p u″ + q u′ + r u = f` with `u(lo) = u0`, `u′(lo) = du0` by collocating
/// the Volterra form for `v = u″`.
fn solve_ivp<T: Real>(
    p: &ScalarField<T>,
    q: &ScalarField<T>,
    r: &ScalarField<T>,
    f: &ScalarField<T>,
    u0: Complex<T>,
    du0: Complex<T>,
    j1: &CMat<T>,
) -> Result<ScalarField<T>> {
    let (lo, hi) = (p.lo(), p.hi());
    let n = p.n();
    let j2 = j1.mul(j1);
    let xs = p.nodes();
    let (pv, qv, rv, fv) = (p.values(), q.values(), r.values(), f.values());
    let m = CMat::from_fn(n + 1, n + 1, |i, k| {
        let d = if i == k { pv[i] } else { re(T::zero()) };
        d + qv[i] * j1[(i, k)] + rv[i] * j2[(i, k)]
    });
    let rhs: Vec<Complex<T>> = (0..=n)
        .map(|i| fv[i] - qv[i] * du0 - rv[i] * (u0 + du0 * (xs[i] - lo)))
        .collect();
    let v = m.solve_vec(&rhs)?;
    let v = ScalarField::from_values(lo, hi, v);
    let lin = ScalarField::from_fn_n(lo, hi, n, |x| u0 + du0 * (x - lo));
    Ok(v.antiderivative().antiderivative().add(&lin))
}

/// Computes `Ξ_0..Ξ_S` for Cauchy data `cauchy` at the left end of the interval.
pub fn xi_series<T: Real>(spec: &RecurrenceSpec<T>, order: usize, cauchy: Cauchy) -> Result<SchemeSeries<T>> {
    let cap = spec.series_order.saturating_sub(2);
    if order > cap {
        return Err(Error::OrderOverflow { requested: order, capacity: cap });
    }
    let (lo, hi) = spec.interval;
    let n = SCHEME_RESOLUTION;
    let top = order + 2;
    let l = spec.order;
    let xs: Vec<T> = {
        let mid = (lo + hi) * T::lit(0.5);
        let half = (hi - lo) * T::lit(0.5);
        lobatto_nodes::<T>(n).into_iter().map(|t| mid + half * t).collect()
    };
    // a[j][node][s]
    let a: Vec<Vec<Vec<Complex<T>>>> = (0..=l)
        .map(|j| xs.par_iter().map(|&x| spec.series_at(j, x, top)).collect())
        .collect();
    let b: Vec<Vec<ScalarField<T>>> = (0..=top)
        .map(|s| {
            (0..=top - s)
                .map(|r| {
                    let vals = (0..=n)
                        .map(|i| {
                            (0..=l).fold(re(T::zero()), |acc, j| {
                                acc + a[j][i][s] * T::from_usize_(j).powi(r as i32) / factorial::<T>(r)
                            })
                        })
                        .collect();
                    ScalarField::from_values(lo, hi, vals)
                })
                .collect()
        })
        .collect();
    let scale = b[0][2].sup_norm().max(b[2][0].sup_norm()).max(T::one());
    for (s, r) in [(0, 0), (0, 1), (1, 0)] {
        let v = b[s][r].sup_norm();
        if v > T::lit(1e-10) * scale {
            return Err(Error::DegeneracyMismatch(format!(
                "b_{{{s},{r}}} = {:e} does not vanish; the scheme is not a consistent two-root discretisation",
                v.as_f64()
            )));
        }
    }
    let lead_min = b[0][2].values().iter().fold(T::infinity(), |m, v| m.min(v.norm()));
    if !(lead_min > T::lit(1e-10) * scale) {
        return Err(Error::DegeneracyMismatch("second-difference coefficient vanishes".into()));
    }
    let j1 = integration_matrix(lo, hi, n);
    let mut xis: Vec<ScalarField<T>> = Vec::with_capacity(order + 1);
    // derivs[m][r] = Ξ_m^{(r)}
    let mut derivs: Vec<Vec<ScalarField<T>>> = Vec::new();
    for m in 0..=order {
        let mut src = ScalarField::constant(lo, hi, re(T::zero())).resample(n);
        for s in 0..=m + 2 {
            for r in 0..=m + 2 - s {
                if s + r < 3 {
                    continue;
                }
                let mm = m + 2 - s - r;
                src = src.sub(&b[s][r].mul(&derivs[mm][r]));
            }
        }
        let u0 = if m == 0 { re(T::lit(cauchy.y0)) } else { re(T::zero()) };
        let du0 = initial_slope(&xis, m, lo, cauchy);
        let xi = solve_ivp(&b[0][2], &b[1][1], &b[2][0], &src, u0, du0, &j1)?;
        let mut d = vec![xi.clone()];
        for _ in 0..top {
            let next = d.last().unwrap().derivative();
            d.push(next);
        }
        derivs.push(d);
        xis.push(xi);
    }
    Ok(SchemeSeries { xis, scheme: spec.clone(), q: 1, init: cauchy, b })
}

/// Exact scheme solution for the series' Cauchy data on the lattice `x = kε ∈ [lo, hi]`.
pub fn exact_solution<T: Real>(spec: &RecurrenceSpec<T>, eps: T, cauchy: Cauchy) -> Result<Vec<(T, Complex<T>)>> {
    let (lo, hi) = spec.interval;
    let k0f = lo / eps;
    let k0 = k0f.round();
    if (k0f - k0).abs() > T::lit(1e-9) * k0f.abs().max(T::one()) {
        return Err(Error::InvalidArgument(format!(
            "interval start {} is not on the ε = {} lattice",
            lo.as_f64(),
            eps.as_f64()
        )));
    }
    let k0 = k0.to_i64().unwrap();
    let k1 = (hi / eps + T::lit(1e-9)).floor().to_i64().unwrap();
    let y0 = re(T::lit(cauchy.y0));
    let y1 = y0 + re(eps * T::lit(cauchy.dy0));
    let tr = iterate(spec, eps, &[y0, y1], (k0, k1), Direction::Forward)?;
    Ok((k0..=k1).map(|k| (eps * T::from_i64(k).unwrap(), tr.value(k))).collect())
}

/// Error of the order-`s` truncation against exact iteration at one ε.
pub fn truncation_error<T: Real>(series: &SchemeSeries<T>, s: usize, eps: T) -> Result<T> {
    let exact = exact_solution(&series.scheme, eps, series.init)?;
    Ok(exact
        .par_iter()
        .map(|(x, y)| (*y - series.gamma(s, *x, eps)).norm())
        .reduce(T::zero, T::max))
}

/// Log–log slope of `max_k |y_k − Γ_s(kε)|` against ε for each truncation `s ≤ S`.
pub fn scheme_error_order<T: Real>(series: &SchemeSeries<T>, eps_list: &[f64]) -> Result<Vec<SlopeFit>> {
    require_span(eps_list, 3, 0.5)?;
    (0..=series.order())
        .map(|s| {
            let errs = eps_list
                .par_iter()
                .map(|&e| truncation_error(series, s, T::lit(e)).map(|v| v.as_f64()))
                .collect::<Result<Vec<f64>>>()?;
            Ok(loglog_fit(eps_list, &errs))
        })
        .collect()
}

/// `max_k |Σ_j a_j(kε, ε) Γ_s((k+j)ε; ε)|` over the lattice points where the stencil fits.
pub fn local_residual<T: Real>(series: &SchemeSeries<T>, s: usize, eps: T) -> T {
    let spec = &series.scheme;
    let (lo, hi) = spec.interval;
    let k0 = (lo / eps).ceil().to_i64().unwrap();
    let k1 = (hi / eps + T::lit(1e-9)).floor().to_i64().unwrap() - spec.order as i64;
    (k0..=k1)
        .into_par_iter()
        .map(|k| {
            let x = eps * T::from_i64(k).unwrap();
            let mut acc = re(T::zero());
            for j in 0..=spec.order {
                let xj = eps * T::from_i64(k + j as i64).unwrap();
                acc = acc + spec.a(j, x, eps) * series.gamma(s, xj, eps);
            }
            acc.norm()
        })
        .reduce(T::zero, T::max)
}

/// Local-condition decay slope per truncation `s ≤ S`.
pub fn local_condition<T: Real>(series: &SchemeSeries<T>, eps_list: &[f64]) -> Result<Vec<SlopeFit>> {
    require_span(eps_list, 3, 0.5)?;
    Ok((0..=series.order())
        .map(|s| {
            let r: Vec<f64> = eps_list.iter().map(|&e| local_residual(series, s, T::lit(e)).as_f64()).collect();
            loglog_fit(eps_list, &r)
        })
        .collect())
}

/// Richardson extraction of the `ε^p` coefficient of `y_k(ε) − Γ_{p−1}(kε)` at the
/// points `xs` (which must lie on every lattice): polynomial extrapolation in ε to ε = 0.
pub fn richardson_coefficient<T: Real>(series: &SchemeSeries<T>, p: usize, eps_list: &[f64], xs: &[f64]) -> Result<Vec<Complex<T>>> {
    let n = eps_list.len();
    let rows: Vec<Vec<Complex<T>>> = eps_list
        .par_iter()
        .map(|&e| {
            let et = T::lit(e);
            let exact = exact_solution(&series.scheme, et, series.init)?;
            let x0 = exact[0].0;
            xs.iter()
                .map(|&x| {
                    let k = ((T::lit(x) - x0) / et).round().to_usize().unwrap();
                    let (xk, y) = exact[k];
                    Ok((y - series.gamma(p - 1, xk, et)) / et.powi(p as i32))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // Neville extrapolation to ε = 0 through all n points.
    Ok((0..xs.len())
        .map(|i| {
            let mut t: Vec<Complex<T>> = (0..n).map(|a| rows[a][i]).collect();
            for lvl in 1..n {
                for a in 0..n - lvl {
                    let (ea, eb) = (T::lit(eps_list[a]), T::lit(eps_list[a + lvl]));
                    t[a] = (t[a + 1] * ea - t[a] * eb) / (ea - eb);
                }
            }
            t[0]
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{bessel, euler_scheme};

    const UNIT: Cauchy = Cauchy { y0: 0.0, dy0: 1.0 };

    #[test]
    fn euler_scheme_roots_cluster_linearly() {
        let s = euler_scheme::<f64>("1").unwrap();
        let d = check_degeneracy(&s, &[1e-2, 5e-3, 2.5e-3, 1.25e-3]).unwrap();
        assert_eq!(d.q, 1);
        assert_eq!(d.fields.len(), 2);
        // λ = 1 ± ε + ε²/2 + …, so Q = ±1 up to ε/2 at the smallest ε
        assert!((d.fields[0].eval(0.5).re - 1.0).abs() < 1e-3);
        assert!((d.fields[1].eval(0.5).re + 1.0).abs() < 1e-3);
    }

    #[test]
    fn variable_q_gives_root_amplitude() {
        let s = euler_scheme::<f64>("1 + x").unwrap();
        let d = check_degeneracy(&s, &[1e-3, 5e-4, 2.5e-4]).unwrap();
        for x in [0.0, 0.3, 0.8, 1.0] {
            let want = (1.0f64 + x).sqrt();
            assert!((d.fields[0].eval(x).re - want).abs() < 1e-3, "x = {x}");
            assert!((d.fields[1].eval(x).re + want).abs() < 1e-3, "x = {x}");
        }
        assert!(d.separation > 0.9);
    }

    #[test]
    fn roots_away_from_one_are_rejected() {
        let s = bessel::<f64>(0.5, 1.5).unwrap();
        assert!(matches!(check_degeneracy(&s, &[1e-2, 1e-3]), Err(Error::DegeneracyMismatch(_))));
        assert!(matches!(xi_series(&s, 1, UNIT), Err(Error::DegeneracyMismatch(_))));
    }

    #[test]
    fn leading_level_is_sinh() {
        let s = euler_scheme::<f64>("1").unwrap();
        let ser = xi_series(&s, 2, UNIT).unwrap();
        let want = ScalarField::from_fn(0.0, 1.0, |x: f64| re(x.sinh()));
        assert!(ser.xis[0].distance(&want) < 1e-12);
        assert!(ser.xis[1].sup_norm() < 1e-10);
    }

    #[test]
    fn second_level_matches_direct_expansion() {
        // Ξ_2'' = Ξ_2 − sinh/12, Ξ_2(0) = 0, Ξ_2'(0) = −Ξ_0'''(0)/6 − Ξ_1''(0)/2 = −1/6
        // ⇒ Ξ_2 = −(x/24) cosh x − (1/8) sinh x
        let s = euler_scheme::<f64>("1").unwrap();
        let ser = xi_series(&s, 2, UNIT).unwrap();
        let want = ScalarField::from_fn(0.0, 1.0, |x: f64| re(-x * x.cosh() / 24.0 - x.sinh() / 8.0));
        assert!(ser.xis[2].distance(&want) < 1e-10, "{}", ser.xis[2].distance(&want));
    }

    #[test]
    fn levels_satisfy_their_initial_conditions() {
        let s = euler_scheme::<f64>("1 + x").unwrap();
        let ser = xi_series(&s, 4, UNIT).unwrap();
        let q = ScalarField::from_fn(0.0, 1.0, |x: f64| re(1.0 + x));
        let ode = ser.xis[0].derivative().derivative().sub(&q.mul(&ser.xis[0]));
        assert!(ode.sup_norm() < 1e-10);
        assert!(ser.xis[1].sup_norm() < 1e-10);
        for m in 1..=4 {
            assert!(ser.xis[m].eval(0.0).norm() < 1e-12, "m = {m}");
            let slope = ser.xis[m].derivative().eval(0.0);
            assert!((slope - ser.initial_slope(m)).norm() < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn error_order_and_local_condition() {
        let s = euler_scheme::<f64>("1").unwrap();
        let ser = xi_series(&s, 2, UNIT).unwrap();
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let fits = scheme_error_order(&ser, &eps).unwrap();
        assert!((fits[0].slope - 2.0).abs() < 0.1, "{:?}", fits[0]);
        let loc = local_condition(&ser, &eps).unwrap();
        assert!(loc[0].slope >= 0.8 && loc[1].slope >= 1.8, "{loc:?}");
    }

    #[test]
    fn quad_precision_resolves_fourth_order() {
        // the ε⁴ error at ε ≈ 1e-3 sits below f64 accumulation noise (~k² u)
        type Q = f128::f128;
        let s = euler_scheme::<Q>("1").unwrap();
        let ser = xi_series(&s, 2, UNIT).unwrap();
        let eps = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
        let fits = scheme_error_order(&ser, &eps).unwrap();
        assert!(fits[2].slope >= 3.8, "{:?}", fits[2]);
        let loc = local_condition(&ser, &eps).unwrap();
        for (s, f) in loc.iter().enumerate() {
            assert!(f.slope >= s as f64 + 0.8, "s = {s}: {f:?}");
        }
    }

    #[test]
    fn constant_solution_is_reproduced() {
        // q ≡ 0 with y ≡ 1: the scheme is exact for linear data
        let s = euler_scheme::<f64>("0").unwrap();
        let ser = xi_series(&s, 1, Cauchy { y0: 1.0, dy0: 0.0 }).unwrap();
        for e in [1e-2, 1e-3] {
            assert!(truncation_error(&ser, 0, e).unwrap() < 1e-12);
        }
    }

    #[test]
    fn richardson_recovers_second_level() {
        let s = euler_scheme::<f64>("1").unwrap();
        let ser = xi_series(&s, 2, UNIT).unwrap();
        let xs = [0.2, 0.5, 1.0];
        let got = richardson_coefficient(&ser, 2, &[1e-2, 5e-3, 2.5e-3], &xs).unwrap();
        for (x, g) in xs.iter().zip(&got) {
            let want = -x * x.cosh() / 24.0 - x.sinh() / 8.0;
            assert!((g.re - want).abs() < 1e-4 * want.abs(), "x = {x}: {g} vs {want}");
        }
    }

    #[test]
    fn order_cap() {
        let s = euler_scheme::<f64>("1").unwrap();
        assert!(matches!(xi_series(&s, 7, UNIT), Err(Error::OrderOverflow { .. })));
    }
}
