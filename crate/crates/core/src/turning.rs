//! Interior expansions at a generic crossing of two characteristic roots.
//!
//! Near `x*` with double root `λ*`, put `δ = ε^{1/3}`, `ξ = (kε − x*)/δ²` and
//! `y_k = λ*^k χ(ξ)`. Expanding the recurrence in δ gives
//!
//! `Σ_{s,m} δ^{s+m} Q_{s,m}(ξ) χ^{(m)}(ξ) = 0`, `Q_{s,m} = Σⱼ P_{j,s}(ξ) jᵐ/m!`,
//!
//! so `χ = Σ δⁿ χ_n` with `Q_{0,2}χ_n″ + Q_{2,0}χ_n = −Σ_{n'<n} Σ_{s+m=n+2−n'} Q_{s,m}χ_{n'}^{(m)}`.
//! Every `χ_n` is carried exactly as `p(ξ) w(cξ) + q(ξ) w′(cξ)` with polynomials
//! `p, q` and `w″ = z w`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_eval, AiryFlavor};
use crate::error::{Error, Result};
use crate::exact::{iterate, Direction, LogScaledTrajectory};
use crate::field::ScalarField;
use crate::fit::linear_fit;
use crate::linalg::{lstsq, CMat};
use crate::recurrence::RecurrenceSpec;
use crate::roots::{char_roots_at, detect_crossings, sample_branches, track_branches_on, CrossingCandidate};
use crate::scalar::{c, cx_f64, cx_from_f64, factorial, re, Real};
use crate::wkb::{expand, PhiExpansion};

/// Polynomial in ξ, ascending coefficients.
pub type Poly<T> = Vec<Complex<T>>;

fn padd<T: Real>(a: &Poly<T>, b: &Poly<T>) -> Poly<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(re(T::zero())) + b.get(i).copied().unwrap_or(re(T::zero())))
        .collect()
}

fn pscale<T: Real>(a: &Poly<T>, s: Complex<T>) -> Poly<T> {
    a.iter().map(|v| v * s).collect()
}

fn pmul<T: Real>(a: &Poly<T>, b: &Poly<T>) -> Poly<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![re(T::zero()); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j] + x * y;
        }
    }
    out
}

fn pderiv<T: Real>(a: &Poly<T>) -> Poly<T> {
    a.iter().enumerate().skip(1).map(|(i, v)| v * T::from_usize_(i)).collect()
}

/// `ξ·a`
fn pshift<T: Real>(a: &Poly<T>) -> Poly<T> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut out = vec![re(T::zero())];
    out.extend_from_slice(a);
    out
}

pub fn poly_eval<T: Real>(a: &Poly<T>, x: Complex<T>) -> Complex<T> {
    a.iter().rev().fold(re(T::zero()), |acc, v| acc * x + v)
}

/// Degree after dropping coefficients below `tol · max`; `None` for the zero polynomial.
pub fn poly_degree<T: Real>(a: &Poly<T>, tol: T) -> Option<usize> {
    let big = a.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if big == T::zero() {
        return None;
    }
    a.iter().rposition(|v| v.norm() > tol * big)
}

fn coef<T: Real>(a: &Poly<T>, i: usize) -> Complex<T> {
    a.get(i).copied().unwrap_or(re(T::zero()))
}

/// `p(ξ) w(cξ) + q(ξ) w′(cξ)` for any solution `w` of `w″ = z w`.
#[derive(Clone, Debug, PartialEq)]
pub struct AiryPair<T: Real> {
    pub p: Poly<T>,
    pub q: Poly<T>,
}

impl<T: Real> AiryPair<T> {
    pub fn leading() -> Self {
        Self { p: vec![re(T::one())], q: Vec::new() }
    }

    pub fn zero() -> Self {
        Self { p: Vec::new(), q: Vec::new() }
    }

    /// ξ-derivative: `(p′ + c²ξq, cp + q′)`.
    pub fn derivative(&self, c: Complex<T>) -> Self {
        Self {
            p: padd(&pderiv(&self.p), &pscale(&pshift(&self.q), c * c)),
            q: padd(&pscale(&self.p, c), &pderiv(&self.q)),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { p: padd(&self.p, &o.p), q: padd(&self.q, &o.q) }
    }

    pub fn mul_poly(&self, r: &Poly<T>) -> Self {
        Self { p: pmul(&self.p, r), q: pmul(&self.q, r) }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { p: pscale(&self.p, s), q: pscale(&self.q, s) }
    }

    pub fn eval(&self, c: Complex<T>, flavor: AiryFlavor, xi: Complex<T>) -> Result<Complex<T>> {
        let (w, wp) = flavor.eval(c * xi)?;
        Ok(poly_eval(&self.p, xi) * w + poly_eval(&self.q, xi) * wp)
    }

    /// `χ″ − c³ξχ` in pair form.
    pub fn airy_operator(&self, c: Complex<T>) -> Self {
        let d2 = self.derivative(c).derivative(c);
        d2.add(&self.mul_poly(&vec![re(T::zero()), -(c * c * c)]))
    }
}

/// Solves `χ″ − c³ξχ = r` within pair form, fixing the free multiple of `w` by
/// `p(0) = 0`.
pub fn solve_airy_pair<T: Real>(r: &AiryPair<T>, c: Complex<T>) -> AiryPair<T> {
    // ξ^i coefficients of L(p, q) = (p″ + c²q + 2c²ξq′, 2cp′ + q″)
    let top = r.p.len().max(r.q.len());
    let mut p = vec![re(T::zero()); top + 3];
    let mut q = vec![re(T::zero()); top + 3];
    let c2 = c * c;
    for i in (0..top).rev() {
        let fi = T::from_usize_(i);
        let w = T::from_usize_((i + 2) * (i + 1));
        q[i] = (coef(&r.p, i) - p[i + 2] * w) / (c2 * (T::lit(2.0) * fi + T::one()));
        p[i + 1] = (coef(&r.q, i) - q[i + 2] * w) / (c * T::lit(2.0) * (fi + T::one()));
    }
    let trim = |mut v: Poly<T>| {
        while v.last().is_some_and(|z| z.norm() == T::zero()) {
            v.pop();
        }
        v
    };
    AiryPair { p: trim(p), q: trim(q) }
}

/// The printed Θ (cube root of `Σⱼ D_x a_j λ*ʲ / Σⱼ j² a_j λ*ʲ`) together with
/// the scale `c` actually entering `χ₀″ = c³ ξ χ₀`, `c³ = −2 Σⱼ D_x a_j λ*ʲ / Σⱼ j² a_j λ*ʲ`.
#[derive(Clone, Debug)]
pub struct ThetaInfo<T: Real> {
    pub numerator: Complex<T>,
    pub denominator: Complex<T>,
    pub cube: Complex<T>,
    pub roots: [Complex<T>; 3],
    pub theta: Complex<T>,
    pub kappa: Complex<T>,
    pub airy_scale: Complex<T>,
}

/// All cube roots of `v` and the selected one: the real root when `v` is real
/// (positive or negative), otherwise the one with argument in (−π/3, π/3].
pub fn select_cube_root<T: Real>(v: Complex<T>) -> (Complex<T>, [Complex<T>; 3]) {
    let r = v.norm().cbrt();
    let a = v.arg() / T::lit(3.0);
    let turn = T::lit(2.0) * T::PI() / T::lit(3.0);
    let roots = [0, 1, 2].map(|k| Complex::from_polar(r, a + turn * T::from_usize_(k)));
    let real = v.im.abs() <= v.norm() * T::lit(1e-12);
    let chosen = if real && v.re < T::zero() {
        c(-r, T::zero())
    } else if real {
        c(r, T::zero())
    } else {
        roots[0]
    };
    (chosen, roots)
}

/// Double root at `x_star`: midpoint of the closest pair of characteristic roots.
pub fn double_root<T: Real>(spec: &RecurrenceSpec<T>, x_star: T) -> Result<Complex<T>> {
    let r = char_roots_at(spec, x_star, T::zero(), false)?.roots;
    if r.len() < 2 {
        return Err(Error::InvalidArgument("a crossing needs order ≥ 2".into()));
    }
    let mut best = (T::infinity(), 0, 1);
    for a in 0..r.len() {
        for b in a + 1..r.len() {
            let g = (r[a] - r[b]).norm();
            if g < best.0 {
                best = (g, a, b);
            }
        }
    }
    Ok((r[best.1] + r[best.2]) * T::lit(0.5))
}

/// Newton refinement of a crossing on `P(x, λ) = ∂_λ P(x, λ) = 0`, which is regular
/// at a generic crossing even though the double root itself is ill-conditioned.
pub fn refine_crossing<T: Real>(spec: &RecurrenceSpec<T>, x0: T, lambda0: Complex<T>) -> (T, Complex<T>) {
    let (mut x, mut lam) = (x0, lambda0);
    for _ in 0..30 {
        let (mut p, mut pl, mut pll, mut px, mut plx) = (re(T::zero()), re(T::zero()), re(T::zero()), re(T::zero()), re(T::zero()));
        for j in 0..=spec.order {
            let jet = spec.coeff_jet(j, x, 1, 0);
            let (a, ax) = (jet.get(0, 0), jet.get(1, 0));
            let fj = T::from_usize_(j);
            let lj = lam.powi(j as i32);
            let lj1 = if j >= 1 { lam.powi(j as i32 - 1) } else { re(T::zero()) };
            let lj2 = if j >= 2 { lam.powi(j as i32 - 2) } else { re(T::zero()) };
            p = p + a * lj;
            px = px + ax * lj;
            pl = pl + a * lj1 * fj;
            plx = plx + ax * lj1 * fj;
            pll = pll + a * lj2 * fj * (fj - T::one());
        }
        // [px pl; plx pll] (dx, dλ) = −(p, pl)
        let det = px * pll - pl * plx;
        if det.norm() == T::zero() {
            break;
        }
        let dx = (-p * pll + pl * pl) / det;
        let dl = (-px * pl + plx * p) / det;
        x = x + dx.re;
        lam = lam + dl;
        if dl.norm() <= T::epsilon() * lam.norm() && dx.norm() <= T::epsilon() * (T::one() + x.abs()) {
            break;
        }
    }
    (x, lam)
}

pub fn theta<T: Real>(spec: &RecurrenceSpec<T>, x_star: T) -> Result<ThetaInfo<T>> {
    theta_at(spec, x_star, double_root(spec, x_star)?)
}

pub fn theta_at<T: Real>(spec: &RecurrenceSpec<T>, x_star: T, lambda: Complex<T>) -> Result<ThetaInfo<T>> {
    let mut num = re(T::zero());
    let mut den = re(T::zero());
    let mut num_scale = T::zero();
    let mut den_scale = T::zero();
    for j in 0..=spec.order {
        let jet = spec.coeff_jet(j, x_star, 1, 0);
        let lj = lambda.powi(j as i32);
        let jj = T::from_usize_(j * j);
        num = num + jet.get(1, 0) * lj;
        den = den + jet.get(0, 0) * lj * jj;
        num_scale = num_scale + (jet.get(1, 0).norm() + jet.get(0, 0).norm()) * lj.norm();
        den_scale = den_scale + jet.get(0, 0).norm() * lj.norm() * jj;
    }
    let tol = T::lit(1e-12);
    if !(num.norm() > tol * num_scale) || !(den.norm() > tol * den_scale) {
        return Err(Error::DegenerateTheta { num: num.norm().as_f64(), den: den.norm().as_f64() });
    }
    let cube = num / den;
    let (theta, roots) = select_cube_root(cube);
    let kappa = -(cube * T::lit(2.0));
    let (airy_scale, _) = select_cube_root(kappa);
    Ok(ThetaInfo { numerator: num, denominator: den, cube, roots, theta, kappa, airy_scale })
}

/// `P_{j,s}(ξ) = Σ_{2r+3t=s} ∂ₓʳ a_{j,t}(x*)/r! · λ*ʲ ξʳ` for `s ≤ s_max`.
pub fn coefficient_polynomials<T: Real>(
    spec: &RecurrenceSpec<T>,
    x_star: T,
    lambda: Complex<T>,
    s_max: usize,
) -> Vec<Vec<Poly<T>>> {
    (0..=spec.order)
        .map(|j| {
            let jet = spec.coeff_jet(j, x_star, s_max / 2, s_max / 3);
            let lj = lambda.powi(j as i32);
            (0..=s_max)
                .map(|s| {
                    let mut p = vec![re(T::zero()); s / 2 + 1];
                    for r in 0..=s / 2 {
                        if (s - 2 * r) % 3 == 0 {
                            p[r] = jet.get(r, (s - 2 * r) / 3) * lj;
                        }
                    }
                    p
                })
                .collect()
        })
        .collect()
}

/// `Q_{s,m} = Σⱼ P_{j,s} jᵐ/m!`, indexed `[s][m]`.
pub fn operator_polynomials<T: Real>(p: &[Vec<Poly<T>>], m_max: usize) -> Vec<Vec<Poly<T>>> {
    let s_max = p[0].len() - 1;
    (0..=s_max)
        .map(|s| {
            (0..=m_max)
                .map(|m| {
                    let mut acc: Poly<T> = Vec::new();
                    for (j, pj) in p.iter().enumerate() {
                        let w = T::from_usize_(j).powi(m as i32) / factorial::<T>(m);
                        acc = padd(&acc, &pscale(&pj[s], re(w)));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Resolution of the sampled χ fields.
const SAMPLE_NODES: usize = 512;

/// Growth of `χ_n` along ξ → +∞ after removing `exp((2/3) Re (cξ)^{3/2})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    pub order: usize,
    pub exponent: f64,
    pub constant: f64,
    /// `exponent ≤ order/2 + 0.15`.
    pub within_bound: bool,
}

#[derive(Clone, Debug)]
pub struct TurningPointExpansion<T: Real> {
    pub x_star: T,
    pub pair: (usize, usize),
    pub lambda_star: Complex<T>,
    pub theta: ThetaInfo<T>,
    pub branch_flavor: AiryFlavor,
    /// Exact pair form of `χ_0 ..= χ_S`.
    pub pairs: Vec<AiryPair<T>>,
    /// `χ_n` sampled on `|ξ| ≤ xi_max` for `branch_flavor`.
    pub chis: Vec<ScalarField<T>>,
    /// Same hierarchy built on `Ai` (the decaying solution).
    pub particular_airy: Option<Vec<ScalarField<T>>>,
    pub xi_max: T,
    /// `Q_{s,m}`, indexed `[s][m]`.
    pub operator: Vec<Vec<Poly<T>>>,
    pub growth: Vec<GrowthFit>,
}

impl<T: Real> TurningPointExpansion<T> {
    pub fn order(&self) -> usize {
        self.pairs.len() - 1
    }

    /// `Σ_{n≤s} δⁿ χ_n(ξ)` for `flavor`.
    pub fn profile(&self, flavor: AiryFlavor, xi: T, delta: T, s: usize) -> Result<Complex<T>> {
        let c = self.theta.airy_scale;
        let mut acc = re(T::zero());
        let mut w = T::one();
        for pair in self.pairs.iter().take(s + 1) {
            acc = acc + pair.eval(c, flavor, re(xi))? * w;
            w = w * delta;
        }
        Ok(acc)
    }
}

fn growth_fit<T: Real>(pair: &AiryPair<T>, c: Complex<T>, flavor: AiryFlavor, order: usize, xi_max: T) -> Result<GrowthFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let hi = xi_max.as_f64();
    for i in 0..=24 {
        let xi = hi / 2.0 + (hi / 2.0) * i as f64 / 24.0;
        let v = pair.eval(c, flavor, re(T::lit(xi)))?.norm().as_f64();
        let z = cx_f64(c) * xi;
        let damp = (2.0 / 3.0) * z.powf(1.5).re;
        let g = v.ln() - damp;
        if g.is_finite() {
            lx.push((1.0 + xi).ln());
            ly.push(g);
        }
    }
    let (p, _, _) = linear_fit(&lx, &ly);
    let constant = lx.iter().zip(&ly).map(|(x, y)| (y - p * x).exp()).fold(0.0, f64::max);
    Ok(GrowthFit { order, exponent: p, constant, within_bound: p <= order as f64 / 2.0 + 0.15 })
}

/// Interior hierarchy at a crossing to order `order`, sampled on `|ξ| ≤ xi_max`.
pub fn interior_expansion<T: Real>(
    spec: &RecurrenceSpec<T>,
    cand: &CrossingCandidate,
    order: usize,
    xi_max: T,
    flavor: AiryFlavor,
) -> Result<TurningPointExpansion<T>> {
    if (cand.exponent - 0.5).abs() > 0.1 {
        return Err(Error::NonGenericCrossing { exponent: cand.exponent });
    }
    let x0 = T::lit(cand.x_star);
    let (x_star, lambda) = refine_crossing(spec, x0, double_root(spec, x0)?);
    let th = theta_at(spec, x_star, lambda)?;
    let s_max = order + 2;
    let p = coefficient_polynomials(spec, x_star, lambda, s_max);
    let qs = operator_polynomials(&p, s_max);
    let c = th.airy_scale;
    let q02 = coef(&qs[0][2], 0);
    let mut pairs = vec![AiryPair::leading()];
    for n in 1..=order {
        let mut rhs = AiryPair::zero();
        for (np, chi) in pairs.iter().enumerate() {
            let total = n + 2 - np;
            let mut d = chi.clone();
            for m in 0..=total {
                let s = total - m;
                if s < qs.len() {
                    rhs = rhs.add(&d.mul_poly(&qs[s][m]));
                }
                d = d.derivative(c);
            }
        }
        pairs.push(solve_airy_pair(&rhs.scale(-(re(T::one()) / q02)), c));
    }
    let lo = -xi_max;
    // every χ_n shares w(cξ); sample it once per flavour
    let n_nodes = SAMPLE_NODES.min(T::max_resolution());
    let nodes: Vec<T> = ScalarField::identity(lo, xi_max).resample(n_nodes).values().iter().map(|v| v.re).collect();
    let sample = |fl: AiryFlavor| -> Result<Vec<ScalarField<T>>> {
        let ws: Vec<(Complex<T>, Complex<T>)> =
            nodes.par_iter().map(|&xi| fl.eval(c * xi)).collect::<Result<Vec<_>>>()?;
        Ok(pairs
            .iter()
            .map(|pr| {
                let vals = nodes
                    .iter()
                    .zip(&ws)
                    .map(|(&xi, (w, wp))| poly_eval(&pr.p, re(xi)) * w + poly_eval(&pr.q, re(xi)) * wp)
                    .collect();
                ScalarField::from_values(lo, xi_max, vals)
            })
            .collect())
    };
    let chis = sample(flavor)?;
    let particular = sample(AiryFlavor::Decaying)?;
    let growth = pairs
        .iter()
        .enumerate()
        .map(|(n, pr)| growth_fit(pr, c, flavor, n, xi_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(TurningPointExpansion {
        x_star,
        pair: cand.pair,
        lambda_star: lambda,
        theta: th,
        branch_flavor: flavor,
        pairs,
        chis,
        particular_airy: Some(particular),
        xi_max,
        operator: qs,
        growth,
    })
}

/// Normalisation of [`inhom_airy_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AiryBc<T> {
    /// `f(ξ₀) = f′(ξ₀) = 0`.
    Anchored(T),
    /// No `Bi` content at the right end and no `Ai` content at the left end.
    Recessive,
}

const PANELS: usize = 40;
const PANEL_NODES: usize = 40;

/// Solves `f″ − Θ³ ξ f = R` on the interval of `r` by variation of parameters:
/// `f = (π/Θ)[Bi(Θξ) ∫ Ai(Θs) R − Ai(Θξ) ∫ Bi(Θs) R]`.
///
/// The integrals are accumulated panel by panel, so each keeps its relative
/// accuracy where it matters even when the integrands span many decades.
pub fn inhom_airy_solve<T: Real>(r: &ScalarField<T>, theta: Complex<T>, bc: AiryBc<T>) -> Result<ScalarField<T>> {
    let (lo, hi) = (r.lo(), r.hi());
    let width = (hi - lo) / T::from_usize_(PANELS);
    let unit = crate::field::lobatto_nodes::<T>(PANEL_NODES);
    struct Panel<T: Real> {
        ai: Vec<Complex<T>>,
        bi: Vec<Complex<T>>,
        int_a: ScalarField<T>,
        int_b: ScalarField<T>,
    }
    let panels: Vec<Panel<T>> = (0..PANELS)
        .into_par_iter()
        .map(|i| {
            let a = lo + width * T::from_usize_(i);
            let xs: Vec<T> = unit.iter().map(|&t| a + width * (t + T::one()) * T::lit(0.5)).collect();
            let v: Vec<_> = xs.iter().map(|&x| airy_eval(theta * x)).collect::<Result<Vec<_>>>()?;
            let rv: Vec<Complex<T>> = xs.iter().map(|&x| r.eval(x)).collect();
            let ga = v.iter().zip(&rv).map(|(v, r)| v.ai * r).collect();
            let gb = v.iter().zip(&rv).map(|(v, r)| v.bi * r).collect();
            Ok(Panel {
                ai: v.iter().map(|v| v.ai).collect(),
                bi: v.iter().map(|v| v.bi).collect(),
                int_a: ScalarField::from_values(a, a + width, ga).antiderivative(),
                int_b: ScalarField::from_values(a, a + width, gb).antiderivative(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut off_a = vec![re(T::zero())];
    let mut off_b = vec![re(T::zero())];
    for p in &panels {
        off_a.push(*off_a.last().unwrap() + p.int_a.eval(p.int_a.hi()));
        off_b.push(*off_b.last().unwrap() + p.int_b.eval(p.int_b.hi()));
    }
    let cum = |x: T| -> (Complex<T>, Complex<T>) {
        let i = ((x - lo) / width).floor().to_usize().unwrap_or(0).min(PANELS - 1);
        (off_a[i] + panels[i].int_a.eval(x), off_b[i] + panels[i].int_b.eval(x))
    };
    let (shift_a, shift_b) = match bc {
        AiryBc::Anchored(x0) => cum(x0),
        AiryBc::Recessive => (off_a[PANELS], re(T::zero())),
    };
    let k = re(T::PI()) / theta;
    // f on each panel at its own nodes, then one global interpolant
    let pieces: Vec<ScalarField<T>> = panels
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let a = lo + width * T::from_usize_(i);
            let vals = (0..unit.len())
                .map(|n| {
                    let ia = off_a[i] + p.int_a.values()[n] - shift_a;
                    let ib = off_b[i] + p.int_b.values()[n] - shift_b;
                    k * (p.bi[n] * ia - p.ai[n] * ib)
                })
                .collect();
            ScalarField::from_values(a, a + width, vals)
        })
        .collect();
    Ok(ScalarField::from_fn(lo, hi, |x| {
        let i = ((x - lo) / width).floor().to_usize().unwrap_or(0).min(PANELS - 1);
        pieces[i].eval(x)
    }))
}

/// Prediction `y_k = λ*^{k−k₀} Σ_{n≤s} δⁿ χ_n(ξ_k)` of the decaying solution,
/// normalised to 1 at `k₀ = round(x*/ε)`, for `|k − k₀| ≤ ε^{−α}`.
pub fn airy_particular_solution<T: Real>(
    tp: &TurningPointExpansion<T>,
    eps: T,
    alpha_int: f64,
    order: usize,
) -> Result<Vec<(i64, Complex<T>)>> {
    let delta = eps.cbrt();
    let k0 = (tp.x_star / eps).round().to_i64().unwrap();
    let kmax = eps.as_f64().powf(-alpha_int).floor() as i64;
    let s = order.min(tp.order());
    let xi = |k: i64| (eps * T::from_i64(k).unwrap() - tp.x_star) / (delta * delta);
    let norm = tp.profile(AiryFlavor::Decaying, xi(k0), delta, s)?;
    (k0 - kmax..=k0 + kmax)
        .map(|k| {
            let v = tp.profile(AiryFlavor::Decaying, xi(k), delta, s)?;
            Ok((k, v / norm * tp.lambda_star.powi((k - k0) as i32)))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectionData {
    pub side: Side,
    pub branch_ids: Vec<usize>,
    /// Coefficients of the exterior solutions normalised to 1 at `reference_k`.
    pub coefficients: Vec<(f64, f64)>,
    pub half_coefficients: [Vec<(f64, f64)>; 2],
    /// `max_m |C_m^{(1)} − C_m^{(2)}| / max_m |C_m|`.
    pub halves_disagreement: f64,
    pub overlap_window: (i64, i64),
    pub reference_k: i64,
    pub fit_residual: f64,
    pub condition: f64,
    /// `|C_dom| / max_m |C_m|` for the exterior branch of largest modulus.
    pub dominant_ratio: f64,
}

/// `[ε^{−β}, ε^{−α}]` as offsets `|k − k*|`.
pub fn overlap_window(eps: f64, alpha_int: f64, beta_ext: f64) -> Result<(i64, i64)> {
    let lo = eps.powf(-beta_ext).ceil() as i64;
    let hi = eps.powf(-alpha_int).floor() as i64;
    if !(alpha_int > beta_ext) || hi - lo < 8 {
        return Err(Error::WindowEmpty(format!(
            "overlap [{lo}, {hi}] too short at eps = {eps} (alpha {alpha_int}, beta {beta_ext})"
        )));
    }
    Ok((lo, hi))
}

const CONDITION_LIMIT: f64 = 1e13;

/// Least-squares coefficients of a solution, given by its complex logarithms on
/// `window`, in the basis of exterior formal solutions.
pub fn match_connection<T: Real>(
    exterior: &[PhiExpansion<T>],
    logs: &[(i64, Complex<T>)],
    eps: T,
    window: (i64, i64),
    side: Side,
) -> Result<ConnectionData> {
    let rows: Vec<&(i64, Complex<T>)> = logs.iter().filter(|(k, _)| *k >= window.0 && *k <= window.1).collect();
    let l = exterior.len();
    if rows.len() < 2 * l + 4 {
        return Err(Error::WindowEmpty(format!("{} samples in window {:?}", rows.len(), window)));
    }
    let reference_k = match side {
        Side::Right => window.0,
        Side::Left => window.1,
    };
    let x_of = |k: i64| eps * T::from_i64(k).unwrap();
    let ref_cols: Vec<Complex<T>> = exterior.iter().map(|p| p.log_value(x_of(reference_k), eps)).collect();
    let ref_mag = rows.iter().find(|(k, _)| *k == reference_k).map(|(_, v)| v.re).unwrap_or(rows[0].1.re);
    let fit_on = |sel: &[&(i64, Complex<T>)]| -> Result<(Vec<Complex<T>>, T, f64)> {
        let mut a = CMat::zeros(sel.len(), l);
        let mut b = Vec::with_capacity(sel.len());
        for (i, (k, ly)) in sel.iter().enumerate() {
            // row weight 1/|y_k| relative to the reference
            let w = ly.re - ref_mag;
            for (m, p) in exterior.iter().enumerate() {
                a[(i, m)] = (p.log_value(x_of(*k), eps) - ref_cols[m] - re(ref_mag) - re(w) + re(ref_mag)).exp();
            }
            b.push(Complex::new(T::zero(), ly.im).exp());
        }
        let fit = lstsq(&a, &b)?;
        Ok((fit.coeffs, fit.relative_residual, fit.condition))
    };
    let (full, residual, condition) = fit_on(&rows)?;
    if !(condition < CONDITION_LIMIT) {
        return Err(Error::IllConditionedFit { cond: condition });
    }
    let mid = rows.len() / 2;
    let (h1, _, _) = fit_on(&rows[..mid])?;
    let (h2, _, _) = fit_on(&rows[mid..])?;
    let big = full.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    let dis = h1.iter().zip(&h2).fold(T::zero(), |m, (a, b)| m.max((a - b).norm())) / big;
    let xm = x_of((window.0 + window.1) / 2);
    let dom = (0..l)
        .max_by(|&a, &b| exterior[a].lambda.eval(xm).norm().partial_cmp(&exterior[b].lambda.eval(xm).norm()).unwrap())
        .unwrap();
    let pack = |v: &[Complex<T>]| v.iter().map(|z| (z.re.as_f64(), z.im.as_f64())).collect::<Vec<_>>();
    Ok(ConnectionData {
        side,
        branch_ids: exterior.iter().map(|p| p.branch_id).collect(),
        coefficients: pack(&full),
        half_coefficients: [pack(&h1), pack(&h2)],
        halves_disagreement: dis.as_f64(),
        overlap_window: window,
        reference_k,
        fit_residual: residual.as_f64(),
        condition,
        dominant_ratio: (full[dom].norm() / big).as_f64(),
    })
}

/// Settings of [`connect`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectSettings {
    pub alpha_int: f64,
    pub beta_ext: f64,
    pub exterior_order: usize,
    pub interior_order: usize,
    pub xi_max: f64,
    /// Distance from the crossing at which the recessive solution is started.
    pub oracle_reach: f64,
}

impl Default for ConnectSettings {
    fn default() -> Self {
        Self { alpha_int: 0.60, beta_ext: 0.45, exterior_order: 3, interior_order: 2, xi_max: 8.0, oracle_reach: 0.1 }
    }
}

pub struct TurningAnalysis<T: Real> {
    pub candidate: CrossingCandidate,
    pub expansion: TurningPointExpansion<T>,
    /// Exact solution decaying away from the crossing on its non-oscillatory side.
    pub recessive: LogScaledTrajectory<T>,
    pub recessive_side: Side,
    pub window: (i64, i64),
    pub exterior: Vec<(Side, Vec<PhiExpansion<T>>)>,
    pub connections: Vec<ConnectionData>,
}

/// Exterior expansions of the crossing pair on `[a, b]`.
fn exterior_pair<T: Real>(
    spec: &RecurrenceSpec<T>,
    tp: &TurningPointExpansion<T>,
    a: T,
    b: T,
    inner: T,
    order: usize,
) -> Result<Vec<PhiExpansion<T>>> {
    let branches = track_branches_on(spec, a, b, 64)?;
    let mut idx: Vec<usize> = (0..branches.len()).collect();
    idx.sort_by(|&u, &v| {
        let du = (branches[u].lambda.eval(inner) - tp.lambda_star).norm();
        let dv = (branches[v].lambda.eval(inner) - tp.lambda_star).norm();
        du.partial_cmp(&dv).unwrap()
    });
    idx.truncate(2);
    idx.sort();
    idx.iter().map(|&m| expand(spec, &branches[m], inner, order)).collect()
}

/// Finds the first crossing of `spec`, builds its interior expansion, computes the
/// recessive solution by iteration away from the non-oscillatory side and matches
/// it to the exterior expansions on both sides.
pub fn connect<T: Real>(spec: &RecurrenceSpec<T>, eps: T, settings: &ConnectSettings) -> Result<TurningAnalysis<T>> {
    let (lo, hi) = spec.interval;
    let samples = sample_branches(spec, lo, hi, 64, false)?;
    let cands = detect_crossings(&samples, spec)?;
    let cand = cands.into_iter().next().ok_or_else(|| Error::WindowEmpty("no crossing in the interval".into()))?;
    let tp = interior_expansion(spec, &cand, settings.interior_order, T::lit(settings.xi_max), AiryFlavor::Plus)?;
    let e = eps.as_f64();
    let (wlo, whi) = overlap_window(e, settings.alpha_int, settings.beta_ext)?;
    let xs = tp.x_star;
    let ks = (xs / eps).round().to_i64().unwrap();
    let reach = T::lit(settings.oracle_reach);
    // moduli split on the side where the solutions separate
    let probe = T::lit(0.5 * settings.oracle_reach);
    let split = |x: T| -> Result<T> {
        let r = char_roots_at(spec, x, T::zero(), false)?.roots;
        let mut near: Vec<Complex<T>> = r;
        near.sort_by(|a, b| (a - tp.lambda_star).norm().partial_cmp(&(b - tp.lambda_star).norm()).unwrap());
        Ok((near[0].norm() - near[1].norm()).abs())
    };
    let right_split = if xs + probe <= hi { split(xs + probe)? } else { T::zero() };
    let left_split = if xs - probe >= lo { split(xs - probe)? } else { T::zero() };
    let recessive_side = if right_split >= left_split { Side::Right } else { Side::Left };
    let span = whi + 16;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let init: Vec<Complex<T>> = (0..spec.order).map(|_| re(T::lit(rng.gen_range(0.5..1.5)))).collect();
    let recessive = match recessive_side {
        Side::Right => {
            let k_end = ((xs + reach).min(hi) / eps).floor().to_i64().unwrap();
            iterate(spec, eps, &init, (ks - span, k_end), Direction::Backward)?
        }
        Side::Left => {
            let k_start = ((xs - reach).max(lo) / eps).ceil().to_i64().unwrap();
            iterate(spec, eps, &init, (k_start, ks + span), Direction::Forward)?
        }
    };
    let mut exterior = Vec::new();
    let mut connections = Vec::new();
    for side in [Side::Left, Side::Right] {
        let (a, b, inner, window) = match side {
            Side::Right => (
                xs + eps * T::lit(wlo as f64 * 0.5),
                xs + eps * T::lit(whi as f64 * 1.5),
                xs + eps * T::from_i64(wlo).unwrap(),
                (ks + wlo, ks + whi),
            ),
            Side::Left => (
                xs - eps * T::lit(whi as f64 * 1.5),
                xs - eps * T::lit(wlo as f64 * 0.5),
                xs - eps * T::from_i64(wlo).unwrap(),
                (ks - whi, ks - wlo),
            ),
        };
        if a < lo || b > hi {
            continue;
        }
        let pair = exterior_pair(spec, &tp, a, b, inner, settings.exterior_order)?;
        let logs: Vec<(i64, Complex<T>)> = (window.0..=window.1).map(|k| (k, recessive.log(k))).collect();
        connections.push(match_connection(&pair, &logs, eps, window, side)?);
        exterior.push((side, pair));
    }
    Ok(TurningAnalysis { candidate: cand, expansion: tp, recessive, recessive_side, window: (wlo, whi), exterior, connections })
}

/// Best scalar `α` with `y ≈ α g` and the sup-norm relative error `max|y − αg| / max|y|`.
pub fn scalar_fit<T: Real>(y: &[Complex<T>], g: &[Complex<T>]) -> (Complex<T>, f64) {
    let num = y.iter().zip(g).fold(re(T::zero()), |s, (a, b)| s + a * b.conj());
    let den = g.iter().fold(T::zero(), |s, b| s + b.norm_sqr());
    let alpha = num / den;
    let err = y.iter().zip(g).fold(T::zero(), |m, (a, b)| m.max((a - b * alpha).norm()));
    let big = y.iter().fold(T::zero(), |m, a| m.max(a.norm()));
    (alpha, (err / big).as_f64())
}

/// Cross-check of the pair form against sampled χ fields: `χ_n″ − c³ξχ_n` and
/// the assembled right side, as fields on `[lo, hi]`.
pub fn hierarchy_residual<T: Real>(tp: &TurningPointExpansion<T>, n: usize, lo: T, hi: T) -> Result<T> {
    let c = tp.theta.airy_scale;
    let q02 = coef(&tp.operator[0][2], 0);
    let mut rhs = AiryPair::zero();
    for (np, chi) in tp.pairs.iter().take(n).enumerate() {
        let total = n + 2 - np;
        let mut d = chi.clone();
        for m in 0..=total {
            let s = total - m;
            if s < tp.operator.len() {
                rhs = rhs.add(&d.mul_poly(&tp.operator[s][m]));
            }
            d = d.derivative(c);
        }
    }
    let rhs = rhs.scale(-(re(T::one()) / q02));
    let fl = tp.branch_flavor;
    let chi = ScalarField::from_fn(lo, hi, |x| tp.pairs[n].eval(c, fl, re(x)).unwrap());
    let r = ScalarField::from_fn(lo, hi, |x| rhs.eval(c, fl, re(x)).unwrap());
    let c3 = c * c * c;
    let lhs = chi.derivative().derivative().sub(&chi.mul(&ScalarField::identity(lo, hi)).scale(c3));
    Ok(lhs.distance(&r) / r.sup_norm().max(chi.sup_norm()))
}

pub fn cx_pair<T: Real>(z: (f64, f64)) -> Complex<T> {
    cx_from_f64(Complex::new(z.0, z.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::bessel;
    use approx::assert_relative_eq;

    type Spec = RecurrenceSpec<f64>;

    fn bessel_candidate(s: &Spec) -> CrossingCandidate {
        let samples = sample_branches(s, -0.5, 0.5, 64, false).unwrap();
        detect_crossings(&samples, s).unwrap().remove(0)
    }

    #[test]
    fn theta_for_bessel_and_scaled_and_synthetic() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let t = theta(&s, 0.0).unwrap();
        assert!((t.cube - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((t.theta - c(-1.0, 0.0)).norm() < 1e-12);
        for r in t.roots {
            assert!((r * r * r - t.cube).norm() < 1e-12);
        }
        assert!((t.kappa - c(2.0, 0.0)).norm() < 1e-12);
        let scaled = Spec::parse("order 2\ninterval -0.5 0.5\nexact 0 : 3\nexact 1 : -6*(1 + x + eps)\nexact 2 : 3").unwrap();
        let u = theta(&scaled, 0.0).unwrap();
        assert!((u.theta - t.theta).norm() < 1e-12);
        let syn = Spec::parse("order 2\ninterval -0.5 0.5\nexact 0 : 1\nexact 1 : -2 - 4*x\nexact 2 : 1").unwrap();
        let v = theta(&syn, 0.0).unwrap();
        assert!((v.cube - c(-2.0, 0.0)).norm() < 1e-12);
        assert_relative_eq!(v.theta.re, -(2f64.cbrt()), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_theta() {
        let s = Spec::parse("order 2\ninterval -0.5 0.5\nexact 0 : 1\nexact 1 : -2\nexact 2 : 1").unwrap();
        assert!(matches!(theta(&s, 0.0), Err(Error::DegenerateTheta { .. })));
    }

    #[test]
    fn cube_root_rule() {
        let (r, _) = select_cube_root(c(8.0, 0.0));
        assert_relative_eq!(r.re, 2.0, epsilon = 1e-14);
        let (r, _) = select_cube_root(c(0.0, 1.0));
        assert!(r.arg() > -std::f64::consts::FRAC_PI_3 && r.arg() <= std::f64::consts::FRAC_PI_3);
        assert!((r.powi(3) - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn pair_solver_inverts_the_operator() {
        let cc = c(1.3, 0.2);
        let r = AiryPair { p: vec![c(1.0, 0.0), c(0.5, -1.0), c(0.0, 2.0)], q: vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.25, 0.0), c(1.0, 1.0)] };
        let sol = solve_airy_pair(&r, cc);
        let back = sol.airy_operator(cc);
        let diff = padd(&back.p, &pscale(&r.p, c(-1.0, 0.0)))
            .iter()
            .chain(padd(&back.q, &pscale(&r.q, c(-1.0, 0.0))).iter())
            .fold(0.0f64, |m, v| m.max(v.norm()));
        assert!(diff < 1e-13, "{diff}");
        assert_eq!(coef(&sol.p, 0), c(0.0, 0.0));
    }

    #[test]
    fn pair_derivative_matches_numerics() {
        let cc: Complex<f64> = c(1.2, 0.0);
        let pr = AiryPair { p: vec![c(0.3, 0.0), c(1.0, 0.0)], q: vec![c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)] };
        let d = pr.derivative(cc);
        for xi in [-2.0, 0.3, 1.7] {
            let h = 1e-5;
            let fd = (pr.eval(cc, AiryFlavor::Plus, c(xi + h, 0.0)).unwrap() - pr.eval(cc, AiryFlavor::Plus, c(xi - h, 0.0)).unwrap())
                / (2.0 * h);
            let an = d.eval(cc, AiryFlavor::Plus, c(xi, 0.0)).unwrap();
            assert!((fd - an).norm() < 1e-7 * an.norm().max(1.0));
        }
    }

    #[test]
    fn coefficient_polynomials_structure() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let p = coefficient_polynomials(&s, 0.0, c(1.0, 0.0), 6);
        for (j, pj) in p.iter().enumerate() {
            assert!(pj[1].iter().all(|v| v.norm() == 0.0), "P_{j},1 must vanish");
            for (sidx, ps) in pj.iter().enumerate() {
                if let Some(d) = poly_degree(ps, 1e-14) {
                    assert!(2 * d <= sidx, "deg P_{j},{sidx} = {d}");
                }
            }
        }
        // a_1 = −2(1 + x + ε): P_{1,2} = −2ξ, P_{1,3} = −2
        assert_eq!(p[1][2], vec![c(0.0, 0.0), c(-2.0, 0.0)]);
        assert_eq!(p[1][3][0], c(-2.0, 0.0));
    }

    #[test]
    fn bessel_interior_hierarchy() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let cand = bessel_candidate(&s);
        let tp = interior_expansion(&s, &cand, 4, 8.0, AiryFlavor::Plus).unwrap();
        // χ₀ = w(2^{1/3} ξ) solves χ″ = 2ξχ
        let chi0 = &tp.chis[0];
        let c3 = tp.theta.airy_scale.powi(3);
        let lhs = chi0.derivative().derivative();
        let rhs = chi0.mul(&ScalarField::identity(-8.0, 8.0)).scale(c3);
        assert!(lhs.distance(&rhs) <= 1e-8 * rhs.sup_norm());
        // χ₀ = Ai + iBi has no real zeros
        assert!(chi0.values().iter().all(|v| v.norm() > 0.0));
        // symmetric centred recurrence: χ₁ vanishes identically
        assert!(tp.pairs[1].p.iter().chain(tp.pairs[1].q.iter()).all(|v| v.norm() < 1e-14));
        for n in 2..=4 {
            assert!(hierarchy_residual(&tp, n, -4.0, 4.0).unwrap() < 1e-7);
        }
    }

    #[test]
    fn particular_solution_normalisation_and_decay() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let cand = bessel_candidate(&s);
        let tp = interior_expansion(&s, &cand, 2, 8.0, AiryFlavor::Plus).unwrap();
        let y = airy_particular_solution(&tp, 1e-4, 0.6, 0).unwrap();
        let at0 = y.iter().find(|(k, _)| *k == 0).unwrap().1;
        assert!((at0 - c(1.0, 0.0)).norm() < 1e-12);
        // leading order: ξ^{-1/4} exp(−(2/3) z^{3/2}) with z = cξ
        let cc = tp.theta.airy_scale.re;
        let delta = 1e-4f64.cbrt();
        let pick = |k: i64| y.iter().find(|(kk, _)| *kk == k).unwrap().1.re;
        let (k1, k2) = (200, 240);
        let (z1, z2) = (cc * k1 as f64 * delta, cc * k2 as f64 * delta);
        let asym = |z: f64| z.powf(-0.25) * (-(2.0 / 3.0) * z.powf(1.5)).exp();
        assert_relative_eq!(pick(k2) / pick(k1), asym(z2) / asym(z1), max_relative = 0.02);
    }

    #[test]
    fn inhomogeneous_airy() {
        // R ≡ 0
        let zero = ScalarField::constant(-2.0, 2.0, c(0.0, 0.0));
        let f = inhom_airy_solve(&zero, c(1.0, 0.0), AiryBc::Anchored(0.0)).unwrap();
        assert!(f.sup_norm() == 0.0);
        // R = Ai, Θ = 1
        let r = ScalarField::from_fn(-4.0, 4.0, |x| airy_eval(c(x, 0.0)).unwrap().ai);
        let f = inhom_airy_solve(&r, c(1.0, 0.0), AiryBc::Anchored(-4.0)).unwrap();
        let res = f.derivative().derivative().sub(&f.mul(&ScalarField::identity(-4.0, 4.0))).sub(&r);
        assert!(res.sup_norm() <= 1e-7 * r.sup_norm(), "{}", res.sup_norm());
    }

    #[test]
    fn inhomogeneous_growth_exponents() {
        // exponential right side R = ξ e^{(2/3)ξ^{3/2}}: f ≈ (2/7) ξ^{3/2} e^{(2/3)ξ^{3/2}}, f/R ∝ ξ^{1/2}
        let r = ScalarField::from_fn(0.0, 10.0, |x: f64| c(x * ((2.0 / 3.0) * x.powf(1.5)).exp(), 0.0));
        let f = inhom_airy_solve(&r, c(1.0, 0.0), AiryBc::Anchored(0.0)).unwrap();
        let res = f.derivative().derivative().sub(&f.mul(&ScalarField::identity(0.0, 10.0))).sub(&r);
        assert!(res.sup_norm() <= 1e-7 * r.sup_norm(), "{}", res.sup_norm() / r.sup_norm());
        let xs: Vec<f64> = (0..=20).map(|i| 5.0 + 5.0 * i as f64 / 20.0).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = xs.iter().map(|&x| (f.eval(x).norm() / r.eval(x).norm()).ln()).collect();
        let (slope, _, _) = linear_fit(&lx, &ly);
        assert!((slope - 0.5).abs() < 0.1, "{slope}");
        // polynomial right side R = ξ²: f ≈ −R/ξ, f/R ∝ ξ^{−1}
        let r = ScalarField::from_fn(0.0, 10.0, |x: f64| c(x * x, 0.0));
        let f = inhom_airy_solve(&r, c(1.0, 0.0), AiryBc::Recessive).unwrap();
        let xs: Vec<f64> = (0..=20).map(|i| 5.0 + 3.5 * i as f64 / 20.0).collect();
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = xs.iter().map(|&x| (f.eval(x).norm() / r.eval(x).norm()).ln()).collect();
        let (slope, _, _) = linear_fit(&lx, &ly);
        assert!((slope + 1.0).abs() < 0.1, "{slope}");
    }

    #[test]
    fn no_crossing_gives_empty_window() {
        let s = Spec::parse("order 2\ninterval 0 1\nexact 0 : 2\nexact 1 : -3 - x\nexact 2 : 1").unwrap();
        assert!(matches!(connect(&s, 1e-4, &ConnectSettings::default()), Err(Error::WindowEmpty(_))));
        assert!(matches!(overlap_window(0.5, 0.6, 0.45), Err(Error::WindowEmpty(_))));
    }

    #[test]
    fn non_generic_candidate_rejected() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let mut cand = bessel_candidate(&s);
        cand.exponent = 1.0;
        assert!(matches!(
            interior_expansion(&s, &cand, 1, 8.0, AiryFlavor::Plus),
            Err(Error::NonGenericCrossing { .. })
        ));
    }
}
