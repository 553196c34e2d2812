//! Ground truth at finite ε: overflow-safe iteration of the recurrence, the
//! rescaled ratios `C_k = Y_k / Ỹ_k`, transfer-matrix products and the
//! fundamental-system check.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, require_span, SlopeFit};
use crate::linalg::{lstsq, CMat};
use crate::recurrence::RecurrenceSpec;
use crate::scalar::{c, cx_f64, re, Real};
use crate::wkb::PhiExpansion;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// `y_k = exp(logmag_k) · dir_k` for `k = k0, k0 + 1, …`.
#[derive(Clone, Debug)]
pub struct LogScaledTrajectory<T: Real> {
    pub eps: T,
    pub k0: i64,
    pub logmag: Vec<T>,
    pub dir: Vec<Complex<T>>,
    pub init: String,
}

impl<T: Real> LogScaledTrajectory<T> {
    pub fn k_end(&self) -> i64 {
        self.k0 + self.logmag.len() as i64 - 1
    }

    fn idx(&self, k: i64) -> usize {
        assert!(k >= self.k0 && k <= self.k_end(), "k = {k} outside trajectory");
        (k - self.k0) as usize
    }

    /// Complex logarithm of `y_k` (principal argument).
    pub fn log(&self, k: i64) -> Complex<T> {
        let i = self.idx(k);
        Complex::new(self.logmag[i], self.dir[i].arg())
    }

    /// `y_k` itself; overflows for large log-magnitudes.
    pub fn value(&self, k: i64) -> Complex<T> {
        let i = self.idx(k);
        self.dir[i] * self.logmag[i].exp()
    }

    /// `y_k / y_ref`, safe when both are huge.
    pub fn ratio(&self, k: i64, k_ref: i64) -> Complex<T> {
        let (i, r) = (self.idx(k), self.idx(k_ref));
        self.dir[i] / self.dir[r] * (self.logmag[i] - self.logmag[r]).exp()
    }
}

/// Relative residual `|Σ a_j y_{k+j}| / Σ |a_j y_{k+j}|` of a trajectory at `k`.
pub fn trajectory_residual<T: Real>(spec: &RecurrenceSpec<T>, traj: &LogScaledTrajectory<T>, k: i64) -> T {
    let x = traj.eps * T::from_i64(k).unwrap();
    let top = (0..=spec.order).map(|j| traj.logmag[traj.idx(k + j as i64)]).fold(T::neg_infinity(), T::max);
    let mut num = re(T::zero());
    let mut den = T::zero();
    for j in 0..=spec.order {
        let kj = k + j as i64;
        let i = traj.idx(kj);
        let y = traj.dir[i] * (traj.logmag[i] - top).exp();
        let t = spec.a(j, x, traj.eps) * y;
        num = num + t;
        den = den + t.norm();
    }
    if den == T::zero() {
        T::zero()
    } else {
        num.norm() / den
    }
}

const RENORM_EVERY: usize = 64;

/// Iterates from initial data given as complex logarithms of the `l` start values.
pub fn iterate_log<T: Real>(
    spec: &RecurrenceSpec<T>,
    eps: T,
    init_logs: &[Complex<T>],
    k_range: (i64, i64),
    direction: Direction,
) -> Result<LogScaledTrajectory<T>> {
    let l = spec.order;
    assert_eq!(init_logs.len(), l, "need one start value per step");
    let (k_start, k_end) = k_range;
    assert!(k_end - k_start + 1 >= l as i64, "range shorter than the recurrence");
    let n = (k_end - k_start + 1) as usize;
    let mut scale = init_logs.iter().map(|z| z.re).fold(T::neg_infinity(), T::max);
    if !scale.is_finite() {
        scale = T::zero();
    }
    let mut window: Vec<Complex<T>> = init_logs.iter().map(|z| (z - re(scale)).exp()).collect();
    let mut logmag = vec![T::zero(); n];
    let mut dir = vec![re(T::one()); n];
    let mut store = |pos: usize, y: Complex<T>, scale: T| {
        let m = y.norm();
        if m == T::zero() {
            logmag[pos] = T::neg_infinity();
            dir[pos] = re(T::one());
        } else {
            logmag[pos] = scale + m.ln();
            dir[pos] = y / m;
        }
    };
    let fwd = direction == Direction::Forward;
    for (p, y) in window.iter().enumerate() {
        let pos = if fwd { p } else { n - l + p };
        store(pos, *y, scale);
    }
    let huge = T::lit(1e100);
    for step in 0..n - l {
        let (k, pos) = if fwd {
            let pos = l + step;
            (k_start + step as i64, pos)
        } else {
            let pos = n - l - 1 - step;
            (k_start + pos as i64, pos)
        };
        let x = eps * T::from_i64(k).unwrap();
        let a: Vec<Complex<T>> = (0..=l).map(|j| spec.a(j, x, eps)).collect();
        let sum_abs = a.iter().fold(T::zero(), |s, v| s + v.norm());
        let solve = if fwd { a[l] } else { a[0] };
        if !(solve.norm() > sum_abs * T::epsilon()) {
            return Err(Error::CoefficientVanishes { k });
        }
        let y = if fwd {
            // window holds y_k .. y_{k+l-1}
            let s = (0..l).fold(re(T::zero()), |s, j| s + a[j] * window[j]);
            -s / solve
        } else {
            // window holds y_{k+1} .. y_{k+l}
            let s = (1..=l).fold(re(T::zero()), |s, j| s + a[j] * window[j - 1]);
            -s / solve
        };
        if fwd {
            window.remove(0);
            window.push(y);
        } else {
            window.pop();
            window.insert(0, y);
        }
        let big = window.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        if (step + 1) % RENORM_EVERY == 0 || big > huge || (big < T::one() / huge && big > T::zero()) {
            for v in window.iter_mut() {
                *v = *v / big;
            }
            scale = scale + big.ln();
        }
        let latest = if fwd { window[l - 1] } else { window[0] };
        store(pos, latest, scale);
    }
    Ok(LogScaledTrajectory {
        eps,
        k0: k_start,
        logmag,
        dir,
        init: format!("{direction:?} from {} start values", l),
    })
}

/// Iterates the recurrence at fixed ε over `k_range` (inclusive). Forward runs take
/// `init` as `y_{k0..k0+l-1}`, backward runs as `y_{k1-l+1..k1}`.
pub fn iterate<T: Real>(
    spec: &RecurrenceSpec<T>,
    eps: T,
    init: &[Complex<T>],
    k_range: (i64, i64),
    direction: Direction,
) -> Result<LogScaledTrajectory<T>> {
    let logs: Vec<Complex<T>> = init
        .iter()
        .map(|z| if z.norm() == T::zero() { re(T::neg_infinity()) } else { z.ln() })
        .collect();
    iterate_log(spec, eps, &logs, k_range, direction)
}

/// `C_k = Y_k / Ỹ_k` where `Y` is the exact solution started from the formal
/// solution `Ỹ` at `k0 .. k0 + l − 1` and iterated forward to `k1`.
pub fn rescaled_iterate<T: Real>(
    spec: &RecurrenceSpec<T>,
    phi: &PhiExpansion<T>,
    eps: T,
    k_range: (i64, i64),
) -> Result<Vec<(i64, Complex<T>)>> {
    let (k0, k1) = k_range;
    let logs: Vec<Complex<T>> =
        (0..spec.order).map(|p| phi.log_value(eps * T::from_i64(k0 + p as i64).unwrap(), eps)).collect();
    let traj = iterate_log(spec, eps, &logs, k_range, Direction::Forward)?;
    Ok((k0..=k1)
        .map(|k| {
            let i = (k - k0) as usize;
            let lt = phi.log_value(eps * T::from_i64(k).unwrap(), eps);
            let d = traj.logmag[i] - lt.re;
            let ph = traj.dir[i] * Complex::new(T::zero(), -lt.im).exp();
            (k, ph * d.exp())
        })
        .collect())
}

/// Index range with `kε ≥ lo` and `(k + l)ε ≤ hi`.
pub fn k_range_for<T: Real>(lo: T, hi: T, eps: T, l: usize) -> (i64, i64) {
    let k0 = (lo / eps).ceil().to_i64().unwrap();
    let k1 = (hi / eps).floor().to_i64().unwrap() - l as i64;
    (k0, k1)
}

/// `(X⁻¹Y)_{ij} = Π_{n≠i} (y_j − x_n)/(x_i − x_n)` with `X_{r,i} = x_iʳ`.
pub fn vandermonde_ratio<T: Real>(x_nodes: &[Complex<T>], y_nodes: &[Complex<T>]) -> Result<CMat<T>> {
    let l = x_nodes.len();
    assert_eq!(l, y_nodes.len());
    let scale = x_nodes.iter().fold(T::one(), |m, z| m.max(z.norm()));
    for i in 0..l {
        for n in i + 1..l {
            if (x_nodes[i] - x_nodes[n]).norm() <= scale * T::epsilon() * T::lit(16.0) {
                return Err(Error::CoincidentNodes);
            }
        }
    }
    Ok(CMat::from_fn(l, l, |i, j| {
        (0..l).filter(|&n| n != i).fold(re(T::one()), |acc, n| {
            acc * (y_nodes[j] - x_nodes[n]) / (x_nodes[i] - x_nodes[n])
        })
    }))
}

/// `X_{r,i} = x_iʳ` for `r = 0..l−1`.
pub fn vandermonde<T: Real>(nodes: &[Complex<T>]) -> CMat<T> {
    let l = nodes.len();
    CMat::from_fn(l, l, |r, i| nodes[i].powi(r as i32))
}

/// Companion matrix of the recurrence rescaled by `Ỹ`, acting on
/// `(z_{k+l−1}, …, z_k)`.
pub fn rescaled_transfer<T: Real>(spec: &RecurrenceSpec<T>, phi: &PhiExpansion<T>, eps: T, k: i64) -> CMat<T> {
    let l = spec.order;
    let x = eps * T::from_i64(k).unwrap();
    let at: Vec<Complex<T>> =
        (0..=l).map(|j| spec.a(j, x, eps) * phi.shifted_log(x, j as i64, eps).exp()).collect();
    companion(&at)
}

/// Companion matrix with first row `−(a_{l−1}, …, a_0)/a_l` and unit subdiagonal.
pub fn companion<T: Real>(a: &[Complex<T>]) -> CMat<T> {
    let l = a.len() - 1;
    CMat::from_fn(l, l, |i, j| {
        if i == 0 {
            -a[l - 1 - j] / a[l]
        } else if i == j + 1 {
            re(T::one())
        } else {
            re(T::zero())
        }
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormSample {
    pub x_from: f64,
    pub x_to: f64,
    pub steps: i64,
    pub norm: f64,
    /// Norm measured in the frozen eigenbases at both ends.
    pub eigen_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityScan {
    pub eps: f64,
    /// max (‖Π‖ − 1)/(|k − j| ε) over the sampled pairs.
    pub c_fit: f64,
    /// Same with eigenbasis norms.
    pub c_eigen: f64,
    pub max_norm: f64,
    pub samples: Vec<NormSample>,
}

/// Eigenvector matrix `V` of the rescaled frozen companion matrix at `x`, columns
/// `(μ^{l−1}, …, μ, 1)` for the rescaled roots `μ_m = λ_m / λ`.
fn frozen_eigenbasis<T: Real>(spec: &RecurrenceSpec<T>, phi: &PhiExpansion<T>, x: T) -> Result<CMat<T>> {
    let roots = crate::roots::char_roots_at(spec, x, T::zero(), false)?.roots;
    let lam = phi.lambda.eval(x);
    let mu: Vec<Complex<T>> = roots.iter().map(|r| r / lam).collect();
    let l = mu.len();
    Ok(CMat::from_fn(l, l, |i, m| mu[m].powi((l - 1 - i) as i32)))
}

/// Norms of products of rescaled transfer matrices between 11 fixed abscissae of
/// `region`, fitted to `‖Π‖ ≤ 1 + C |k − j| ε`.
pub fn stability_norm_scan<T: Real>(
    spec: &RecurrenceSpec<T>,
    phi: &PhiExpansion<T>,
    eps: T,
    region: (T, T),
) -> Result<StabilityScan> {
    let (k0, k1) = k_range_for(region.0, region.1, eps, spec.order);
    let marks: Vec<i64> = (0..=10).map(|i| k0 + (k1 - k0) * i / 10).collect();
    let mats: Vec<CMat<T>> = (k0..k1).map(|k| rescaled_transfer(spec, phi, eps, k)).collect();
    let l = spec.order;
    let mut samples = Vec::new();
    for (a, &ka) in marks.iter().enumerate() {
        let va = frozen_eigenbasis(spec, phi, eps * T::from_i64(ka).unwrap())?;
        let mut prod = CMat::identity(l);
        let mut k = ka;
        for &kb in &marks[a + 1..] {
            while k < kb {
                prod = mats[(k - k0) as usize].mul(&prod);
                k += 1;
            }
            let vb = frozen_eigenbasis(spec, phi, eps * T::from_i64(kb).unwrap())?;
            let eig = vb.inverse()?.mul(&prod).mul(&va);
            samples.push(NormSample {
                x_from: (eps * T::from_i64(ka).unwrap()).as_f64(),
                x_to: (eps * T::from_i64(kb).unwrap()).as_f64(),
                steps: kb - ka,
                norm: prod.spectral_norm(),
                eigen_norm: eig.spectral_norm(),
            });
        }
    }
    let e = eps.as_f64();
    let fit = |f: fn(&NormSample) -> f64| {
        samples.iter().map(|s| (f(s) - 1.0) / (s.steps as f64 * e)).fold(f64::MIN, f64::max)
    };
    Ok(StabilityScan {
        eps: e,
        c_fit: fit(|s| s.norm),
        c_eigen: fit(|s| s.eigen_norm),
        max_norm: samples.iter().map(|s| s.norm).fold(0.0, f64::max),
        samples,
    })
}

/// Interior variant near a crossing: products of `A_k / λ*` for `|k − k*| ≤ k_max`
/// fitted to `‖Π‖ ≤ 1 + C |k − j|^p`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InteriorNormFit {
    pub c: f64,
    pub exponent: f64,
    pub steps: Vec<i64>,
    pub norms: Vec<f64>,
}

pub fn interior_norm_scan<T: Real>(
    spec: &RecurrenceSpec<T>,
    x_star: T,
    lambda_star: Complex<T>,
    eps: T,
    k_max: i64,
) -> Result<InteriorNormFit> {
    let ks = (x_star / eps).round().to_i64().unwrap();
    let l = spec.order;
    let mut prod = CMat::identity(l);
    let mut steps = Vec::new();
    let mut norms = Vec::new();
    let mut next = 1i64;
    for (n, k) in (ks - k_max..ks + k_max).enumerate() {
        let x = eps * T::from_i64(k).unwrap();
        let a: Vec<Complex<T>> =
            (0..=l).map(|j| spec.a(j, x, eps) * lambda_star.powi(j as i32)).collect();
        prod = companion(&a).mul(&prod);
        let len = n as i64 + 1;
        if len == next {
            steps.push(len);
            norms.push(prod.spectral_norm());
            next = (next * 3 / 2).max(next + 1);
        }
    }
    let xs: Vec<f64> = steps.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|&v| (v - 1.0).max(1e-300).ln()).collect();
    let (p, icpt, _) = crate::fit::linear_fit(&xs, &ys);
    Ok(InteriorNormFit { c: icpt.exp(), exponent: p, steps, norms })
}

/// Slope of `max |C_k − 1|` against ε for one truncation order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AsymptoticityFit {
    pub branch_id: usize,
    pub order: usize,
    pub region: (f64, f64),
    pub fit: SlopeFit,
    /// Smallest shift `s₀ ≥ 0` with `slope ≥ s + 1 − s₀ − 0.2`.
    pub shift: usize,
    pub pass: bool,
}

/// Shift `s₀` implied by a measured slope at order `s`.
pub fn fitted_shift(order: usize, slope: f64) -> usize {
    let mut s0 = 0;
    while (slope < order as f64 + 1.0 - s0 as f64 - 0.2) && s0 <= order + 1 {
        s0 += 1;
    }
    s0
}

/// `max |C_k − 1|` over the region, for each ε, at truncation `phi`.
pub fn asymptoticity_errors<T: Real>(spec: &RecurrenceSpec<T>, phi: &PhiExpansion<T>, eps_list: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = phi.region;
    eps_list
        .iter()
        .map(|&e| {
            let eps = T::lit(e);
            let r = k_range_for(lo, hi, eps, spec.order);
            let cs = rescaled_iterate(spec, phi, eps, r)?;
            Ok(cs.iter().map(|(_, c)| (c - re(T::one())).norm().as_f64()).fold(0.0, f64::max))
        })
        .collect()
}

pub fn asymptoticity_fit<T: Real>(
    spec: &RecurrenceSpec<T>,
    phi: &PhiExpansion<T>,
    eps_list: &[f64],
) -> Result<AsymptoticityFit> {
    require_span(eps_list, 4, 1.5)?;
    let errors = asymptoticity_errors(spec, phi, eps_list)?;
    let fit = loglog_fit(eps_list, &errors);
    let order = phi.order();
    let shift = fitted_shift(order, fit.slope);
    Ok(AsymptoticityFit {
        branch_id: phi.branch_id,
        order,
        region: (phi.region.0.as_f64(), phi.region.1.as_f64()),
        pass: shift <= 1,
        shift,
        fit,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FundamentalFit {
    pub region: (f64, f64),
    pub eps: f64,
    /// Index window used for the fit.
    pub k_window: (i64, i64),
    pub coefficients: Vec<(f64, f64)>,
    pub relative_residual: f64,
    pub condition: f64,
    pub pass: bool,
}

/// Fits one exact solution on each region by `Σ_m C_m Ỹ_m(kε)`.
///
/// `trajectory` must cover every region. The fit window starts at the region's
/// left end and stops where the formal solutions drift apart by more than 1e8 in
/// relative size, beyond which the recessive coefficients are unobservable.
pub fn fundamental_fit<T: Real>(
    trajectory: &LogScaledTrajectory<T>,
    phis: &[PhiExpansion<T>],
    tolerance: f64,
) -> Result<FundamentalFit> {
    let eps = trajectory.eps;
    let (lo, hi) = phis[0].region;
    let l = phis.len();
    let (k0, k1) = k_range_for(lo, hi, eps, 0);
    let k0 = k0.max(trajectory.k0);
    let k1 = k1.min(trajectory.k_end());
    if k1 - k0 < 2 * l as i64 {
        return Err(Error::WindowEmpty(format!("region [{lo}, {hi}] holds too few indices")));
    }
    let logs = |k: i64| -> Vec<Complex<T>> {
        let x = eps * T::from_i64(k).unwrap();
        phis.iter().map(|p| p.log_value(x, eps)).collect()
    };
    let start = logs(k0);
    let spread = |k: i64| {
        let v: Vec<T> = logs(k).iter().zip(&start).map(|(a, b)| a.re - b.re).collect();
        let mx = v.iter().cloned().fold(T::neg_infinity(), T::max);
        let mn = v.iter().cloned().fold(T::infinity(), T::min);
        (mx - mn).as_f64()
    };
    let limit = (1e8f64).ln();
    let mut kw = k1;
    if spread(k1) > limit {
        let (mut a, mut b) = (k0, k1);
        while b - a > 1 {
            let m = (a + b) / 2;
            if spread(m) > limit {
                b = m;
            } else {
                a = m;
            }
        }
        kw = a.max(k0 + 2 * l as i64);
    }
    let npts = ((kw - k0 + 1) as usize).min(80);
    let ks: Vec<i64> = (0..npts).map(|i| k0 + (kw - k0) * i as i64 / (npts as i64 - 1).max(1)).collect();
    let mut ks = ks;
    ks.dedup();
    // rows scaled by |y_k|; columns by Ỹ_m(k0)
    let mut a = CMat::zeros(ks.len(), l);
    let mut b = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        let lk = trajectory.log(k);
        for (m, lm) in logs(k).iter().enumerate() {
            a[(i, m)] = (lm - start[m] - re(lk.re)).exp();
        }
        b.push(Complex::new(T::zero(), lk.im).exp());
    }
    let fit = lstsq(&a, &b)?;
    let ref_log = trajectory.log(k0);
    let coefficients = fit
        .coeffs
        .iter()
        .zip(&start)
        .map(|(cm, s)| {
            // undo the column scaling: coefficient of Ỹ_m relative to y_{k0}
            let z = cx_f64(*cm * (re(ref_log.re) - s).exp() * Complex::new(T::zero(), ref_log.im).exp().conj().inv().conj());
            (z.re, z.im)
        })
        .collect();
    let res = fit.relative_residual.as_f64();
    Ok(FundamentalFit {
        region: (lo.as_f64(), hi.as_f64()),
        eps: eps.as_f64(),
        k_window: (k0, kw),
        coefficients,
        relative_residual: res,
        condition: fit.condition,
        pass: res <= tolerance && fit.condition.is_finite(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub spec_name: String,
    pub eps_list: Vec<f64>,
    pub asymptoticity: Vec<AsymptoticityFit>,
    pub fundamental: Vec<FundamentalFit>,
    pub stokes_jumps: Vec<f64>,
    pub pass: bool,
}

/// Runs the asymptoticity fits (dominant branch of each region, every order up to
/// its expansion's) and the fundamental-system fit of one random solution.
///
/// `phis` holds the expansions of all branches; expansions sharing a region form
/// that region's basis.
pub fn validate_wkb<T: Real>(
    spec: &RecurrenceSpec<T>,
    phis: &[PhiExpansion<T>],
    eps_list: &[f64],
    fit_eps: f64,
    seed: u64,
) -> Result<ValidationReport> {
    let mut regions: Vec<(f64, f64)> = Vec::new();
    for p in phis {
        let r = (p.region.0.as_f64(), p.region.1.as_f64());
        if !regions.contains(&r) {
            regions.push(r);
        }
    }
    regions.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut asym = Vec::new();
    let mut fundamental = Vec::new();
    let eps = T::lit(fit_eps);
    let lo = T::lit(regions[0].0);
    let hi = T::lit(regions.last().unwrap().1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<Complex<T>> =
        (0..spec.order).map(|_| c(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect();
    let range = k_range_for(lo, hi, eps, spec.order);
    let traj = iterate(spec, eps, &init, (range.0, range.1 + spec.order as i64), Direction::Forward)?;
    for r in &regions {
        let basis: Vec<PhiExpansion<T>> =
            phis.iter().filter(|p| (p.region.0.as_f64(), p.region.1.as_f64()) == *r).cloned().collect();
        let mid = T::lit(0.5 * (r.0 + r.1));
        let dom = basis
            .iter()
            .max_by(|a, b| a.lambda.eval(mid).norm().partial_cmp(&b.lambda.eval(mid).norm()).unwrap())
            .unwrap();
        let fits: Result<Vec<_>> =
            (0..=dom.order()).into_par_iter().map(|s| asymptoticity_fit(spec, &dom.truncated(s), eps_list)).collect();
        asym.extend(fits?);
        if basis.len() == spec.order {
            fundamental.push(fundamental_fit(&traj, &basis, 1e-6)?);
        }
    }
    let stokes_jumps = fundamental
        .windows(2)
        .map(|w| {
            w[0].coefficients
                .iter()
                .zip(&w[1].coefficients)
                .map(|(a, b)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt())
                .fold(0.0, f64::max)
        })
        .collect();
    let pass = asym.iter().all(|a| a.pass) && fundamental.iter().all(|f| f.pass);
    Ok(ValidationReport {
        spec_name: spec.name.clone(),
        eps_list: eps_list.to_vec(),
        asymptoticity: asym,
        fundamental,
        stokes_jumps,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::preset;
    use crate::roots::track_branches;
    use crate::wkb::expand;
    use approx::assert_relative_eq;
    use rand::Rng;

    type Spec = RecurrenceSpec<f64>;

    #[test]
    fn doubling_has_exact_log_magnitude() {
        let s = Spec::parse("order 1\ninterval 0 1\ncoeff 0 epspow 0 : -2\ncoeff 1 epspow 0 : 1").unwrap();
        let t = iterate(&s, 1e-3, &[re(1.0)], (0, 3000), Direction::Forward).unwrap();
        for k in [0, 1, 64, 999, 3000] {
            assert_relative_eq!(t.logmag[k as usize], k as f64 * 2f64.ln(), max_relative = 1e-14);
        }
        assert!(t.logmag[3000] > 2000.0); // far beyond f64 range
    }

    #[test]
    fn euler_closed_form() {
        let s: Spec = preset("euler").unwrap();
        let eps = 1e-3;
        let t = iterate(&s, eps, &[re(1.0)], (0, 1000), Direction::Forward).unwrap();
        let want = (1f64.exp() - 1.0) / (eps.exp() - 1.0);
        assert_relative_eq!(t.logmag[1000], want, max_relative = 1e-12);
        for k in [0, 17, 500, 999] {
            assert!(trajectory_residual(&s, &t, k) <= 1e-9);
        }
    }

    #[test]
    fn backward_run_finds_recessive_bessel_solution() {
        let s: Spec = preset("bessel").unwrap();
        let eps = 1e-2;
        let init = [re(0.3), re(-1.2)];
        let a = iterate(&s, eps, &init, (50, 150), Direction::Backward).unwrap();
        let b = iterate(&s, eps, &[re(1.0), re(1.0)], (50, 150), Direction::Backward).unwrap();
        // different end data, same recessive solution away from the start
        for k in [50, 60, 80] {
            let ra = a.ratio(k + 1, k);
            let rb = b.ratio(k + 1, k);
            assert!((ra - rb).norm() < 1e-10 * ra.norm());
        }
        for k in 50..148 {
            assert!(trajectory_residual(&s, &a, k) <= 1e-9);
        }
        // the recessive root is the small one: ratio close to 2 + x - sqrt((1+x)^2 - 1) at x = 0.6
        let x: f64 = 0.6;
        let small = 1.0 + x - ((1.0 + x).powi(2) - 1.0).sqrt();
        assert!((a.ratio(61, 60).re - small).abs() < 0.05);
    }

    #[test]
    fn vandermonde_examples() {
        let x = [re(1.0), re(2.0)];
        let m = vandermonde_ratio(&x, &[re(1.1), re(2.2)]).unwrap();
        assert_relative_eq!(m[(0, 0)].re, 0.9, epsilon = 1e-15);
        assert_relative_eq!(m[(0, 1)].re, -0.2, epsilon = 1e-15);
        let id = vandermonde_ratio(&x, &x).unwrap();
        assert_eq!(id, CMat::identity(2));
        assert!(matches!(vandermonde_ratio(&[re(1.0), re(1.0)], &x), Err(Error::CoincidentNodes)));
    }

    #[test]
    fn vandermonde_matches_direct_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        while done < 100 {
            let nodes: Vec<Complex<f64>> = (0..4).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let ok = (0..4).all(|i| (i + 1..4).all(|j| (nodes[i] - nodes[j]).norm() >= 0.1));
            if !ok {
                continue;
            }
            let y: Vec<Complex<f64>> = (0..4).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let direct = vandermonde(&nodes).solve(&vandermonde(&y)).unwrap();
            let formula = vandermonde_ratio(&nodes, &y).unwrap();
            let diff = formula.data.iter().zip(&direct.data).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(diff <= 1e-10 * formula.max_abs().max(1.0), "{diff}");
            done += 1;
        }
    }

    #[test]
    fn constant_coefficients_rescale_to_one() {
        let s = Spec::parse("order 2\ninterval 0 1\nexact 0 : 2\nexact 1 : -3\nexact 2 : 1").unwrap();
        let br = track_branches(&s, 8).unwrap();
        let big = br.iter().find(|b| b.lambda.eval(0.5).re > 1.5).unwrap();
        let phi = expand(&s, big, 0.0, 2).unwrap();
        let cs = rescaled_iterate(&s, &phi, 1e-2, (0, 98)).unwrap();
        for (_, ck) in cs {
            assert!((ck - re(1.0)).norm() < 1e-12);
        }
        let scan = stability_norm_scan(&s, &phi, 1e-2, (0.0, 1.0)).unwrap();
        assert!(scan.max_norm < 10.0);
        assert!(scan.c_eigen.abs() < 1e-6, "{}", scan.c_eigen);
    }

    #[test]
    fn shift_rule() {
        assert_eq!(fitted_shift(2, 3.0), 0);
        assert_eq!(fitted_shift(2, 2.0), 1);
        assert_eq!(fitted_shift(2, 1.5), 2);
        assert_eq!(fitted_shift(0, 0.85), 0);
    }

    #[test]
    fn euler_fundamental_fit() {
        let s: Spec = preset("euler").unwrap();
        let br = track_branches(&s, 32).unwrap();
        let phi = expand(&s, &br[0], 0.0, 4).unwrap();
        let rep = validate_wkb(&s, &[phi], &[1e-2, 3e-3, 1e-3, 3e-4], 1e-3, 9).unwrap();
        assert_eq!(rep.fundamental.len(), 1);
        assert!(rep.fundamental[0].relative_residual < 1e-6, "{:?}", rep.fundamental[0]);
        assert!(rep.asymptoticity.iter().take(2).all(|a| a.pass));
    }
}
