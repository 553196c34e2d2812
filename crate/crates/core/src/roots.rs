//! Characteristic roots `Σⱼ a_j(x, 0) λʲ = 0`, their continuation along the
//! interval, the ordering of their moduli and the points where two of them meet.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::fit::linear_fit;
use crate::recurrence::RecurrenceSpec;
use crate::scalar::{cx_f64, cx_from_f64, re, Real};

/// Roots of one polynomial with their multiplicities (clustered within 1e−6).
#[derive(Clone, Debug)]
pub struct RootSet<T: Real> {
    pub roots: Vec<Complex<T>>,
    pub multiplicity: Vec<usize>,
}

/// Horner evaluation of `Σ c_j λʲ` and its derivative.
pub fn poly_eval<T: Real>(c: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = re(T::zero());
    let mut dp = re(T::zero());
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of `Σ c_j λʲ` (ascending coefficients): companion-matrix eigenvalues in
/// double precision, then Newton polish in `T`.
pub fn poly_roots<T: Real>(c: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let l = c.len() - 1;
    let big = c.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if !(c[l].norm() > big * T::lit(1e-14)) {
        return Err(Error::LeadingCoefficientVanishes { x: f64::NAN });
    }
    if l == 1 {
        return Ok(vec![-c[0] / c[1]]);
    }
    let lead = cx_f64(c[l]);
    let comp = DMatrix::from_fn(l, l, |i, j| {
        if i == 0 {
            -cx_f64(c[l - 1 - j]) / lead
        } else if i == j + 1 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let eig = nalgebra::linalg::Schur::new(comp)
        .eigenvalues()
        .ok_or_else(|| Error::InvalidArgument("companion eigenvalues did not converge".into()))?;
    let mut out: Vec<Complex<T>> = eig.iter().map(|z| cx_from_f64(*z)).collect();
    for z in out.iter_mut() {
        let mut best = poly_eval(c, *z).0.norm();
        for _ in 0..8 {
            let (p, dp) = poly_eval(c, *z);
            if dp.norm() == T::zero() {
                break;
            }
            let cand = *z - p / dp;
            let v = poly_eval(c, cand).0.norm();
            if v < best {
                best = v;
                *z = cand;
            } else {
                break;
            }
        }
    }
    sort_roots(&mut out);
    Ok(out)
}

fn sort_roots<T: Real>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        let tie = (ma - mb).abs() <= T::lit(1e-9) * ma.max(mb);
        if tie {
            a.arg().partial_cmp(&b.arg()).unwrap()
        } else {
            ma.partial_cmp(&mb).unwrap()
        }
    });
}

fn multiplicities<T: Real>(roots: &[Complex<T>]) -> Vec<usize> {
    roots
        .iter()
        .map(|a| {
            roots
                .iter()
                .filter(|b| (*a - **b).norm() <= T::lit(1e-6) * a.norm().max(T::one()))
                .count()
        })
        .collect()
}

/// Characteristic polynomial coefficients at `(x, ε)`; `use_full` keeps the
/// finite-ε coefficients instead of their ε → 0 limit.
pub fn char_poly<T: Real>(spec: &RecurrenceSpec<T>, x: T, eps: T, use_full: bool) -> Vec<Complex<T>> {
    (0..=spec.order)
        .map(|j| if use_full { spec.a(j, x, eps) } else { spec.a0(j, x) })
        .collect()
}

pub fn char_roots_at<T: Real>(spec: &RecurrenceSpec<T>, x: T, eps: T, use_full: bool) -> Result<RootSet<T>> {
    let c = char_poly(spec, x, eps, use_full);
    let roots = poly_roots(&c).map_err(|e| match e {
        Error::LeadingCoefficientVanishes { .. } => Error::LeadingCoefficientVanishes { x: x.as_f64() },
        other => other,
    })?;
    let multiplicity = multiplicities(&roots);
    Ok(RootSet { roots, multiplicity })
}

/// One continuous characteristic-root branch.
#[derive(Clone, Debug)]
pub struct RootBranch<T: Real> {
    pub branch_id: usize,
    pub lambda: ScalarField<T>,
    pub modulus_rank: usize,
}

/// Root branches sampled on a grid (exact roots at every sample).
#[derive(Clone, Debug)]
pub struct BranchSamples<T: Real> {
    pub xs: Vec<T>,
    /// `values[m][i]` is branch `m` at `xs[i]`.
    pub values: Vec<Vec<Complex<T>>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Assigns `roots` to `predicted` slots minimising the total distance.
fn match_roots<T: Real>(predicted: &[Complex<T>], roots: &[Complex<T>]) -> Vec<Complex<T>> {
    let l = roots.len();
    if l <= 6 {
        let mut best = (T::infinity(), Vec::new());
        for p in permutations(l) {
            let cost = p.iter().enumerate().fold(T::zero(), |a, (m, &k)| a + (predicted[m] - roots[k]).norm());
            if cost < best.0 {
                best = (cost, p);
            }
        }
        best.1.iter().map(|&k| roots[k]).collect()
    } else {
        let mut used = vec![false; l];
        predicted
            .iter()
            .map(|p| {
                let k = (0..l)
                    .filter(|&k| !used[k])
                    .min_by(|&a, &b| (roots[a] - p).norm().partial_cmp(&(roots[b] - p).norm()).unwrap())
                    .unwrap();
                used[k] = true;
                roots[k]
            })
            .collect()
    }
}

fn min_gap<T: Real>(v: &[Complex<T>]) -> T {
    let mut g = T::infinity();
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            g = g.min((v[a] - v[b]).norm());
        }
    }
    g
}

/// Tracks branches on `n + 1` uniform points of `[lo, hi]` by nearest-neighbour
/// matching, inserting midpoints where roots move fast relative to their gap.
/// With `strict`, near-coincident roots abort with [`Error::BranchJumpDetected`].
pub fn sample_branches<T: Real>(
    spec: &RecurrenceSpec<T>,
    lo: T,
    hi: T,
    n: usize,
    strict: bool,
) -> Result<BranchSamples<T>> {
    let l = spec.order;
    let roots = |x: T| char_roots_at(spec, x, T::zero(), false).map(|r| r.roots);
    let grid: Vec<T> = (0..=n).map(|i| lo + (hi - lo) * T::from_usize_(i) / T::from_usize_(n)).collect();
    let mut xs = vec![grid[0]];
    let mut cols: Vec<Vec<Complex<T>>> = vec![roots(grid[0])?];
    let scale = |v: &[Complex<T>]| v.iter().fold(T::one(), |m, z| m.max(z.norm()));
    if strict && min_gap(&cols[0]) < scale(&cols[0]) * T::lit(1e-6) {
        return Err(Error::BranchJumpDetected { x: grid[0].as_f64() });
    }
    for w in grid.windows(2) {
        let mut stack = vec![w[1]];
        let mut depth = 0;
        while let Some(xn) = stack.pop() {
            let prev = cols.last().unwrap().clone();
            let xp = *xs.last().unwrap();
            let predicted: Vec<Complex<T>> = if cols.len() >= 2 {
                let pp = &cols[cols.len() - 2];
                let xpp = xs[xs.len() - 2];
                let t = (xn - xp) / (xp - xpp);
                (0..l).map(|m| prev[m] + (prev[m] - pp[m]) * t).collect()
            } else {
                prev.clone()
            };
            let next = match_roots(&predicted, &roots(xn)?);
            let motion = (0..l).fold(T::zero(), |a, m| a.max((next[m] - prev[m]).norm()));
            let gap = min_gap(&prev).min(min_gap(&next));
            let sc = scale(&next);
            if strict && gap < sc * T::lit(1e-6) {
                return Err(Error::BranchJumpDetected { x: xn.as_f64() });
            }
            if l > 1 && gap < motion * T::lit(4.0) && depth < 40 && gap > sc * T::lit(1e-6) {
                stack.push(xn);
                stack.push((xp + xn) * T::lit(0.5));
                depth += 1;
                continue;
            }
            if strict && l > 1 && gap < motion * T::lit(4.0) {
                return Err(Error::BranchJumpDetected { x: xn.as_f64() });
            }
            xs.push(xn);
            cols.push(next);
        }
    }
    let values = (0..l).map(|m| cols.iter().map(|c| c[m]).collect()).collect();
    Ok(BranchSamples { xs, values })
}

impl<T: Real> BranchSamples<T> {
    pub fn branches(&self) -> usize {
        self.values.len()
    }

    /// Piecewise-linear prediction of branch `m` at `x`.
    pub fn predict(&self, m: usize, x: T) -> Complex<T> {
        let xs = &self.xs;
        let i = match xs.iter().position(|&t| t >= x) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => xs.len() - 2,
        }
        .min(xs.len().saturating_sub(2));
        if xs.len() < 2 {
            return self.values[m][0];
        }
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        self.values[m][i] + (self.values[m][i + 1] - self.values[m][i]) * t
    }

    /// Samples of already-built branch fields on `n + 1` uniform points.
    pub fn from_branches(branches: &[RootBranch<T>], n: usize) -> Self {
        let lo = branches[0].lambda.lo();
        let hi = branches[0].lambda.hi();
        let xs: Vec<T> = (0..=n).map(|i| lo + (hi - lo) * T::from_usize_(i) / T::from_usize_(n)).collect();
        let values = branches.iter().map(|b| b.lambda.eval_many(&xs)).collect();
        Self { xs, values }
    }
}

/// Continuous branches on the spec's interval as fields of exact roots.
pub fn track_branches<T: Real>(spec: &RecurrenceSpec<T>, grid_resolution: usize) -> Result<Vec<RootBranch<T>>> {
    let (lo, hi) = spec.interval;
    track_branches_on(spec, lo, hi, grid_resolution)
}

pub fn track_branches_on<T: Real>(
    spec: &RecurrenceSpec<T>,
    lo: T,
    hi: T,
    grid_resolution: usize,
) -> Result<Vec<RootBranch<T>>> {
    let samples = sample_branches(spec, lo, hi, grid_resolution.max(2), true)?;
    let mid = (lo + hi) * T::lit(0.5);
    let at_mid: Vec<Complex<T>> = (0..samples.branches()).map(|m| samples.predict(m, mid)).collect();
    let mut order: Vec<usize> = (0..at_mid.len()).collect();
    order.sort_by(|&a, &b| at_mid[a].norm().partial_cmp(&at_mid[b].norm()).unwrap());
    let mut out = Vec::new();
    for m in 0..samples.branches() {
        let s = &samples;
        let lambda = ScalarField::from_fn(lo, hi, |x| {
            let p = s.predict(m, x);
            let r = char_roots_at(spec, x, T::zero(), false).map(|r| r.roots).unwrap_or_default();
            r.into_iter()
                .min_by(|a, b| (a - p).norm().partial_cmp(&(b - p).norm()).unwrap())
                .unwrap_or(p)
        });
        let rank = order.iter().position(|&k| k == m).unwrap();
        out.push(RootBranch { branch_id: m, lambda, modulus_rank: rank });
    }
    Ok(out)
}

/// Subinterval on which one modulus ordering holds.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    /// Branch ids by increasing modulus.
    pub order: Vec<usize>,
    /// `tied[i]`: moduli of `order[i]` and `order[i+1]` coincide on the region.
    pub tied: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionPartition {
    pub regions: Vec<Region>,
}

impl RegionPartition {
    pub fn region_at(&self, x: f64) -> Option<&Region> {
        self.regions.iter().find(|r| r.lo <= x && x <= r.hi)
    }
}

const TIE: f64 = 1e-9;

fn ordering<T: Real>(v: &[Complex<T>]) -> (Vec<usize>, Vec<bool>) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let is_tie = |a: &Complex<T>, b: &Complex<T>| {
        let (ma, mb) = (a.norm().as_f64(), b.norm().as_f64());
        (ma - mb).abs() <= TIE * ma.max(mb)
    };
    idx.sort_by(|&a, &b| {
        if is_tie(&v[a], &v[b]) {
            v[a].arg().partial_cmp(&v[b].arg()).unwrap()
        } else {
            v[a].norm().partial_cmp(&v[b].norm()).unwrap()
        }
    });
    let tied = idx.windows(2).map(|w| is_tie(&v[w[0]], &v[w[1]])).collect();
    (idx, tied)
}

/// Splits the sampled interval where the modulus ordering (or its tie pattern) changes.
/// Ties are ordered by argument.
pub fn partition_by_modulus<T: Real>(samples: &BranchSamples<T>) -> RegionPartition {
    let l = samples.branches();
    let key = |i: usize| ordering(&(0..l).map(|m| samples.values[m][i]).collect::<Vec<_>>());
    let xs: Vec<f64> = samples.xs.iter().map(|x| x.as_f64()).collect();
    let mut regions: Vec<Region> = Vec::new();
    let mut cur = key(0);
    let mut start = xs[0];
    // isolated samples sitting exactly on a boundary (double roots) are absorbed
    let n = xs.len();
    let mut i = 1;
    while i < n {
        let k = key(i);
        if k != cur {
            let isolated = i + 1 < n && key(i + 1) == cur;
            let lookahead_new = i + 1 < n && key(i + 1) != k;
            if isolated || lookahead_new {
                i += 1;
                continue;
            }
            let b = 0.5 * (xs[i - 1] + xs[i]);
            regions.push(Region { lo: start, hi: b, order: cur.0.clone(), tied: cur.1.clone() });
            start = b;
            cur = k;
        }
        i += 1;
    }
    regions.push(Region { lo: start, hi: xs[n - 1], order: cur.0, tied: cur.1 });
    RegionPartition { regions }
}

/// A point where two branches meet like `c·|x − x*|^{1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingCandidate {
    pub x_star: f64,
    pub pair: (usize, usize),
    pub genericity_constant: f64,
    pub exponent: f64,
    /// Common root value at the crossing.
    pub lambda_star: Complex<f64>,
}

fn pair_gap<T: Real>(spec: &RecurrenceSpec<T>, x: T, near: Complex<T>) -> Result<T> {
    let mut r = char_roots_at(spec, x, T::zero(), false)?.roots;
    r.sort_by(|a, b| (a - near).norm().partial_cmp(&(b - near).norm()).unwrap());
    Ok((r[0] - r[1]).norm())
}

/// Locates branch meetings and fits `|λ_m − λ_n| ≈ c |x − x*|^p` on both sides.
pub fn detect_crossings<T: Real>(
    samples: &BranchSamples<T>,
    spec: &RecurrenceSpec<T>,
) -> Result<Vec<CrossingCandidate>> {
    let l = samples.branches();
    let n = samples.xs.len();
    let lo = samples.xs[0];
    let hi = samples.xs[n - 1];
    let width = hi - lo;
    let mut out: Vec<CrossingCandidate> = Vec::new();
    for m in 0..l {
        for k in m + 1..l {
            let g: Vec<T> = (0..n).map(|i| (samples.values[m][i] - samples.values[k][i]).norm()).collect();
            for i in 0..n {
                let left = if i > 0 { g[i - 1] } else { T::infinity() };
                let right = if i + 1 < n { g[i + 1] } else { T::infinity() };
                let sc = samples.values[m][i].norm().max(T::one());
                if !(g[i] <= left && g[i] <= right && g[i] < sc * T::lit(0.05)) {
                    continue;
                }
                let near = (samples.values[m][i] + samples.values[k][i]) * T::lit(0.5);
                // golden-section search for the minimum gap
                let (mut a, mut b) = (samples.xs[i.saturating_sub(1)], samples.xs[(i + 1).min(n - 1)]);
                let phi = T::lit(0.618_033_988_749_894_8);
                for _ in 0..200 {
                    if b - a <= width * T::lit(1e-13) {
                        break;
                    }
                    let c1 = b - (b - a) * phi;
                    let c2 = a + (b - a) * phi;
                    if pair_gap(spec, c1, near)? < pair_gap(spec, c2, near)? {
                        b = c2;
                    } else {
                        a = c1;
                    }
                }
                let xs = (a + b) * T::lit(0.5);
                if out.iter().any(|c| (c.x_star - xs.as_f64()).abs() < 1e-6 * width.as_f64()) {
                    continue;
                }
                let r = char_roots_at(spec, xs, T::zero(), false)?.roots;
                let lam = r
                    .iter()
                    .min_by(|u, v| (*u - near).norm().partial_cmp(&(*v - near).norm()).unwrap())
                    .copied()
                    .unwrap();
                let dmax = width.as_f64() * 0.05;
                let mut lx = Vec::new();
                let mut ly = Vec::new();
                for side in [-1.0, 1.0] {
                    for q in 0..10 {
                        let d = dmax * (2e-3f64).powf(q as f64 / 9.0);
                        let x = xs + T::lit(side * d);
                        if x < lo || x > hi {
                            continue;
                        }
                        let gap = pair_gap(spec, x, lam)?;
                        lx.push(d.ln());
                        ly.push(gap.as_f64().max(f64::MIN_POSITIVE).ln());
                    }
                }
                let (p, icpt, _) = linear_fit(&lx, &ly);
                if (p - 0.5).abs() > 0.1 {
                    return Err(Error::NonGenericCrossing { exponent: p });
                }
                out.push(CrossingCandidate {
                    x_star: xs.as_f64(),
                    pair: (m, k),
                    genericity_constant: icpt.exp(),
                    exponent: p,
                    lambda_star: cx_f64(lam),
                });
            }
        }
    }
    out.sort_by(|a, b| a.x_star.partial_cmp(&b.x_star).unwrap());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::{bessel, preset};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Spec = RecurrenceSpec<f64>;

    #[test]
    fn bessel_roots_at_one() {
        let s: Spec = preset("bessel").unwrap();
        let r = char_roots_at(&s, 1.0, 0.0, false).unwrap();
        let r3 = 3f64.sqrt();
        assert_relative_eq!(r.roots[0].re, 2.0 - r3, epsilon = 1e-14);
        assert_relative_eq!(r.roots[1].re, 2.0 + r3, epsilon = 1e-14);
        assert_eq!(r.multiplicity, vec![1, 1]);
    }

    #[test]
    fn linear_root() {
        let s = Spec::parse("order 1\ninterval 0 1\ncoeff 0 epspow 0 : -2\ncoeff 1 epspow 0 : 1").unwrap();
        let r = char_roots_at(&s, 0.5, 0.0, false).unwrap();
        assert_eq!(r.roots, vec![re(2.0)]);
    }

    #[test]
    fn double_root_at_crossing() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let r = char_roots_at(&s, 0.0, 0.0, false).unwrap();
        assert_eq!(r.multiplicity, vec![2, 2]);
        for z in r.roots {
            assert!((z - re(1.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn full_polynomial_uses_finite_eps() {
        let s: Spec = preset("euler_scheme").unwrap();
        let r = char_roots_at(&s, 0.3, 0.01, true).unwrap();
        // λ² − (2 + ε²)λ + 1 = 0 by the quadratic formula
        let b = 2.0 + 1e-4;
        assert_relative_eq!(r.roots[1].re, (b + (b * b - 4.0f64).sqrt()) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(r.roots[0].re, (b - (b * b - 4.0f64).sqrt()) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn residuals_are_small_in_quad() {
        type Q = f128::f128;
        let s: RecurrenceSpec<Q> = preset("bessel").unwrap();
        let x = Q::lit(0.7);
        let c = char_poly(&s, x, Q::lit(0.0), false);
        for z in char_roots_at(&s, x, Q::lit(0.0), false).unwrap().roots {
            assert!(poly_eval(&c, z).0.norm().as_f64() < 1e-30);
        }
    }

    #[test]
    fn bessel_branches_on_regular_interval() {
        let s: Spec = preset("bessel").unwrap();
        let br = track_branches(&s, 64).unwrap();
        assert_eq!(br.len(), 2);
        let samples = BranchSamples::from_branches(&br, 200);
        let part = partition_by_modulus(&samples);
        assert_eq!(part.regions.len(), 1);
        // permutation consistency at the field nodes
        for b in &br {
            for (x, v) in b.lambda.nodes().iter().zip(b.lambda.values()) {
                let r = char_roots_at(&s, *x, 0.0, false).unwrap().roots;
                assert!(r.iter().any(|z| (z - v).norm() < 1e-9));
                let c = char_poly(&s, *x, 0.0, false);
                let sc = c.iter().fold(0.0f64, |m, a| m.max(a.norm()));
                assert!(poly_eval(&c, *v).0.norm() <= 1e-10 * sc);
            }
        }
        // ordering respected at random points
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reg = &part.regions[0];
        for _ in 0..1000 {
            let x = rng.gen_range(reg.lo..reg.hi);
            let m: Vec<f64> = reg.order.iter().map(|&k| br[k].lambda.eval(x).norm()).collect();
            assert!(m[0] <= m[1]);
        }
    }

    #[test]
    fn constant_branches() {
        let s = Spec::parse("order 2\ninterval 0 1\nexact 0 : 2\nexact 1 : -3\nexact 2 : 1").unwrap();
        let br = track_branches(&s, 16).unwrap();
        for b in &br {
            let v = b.lambda.eval(0.0);
            assert!((b.lambda.eval(0.77) - v).norm() < 1e-13);
        }
        let part = partition_by_modulus(&BranchSamples::from_branches(&br, 50));
        assert_eq!(part.regions.len(), 1);
        assert_relative_eq!(br[part.regions[0].order[0]].lambda.eval(0.5).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn crossing_interval_is_refused_by_strict_tracking() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        assert!(matches!(track_branches(&s, 64), Err(Error::BranchJumpDetected { .. })));
    }

    #[test]
    fn bessel_crossing_partition_and_fit() {
        let s: Spec = bessel(-0.5, 0.5).unwrap();
        let smp = sample_branches(&s, -0.5, 0.5, 200, false).unwrap();
        let part = partition_by_modulus(&smp);
        assert_eq!(part.regions.len(), 2);
        assert!(part.regions[0].hi.abs() <= 0.005 + 1e-12);
        assert_eq!(part.regions[0].tied, vec![true]);
        assert_eq!(part.regions[1].tied, vec![false]);
        let cr = detect_crossings(&smp, &s).unwrap();
        assert_eq!(cr.len(), 1);
        assert!(cr[0].x_star.abs() < 1e-9);
        assert!((cr[0].exponent - 0.5).abs() < 0.02);
        let c = 2.0 * 2f64.sqrt();
        assert!((cr[0].genericity_constant - c).abs() <= 0.05 * c, "{}", cr[0].genericity_constant);
    }

    #[test]
    fn no_crossing_on_regular_interval() {
        let s: Spec = preset("bessel").unwrap();
        let smp = sample_branches(&s, 0.5, 1.5, 100, false).unwrap();
        assert!(detect_crossings(&smp, &s).unwrap().is_empty());
    }

    #[test]
    fn linear_separation_is_not_generic() {
        // roots 1 ± x
        let s = Spec::parse("order 2\ninterval -0.5 0.5\nexact 0 : 1 - x^2\nexact 1 : -2\nexact 2 : 1").unwrap();
        let smp = sample_branches(&s, -0.5, 0.5, 200, false).unwrap();
        match detect_crossings(&smp, &s) {
            Err(Error::NonGenericCrossing { exponent }) => assert!((exponent - 1.0).abs() < 0.05),
            other => panic!("{other:?}"),
        }
    }
}
