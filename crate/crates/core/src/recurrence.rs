//! Recurrence problems `Σⱼ a_j(kε, ε) y_{k+j} = 0` and their text format.
//!
//! ```text
//! # comment
//! name bessel
//! order 2
//! interval 0.5 1.5
//! exact 0 : 1
//! exact 1 : -2*(1 + x + eps)
//! exact 2 : 1
//! ```
//!
//! `coeff j epspow s : <expr in x>` gives the ε-series term `a_{j,s}` directly; a
//! coefficient given only by `exact` is expanded in ε by Taylor-mode evaluation.
//! An optional `series T` line sets the stored truncation order (default 8).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::expr::{literal, Expr};
use crate::field::ScalarField;
use crate::jet::Jet;
use crate::scalar::{re, Real};

pub const DEFAULT_SERIES_ORDER: usize = 8;
const SCAN_POINTS: usize = 256;

/// ε-series of one coefficient, `a_j(x, ε) ~ Σ terms[s](x) εˢ`.
#[derive(Clone, Debug)]
pub struct EpsSeriesField<T: Real> {
    pub terms: Vec<ScalarField<T>>,
    pub order: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct CoeffSource {
    terms: Vec<(usize, Expr)>,
    exact: Option<Expr>,
}

impl CoeffSource {
    fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.exact.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct RecurrenceSpec<T: Real> {
    pub name: String,
    /// Number of steps `l`.
    pub order: usize,
    pub interval: (T, T),
    pub series_order: usize,
    pub coeffs: Vec<EpsSeriesField<T>>,
    interval_text: (String, String),
    sources: Vec<CoeffSource>,
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::ParseError { line, col, msg: msg.into() }
}

/// Splits a line into whitespace-separated words with their 1-based columns.
fn words(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((b, &s[b..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out.into_iter().map(|(b, w)| (s[..b].chars().count() + 1, w)).collect()
}

fn parse_uint(w: Option<&(usize, &str)>, line: usize, eol: usize, what: &str) -> Result<usize> {
    match w {
        Some((col, text)) => text.parse().map_err(|_| perr(line, *col, format!("expected {what}"))),
        None => Err(perr(line, eol, format!("missing {what}"))),
    }
}

fn parse_real(w: Option<&(usize, &str)>, line: usize, eol: usize) -> Result<String> {
    match w {
        Some((col, text)) => {
            let t = text.trim_start_matches(['-', '+']);
            if !t.is_empty() && t.parse::<f64>().is_ok() && !t.contains(['i', 'n', 'N', 'I']) {
                Ok(text.to_string())
            } else {
                Err(perr(line, *col, format!("expected a number, found `{text}`")))
            }
        }
        None => Err(perr(line, eol, "missing interval endpoint")),
    }
}

fn signed_literal<T: Real>(s: &str) -> T {
    match s.strip_prefix('-') {
        Some(rest) => -literal::<T>(rest),
        None => literal::<T>(s.trim_start_matches('+')),
    }
}

impl<T: Real> RecurrenceSpec<T> {
    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut order = None;
        let mut interval = None;
        let mut series = DEFAULT_SERIES_ORDER;
        let mut pending: Vec<(usize, usize, usize, Option<usize>, Expr)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let eol = content.chars().count() + 1;
            let (head, body) = match content.find(':') {
                Some(p) => (&content[..p], Some((p, &content[p + 1..]))),
                None => (content, None),
            };
            let ws = words(head);
            let (kcol, key) = ws[0];
            match key {
                "name" => {
                    let rest = head[head.find("name").unwrap() + 4..].trim();
                    if rest.is_empty() {
                        return Err(perr(line, eol, "missing name"));
                    }
                    name = Some(rest.to_string());
                }
                "order" => {
                    let l = parse_uint(ws.get(1), line, eol, "step count")?;
                    if l == 0 {
                        return Err(perr(line, ws[1].0, "order must be at least 1"));
                    }
                    order = Some(l);
                }
                "series" => series = parse_uint(ws.get(1), line, eol, "series order")?,
                "interval" => {
                    let a = parse_real(ws.get(1), line, eol)?;
                    let b = parse_real(ws.get(2), line, eol)?;
                    if let Some((col, _)) = ws.get(3) {
                        return Err(perr(line, *col, "unexpected trailing input"));
                    }
                    interval = Some((a, b, line));
                }
                "coeff" | "exact" => {
                    let j = parse_uint(ws.get(1), line, eol, "coefficient index")?;
                    let s = if key == "coeff" {
                        match ws.get(2) {
                            Some((_, "epspow")) => {}
                            Some((col, w)) => return Err(perr(line, *col, format!("expected `epspow`, found `{w}`"))),
                            None => return Err(perr(line, eol, "expected `epspow`")),
                        }
                        let s = parse_uint(ws.get(3), line, eol, "ε power")?;
                        if let Some((col, _)) = ws.get(4) {
                            return Err(perr(line, *col, "expected `:`"));
                        }
                        Some(s)
                    } else {
                        if let Some((col, _)) = ws.get(2) {
                            return Err(perr(line, *col, "expected `:`"));
                        }
                        None
                    };
                    let Some((p, body)) = body else {
                        return Err(perr(line, eol, "expected `:` followed by an expression"));
                    };
                    let col0 = content[..p + 1].chars().count() + 1;
                    let e = Expr::parse_at(body, line, col0)?;
                    if s.is_some() && e.depends_on_eps() {
                        return Err(perr(line, col0, "series terms may depend on x only"));
                    }
                    pending.push((line, kcol, j, s, e));
                }
                other => return Err(perr(line, kcol, format!("unknown keyword `{other}`"))),
            }
        }
        let l = order.ok_or_else(|| perr(1, 1, "missing `order` line"))?;
        let (a, b, iline) = interval.ok_or_else(|| perr(1, 1, "missing `interval` line"))?;
        let mut sources = vec![CoeffSource::default(); l + 1];
        for (line, col, j, s, e) in pending {
            if j > l {
                return Err(perr(line, col, format!("coefficient index {j} exceeds order {l}")));
            }
            let src = &mut sources[j];
            match s {
                Some(s) => {
                    if src.terms.iter().any(|(t, _)| *t == s) {
                        return Err(perr(line, col, format!("duplicate term a_{j},{s}")));
                    }
                    src.terms.push((s, e));
                }
                None => {
                    if src.exact.is_some() {
                        return Err(perr(line, col, format!("duplicate exact form for a_{j}")));
                    }
                    src.exact = Some(e);
                }
            }
        }
        for src in sources.iter_mut() {
            src.terms.sort_by_key(|(s, _)| *s);
        }
        let lo = signed_literal::<T>(&a);
        let hi = signed_literal::<T>(&b);
        if !(hi > lo) {
            return Err(perr(iline, 1, "interval must satisfy lo < hi"));
        }
        Self::build(name.unwrap_or_else(|| "recurrence".into()), l, (a, b), (lo, hi), series, sources)
    }

    fn build(
        name: String,
        order: usize,
        interval_text: (String, String),
        interval: (T, T),
        series_order: usize,
        sources: Vec<CoeffSource>,
    ) -> Result<Self> {
        let mut spec = Self { name, order, interval, series_order, coeffs: Vec::new(), interval_text, sources };
        spec.check_nonsingular()?;
        spec.coeffs = (0..=order).map(|j| spec.series_fields(j, interval.0, interval.1)).collect();
        Ok(spec)
    }

    fn series_fields(&self, j: usize, lo: T, hi: T) -> EpsSeriesField<T> {
        let order = self.series_order;
        let src = &self.sources[j];
        let terms = (0..=order)
            .map(|s| {
                let zero = src.exact.is_none() && !src.terms.iter().any(|(t, _)| *t == s)
                    || src.exact.as_ref().is_some_and(|e| s > 0 && !e.depends_on_eps() && src.terms.is_empty());
                if zero {
                    ScalarField::constant(lo, hi, re(T::zero()))
                } else {
                    ScalarField::from_fn(lo, hi, |x| self.series_at(j, x, s)[s])
                }
            })
            .collect();
        EpsSeriesField { terms, order }
    }

    fn check_nonsingular(&self) -> Result<()> {
        let (lo, hi) = self.interval;
        let mut scale = T::zero();
        let mut worst = [(T::infinity(), lo); 2];
        for i in 0..SCAN_POINTS {
            let x = lo + (hi - lo) * T::from_usize_(i) / T::from_usize_(SCAN_POINTS - 1);
            for j in 0..=self.order {
                let v = self.a0(j, x).norm();
                if !v.is_finite() {
                    return Err(Error::NonsingularityViolation { coeff: j, x: x.as_f64(), value: v.as_f64() });
                }
                scale = scale.max(v);
            }
            for (slot, j) in [0, self.order].into_iter().enumerate() {
                let v = self.a0(j, x).norm();
                if v < worst[slot].0 {
                    worst[slot] = (v, x);
                }
            }
        }
        for (slot, j) in [0, self.order].into_iter().enumerate() {
            let (v, x) = worst[slot];
            if !(v > scale * T::lit(1e-10)) {
                return Err(Error::NonsingularityViolation { coeff: j, x: x.as_f64(), value: v.as_f64() });
            }
        }
        Ok(())
    }

    /// Same recurrence restricted (or extended) to another interval.
    pub fn with_interval(&self, lo: T, hi: T) -> Result<Self> {
        let text = (format!("{:?}", lo.as_f64()), format!("{:?}", hi.as_f64()));
        Self::build(self.name.clone(), self.order, text, (lo, hi), self.series_order, self.sources.clone())
    }

    /// Same recurrence with a different stored series order.
    pub fn with_series_order(&self, order: usize) -> Result<Self> {
        Self::build(self.name.clone(), self.order, self.interval_text.clone(), self.interval, order, self.sources.clone())
    }

    pub fn has_exact(&self, j: usize) -> bool {
        self.sources[j].exact.is_some()
    }

    /// Exact coefficients are available for every `j` (all presets).
    pub fn exact_eval_populated(&self) -> bool {
        self.sources.iter().all(|s| s.exact.is_some() || s.is_zero())
    }

    /// `a_j(x, ε)` at finite ε: the closed form when given, else the truncated series.
    pub fn a(&self, j: usize, x: T, eps: T) -> Complex<T> {
        self.a_c(j, re(x), re(eps))
    }

    /// Complex-argument version of [`Self::a`].
    pub fn a_c(&self, j: usize, x: Complex<T>, eps: Complex<T>) -> Complex<T> {
        let src = &self.sources[j];
        if let Some(e) = &src.exact {
            return e.eval_with::<T, Complex<T>>(&x, &eps);
        }
        let mut acc = re(T::zero());
        for (s, e) in &src.terms {
            acc = acc + e.eval_with::<T, Complex<T>>(&x, &eps) * eps.powi(*s as i32);
        }
        acc
    }

    /// All coefficients `a_0..a_l` at `(x, ε)`.
    pub fn coeffs_at(&self, x: T, eps: T) -> Vec<Complex<T>> {
        (0..=self.order).map(|j| self.a(j, x, eps)).collect()
    }

    /// Leading-order coefficient `a_{j,0}(x)`.
    pub fn a0(&self, j: usize, x: T) -> Complex<T> {
        let src = &self.sources[j];
        if let Some(e) = &src.exact {
            return e.eval(x, T::zero());
        }
        match src.terms.first() {
            Some((0, e)) => e.eval(x, T::zero()),
            _ => re(T::zero()),
        }
    }

    /// `a_{j,s}(x)` for `s = 0..=order`.
    pub fn series_at(&self, j: usize, x: T, order: usize) -> Vec<Complex<T>> {
        self.coeff_jet(j, x, 0, order).eps_coeffs()
    }

    /// Jet of `a_j(x0 + h, ε)` to orders `(r, t)`.
    pub fn coeff_jet(&self, j: usize, x0: T, r: usize, t: usize) -> Jet<T> {
        let xj = &Jet::constant(r, t, re(x0)) + &Jet::h(r, t);
        let ej = Jet::eps(r, t);
        let src = &self.sources[j];
        if let Some(e) = &src.exact {
            return e.eval_with::<T, Jet<T>>(&xj, &ej);
        }
        let mut acc = Jet::zeros(r, t);
        for (s, e) in &src.terms {
            if *s > t {
                continue;
            }
            let term = &e.eval_with::<T, Jet<T>>(&xj, &ej) * &ej.powi(*s as i32);
            acc = &acc + &term;
        }
        acc
    }

    /// Canonical text form; reparses to an equivalent spec.
    pub fn serialize(&self) -> String {
        let mut out = format!(
            "name {}\norder {}\ninterval {} {}\nseries {}\n",
            self.name, self.order, self.interval_text.0, self.interval_text.1, self.series_order
        );
        for (j, src) in self.sources.iter().enumerate() {
            for (s, e) in &src.terms {
                out.push_str(&format!("coeff {j} epspow {s} : {e}\n"));
            }
            if let Some(e) = &src.exact {
                out.push_str(&format!("exact {j} : {e}\n"));
            }
        }
        out
    }
}

/// Built-in problems.
pub fn preset<T: Real>(name: &str) -> Result<RecurrenceSpec<T>> {
    match name {
        "euler" => RecurrenceSpec::parse(EULER),
        "bessel" => bessel(0.5, 1.5),
        "euler_scheme" => euler_scheme("1"),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

pub const PRESETS: [&str; 3] = ["euler", "bessel", "euler_scheme"];

const EULER: &str = "\
name euler
order 1
interval 0 1
exact 0 : -exp(exp(x))
exact 1 : 1
";

/// `y_{k+2} − 2(1 + kε + ε) y_{k+1} + y_k = 0` on `[lo, hi]`; solutions `J_{k+1/ε}(1/ε)`
/// and `Y_{k+1/ε}(1/ε)` up to the index shift.
pub fn bessel<T: Real>(lo: f64, hi: f64) -> Result<RecurrenceSpec<T>> {
    RecurrenceSpec::parse(&format!(
        "name bessel\norder 2\ninterval {lo:?} {hi:?}\nexact 0 : 1\nexact 1 : -2*(1 + x + eps)\nexact 2 : 1\n"
    ))
}

/// Centred scheme `y_{k+2} − (2 + ε² q((k+1)ε)) y_{k+1} + y_k = 0` for `y'' = q y` on [0, 1].
pub fn euler_scheme<T: Real>(q: &str) -> Result<RecurrenceSpec<T>> {
    let qe = Expr::parse(q)?;
    let shifted = qe.subst_x(&Expr::parse("x + eps")?);
    RecurrenceSpec::parse(&format!(
        "name euler_scheme\norder 2\ninterval 0 1\nexact 0 : 1\nexact 1 : -(2 + eps^2*({shifted}))\nexact 2 : 1\n"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type Spec = RecurrenceSpec<f64>;

    #[test]
    fn constant_two_step() {
        let s = Spec::parse("order 1\ninterval 0 1\ncoeff 0 epspow 0 : -2\ncoeff 1 epspow 0 : 1\n").unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.a(0, 0.3, 0.01).re, -2.0);
        assert_eq!(s.a(1, 0.3, 0.01).re, 1.0);
        assert!(!s.exact_eval_populated());
    }

    #[test]
    fn bessel_coefficients() {
        let s: Spec = preset("bessel").unwrap();
        let a: Vec<f64> = s.coeffs_at(1.0, 0.0).iter().map(|z| z.re).collect();
        assert_eq!(a, vec![1.0, -4.0, 1.0]);
        let ser = s.series_at(1, 0.7, 3);
        assert_relative_eq!(ser[0].re, -3.4, epsilon = 1e-15);
        assert_relative_eq!(ser[1].re, -2.0, epsilon = 1e-15);
        assert_eq!(ser[2].re, 0.0);
        assert_relative_eq!(s.coeffs[1].terms[0].eval(1.2).re, -4.4, epsilon = 1e-13);
        assert_relative_eq!(s.coeffs[1].terms[1].eval(1.2).re, -2.0, epsilon = 1e-13);
    }

    #[test]
    fn euler_coefficients() {
        let s: Spec = preset("euler").unwrap();
        assert_relative_eq!(s.a0(0, 0.0).re, -std::f64::consts::E, epsilon = 1e-15);
        assert_relative_eq!(s.a0(0, 0.5).re, -(0.5f64.exp().exp()), epsilon = 1e-14);
    }

    #[test]
    fn euler_scheme_coefficients() {
        let s: Spec = preset("euler_scheme").unwrap();
        let a: Vec<f64> = s.coeffs_at(0.4, 0.0).iter().map(|z| z.re).collect();
        assert_eq!(a, vec![1.0, -2.0, 1.0]);
        assert_relative_eq!(s.a(1, 0.4, 0.1).re, -2.01, epsilon = 1e-15);
        let s: Spec = euler_scheme("1 + x").unwrap();
        // q evaluated at the centre (k+1)ε
        assert_relative_eq!(s.a(1, 0.4, 0.1).re, -(2.0 + 0.01 * 1.5), epsilon = 1e-15);
    }

    #[test]
    fn presets_are_nonsingular_and_exact() {
        for name in PRESETS {
            let s: Spec = preset(name).unwrap();
            assert!(s.exact_eval_populated(), "{name}");
        }
        assert!(matches!(preset::<f64>("toda"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn vanishing_leading_coefficient() {
        let r = Spec::parse("order 1\ninterval 0 1\ncoeff 0 epspow 0 : 1\ncoeff 1 epspow 0 : x\n");
        match r {
            Err(Error::NonsingularityViolation { coeff, x, .. }) => {
                assert_eq!(coeff, 1);
                assert_eq!(x, 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_point_at_the_problem() {
        let cases = [
            ("order 1\ninterval 0 1\ncoeff 0 epspow 0 : 1 +\ncoeff 1 epspow 0 : 1", 3, 23),
            ("order 1\ninterval 0 1\ncoef 0 epspow 0 : 1", 3, 1),
            ("order 1\ninterval 1 0\ncoeff 0 epspow 0 : 1", 2, 1),
            ("order 1\ninterval 0 1\ncoeff 3 epspow 0 : 1", 3, 1),
            ("order 1\ninterval 0 1\ncoeff 0 epspow 0 : eps", 3, 19),
            ("interval 0 1\n", 1, 1),
        ];
        for (text, line, col) in cases {
            match Spec::parse(text) {
                Err(Error::ParseError { line: l, col: c, .. }) => assert_eq!((l, c), (line, col), "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn serialize_roundtrip() {
        let text = "# a comment\nname mixed\norder 2\ninterval -0.25 1.75\n\
                    coeff 0 epspow 0 : 1 + x^2\ncoeff 0 epspow 2 : sin(x)/3\n\
                    exact 1 : -2*cosh(x*eps) - 1\ncoeff 2 epspow 0 : 2\n";
        let a = Spec::parse(text).unwrap();
        let b = Spec::parse(&a.serialize()).unwrap();
        assert_eq!(a.serialize(), b.serialize());
        for x in [-0.25, 0.1, 0.9, 1.75] {
            for eps in [0.0, 0.01, 0.1] {
                for j in 0..=2 {
                    assert!((a.a(j, x, eps) - b.a(j, x, eps)).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_jet_mixes_h_and_eps() {
        let s: Spec = preset("bessel").unwrap();
        let j = s.coeff_jet(1, 0.0, 2, 2);
        assert_eq!(j.get(0, 0).re, -2.0);
        assert_eq!(j.get(1, 0).re, -2.0);
        assert_eq!(j.get(0, 1).re, -2.0);
        assert_eq!(j.get(1, 1).re, 0.0);
    }
}
