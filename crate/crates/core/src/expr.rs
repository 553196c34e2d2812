//! A small expression language for recurrence coefficients.
//!
//! Grammar (usual precedence, `^` right-associative and binding tighter than
//! unary minus):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'eps' | 'pi' | 'e' | 'i' | func '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::scalar::{re, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Decimal literal kept as text so it converts exactly into any scalar type.
    Num(String),
    X,
    Eps,
    Pi,
    E,
    I,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Values an expression can be evaluated over.
pub trait ExprValue<T: Real>: Clone {
    /// A constant with the same shape as `self`.
    fn lift(&self, c: Complex<T>) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powv(&self, o: &Self) -> Self;
    fn apply(&self, f: Func) -> Self;
}

impl<T: Real> ExprValue<T> for Complex<T> {
    fn lift(&self, c: Complex<T>) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, n: i32) -> Self {
        Complex::powi(self, n)
    }
    fn powv(&self, o: &Self) -> Self {
        self.powc(*o)
    }
    fn apply(&self, f: Func) -> Self {
        match f {
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => self.tan(),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
            Func::Tanh => self.tanh(),
            Func::Sqrt => self.sqrt(),
        }
    }
}

impl<T: Real> ExprValue<T> for Jet<T> {
    fn lift(&self, c: Complex<T>) -> Self {
        let (r, t) = self.orders();
        Jet::constant(r, t, c)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        Jet::div(self, o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn powi(&self, n: i32) -> Self {
        Jet::powi(self, n)
    }
    fn powv(&self, o: &Self) -> Self {
        (o * &self.ln()).exp()
    }
    fn apply(&self, f: Func) -> Self {
        match f {
            Func::Exp => self.exp(),
            Func::Log => self.ln(),
            Func::Sin => self.sin(),
            Func::Cos => self.cos(),
            Func::Tan => Jet::div(&self.sin(), &self.cos()),
            Func::Sinh => self.sinh(),
            Func::Cosh => self.cosh(),
            Func::Tanh => Jet::div(&self.sinh(), &self.cosh()),
            Func::Sqrt => self.sqrt(),
        }
    }
}

/// Exact-as-possible conversion of a decimal literal.
pub fn literal<T: Real>(text: &str) -> T {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i32>().unwrap_or(0)),
        None => (text, 0),
    };
    let ten = T::lit(10.0);
    let mut m = T::zero();
    let mut frac = 0i32;
    let mut after_dot = false;
    for ch in mant.chars() {
        if ch == '.' {
            after_dot = true;
            continue;
        }
        let d = ch.to_digit(10).unwrap_or(0);
        m = m * ten + T::from_u32(d).unwrap();
        if after_dot {
            frac += 1;
        }
    }
    let e10 = exp - frac;
    if e10 >= 0 {
        m * ten.powi(e10)
    } else {
        m / ten.powi(-e10)
    }
}

impl Expr {
    pub fn num(v: &str) -> Self {
        Expr::Num(v.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_at(text, 1, 1)
    }

    /// Parses with diagnostics located at `line`, starting column `col0`.
    pub fn parse_at(text: &str, line: usize, col0: usize) -> Result<Self> {
        let toks = lex(text, line, col0)?;
        let mut p = Parser { toks, pos: 0, line, end_col: col0 + text.chars().count() };
        let e = p.expr()?;
        if let Some(t) = p.toks.get(p.pos) {
            return Err(p.err_at(t.col, "unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn depends_on_eps(&self) -> bool {
        match self {
            Expr::Eps => true,
            Expr::Num(_) | Expr::X | Expr::Pi | Expr::E | Expr::I => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on_eps(),
            Expr::Bin(_, a, b) => a.depends_on_eps() || b.depends_on_eps(),
        }
    }

    /// Replaces every `x` by `by`.
    pub fn subst_x(&self, by: &Expr) -> Expr {
        match self {
            Expr::X => by.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.subst_x(by))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.subst_x(by))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.subst_x(by), b.subst_x(by)),
            other => other.clone(),
        }
    }

    fn as_integer(&self) -> Option<i32> {
        match self {
            Expr::Num(s) if !s.contains(['.', 'e', 'E']) => s.parse().ok(),
            Expr::Neg(a) => a.as_integer().map(|v| -v),
            _ => None,
        }
    }

    /// Evaluates with `x` and `eps` bound to values of any [`ExprValue`] type.
    pub fn eval_with<T: Real, V: ExprValue<T>>(&self, x: &V, eps: &V) -> V {
        match self {
            Expr::Num(s) => x.lift(re(literal::<T>(s))),
            Expr::X => x.clone(),
            Expr::Eps => eps.clone(),
            Expr::Pi => x.lift(re(T::PI())),
            Expr::E => x.lift(re(T::E())),
            Expr::I => x.lift(Complex::new(T::zero(), T::one())),
            Expr::Neg(a) => a.eval_with(x, eps).neg(),
            Expr::Call(f, a) => a.eval_with(x, eps).apply(*f),
            Expr::Bin(op, a, b) => {
                let u = a.eval_with(x, eps);
                if *op == BinOp::Pow {
                    if let Some(n) = b.as_integer() {
                        return u.powi(n);
                    }
                }
                let v = b.eval_with(x, eps);
                match op {
                    BinOp::Add => u.add(&v),
                    BinOp::Sub => u.sub(&v),
                    BinOp::Mul => u.mul(&v),
                    BinOp::Div => u.div(&v),
                    BinOp::Pow => u.powv(&v),
                }
            }
        }
    }

    pub fn eval<T: Real>(&self, x: T, eps: T) -> Complex<T> {
        self.eval_with::<T, Complex<T>>(&re(x), &re(eps))
    }

    /// Taylor coefficients in ε at fixed `x`, up to `order`.
    pub fn eps_series<T: Real>(&self, x: T, order: usize) -> Vec<Complex<T>> {
        let xj = Jet::constant(0, order, re(x));
        let ej = Jet::eps(0, order);
        self.eval_with::<T, Jet<T>>(&xj, &ej).eps_coeffs()
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, need: bool| {
            if need {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(s) => write!(f, "{s}"),
            Expr::X => write!(f, "x"),
            Expr::Eps => write!(f, "eps"),
            Expr::Pi => write!(f, "pi"),
            Expr::E => write!(f, "e"),
            Expr::I => write!(f, "i"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, prec(a) <= 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                // left-assoc ops need parens on the right at equal precedence; ^ the reverse
                let (lneed, rneed) = if *op == BinOp::Pow {
                    (prec(a) <= p, prec(b) < p && !matches!(**b, Expr::Neg(_)))
                } else {
                    (prec(a) < p, prec(b) <= p)
                };
                wrap(f, a, lneed)?;
                write!(f, " {sym} ")?;
                wrap(f, b, rneed)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let col = col0 + i;
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            if s.matches('.').count() > 1 {
                return Err(Error::ParseError { line, col, msg: format!("malformed number `{s}`") });
            }
            out.push(Token { tok: Tok::Num(s), col });
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if "+-*/^()".contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), col });
            i += 1;
        } else {
            return Err(Error::ParseError { line, col, msg: format!("unexpected character `{ch}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Parser {
    fn err_at(&self, col: usize, msg: &str) -> Error {
        Error::ParseError { line: self.line, col, msg: msg.to_string() }
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.col)
    }

    fn peek_sym(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some(Token { tok: Tok::Sym(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_at(self.here(), &format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::bin(if c == '+' { BinOp::Add } else { BinOp::Sub }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_sym() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::bin(if c == '*' { BinOp::Mul } else { BinOp::Div }, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek_sym() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_sym() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let Some(tok) = self.toks.get(self.pos).cloned() else {
            return Err(self.err_at(self.end_col, "unexpected end of expression"));
        };
        self.pos += 1;
        match tok.tok {
            Tok::Num(s) => Ok(Expr::Num(s)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym(c) => Err(self.err_at(tok.col, &format!("unexpected `{c}`"))),
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::X),
                "eps" => Ok(Expr::Eps),
                "pi" => Ok(Expr::Pi),
                "e" => Ok(Expr::E),
                "i" => Ok(Expr::I),
                other => match Func::from_name(other) {
                    Some(f) => {
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None => Err(self.err_at(tok.col, &format!("unknown identifier `{other}`"))),
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ev(s: &str, x: f64) -> Complex<f64> {
        Expr::parse(s).unwrap().eval(x, 0.0)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2*3", 0.0).re, 7.0);
        assert_eq!(ev("-2^2", 0.0).re, -4.0);
        assert_relative_eq!(ev("2^3^2", 0.0).re, 512.0, epsilon = 1e-12);
        assert_eq!(ev("(1+x)*2", 1.5).re, 5.0);
        assert_eq!(ev("8/4/2", 0.0).re, 1.0);
        assert_eq!(ev("2^-1", 0.0).re, 0.5);
    }

    #[test]
    fn functions_and_constants() {
        assert_relative_eq!(ev("-exp(exp(x))", 0.0).re, -std::f64::consts::E, epsilon = 1e-15);
        assert_relative_eq!(ev("cosh(x)^2 - sinh(x)^2", 0.7).re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(ev("sqrt(2)*sqrt(2)", 0.0).re, 2.0, epsilon = 1e-15);
        let z = ev("exp(i*pi)", 0.0);
        assert_relative_eq!(z.re, -1.0, epsilon = 1e-15);
        assert_relative_eq!(ev("log(e)", 0.0).re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(ev("1.5e-3", 0.0).re, 1.5e-3, epsilon = 1e-18);
    }

    #[test]
    fn eps_series_of_coefficient() {
        let e = Expr::parse("-2*(1 + x + eps)").unwrap();
        let s = e.eps_series(1.0f64, 3);
        assert_eq!(s[0].re, -4.0);
        assert_eq!(s[1].re, -2.0);
        assert_eq!(s[2].re, 0.0);
        let e = Expr::parse("exp(x*eps)").unwrap();
        let s = e.eps_series(2.0f64, 4);
        assert_relative_eq!(s[3].re, 8.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn errors_carry_position() {
        match Expr::parse_at("1 + * x", 4, 10) {
            Err(Error::ParseError { line, col, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(col, 14);
            }
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x y").is_err());
        assert!(Expr::parse("").is_err());
    }

    #[test]
    fn literals_are_exact_in_quad() {
        let v: f128::f128 = literal("0.1");
        let tenth = f128::f128::lit(1.0) / f128::f128::lit(10.0);
        assert_eq!(v, tenth);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (1u32..20).prop_map(|n| Expr::Num(n.to_string())),
            Just(Expr::X),
            Just(Expr::Eps),
            Just(Expr::Pi),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Add, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Sub, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Mul, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Div, a, b)),
                (inner.clone(), 0u32..4).prop_map(|(a, n)| Expr::bin(BinOp::Pow, a, Expr::Num(n.to_string()))),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_tree(e in arb_expr()) {
            let text = e.to_string();
            let back = Expr::parse(&text).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
