//! Coefficient and source expressions.
//!
//! The grammar covers what the model problems need: literals, the variable
//! `x`, named scalar parameters, the constant `pi`, `+ - * /`, nonnegative
//! integer powers and `sin`/`cos`/`exp`. Expressions are immutable once built
//! and can be differentiated symbolically with respect to `x`.

mod diff;
mod parse;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

pub use parse::parse;

/// Parameter name to value.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("division by zero at x = {x}")]
    DivisionByZero { x: f64 },
    #[error("parameter `{0}` is not bound")]
    UnboundParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

/// Abstract syntax tree of an expression in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    X,
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parse `source`, accepting `x`, `pi` and the identifiers in `params`.
    pub fn parse<S: AsRef<str>>(source: &str, params: &[S]) -> Result<Expr, ExprError> {
        parse(source, params)
    }

    pub fn eval(&self, x: f64, bindings: &Bindings) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => PI,
            Expr::X => x,
            Expr::Param(name) => *bindings
                .get(name)
                .ok_or_else(|| ExprError::UnboundParameter(name.clone()))?,
            Expr::Neg(a) => -a.eval(x, bindings)?,
            Expr::Add(a, b) => a.eval(x, bindings)? + b.eval(x, bindings)?,
            Expr::Sub(a, b) => a.eval(x, bindings)? - b.eval(x, bindings)?,
            Expr::Mul(a, b) => a.eval(x, bindings)? * b.eval(x, bindings)?,
            Expr::Div(a, b) => {
                let num = a.eval(x, bindings)?;
                let den = b.eval(x, bindings)?;
                if den == 0.0 {
                    return Err(ExprError::DivisionByZero { x });
                }
                num / den
            }
            Expr::Pow(a, n) => powi(a.eval(x, bindings)?, *n),
            Expr::Call(f, a) => f.apply(a.eval(x, bindings)?),
        })
    }

    /// Evaluate an expression that has no free parameters.
    pub fn eval_at(&self, x: f64) -> Result<f64, ExprError> {
        self.eval(x, &EMPTY)
    }

    /// Exact derivative with respect to `x`; parameters are constants.
    pub fn diff(&self) -> Expr {
        diff::diff(self)
    }

    /// Substitute every bound parameter by its value and fold literal subtrees.
    /// Parameters missing from `bindings` are left in place.
    pub fn bind(&self, bindings: &Bindings) -> Expr {
        match self {
            Expr::Param(name) => match bindings.get(name) {
                Some(v) => Expr::Num(*v),
                None => self.clone(),
            },
            Expr::Num(_) | Expr::Pi | Expr::X => self.clone(),
            Expr::Neg(a) => Expr::neg(a.bind(bindings)),
            Expr::Add(a, b) => Expr::add(a.bind(bindings), b.bind(bindings)),
            Expr::Sub(a, b) => Expr::sub(a.bind(bindings), b.bind(bindings)),
            Expr::Mul(a, b) => Expr::mul(a.bind(bindings), b.bind(bindings)),
            Expr::Div(a, b) => Expr::div(a.bind(bindings), b.bind(bindings)),
            Expr::Pow(a, n) => Expr::pow(a.bind(bindings), *n),
            Expr::Call(f, a) => Expr::call(*f, a.bind(bindings)),
        }
    }

    /// Names of the parameters referenced by this expression.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(name) => out.push(name.clone()),
            Expr::Num(_) | Expr::Pi | Expr::X => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_params(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    // Folding constructors. Only literal subtrees are folded, plus the
    // additive/multiplicative identities that fall out of differentiation.

    pub(crate) fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub(crate) fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn pow(a: Expr, n: u32) -> Expr {
        match (n, a.as_num()) {
            (0, _) => Expr::Num(1.0),
            (1, _) => a,
            (_, Some(v)) => Expr::Num(powi(v, n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub(crate) fn call(f: Func, a: Expr) -> Expr {
        match a.as_num() {
            Some(v) if f.apply(v).is_finite() => Expr::Num(f.apply(v)),
            _ => Expr::Call(f, Box::new(a)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_operand(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

static EMPTY: Bindings = BTreeMap::new();

fn powi(v: f64, n: u32) -> f64 {
    match i32::try_from(n) {
        Ok(n) => v.powi(n),
        Err(_) => v.powf(n as f64),
    }
}

impl fmt::Display for Expr {
    /// Prints an expression that parses back to the same tree. Negations
    /// nested inside operators are always parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::X => f.write_str("x"),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_operand(f, a.precedence() < 2 || a.precedence() == 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, prec) = match self {
                    Expr::Add(..) => (" + ", 1),
                    Expr::Sub(..) => (" - ", 1),
                    Expr::Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                let lp = a.precedence();
                let rp = b.precedence();
                a.fmt_operand(f, lp < prec || lp == 3)?;
                f.write_str(op)?;
                b.fmt_operand(f, rp <= prec || rp == 3)
            }
            Expr::Pow(a, n) => {
                a.fmt_operand(f, a.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
