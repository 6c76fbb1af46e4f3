//! Scalar expression trees over named real variables.
//!
//! Expressions are parsed against an ordered variable list, so every
//! [`Var`] carries both its name and its position in that list. Evaluation
//! takes a slice indexed by those positions, which keeps the hot loops of the
//! geometry code free of name lookups.
//!
//! The smart constructors ([`Expr::sum`], [`Expr::product`], ...) fold
//! constants and drop `x + 0`, `x * 0` and `x * 1`; nothing more. The parser
//! builds raw nodes so that a parsed tree mirrors its source.

mod diff;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub use parse::parse;

/// Errors raised while turning source text into an [`Expr`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    /// `offset` is the 0-based byte offset of the offending token.
    #[error("syntax error at column {}: expected {expected}", .offset + 1)]
    Syntax { offset: usize, expected: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

impl ExprError {
    /// 1-based column of a syntax error.
    pub fn column(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. } => Some(offset + 1),
            ExprError::UnknownVariable(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("non-integer power of non-positive base {0}")]
    PowDomain(f64),
    #[error("non-finite result")]
    NonFinite,
}

/// A variable reference: position in the owning variable list plus its name.
#[derive(Debug, Clone)]
pub struct Var {
    pub index: usize,
    pub name: Arc<str>,
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index && self.name == other.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Tan => Ok(v.tan()),
            Func::Exp => Ok(v.exp()),
            Func::Log if v <= 0.0 => Err(EvalError::LogDomain(v)),
            Func::Log => Ok(v.ln()),
            Func::Sqrt if v < 0.0 => Err(EvalError::SqrtDomain(v)),
            Func::Sqrt => Ok(v.sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
}

/// Integer exponents up to this magnitude are evaluated by repeated multiplication.
const MAX_EXPANDED_POWER: f64 = 8.0;

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= MAX_EXPANDED_POWER {
        let mut acc = 1.0;
        for _ in 0..exponent.abs() as u32 {
            acc *= base;
        }
        if exponent < 0.0 {
            if acc == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            return Ok(1.0 / acc);
        }
        Ok(acc)
    } else if base > 0.0 {
        Ok(base.powf(exponent))
    } else if exponent.fract() == 0.0 && exponent.abs() < i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Err(EvalError::PowDomain(base))
    }
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        Expr::Const(value)
    }

    pub fn var(index: usize, name: &str) -> Expr {
        Expr::Var(Var {
            index,
            name: Arc::from(name),
        })
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 1.0)
    }

    /// Folds `f` over constant operands when the result is well defined.
    fn fold(result: Result<f64, EvalError>) -> Option<Expr> {
        match result {
            Ok(v) if v.is_finite() => Some(Expr::Const(v)),
            _ => None,
        }
    }

    pub fn negate(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn sum(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = Self::fold(Ok(x + y)) {
                return e;
            }
        }
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn difference(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = Self::fold(Ok(x - y)) {
                return e;
            }
        }
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Self::negate(b);
        }
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn product(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(e) = Self::fold(Ok(x * y)) {
                return e;
            }
        }
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn quotient(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y != 0.0 {
                if let Some(e) = Self::fold(Ok(x / y)) {
                    return e;
                }
            }
        }
        if b.is_one() {
            return a;
        }
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn power(base: Expr, exponent: Expr) -> Expr {
        if let (Some(x), Some(y)) = (base.as_const(), exponent.as_const()) {
            if let Some(e) = Self::fold(power(x, y)) {
                return e;
            }
        }
        match exponent.as_const() {
            Some(c) if c == 0.0 => Expr::one(),
            Some(c) if c == 1.0 => base,
            _ => Expr::Pow(Box::new(base), Box::new(exponent)),
        }
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Some(x) = arg.as_const() {
            if let Some(e) = Self::fold(func.apply(x)) {
                return e;
            }
        }
        Expr::Func(func, Box::new(arg))
    }

    /// Evaluates the tree with `vars[k]` bound to the variable at position `k`.
    pub fn eval(&self, vars: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => vars[v.index],
            Expr::Neg(a) => -a.eval(vars)?,
            Expr::Add(a, b) => a.eval(vars)? + b.eval(vars)?,
            Expr::Sub(a, b) => a.eval(vars)? - b.eval(vars)?,
            Expr::Mul(a, b) => a.eval(vars)? * b.eval(vars)?,
            Expr::Div(a, b) => {
                let num = a.eval(vars)?;
                let den = b.eval(vars)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Expr::Pow(a, b) => power(a.eval(vars)?, b.eval(vars)?)?,
            Expr::Func(f, a) => f.apply(a.eval(vars)?)?,
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluates against a name-keyed assignment.
    pub fn evaluate(&self, assignment: &HashMap<String, f64>) -> Result<f64, EvaluateError> {
        let mut names = Vec::new();
        self.collect_vars(&mut names);
        let width = names.iter().map(|v| v.index + 1).max().unwrap_or(0);
        let mut slots = vec![0.0; width];
        for v in names {
            slots[v.index] = *assignment
                .get(v.name.as_ref())
                .ok_or_else(|| EvaluateError::Unbound(v.name.to_string()))?;
        }
        Ok(self.eval(&slots)?)
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Func(_, a) => a.collect_vars(out),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Variables referenced by the tree, in first-occurrence order.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn depends_on(&self, index: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v.index == index,
            Expr::Neg(a) | Expr::Func(_, a) => a.depends_on(index),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(index) || b.depends_on(index),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    /// Re-targets every variable onto a new ordered name list.
    pub fn rebind(&self, names: &[&str]) -> Result<Expr, ExprError> {
        Ok(match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => {
                let index = names
                    .iter()
                    .position(|n| *n == v.name.as_ref())
                    .ok_or_else(|| ExprError::UnknownVariable(v.name.to_string()))?;
                Expr::Var(Var {
                    index,
                    name: v.name.clone(),
                })
            }
            Expr::Neg(a) => Expr::Neg(Box::new(a.rebind(names)?)),
            Expr::Func(f, a) => Expr::Func(*f, Box::new(a.rebind(names)?)),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rebind(names)?), Box::new(b.rebind(names)?)),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.rebind(names)?), Box::new(b.rebind(names)?)),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.rebind(names)?), Box::new(b.rebind(names)?)),
            Expr::Div(a, b) => Expr::Div(Box::new(a.rebind(names)?), Box::new(b.rebind(names)?)),
            Expr::Pow(a, b) => Expr::Pow(Box::new(a.rebind(names)?), Box::new(b.rebind(names)?)),
        })
    }

    /// Node count, used to keep an eye on derivative growth.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) => 1 + a.size(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Const(c) if c.is_sign_negative() => 5,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Func(..) => 5,
        }
    }

    fn write_operand(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluateError {
    #[error("variable `{0}` has no value in the assignment")]
    Unbound(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => f.write_str(&v.name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_operand(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_operand(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.write_operand(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_operand(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_operand(f, 3)
            }
            Expr::Pow(a, b) => {
                a.write_operand(f, 5)?;
                f.write_str("^")?;
                b.write_operand(f, 3)
            }
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str, vars: &[&str]) -> Expr {
        parse(src, vars).unwrap()
    }

    #[test]
    fn evaluates_simple_assignment() {
        let e = p("x1^2+sin(t1)", &["t1", "x1"]);
        let mut a = HashMap::new();
        a.insert("x1".to_string(), 2.0);
        a.insert("t1".to_string(), 0.0);
        assert_eq!(e.evaluate(&a).unwrap(), 4.0);
        assert_eq!(p("cos(x1)", &["x1"]).eval(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = p("x1/x2", &["x1", "x2"]);
        assert_eq!(e.eval(&[1.0, 0.0]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            p("log(x)", &["x"]).eval(&[0.0]),
            Err(EvalError::LogDomain(_))
        ));
        assert!(matches!(
            p("sqrt(x)", &["x"]).eval(&[-1.0]),
            Err(EvalError::SqrtDomain(_))
        ));
        assert!(matches!(
            p("x^0.5", &["x"]).eval(&[-4.0]),
            Err(EvalError::PowDomain(_))
        ));
        assert_eq!(p("exp(x)", &["x"]).eval(&[1000.0]), Err(EvalError::NonFinite));
        assert_eq!(p("x^-2", &["x"]).eval(&[0.0]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn integer_powers_of_negative_bases() {
        assert_eq!(p("x^3", &["x"]).eval(&[-2.0]).unwrap(), -8.0);
        assert_eq!(p("x^-2", &["x"]).eval(&[-2.0]).unwrap(), 0.25);
        assert_eq!(p("x^10", &["x"]).eval(&[-1.0]).unwrap(), 1.0);
    }

    #[test]
    fn unbound_variable_in_assignment() {
        let e = p("x1 + x2", &["x1", "x2"]);
        let mut a = HashMap::new();
        a.insert("x1".to_string(), 1.0);
        assert_eq!(e.evaluate(&a), Err(EvaluateError::Unbound("x2".into())));
    }

    #[test]
    fn smart_constructors_fold() {
        let x = Expr::var(0, "x");
        assert_eq!(Expr::sum(x.clone(), Expr::zero()), x);
        assert_eq!(Expr::product(x.clone(), Expr::zero()), Expr::zero());
        assert_eq!(Expr::product(Expr::one(), x.clone()), x);
        assert_eq!(Expr::sum(Expr::constant(2.0), Expr::constant(3.0)), Expr::constant(5.0));
        // 1/0 stays symbolic so evaluation reports it.
        let q = Expr::quotient(Expr::one(), Expr::zero());
        assert_eq!(q.eval(&[]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn display_keeps_structure() {
        let e = p("a - (b - c)", &["a", "b", "c"]);
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = p("-x2*x1", &["x1", "x2"]);
        assert_eq!(e.to_string(), "-x2*x1");
        let e = p("(a^b)^c", &["a", "b", "c"]);
        assert_eq!(e.to_string(), "(a^b)^c");
        assert_eq!(Expr::constant(-2.5).to_string(), "(-2.5)");
    }

    #[test]
    fn rebind_moves_indices() {
        let e = p("x1*t1", &["t1", "x1"]);
        let r = e.rebind(&["x1", "y", "t1"]).unwrap();
        assert_eq!(r.eval(&[2.0, 100.0, 3.0]).unwrap(), 6.0);
        assert_eq!(
            e.rebind(&["x1"]),
            Err(ExprError::UnknownVariable("t1".into()))
        );
    }
}
