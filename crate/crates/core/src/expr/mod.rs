//! Scalar expressions for Lagrangians, generators and constraint integrands.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | ident | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ident   = letter { letter | digit | "_" } ;
//! ```
//!
//! `^` binds tighter than unary minus, so `-y^2` is `-(y^2)`.

mod parser;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use parser::{parse_expression, ParseError};

/// Default relative step of the central-difference partial.
pub const DEFAULT_PARTIAL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> Result<f64, EvalError> {
        let r = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log if x <= 0.0 => return Err(EvalError::Domain(format!("log({x})"))),
            Func::Log => x.ln(),
            Func::Sqrt if x < 0.0 => return Err(EvalError::Domain(format!("sqrt({x})"))),
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        };
        finite(r, || format!("{}({x})", self.name()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => " + ",
            BinOp::Sub => " - ",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }

    fn apply(self, x: f64, y: f64) -> Result<f64, EvalError> {
        let r = match self {
            BinOp::Add => x + y,
            BinOp::Sub => x - y,
            BinOp::Mul => x * y,
            BinOp::Div if y == 0.0 => {
                return Err(EvalError::Domain(format!("division by zero ({x}/0)")))
            }
            BinOp::Div => x / y,
            BinOp::Pow => power(x, y)?,
        };
        finite(r, || format!("{x}{}{y}", self.symbol().trim()))
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::Domain(format!(
            "negative base {base} with non-integer exponent {exponent}"
        )));
    }
    Ok(base.powf(exponent))
}

fn finite(value: f64, what: impl FnOnce() -> String) -> Result<f64, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::Domain(format!(
            "non-finite result of {}",
            what()
        )))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Expression tree over named variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Does `name` occur anywhere in the tree?
    pub fn references(&self, name: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => v == name,
            Expr::Neg(a) | Expr::Call(_, a) => a.references(name),
            Expr::Binary(_, a, b) => a.references(name) || b.references(name),
        }
    }

    /// All variable names, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Num(_) => {}
                Expr::Var(v) => out.push(v.clone()),
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
                Expr::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Replaces every occurrence of variable `name` with `replacement`.
    pub fn substitute(&self, name: &str, replacement: &Expr) -> Expr {
        match self {
            Expr::Var(v) if v == name => replacement.clone(),
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(name, replacement))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.substitute(name, replacement))),
            Expr::Binary(op, a, b) => Expr::bin(
                *op,
                a.substitute(name, replacement),
                b.substitute(name, replacement),
            ),
        }
    }

    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(name) => bindings
                .get(name)
                .copied()
                .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
            Expr::Neg(a) => Ok(-a.eval(bindings)?),
            Expr::Call(f, a) => f.apply(a.eval(bindings)?),
            Expr::Binary(op, a, b) => op.apply(a.eval(bindings)?, b.eval(bindings)?),
        }
    }

    /// Exact derivative with respect to `var` when the tree is polynomial in
    /// it: `var` occurs only under `+ - *`, negation, division by a
    /// `var`-free denominator and `^` with a non-negative integer constant
    /// exponent. `None` otherwise.
    pub fn polynomial_derivative(&self, var: &str) -> Option<Expr> {
        if !self.references(var) {
            return Some(Expr::Num(0.0));
        }
        let d = match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(_) => Expr::Num(1.0),
            Expr::Neg(a) => Expr::Neg(Box::new(a.polynomial_derivative(var)?)),
            Expr::Call(..) => return None,
            Expr::Binary(op, a, b) => match op {
                BinOp::Add | BinOp::Sub => Expr::bin(
                    *op,
                    a.polynomial_derivative(var)?,
                    b.polynomial_derivative(var)?,
                ),
                BinOp::Mul => Expr::bin(
                    BinOp::Add,
                    Expr::bin(BinOp::Mul, a.polynomial_derivative(var)?, (**b).clone()),
                    Expr::bin(BinOp::Mul, (**a).clone(), b.polynomial_derivative(var)?),
                ),
                BinOp::Div if !b.references(var) => {
                    Expr::bin(BinOp::Div, a.polynomial_derivative(var)?, (**b).clone())
                }
                BinOp::Div => return None,
                BinOp::Pow => match **b {
                    Expr::Num(n) if n >= 0.0 && n.fract() == 0.0 => {
                        if n == 0.0 {
                            Expr::Num(0.0)
                        } else {
                            Expr::bin(
                                BinOp::Mul,
                                Expr::bin(
                                    BinOp::Mul,
                                    Expr::Num(n),
                                    Expr::bin(BinOp::Pow, (**a).clone(), Expr::Num(n - 1.0)),
                                ),
                                a.polynomial_derivative(var)?,
                            )
                        }
                    }
                    _ => return None,
                },
            },
        };
        Some(d.simplified())
    }

    /// Light algebraic cleanup: folds `0*x`, `x*1`, `x+0`, `x^1`, `x^0` and
    /// numeric subtrees, and moves negations outward where that is exact
    /// (`(-x)^2`, `(-x)*y`, `x - (-y)`).
    pub fn simplified(&self) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => match a.simplified() {
                Expr::Num(v) => Expr::Num(-v),
                Expr::Neg(inner) => *inner,
                s => Expr::Neg(Box::new(s)),
            },
            Expr::Call(f, a) => {
                let s = a.simplified();
                if let Expr::Num(v) = s {
                    if let Ok(r) = f.apply(v) {
                        return Expr::Num(r);
                    }
                }
                Expr::Call(*f, Box::new(s))
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.simplified(), b.simplified());
                match (op, &a, &b) {
                    (_, Expr::Num(x), Expr::Num(y)) => match op.apply(*x, *y) {
                        Ok(r) => Expr::Num(r),
                        Err(_) => Expr::bin(*op, a, b),
                    },
                    (BinOp::Add, Expr::Num(z), _) if *z == 0.0 => b,
                    (BinOp::Add | BinOp::Sub, _, Expr::Num(z)) if *z == 0.0 => a,
                    (BinOp::Sub, Expr::Num(z), _) if *z == 0.0 => {
                        Expr::Neg(Box::new(b)).simplified()
                    }
                    (BinOp::Mul, Expr::Num(z), _) | (BinOp::Mul, _, Expr::Num(z)) if *z == 0.0 => {
                        Expr::Num(0.0)
                    }
                    (BinOp::Mul, Expr::Num(o), _) if *o == 1.0 => b,
                    (BinOp::Mul | BinOp::Div, _, Expr::Num(o)) if *o == 1.0 => a,
                    (BinOp::Pow, _, Expr::Num(o)) if *o == 1.0 => a,
                    (BinOp::Pow, _, Expr::Num(z)) if *z == 0.0 => Expr::Num(1.0),
                    (BinOp::Pow, Expr::Neg(inner), Expr::Num(n)) if n.fract() == 0.0 => {
                        let p = Expr::bin(BinOp::Pow, (**inner).clone(), b.clone());
                        if n % 2.0 == 0.0 {
                            p
                        } else {
                            Expr::Neg(Box::new(p))
                        }
                    }
                    (BinOp::Mul | BinOp::Div, Expr::Neg(x), Expr::Neg(y)) => {
                        Expr::bin(*op, (**x).clone(), (**y).clone())
                    }
                    (BinOp::Mul | BinOp::Div, Expr::Neg(x), _) => {
                        Expr::Neg(Box::new(Expr::bin(*op, (**x).clone(), b.clone())))
                    }
                    (BinOp::Mul | BinOp::Div, _, Expr::Neg(y)) => {
                        Expr::Neg(Box::new(Expr::bin(*op, a.clone(), (**y).clone())))
                    }
                    (BinOp::Add, _, Expr::Neg(y)) => {
                        Expr::bin(BinOp::Sub, a.clone(), (**y).clone())
                    }
                    (BinOp::Sub, _, Expr::Neg(y)) => {
                        Expr::bin(BinOp::Add, a.clone(), (**y).clone())
                    }
                    _ => Expr::bin(*op, a, b),
                }
            }
        }
    }

    /// Partial derivative with respect to `var` at `bindings`. Uses the exact
    /// polynomial derivative when available, otherwise the central difference
    /// `(f(x+s) - f(x-s)) / 2s` with `s = step * max(1, |x|)`.
    pub fn partial(
        &self,
        var: &str,
        bindings: &HashMap<String, f64>,
        step: f64,
    ) -> Result<f64, EvalError> {
        let x = *bindings
            .get(var)
            .ok_or_else(|| EvalError::UnboundVariable(var.to_string()))?;
        if let Some(d) = self.polynomial_derivative(var) {
            return d.eval(bindings);
        }
        let s = step * x.abs().max(1.0);
        let mut shifted = bindings.clone();
        shifted.insert(var.to_string(), x + s);
        let hi = self.eval(&shifted)?;
        shifted.insert(var.to_string(), x - s);
        let lo = self.eval(&shifted)?;
        Ok((hi - lo) / (2.0 * s))
    }

    /// Resolves variables against `slots` (position = slot index). Names in
    /// `constants` are folded in as numbers.
    pub fn compile(
        &self,
        slots: &[&str],
        constants: &HashMap<String, f64>,
    ) -> Result<Compiled, EvalError> {
        fn build(
            e: &Expr,
            slots: &[&str],
            consts: &HashMap<String, f64>,
        ) -> Result<Node, EvalError> {
            Ok(match e {
                Expr::Num(v) => Node::Num(*v),
                Expr::Var(name) => match slots.iter().position(|s| s == name) {
                    Some(i) => Node::Slot(i),
                    None => Node::Num(
                        *consts
                            .get(name)
                            .ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
                    ),
                },
                Expr::Neg(a) => Node::Neg(Box::new(build(a, slots, consts)?)),
                Expr::Call(f, a) => Node::Call(*f, Box::new(build(a, slots, consts)?)),
                Expr::Binary(op, a, b) => Node::Bin(
                    *op,
                    Box::new(build(a, slots, consts)?),
                    Box::new(build(b, slots, consts)?),
                ),
            })
        }
        Ok(Compiled {
            root: build(self, slots, constants)?,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mag = v.abs();
    if mag != 0.0 && !(1e-5..1e16).contains(&mag) {
        write!(f, "{v:e}")
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Expr {
    /// Canonical printer; `parse(print(e))` reproduces any parsed tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(e: &Expr, parens: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Num(v) if v.is_sign_negative() => {
                f.write_str("(-")?;
                fmt_num(-v, f)?;
                f.write_str(")")
            }
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(a, a.precedence() < 3, f)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    wrap(a, a.precedence() <= p, f)?;
                    f.write_str("^")?;
                    wrap(b, b.precedence() < 3, f)
                } else {
                    wrap(a, a.precedence() < p, f)?;
                    f.write_str(op.symbol())?;
                    wrap(b, b.precedence() <= p, f)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Slot(usize),
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
}

impl Node {
    fn eval(&self, slots: &[f64]) -> Result<f64, EvalError> {
        match self {
            Node::Num(v) => Ok(*v),
            Node::Slot(i) => Ok(slots[*i]),
            Node::Neg(a) => Ok(-a.eval(slots)?),
            Node::Call(f, a) => f.apply(a.eval(slots)?),
            Node::Bin(op, a, b) => op.apply(a.eval(slots)?, b.eval(slots)?),
        }
    }
}

/// An expression with variables resolved to positional slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    root: Node,
}

impl Compiled {
    pub fn eval(&self, slots: &[f64]) -> Result<f64, EvalError> {
        self.root.eval(slots)
    }

    /// Central difference in slot `slot` with relative step `step`.
    pub fn central_difference(
        &self,
        slots: &[f64],
        slot: usize,
        step: f64,
    ) -> Result<f64, EvalError> {
        let mut shifted = slots.to_vec();
        let x = slots[slot];
        let s = step * x.abs().max(1.0);
        shifted[slot] = x + s;
        let hi = self.eval(&shifted)?;
        shifted[slot] = x - s;
        let lo = self.eval(&shifted)?;
        Ok((hi - lo) / (2.0 * s))
    }
}

/// Partial derivative of a compiled expression in one slot, exact when the
/// source expression is polynomial in that variable.
#[derive(Debug, Clone, PartialEq)]
pub enum CompiledPartial {
    Exact(Compiled),
    Numeric {
        expr: Compiled,
        slot: usize,
        step: f64,
    },
}

impl CompiledPartial {
    pub fn new(
        expr: &Expr,
        slots: &[&str],
        slot: usize,
        constants: &HashMap<String, f64>,
        step: f64,
    ) -> Result<Self, EvalError> {
        match expr.polynomial_derivative(slots[slot]) {
            Some(d) => Ok(CompiledPartial::Exact(d.compile(slots, constants)?)),
            None => Ok(CompiledPartial::Numeric {
                expr: expr.compile(slots, constants)?,
                slot,
                step,
            }),
        }
    }

    pub fn eval(&self, slots: &[f64]) -> Result<f64, EvalError> {
        match self {
            CompiledPartial::Exact(c) => c.eval(slots),
            CompiledPartial::Numeric { expr, slot, step } => {
                expr.central_difference(slots, *slot, *step)
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CompiledPartial::Exact(_))
    }
}
