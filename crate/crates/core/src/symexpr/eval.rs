use std::collections::{BTreeMap, HashMap};

use super::{rational_to_f64, Expr, Func};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("no value for variable {0:?}")]
    MissingVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("non-finite result")]
    NonFinite,
}

/// Variable assignment used by [`Expr::eval`].
pub trait Env {
    fn lookup(&self, name: &str) -> Option<f64>;
}

impl Env for BTreeMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for HashMap<String, f64> {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Env for [(&str, f64)] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

impl<const N: usize> Env for [(&str, f64); N] {
    fn lookup(&self, name: &str) -> Option<f64> {
        self.as_slice().lookup(name)
    }
}

fn apply(f: Func, x: f64) -> Result<f64, EvalError> {
    Ok(match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Sinh => x.sinh(),
        Func::Cosh => x.cosh(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err(EvalError::LogDomain(x));
            }
            x.ln()
        }
        Func::Sqrt => {
            if x < 0.0 {
                return Err(EvalError::SqrtDomain(x));
            }
            x.sqrt()
        }
        Func::Atan => x.atan(),
    })
}

fn powi(b: f64, k: i64) -> Result<f64, EvalError> {
    if k < 0 && b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(match i32::try_from(k) {
        Ok(k) => b.powi(k),
        Err(_) => b.powf(k as f64),
    })
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

pub(super) fn eval(e: &Expr, env: &dyn Env) -> Result<f64, EvalError> {
    finite(eval_raw(e, env)?)
}

fn eval_raw(e: &Expr, env: &dyn Env) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => rational_to_f64(c).ok_or(EvalError::NonFinite),
        Expr::Var(v) => env.lookup(v).ok_or_else(|| EvalError::MissingVariable(v.to_string())),
        Expr::Neg(a) => Ok(-eval_raw(a, env)?),
        Expr::Sum(ts) => ts.iter().try_fold(0.0, |acc, t| Ok(acc + eval_raw(t, env)?)),
        Expr::Product(fs) => fs.iter().try_fold(1.0, |acc, f| Ok(acc * eval_raw(f, env)?)),
        Expr::Quotient(n, d) => {
            let den = eval_raw(d, env)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(eval_raw(n, env)? / den)
        }
        Expr::Pow(b, k) => powi(eval_raw(b, env)?, *k),
        Expr::Call(f, a) => apply(*f, eval_raw(a, env)?),
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Slot(usize),
    Neg(Box<Node>),
    Sum(Vec<Node>),
    Product(Vec<Node>),
    Quotient(Box<Node>, Box<Node>),
    Pow(Box<Node>, i64),
    Call(Func, Box<Node>),
}

/// An expression with variables resolved to positional slots, for hot loops
/// such as geodesic integration.
#[derive(Debug, Clone)]
pub struct Compiled {
    root: Node,
}

impl Compiled {
    pub(super) fn new(e: &Expr, slots: &[String], constants: &BTreeMap<String, f64>) -> Result<Compiled, EvalError> {
        Ok(Compiled { root: lower(e, slots, constants)? })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        finite(run(&self.root, x)?)
    }
}

fn lower(e: &Expr, slots: &[String], constants: &BTreeMap<String, f64>) -> Result<Node, EvalError> {
    let rec = |e: &Expr| lower(e, slots, constants);
    Ok(match e {
        Expr::Const(c) => Node::Const(rational_to_f64(c).ok_or(EvalError::NonFinite)?),
        Expr::Var(v) => match slots.iter().position(|s| s == &**v) {
            Some(i) => Node::Slot(i),
            None => Node::Const(
                *constants
                    .get(&**v)
                    .ok_or_else(|| EvalError::MissingVariable(v.to_string()))?,
            ),
        },
        Expr::Neg(a) => Node::Neg(Box::new(rec(a)?)),
        Expr::Sum(ts) => Node::Sum(ts.iter().map(rec).collect::<Result<_, _>>()?),
        Expr::Product(fs) => Node::Product(fs.iter().map(rec).collect::<Result<_, _>>()?),
        Expr::Quotient(n, d) => Node::Quotient(Box::new(rec(n)?), Box::new(rec(d)?)),
        Expr::Pow(b, k) => Node::Pow(Box::new(rec(b)?), *k),
        Expr::Call(f, a) => Node::Call(*f, Box::new(rec(a)?)),
    })
}

fn run(n: &Node, x: &[f64]) -> Result<f64, EvalError> {
    match n {
        Node::Const(c) => Ok(*c),
        Node::Slot(i) => Ok(x[*i]),
        Node::Neg(a) => Ok(-run(a, x)?),
        Node::Sum(ts) => ts.iter().try_fold(0.0, |acc, t| Ok(acc + run(t, x)?)),
        Node::Product(fs) => fs.iter().try_fold(1.0, |acc, f| Ok(acc * run(f, x)?)),
        Node::Quotient(a, b) => {
            let den = run(b, x)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(run(a, x)? / den)
        }
        Node::Pow(b, k) => powi(run(b, x)?, *k),
        Node::Call(f, a) => apply(*f, run(a, x)?),
    }
}
