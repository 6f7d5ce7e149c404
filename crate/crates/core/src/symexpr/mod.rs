//! Symbolic scalar expressions over chart coordinates and named parameters.
//!
//! An [`Expr`] is an immutable tree. Constants are exact rationals; floating
//! point numbers only appear when an expression is evaluated. Arithmetic on
//! expressions (the `+ - * /` operators and [`Expr::pow`]) always returns the
//! simplified canonical form, so geometric code can build large tensor
//! expressions without accumulating trivial structure.

mod canon;
mod eval;
mod parse;
mod print;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub use eval::{Compiled, Env, EvalError};
pub use parse::{parse, parse_in, ParseError, ParseErrorKind, Scope};
pub use zero::{is_zero, is_zero_all, ZeroVerdict};

/// Unary functions understood by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree.
///
/// The parser produces trees that mirror the input text (`1-r` is
/// `Sum([1, Neg(r)])`); [`Expr::simplify`] produces the canonical form used
/// for structural comparison.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(BigRational),
    Var(Arc<str>),
    Neg(Box<Expr>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(BigRational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(BigRational::one())
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Const(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Exact rational constant closest to a float. Fixture parameters are
    /// decimal, so this is exact for every value written in a scene file.
    pub fn from_f64(v: f64) -> Expr {
        match BigRational::from_float(v) {
            Some(r) => Expr::Const(r),
            None => Expr::zero(),
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(Arc::from(name))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        canon::simplify(&Expr::Call(f, Box::new(arg)))
    }

    pub fn pow(&self, k: i64) -> Expr {
        canon::simplify(&Expr::Pow(Box::new(self.clone()), k))
    }

    pub fn simplify(&self) -> Expr {
        canon::simplify(self)
    }

    /// Exact derivative with respect to `var`, simplified.
    pub fn diff(&self, var: &str) -> Expr {
        canon::diff(self, var)
    }

    /// Simultaneous substitution of variables, followed by simplification.
    pub fn subs(&self, map: &BTreeMap<String, Expr>) -> Expr {
        canon::simplify(&self.replace(map))
    }

    pub fn subs_one(&self, var: &str, value: &Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(var.to_string(), value.clone());
        self.subs(&map)
    }

    /// Structural substitution without simplification.
    pub fn replace(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Var(v) => map.get(&**v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Const(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.replace(map))),
            Expr::Sum(ts) => Expr::Sum(ts.iter().map(|t| t.replace(map)).collect()),
            Expr::Product(fs) => Expr::Product(fs.iter().map(|f| f.replace(map)).collect()),
            Expr::Quotient(n, d) => Expr::Quotient(Box::new(n.replace(map)), Box::new(d.replace(map))),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.replace(map)), *k),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.replace(map))),
        }
    }

    /// Renames variables without simplifying (used for coordinate aliases).
    pub fn rename(&self, names: &BTreeMap<String, String>) -> Expr {
        let map = names
            .iter()
            .map(|(k, v)| (k.clone(), Expr::var(v)))
            .collect();
        self.replace(&map)
    }

    pub fn eval(&self, env: &dyn Env) -> Result<f64, EvalError> {
        eval::eval(self, env)
    }

    pub fn compile(&self, slots: &[String], constants: &BTreeMap<String, f64>) -> Result<Compiled, EvalError> {
        Compiled::new(self, slots, constants)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.to_string());
            }
            Expr::Const(_) => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Sum(es) | Expr::Product(es) => es.iter().for_each(|e| e.collect_vars(out)),
            Expr::Quotient(n, d) => {
                n.collect_vars(out);
                d.collect_vars(out);
            }
        }
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self {
            Expr::Var(v) => &**v == var,
            Expr::Const(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.contains_var(var),
            Expr::Sum(es) | Expr::Product(es) => es.iter().any(|e| e.contains_var(var)),
            Expr::Quotient(n, d) => n.contains_var(var) || d.contains_var(var),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.size(),
            Expr::Sum(es) | Expr::Product(es) => es.iter().map(Expr::size).sum(),
            Expr::Quotient(n, d) => n.size() + d.size(),
        }
    }

    /// True when the expression is literally the constant zero.
    pub fn is_const_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn as_const(&self) -> Option<&BigRational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Constant value as a float, if the simplified expression is a constant.
    pub fn const_value(&self) -> Option<f64> {
        match self.simplify() {
            Expr::Const(c) => rational_to_f64(&c),
            _ => None,
        }
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> Option<f64> {
    let v = r.to_f64()?;
    if v.is_finite() {
        Some(v)
    } else {
        None
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_text(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $canon:path) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $canon(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $canon(&self, &rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $canon(&self, rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $canon(self, &rhs)
            }
        }
    };
}

binop!(Add, add, canon::add);
binop!(Sub, sub, canon::sub);
binop!(Mul, mul, canon::mul);
binop!(Div, div, canon::div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        canon::neg(self)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        canon::neg(&self)
    }
}

/// Sum of an iterator of expressions, simplified once at the end.
pub fn sum<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
    canon::sum_all(items)
}
