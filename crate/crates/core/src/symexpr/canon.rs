//! Canonical form: a sum of rational multiples of monomials, where a monomial
//! is a sorted product of atoms raised to nonzero integer powers.
//!
//! Atoms are variables, function calls with canonical arguments, and sums
//! that occur as factors. A sum used as a factor is stored with its leading
//! coefficient scaled to one, so `2*x + 2` and `x + 1` share the atom
//! `x + 1`. Products of sums are not expanded; a lone sum with exponent one
//! is always spliced back into the enclosing sum.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Expr, Func};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Atom {
    Var(Arc<str>),
    Call(Func, Box<Poly>),
    Sum(Box<Poly>),
    /// The constant zero under a negative power; kept so evaluation still
    /// reports the division by zero. Its exponent is always −1.
    Zero,
}

type Monomial = Vec<(Atom, i64)>;

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    fn term(c: BigRational, mut m: Monomial) -> Poly {
        let mut p = Poly::zero();
        if c.is_zero() {
            return p;
        }
        // a division by zero absorbs the rest of its monomial
        let mut c = c;
        if m.iter().any(|f| f.0 == Atom::Zero) {
            m = vec![(Atom::Zero, -1)];
            c = c.signum();
        }
        // a bare sum factor is spliced back into the sum
        if m.len() == 1 && m[0].1 == 1 {
            if let Atom::Sum(inner) = &m[0].0 {
                return inner.scale(&c);
            }
        }
        p.terms.insert(m, c);
        p
    }

    fn atom(a: Atom) -> Poly {
        Poly::term(BigRational::one(), vec![(a, 1)])
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                let zero_atom = v.key().iter().any(|f| f.0 == Atom::Zero);
                v.insert(if zero_atom { c.signum() } else { c });
            }
            Entry::Occupied(mut o) => {
                let zero_atom = o.key().iter().any(|f| f.0 == Atom::Zero);
                *o.get_mut() += c;
                if zero_atom {
                    // divisions by zero never cancel
                    let v = o.get().signum();
                    *o.get_mut() = if v.is_zero() { BigRational::one() } else { v };
                } else if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    fn add_in_place(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| {
                    let scaled = v * c;
                    let zero_atom = m.iter().any(|f| f.0 == Atom::Zero);
                    (m.clone(), if zero_atom { scaled.signum() } else { scaled })
                })
                .collect(),
        }
    }

    /// Splits into a coefficient and a single monomial. Multi-term sums become
    /// `content * (primitive sum)^1`.
    fn as_term(&self) -> (BigRational, Monomial) {
        match self.terms.len() {
            0 => (BigRational::zero(), Vec::new()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (c.clone(), m.clone())
            }
            _ => {
                let lead = self.terms.values().next().unwrap().clone();
                let inv = BigRational::one() / &lead;
                let prim = self.scale(&inv);
                (lead, vec![(Atom::Sum(Box::new(prim)), 1)])
            }
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let (c1, m1) = self.as_term();
        let (c2, m2) = other.as_term();
        Poly::term(c1 * c2, mono_mul(&m1, &m2))
    }

    fn pow(&self, k: i64) -> Poly {
        if k == 0 {
            return Poly::constant(BigRational::one());
        }
        if k == 1 {
            return self.clone();
        }
        let (c, m) = self.as_term();
        if c.is_zero() {
            if k > 0 {
                return Poly::zero();
            }
            return Poly::term(BigRational::one(), vec![(Atom::Zero, k)]);
        }
        let ck = rat_pow(&c, k);
        let mk = m.into_iter().map(|(a, e)| (a, e * k)).collect();
        Poly::term(ck, mk)
    }

    fn contains_var(&self, v: &str) -> bool {
        self.terms.keys().any(|m| m.iter().any(|(a, _)| a.contains_var(v)))
    }
}

impl Atom {
    fn contains_var(&self, v: &str) -> bool {
        match self {
            Atom::Var(name) => &**name == v,
            Atom::Call(_, p) | Atom::Sum(p) => p.contains_var(v),
            Atom::Zero => false,
        }
    }
}

fn rat_pow(c: &BigRational, k: i64) -> BigRational {
    let base = if k < 0 { BigRational::one() / c } else { c.clone() };
    num_traits::pow(base, k.unsigned_abs() as usize)
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: Monomial = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => break,
        };
        match ord {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0.clone(), e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn call(f: Func, arg: Poly) -> Poly {
    if let Some(c) = arg.as_constant() {
        if c.is_zero() {
            match f {
                Func::Sin | Func::Sinh | Func::Sqrt | Func::Atan => return Poly::zero(),
                Func::Cos | Func::Cosh | Func::Exp => return Poly::constant(BigRational::one()),
                Func::Log => {}
            }
        } else if c.is_one() {
            match f {
                Func::Log => return Poly::zero(),
                Func::Sqrt => return Poly::constant(BigRational::one()),
                _ => {}
            }
        }
    }
    Poly::atom(Atom::Call(f, Box::new(arg)))
}

fn from_expr(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => Poly::constant(c.clone()),
        Expr::Var(v) => Poly::atom(Atom::Var(v.clone())),
        Expr::Neg(inner) => from_expr(inner).scale(&rat(-1)),
        Expr::Sum(ts) => {
            let mut acc = Poly::zero();
            for t in ts {
                acc.add_in_place(from_expr(t));
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = Poly::constant(BigRational::one());
            for f in fs {
                acc = acc.mul(&from_expr(f));
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Expr::Quotient(n, d) => from_expr(n).mul(&from_expr(d).pow(-1)),
        Expr::Pow(b, k) => from_expr(b).pow(*k),
        Expr::Call(f, a) => call(*f, from_expr(a)),
    }
}

fn atom_expr(a: &Atom) -> Expr {
    match a {
        Atom::Var(v) => Expr::Var(v.clone()),
        Atom::Call(f, p) => Expr::Call(*f, Box::new(to_expr(p))),
        Atom::Sum(p) => to_expr(p),
        Atom::Zero => Expr::zero(),
    }
}

fn factor_expr(a: &Atom, e: i64) -> Expr {
    let base = atom_expr(a);
    if e == 1 {
        base
    } else {
        Expr::Pow(Box::new(base), e)
    }
}

fn group(mut fs: Vec<Expr>) -> Option<Expr> {
    match fs.len() {
        0 => None,
        1 => fs.pop(),
        _ => Some(Expr::Product(fs)),
    }
}

/// Renders `|c| * m` (or `c * m` when `signed`).
fn term_expr(c: &BigRational, m: &Monomial) -> Expr {
    let neg = c.is_negative();
    let a = c.abs();
    let mut num: Vec<Expr> = Vec::new();
    let mut den: Vec<Expr> = Vec::new();
    if !a.numer().is_one() || m.iter().all(|(_, e)| *e < 0) {
        num.push(Expr::Const(BigRational::from_integer(a.numer().clone())));
    }
    if !a.denom().is_one() {
        den.push(Expr::Const(BigRational::from_integer(a.denom().clone())));
    }
    for (atom, e) in m {
        if *e > 0 {
            num.push(factor_expr(atom, *e));
        } else {
            den.push(factor_expr(atom, -*e));
        }
    }
    // a lone numeric numerator absorbs the sign: -1/(1 - r)
    let numeric_num = num.len() == 1 && matches!(num[0], Expr::Const(_));
    if neg && numeric_num {
        if let Expr::Const(v) = &mut num[0] {
            *v = -v.clone();
        }
    }
    let n = group(num).unwrap_or_else(Expr::one);
    let body = match group(den) {
        Some(d) => Expr::Quotient(Box::new(n), Box::new(d)),
        None => n,
    };
    if neg && !numeric_num {
        Expr::Neg(Box::new(body))
    } else {
        body
    }
}

fn to_expr(p: &Poly) -> Expr {
    let mut parts: Vec<Expr> = Vec::with_capacity(p.terms.len());
    for (i, (m, c)) in p.terms.iter().enumerate() {
        if m.is_empty() {
            let e = Expr::Const(c.clone());
            if i > 0 && c.is_negative() {
                parts.push(Expr::Neg(Box::new(Expr::Const(-c.clone()))));
            } else {
                parts.push(e);
            }
            continue;
        }
        if i > 0 && c.is_negative() {
            parts.push(Expr::Neg(Box::new(term_expr(&-c.clone(), m))));
        } else {
            parts.push(term_expr(c, m));
        }
    }
    match parts.len() {
        0 => Expr::zero(),
        1 => parts.pop().unwrap(),
        _ => Expr::Sum(parts),
    }
}

fn diff_poly(p: &Poly, v: &str) -> Poly {
    let mut out = Poly::zero();
    for (m, c) in &p.terms {
        for (idx, (atom, e)) in m.iter().enumerate() {
            if !atom.contains_var(v) {
                continue;
            }
            let da = diff_atom(atom, v);
            if da.is_zero() {
                continue;
            }
            let mut rest = m.clone();
            if *e == 1 {
                rest.remove(idx);
            } else {
                rest[idx].1 = e - 1;
            }
            let coeff = c * rat(*e);
            let t = Poly::term(coeff, rest).mul(&da);
            out.add_in_place(t);
        }
    }
    out
}

fn diff_atom(a: &Atom, v: &str) -> Poly {
    match a {
        Atom::Var(name) => {
            if &**name == v {
                Poly::constant(BigRational::one())
            } else {
                Poly::zero()
            }
        }
        Atom::Zero => Poly::zero(),
        Atom::Sum(p) => diff_poly(p, v),
        Atom::Call(f, arg) => {
            let da = diff_poly(arg, v);
            if da.is_zero() {
                return da;
            }
            let arg = (**arg).clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, arg),
                Func::Cos => call(Func::Sin, arg).scale(&rat(-1)),
                Func::Sinh => call(Func::Cosh, arg),
                Func::Cosh => call(Func::Sinh, arg),
                Func::Exp => call(Func::Exp, arg),
                Func::Log => arg.pow(-1),
                Func::Sqrt => call(Func::Sqrt, arg).pow(-1).scale(&BigRational::new(1.into(), 2.into())),
                Func::Atan => Poly::constant(BigRational::one()).add(&arg.pow(2)).pow(-1),
            };
            outer.mul(&da)
        }
    }
}

pub(super) fn simplify(e: &Expr) -> Expr {
    to_expr(&from_expr(e))
}

pub(super) fn diff(e: &Expr, v: &str) -> Expr {
    to_expr(&diff_poly(&from_expr(e), v))
}

pub(super) fn add(a: &Expr, b: &Expr) -> Expr {
    to_expr(&from_expr(a).add(&from_expr(b)))
}

pub(super) fn sub(a: &Expr, b: &Expr) -> Expr {
    to_expr(&from_expr(a).add(&from_expr(b).scale(&rat(-1))))
}

pub(super) fn mul(a: &Expr, b: &Expr) -> Expr {
    to_expr(&from_expr(a).mul(&from_expr(b)))
}

pub(super) fn div(a: &Expr, b: &Expr) -> Expr {
    to_expr(&from_expr(a).mul(&from_expr(b).pow(-1)))
}

pub(super) fn neg(a: &Expr) -> Expr {
    to_expr(&from_expr(a).scale(&rat(-1)))
}

pub(super) fn sum_all<I: IntoIterator<Item = Expr>>(items: I) -> Expr {
    let mut acc = Poly::zero();
    for e in items {
        acc.add_in_place(from_expr(&e));
    }
    to_expr(&acc)
}
