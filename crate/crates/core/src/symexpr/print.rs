use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Expr;

/// Renders an expression so that parsing the text gives back the same tree.
pub(super) fn to_text(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Sum(terms) => {
            for (i, t) in terms.iter().enumerate() {
                if i == 0 {
                    write_wrapped(t, out, matches!(t, Expr::Sum(_)));
                    continue;
                }
                match t {
                    Expr::Neg(inner) => {
                        out.push_str(" - ");
                        let wrap = matches!(**inner, Expr::Sum(_) | Expr::Neg(_)) || is_negative_const(inner);
                        write_wrapped(inner, out, wrap);
                    }
                    _ => {
                        out.push_str(" + ");
                        let wrap = matches!(t, Expr::Sum(_) | Expr::Neg(_)) || is_negative_const(t);
                        write_wrapped(t, out, wrap);
                    }
                }
            }
        }
        Expr::Product(factors) => {
            for (i, f) in factors.iter().enumerate() {
                if i > 0 {
                    out.push('*');
                }
                let wrap = match f {
                    Expr::Sum(_) | Expr::Product(_) => true,
                    Expr::Quotient(..) | Expr::Neg(_) => i > 0,
                    Expr::Const(c) => (i > 0 && c.is_negative()) || !c.is_integer() && !is_decimal(c),
                    _ => false,
                };
                write_wrapped(f, out, wrap);
            }
        }
        Expr::Quotient(n, d) => {
            let wrap_n = match &**n {
                Expr::Sum(_) => true,
                Expr::Const(c) => !c.is_integer() && !is_decimal(c),
                _ => false,
            };
            write_wrapped(n, out, wrap_n);
            out.push('/');
            let wrap_d = match &**d {
                Expr::Sum(_) | Expr::Product(_) | Expr::Quotient(..) | Expr::Neg(_) => true,
                Expr::Const(c) => c.is_negative() || !c.is_integer(),
                _ => false,
            };
            write_wrapped(d, out, wrap_d);
        }
        Expr::Neg(inner) => {
            out.push('-');
            let wrap = matches!(
                **inner,
                Expr::Const(_) | Expr::Sum(_) | Expr::Product(_) | Expr::Quotient(..) | Expr::Neg(_)
            );
            write_wrapped(inner, out, wrap);
        }
        Expr::Pow(base, k) => {
            let wrap = match &**base {
                Expr::Var(_) | Expr::Call(..) => false,
                Expr::Const(c) => c.is_negative() || !c.is_integer(),
                _ => true,
            };
            write_wrapped(base, out, wrap);
            out.push('^');
            out.push_str(&k.to_string());
        }
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(arg, out);
            out.push(')');
        }
        Expr::Var(v) => out.push_str(v),
        Expr::Const(c) => write_const(c, out),
    }
}

fn write_wrapped(e: &Expr, out: &mut String, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

fn is_negative_const(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.is_negative())
}

/// Denominator of the form 2^a 5^b: the value has a finite decimal expansion.
fn is_decimal(c: &BigRational) -> bool {
    let mut d = c.denom().clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
        }
    }
    d.is_one()
}

fn write_const(c: &BigRational, out: &mut String) {
    if c.is_integer() {
        out.push_str(&c.numer().to_string());
        return;
    }
    if !is_decimal(c) {
        out.push_str(&format!("{}/{}", c.numer(), c.denom()));
        return;
    }
    // smallest k with denom | 10^k
    let mut k = 0usize;
    let mut scale = BigInt::one();
    let ten = BigInt::from(10);
    while !(&scale % c.denom()).is_zero() {
        scale *= &ten;
        k += 1;
    }
    let scaled = c.numer() * (&scale / c.denom());
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = if digits.len() <= k { format!("{}{}", "0".repeat(k + 1 - digits.len()), digits) } else { digits };
    let (int_part, frac_part) = digits.split_at(digits.len() - k);
    if neg {
        out.push('-');
    }
    out.push_str(int_part);
    out.push('.');
    out.push_str(frac_part);
}
