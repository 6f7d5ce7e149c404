use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use super::{Expr, Func};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected token {0:?}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("exponent must be an integer constant")]
    NonIntegerExponent,
    #[error("malformed number literal")]
    BadNumber,
}

/// Identifiers an expression may refer to.
///
/// `x0`..`x9` are aliases for the chart's coordinates by position, unless the
/// chart itself uses those names.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub coords: Vec<String>,
    pub params: BTreeSet<String>,
}

impl Scope {
    pub fn new(coords: &[String], params: impl IntoIterator<Item = String>) -> Scope {
        Scope {
            coords: coords.to_vec(),
            params: params.into_iter().collect(),
        }
    }

    fn resolve(&self, name: &str) -> Option<String> {
        if self.coords.iter().any(|c| c == name) || self.params.contains(name) {
            return Some(name.to_string());
        }
        let idx = name.strip_prefix('x')?;
        if idx.len() == 1 {
            let i = idx.parse::<usize>().ok()?;
            return self.coords.get(i).cloned();
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((start, Tok::Plus)),
            b'-' => out.push((start, Tok::Minus)),
            b'*' => out.push((start, Tok::Star)),
            b'/' => out.push((start, Tok::Slash)),
            b'^' => out.push((start, Tok::Caret)),
            b'(' => out.push((start, Tok::LParen)),
            b')' => out.push((start, Tok::RParen)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &text[start..i];
                let mut frac_part = "";
                if i < bytes.len() && bytes[i] == b'.' {
                    let fs = i + 1;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    frac_part = &text[fs..i];
                    if frac_part.is_empty() {
                        return Err(ParseError { offset: start, kind: ParseErrorKind::BadNumber });
                    }
                }
                let digits = format!("{int_part}{frac_part}");
                let num: BigInt = digits
                    .parse()
                    .map_err(|_| ParseError { offset: start, kind: ParseErrorKind::BadNumber })?;
                let den = num_traits::pow(BigInt::from(10), frac_part.len());
                out.push((start, Tok::Num(BigRational::new(num, den))));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError { offset: start, kind: ParseErrorKind::UnexpectedChar(ch) });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    scope: Option<&'a Scope>,
}

/// Parses an expression, accepting any identifier as a variable.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    run(text, None)
}

/// Parses an expression whose identifiers must resolve in `scope`.
/// Coordinate aliases are rewritten to the chart's coordinate names.
pub fn parse_in(text: &str, scope: &Scope) -> Result<Expr, ParseError> {
    run(text, Some(scope))
}

fn run(text: &str, scope: Option<&Scope>) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), scope };
    let e = p.expr()?;
    if let Some((off, t)) = p.toks.get(p.pos) {
        return Err(ParseError { offset: *off, kind: ParseErrorKind::UnexpectedToken(describe(t)) });
    }
    Ok(e)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn eof(&self) -> ParseError {
        ParseError { offset: self.end, kind: ParseErrorKind::UnexpectedEnd }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let first = self.term()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut cur = self.unary()?;
        // whether `cur` is a product opened by this loop (and may be extended)
        let mut open_product = false;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    match (&mut cur, open_product) {
                        (Expr::Product(fs), true) => fs.push(rhs),
                        _ => {
                            cur = Expr::Product(vec![cur, rhs]);
                            open_product = true;
                        }
                    }
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    cur = Expr::Quotient(Box::new(cur), Box::new(rhs));
                    open_product = false;
                }
                _ => break,
            }
        }
        Ok(cur)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            // `-3` is a negative literal unless the literal is a power base
            if let (Some(Tok::Num(n)), next) = (self.peek_at(1), self.peek_at(2)) {
                if next != Some(&Tok::Caret) {
                    let v = -n.clone();
                    self.pos += 2;
                    return Ok(Expr::Const(v));
                }
            }
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let off = self.offset();
            let exp = self.unary()?;
            let k = match &exp {
                Expr::Const(c) if c.is_integer() => c.to_integer().to_i64(),
                _ => None,
            };
            return match k {
                Some(k) => Ok(Expr::Pow(Box::new(base), k)),
                None => Err(ParseError { offset: off, kind: ParseErrorKind::NonIntegerExponent }),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        let tok = self.peek().cloned().ok_or_else(|| self.eof())?;
        match tok {
            Tok::Num(n) => {
                self.pos += 1;
                debug_assert!(!n.is_negative());
                Ok(Expr::Const(n))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(Tok::LParen) = self.peek() {
                    let f = Func::from_name(&name).ok_or(ParseError {
                        offset: off,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if Func::from_name(&name).is_some() {
                    return Err(ParseError {
                        offset: self.offset(),
                        kind: match self.peek() {
                            Some(t) => ParseErrorKind::UnexpectedToken(describe(t)),
                            None => ParseErrorKind::UnexpectedEnd,
                        },
                    });
                }
                let resolved = match self.scope {
                    None => name,
                    Some(scope) => scope.resolve(&name).ok_or(ParseError {
                        offset: off,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    })?,
                };
                Ok(Expr::var(&resolved))
            }
            other => Err(ParseError { offset: off, kind: ParseErrorKind::UnexpectedToken(describe(&other)) }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(ParseError { offset: self.offset(), kind: ParseErrorKind::UnexpectedToken(describe(t)) }),
            None => Err(self.eof()),
        }
    }
}
