use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use super::GaugeMatrix;
use crate::sample::Sampler;
use crate::symexpr::{is_zero, Expr, ZeroVerdict};

/// Subalgebras of 𝔰𝔩(n+1) by entry pattern. Index 0 is the boundary-defining
/// direction, index n the translation slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraMask {
    /// Stabiliser of the origin: (i, n) = 0 for i < n.
    H,
    /// Stabiliser of the boundary hyperplane: row 0 vanishes off (0, 0).
    GTilde,
    HTilde,
    /// Acts trivially on the boundary: 𝔤̃ with a scalar lower-right n×n block.
    K,
}

impl fmt::Display for AlgebraMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgebraMask::H => "h",
            AlgebraMask::GTilde => "g~",
            AlgebraMask::HTilde => "h~",
            AlgebraMask::K => "k",
        })
    }
}

impl AlgebraMask {
    /// Entries (row, col) carrying a constraint, in a fixed order. For the
    /// diagonal entries of 𝔨 the constraint is equality with entry (1, 1).
    pub fn constrained(self, size: usize) -> Vec<(usize, usize)> {
        let n = size - 1;
        let h = (0..n).map(move |i| (i, n));
        let g = (1..size).map(|b| (0, b));
        match self {
            AlgebraMask::H => h.collect(),
            AlgebraMask::GTilde => g.collect(),
            AlgebraMask::HTilde => {
                let mut v: Vec<_> = g.collect();
                v.extend(h.filter(|&(i, _)| i != 0));
                v
            }
            AlgebraMask::K => {
                let mut v: Vec<_> = g.collect();
                for a in 1..size {
                    for b in 1..size {
                        if a != b || a > 1 {
                            v.push((a, b));
                        }
                    }
                }
                v
            }
        }
    }

    fn residual<T>(self, at: impl Fn(usize, usize) -> T, (r, c): (usize, usize), sub: impl Fn(T, T) -> T) -> T {
        if self == AlgebraMask::K && r == c {
            sub(at(r, c), at(1, 1))
        } else {
            at(r, c)
        }
    }

    /// Constraint residuals of a symbolic row-major matrix, ordered like `constrained`.
    pub fn residuals(self, m: &[Expr], size: usize) -> Vec<Expr> {
        self.constrained(size)
            .into_iter()
            .map(|rc| self.residual(|a, b| m[a * size + b].clone(), rc, |x, y| (x - y).simplify()))
            .collect()
    }

    /// Pattern test for a numeric matrix. The patterns are invariant under
    /// adding multiples of the identity, so classes modulo the centre test alike.
    pub fn contains(self, m: &DMatrix<f64>, tol: f64) -> bool {
        let size = m.nrows();
        self.constrained(size)
            .into_iter()
            .all(|rc| self.residual(|a, b| m[(a, b)], rc, |x, y| x - y).abs() <= tol)
    }

    /// Zeroes the constrained entries and replaces the 𝔨 diagonal by its mean.
    pub fn project(self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let size = m.nrows();
        let mut out = m.clone();
        if self == AlgebraMask::K {
            let mean = (1..size).map(|a| m[(a, a)]).sum::<f64>() / (size - 1) as f64;
            for a in 1..size {
                out[(a, a)] = mean;
            }
        }
        for (r, c) in self.constrained(size) {
            if r != c {
                out[(r, c)] = 0.0;
            }
        }
        out
    }

    /// Sampled membership of every form coefficient; returns the first failing entry.
    pub fn check(self, omega: &GaugeMatrix, sampler: &Sampler) -> (ZeroVerdict, Option<(usize, usize)>) {
        let size = omega.size;
        let mut verdict = ZeroVerdict::ProvablyZero;
        let mut witness = None;
        for k in 0..omega.form_dim() {
            let along = omega.along(k);
            let res = self.residuals(&along, size);
            for (e, rc) in res.iter().zip(self.constrained(size)) {
                let v = is_zero(e, sampler);
                if !v.is_zero() && witness.is_none() {
                    witness = Some(rc);
                }
                verdict = verdict.combine(v);
            }
        }
        (verdict, witness)
    }
}
