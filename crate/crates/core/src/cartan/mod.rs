//! Cartan gauges of projective structures: matrix-valued 1-forms on a chart,
//! their curvature, gauge changes, and the reduction to the boundary.
//!
//! Matrices are (n+1)×(n+1) with index n as the translation slot: the last
//! column of a normal gauge is (dx⁰, …, dx^{n−1}, corner) and the bottom row
//! holds −P. Matrices stand for classes modulo the centre; the canonical
//! representative is trace-free.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::geometry::{ConnectionField, GeometryError, MapField};
use crate::symexpr::{sum, EvalError, Expr, ZeroVerdict};

mod boundary;
mod gauge;
mod jet;
mod mask;

pub use boundary::{
    boundary_pullback, induce_boundary_connection, mod_k_project, schouten_compare, trace_free_gl_block,
    BoundaryPullback, SchoutenComparison,
};
pub use gauge::{
    check_normality_traces, check_torsion_free, flat_gauge, gauge_curvature, gauge_transform, normal_gauge,
    NormalityReport,
};
pub use jet::{h_embed, h_extract, Jet2Element, JetError};
pub use mask::AlgebraMask;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CartanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("gauge change leaves the {mask} pattern at entry ({row},{col}): {verdict:?}")]
    OutsideMask { mask: AlgebraMask, row: usize, col: usize, verdict: ZeroVerdict },
    #[error("boundary gauge is not {mask}-valued at entry ({row},{col}): {verdict:?}")]
    NotMember { mask: AlgebraMask, row: usize, col: usize, verdict: ZeroVerdict },
    #[error("Γ⁰_{mu}{nu} does not vanish on the boundary: {verdict:?}")]
    ObstructionNonzero { mu: usize, nu: usize, verdict: ZeroVerdict },
    #[error("the induced Schouten tensor needs dimension at least 3, got {0}")]
    DimensionTooSmall(usize),
}

/// An N×N matrix of 1-forms on a chart with coordinates `coords`; the
/// coefficient of dx^k in entry (A, B) is stored at `(A*N + B)*d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrix {
    pub chart: String,
    pub coords: Vec<String>,
    pub size: usize,
    coef: Vec<Expr>,
}

impl GaugeMatrix {
    pub fn zeros(chart: &str, coords: &[String], size: usize) -> GaugeMatrix {
        GaugeMatrix {
            chart: chart.to_string(),
            coords: coords.to_vec(),
            size,
            coef: vec![Expr::zero(); size * size * coords.len()],
        }
    }

    pub fn from_fn(
        chart: &str,
        coords: &[String],
        size: usize,
        mut f: impl FnMut(usize, usize, usize) -> Expr,
    ) -> GaugeMatrix {
        let d = coords.len();
        let mut coef = Vec::with_capacity(size * size * d);
        for a in 0..size {
            for b in 0..size {
                for k in 0..d {
                    coef.push(f(a, b, k).simplify());
                }
            }
        }
        GaugeMatrix { chart: chart.to_string(), coords: coords.to_vec(), size, coef }
    }

    /// Number of coordinates (form degree basis).
    pub fn form_dim(&self) -> usize {
        self.coords.len()
    }

    /// Coefficient of dx^k in entry (a, b).
    pub fn get(&self, a: usize, b: usize, k: usize) -> &Expr {
        &self.coef[(a * self.size + b) * self.form_dim() + k]
    }

    pub fn set(&mut self, a: usize, b: usize, k: usize, e: Expr) {
        let d = self.form_dim();
        self.coef[(a * self.size + b) * d + k] = e;
    }

    /// The 1-form in entry (a, b) as its coefficient list.
    pub fn entry(&self, a: usize, b: usize) -> &[Expr] {
        let d = self.form_dim();
        let start = (a * self.size + b) * d;
        &self.coef[start..start + d]
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coef
    }

    /// The matrix ω(∂_k).
    pub fn along(&self, k: usize) -> Vec<Expr> {
        let n = self.size;
        (0..n * n).map(|q| self.get(q / n, q % n, k).clone()).collect()
    }

    /// Σ_A ω^A_A as coefficients.
    pub fn trace(&self) -> Vec<Expr> {
        (0..self.form_dim()).map(|k| sum((0..self.size).map(|a| self.get(a, a, k).clone()))).collect()
    }

    /// Subtracts tr/N from the diagonal.
    pub fn trace_free(&self) -> GaugeMatrix {
        let tr = self.trace();
        let w = Expr::ratio(1, self.size as i64);
        GaugeMatrix::from_fn(&self.chart, &self.coords, self.size, |a, b, k| {
            if a == b {
                self.get(a, b, k) - &tr[k] * &w
            } else {
                self.get(a, b, k).clone()
            }
        })
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> GaugeMatrix {
        GaugeMatrix { chart: self.chart.clone(), coords: self.coords.clone(), size: self.size, coef: self.coef.iter().map(f).collect() }
    }

    /// φ*ω: substitute the components of φ and pull back the dx^m.
    pub fn pullback(&self, phi: &MapField) -> Result<GaugeMatrix, CartanError> {
        if phi.target != self.chart {
            return Err(GeometryError::ChartMismatch { expected: self.chart.clone(), found: phi.target.clone() }.into());
        }
        let sub = phi.substitution();
        let moved = self.map(|e| e.subs(&sub));
        let d = self.form_dim();
        Ok(GaugeMatrix::from_fn(&phi.source, &phi.source_coords, self.size, |a, b, k| {
            sum((0..d).map(|m| moved.get(a, b, m) * phi.jac(m, k)))
        }))
    }

    /// Numeric matrices ω(∂_k) at a point, one per coordinate.
    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<DMatrix<f64>>, EvalError> {
        let env = crate::geometry::point_env(&self.coords, point, params);
        let n = self.size;
        (0..self.form_dim())
            .map(|k| {
                let mut m = DMatrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        m[(a, b)] = self.get(a, b, k).eval(&env)?;
                    }
                }
                Ok(m)
            })
            .collect()
    }

    /// Entries as readable text, one string per (a, b): "c0*dx0 + c1*dx1".
    pub fn render(&self) -> Vec<Vec<String>> {
        (0..self.size)
            .map(|a| (0..self.size).map(|b| render_form(self.entry(a, b), &self.coords)).collect())
            .collect()
    }
}

pub(crate) fn render_form(coef: &[Expr], coords: &[String]) -> String {
    let parts: Vec<String> = coef
        .iter()
        .zip(coords)
        .filter(|(c, _)| !c.is_const_zero())
        .map(|(c, x)| match c {
            Expr::Const(_) if *c == Expr::one() => format!("d{x}"),
            Expr::Const(_) if c.const_value() == Some(-1.0) => format!("-d{x}"),
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) | Expr::Pow(..) => format!("{c}*d{x}"),
            _ => format!("({c})*d{x}"),
        })
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

/// An N×N matrix of 2-forms; the coefficient of dx^k∧dx^l in entry (A, B)
/// is stored at `((A*N + B)*d + k)*d + l` and is antisymmetric in (k, l).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrix {
    pub chart: String,
    pub coords: Vec<String>,
    pub size: usize,
    coef: Vec<Expr>,
}

impl CurvatureMatrix {
    pub fn form_dim(&self) -> usize {
        self.coords.len()
    }

    /// Ω^a_b(∂_k, ∂_l).
    pub fn get(&self, a: usize, b: usize, k: usize, l: usize) -> &Expr {
        let d = self.form_dim();
        &self.coef[((a * self.size + b) * d + k) * d + l]
    }

    pub fn coefficients(&self) -> &[Expr] {
        &self.coef
    }

    /// Independent coefficients (k < l) of entry (a, b).
    pub fn entry(&self, a: usize, b: usize) -> Vec<Expr> {
        let d = self.form_dim();
        let mut out = Vec::new();
        for k in 0..d {
            for l in k + 1..d {
                out.push(self.get(a, b, k, l).clone());
            }
        }
        out
    }

    /// Numeric matrices Ω(∂_k, ∂_l) for k < l, in lexicographic order of (k, l).
    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<DMatrix<f64>>, EvalError> {
        let env = crate::geometry::point_env(&self.coords, point, params);
        let (n, d) = (self.size, self.form_dim());
        let mut out = Vec::new();
        for k in 0..d {
            for l in k + 1..d {
                let mut m = DMatrix::zeros(n, n);
                for a in 0..n {
                    for b in 0..n {
                        m[(a, b)] = self.get(a, b, k, l).eval(&env)?;
                    }
                }
                out.push(m);
            }
        }
        Ok(out)
    }
}

/// The gl-block of the connection 1-form: entry (i, j) is Γ^i_jk dx^k.
pub fn connection_forms(gamma: &ConnectionField) -> GaugeMatrix {
    GaugeMatrix::from_fn(&gamma.chart, &gamma.coords, gamma.dim(), |i, j, k| gamma.get(i, j, k).clone())
}

/// Evaluates a symbolic square matrix (row-major) with an environment.
pub fn eval_matrix(m: &[Expr], size: usize, env: &BTreeMap<String, f64>) -> Result<DMatrix<f64>, EvalError> {
    let mut out = DMatrix::zeros(size, size);
    for a in 0..size {
        for b in 0..size {
            out[(a, b)] = m[a * size + b].eval(env)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeSummary {
    pub chart: String,
    pub entries: Vec<Vec<String>>,
}

impl From<&GaugeMatrix> for GaugeSummary {
    fn from(g: &GaugeMatrix) -> Self {
        GaugeSummary { chart: g.chart.clone(), entries: g.render() }
    }
}
