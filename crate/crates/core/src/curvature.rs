//! Riemann and Ricci curvature, and the projective Schouten tensor.
//!
//! Convention: R^i_jkl = ∂_kΓ^i_lj − ∂_lΓ^i_kj + Γ^i_kmΓ^m_lj − Γ^i_lmΓ^m_kj,
//! Ric_ab = R^c_bca, and (n−1)P_ab = Ric_ab − (2/(n+1))Ric_[ab]. With these
//! choices P̂ = P − ∇Υ + Υ⊗Υ under Γ ↦ Γ + δΥ + δΥ.

use serde::Serialize;

use crate::geometry::{projective_shift, ConnectionField, GeometryError, OneFormField};
use crate::symexpr::{sum, Expr};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    pub chart: String,
    pub coords: Vec<String>,
    r: Vec<Expr>,
    ricci: Vec<Expr>,
}

impl CurvatureField {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// R^i_jkl.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> &Expr {
        let n = self.dim();
        &self.r[((i * n + j) * n + k) * n + l]
    }

    pub fn components(&self) -> &[Expr] {
        &self.r
    }

    /// Ric_ab at `a*n + b`.
    pub fn ricci(&self) -> &[Expr] {
        &self.ricci
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchoutenField {
    pub chart: String,
    pub coords: Vec<String>,
    /// P_ab at `a*n + b`.
    pub p: Vec<Expr>,
}

impl SchoutenField {
    pub fn get(&self, a: usize, b: usize) -> &Expr {
        &self.p[a * self.coords.len() + b]
    }
}

pub fn riemann(gamma: &ConnectionField) -> CurvatureField {
    let n = gamma.dim();
    let x = &gamma.coords;
    // ∂_k Γ^i_jl, cached
    let mut dg = vec![Expr::zero(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in j..n {
                let g = gamma.get(i, j, l);
                if g.is_const_zero() {
                    continue;
                }
                for k in 0..n {
                    let d = g.diff(&x[k]);
                    dg[((k * n + i) * n + j) * n + l] = d.clone();
                    dg[((k * n + i) * n + l) * n + j] = d;
                }
            }
        }
    }
    let dgam = |k: usize, i: usize, j: usize, l: usize| &dg[((k * n + i) * n + j) * n + l];
    let mut r = vec![Expr::zero(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in k + 1..n {
                    let mut terms = vec![dgam(k, i, l, j).clone(), -dgam(l, i, k, j)];
                    for m in 0..n {
                        let (a, b) = (gamma.get(i, k, m), gamma.get(m, l, j));
                        if !a.is_const_zero() && !b.is_const_zero() {
                            terms.push(a * b);
                        }
                        let (a, b) = (gamma.get(i, l, m), gamma.get(m, k, j));
                        if !a.is_const_zero() && !b.is_const_zero() {
                            terms.push(-(a * b));
                        }
                    }
                    let v = sum(terms);
                    r[((i * n + j) * n + l) * n + k] = -&v;
                    r[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    let mut ricci = vec![Expr::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            ricci[a * n + b] = sum((0..n).map(|c| r[((c * n + b) * n + c) * n + a].clone()));
        }
    }
    CurvatureField { chart: gamma.chart.clone(), coords: gamma.coords.clone(), r, ricci }
}

/// Ric_ab = R^c_bca.
pub fn ricci(rm: &CurvatureField) -> Vec<Expr> {
    rm.ricci.clone()
}

/// Schouten tensor from a Ricci tensor in dimension n.
pub fn schouten_from_ricci(ric: &[Expr], n: usize) -> Vec<Expr> {
    let w = Expr::ratio(1, n as i64 + 1);
    let scale = Expr::ratio(1, n as i64 - 1);
    let mut p = vec![Expr::zero(); n * n];
    for a in 0..n {
        for b in 0..n {
            let anti = &ric[a * n + b] - &ric[b * n + a];
            p[a * n + b] = (&ric[a * n + b] - anti * &w) * &scale;
        }
    }
    p
}

pub fn schouten(gamma: &ConnectionField) -> SchoutenField {
    let n = gamma.dim();
    assert!(n >= 2, "Schouten tensor needs n >= 2");
    let rm = riemann(gamma);
    SchoutenField { chart: gamma.chart.clone(), coords: gamma.coords.clone(), p: schouten_from_ricci(rm.ricci(), n) }
}

/// ∇_aΥ_b = ∂_aΥ_b − Γ^c_abΥ_c at `a*n + b`.
pub fn covariant_derivative(gamma: &ConnectionField, upsilon: &OneFormField) -> Result<Vec<Expr>, GeometryError> {
    gamma.same_chart(&upsilon.chart)?;
    let n = gamma.dim();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let mut terms = vec![upsilon.get(b).diff(&gamma.coords[a])];
            for c in 0..n {
                terms.push(-(gamma.get(c, a, b) * upsilon.get(c)));
            }
            out.push(sum(terms));
        }
    }
    Ok(out)
}

/// schouten(shift(Γ, Υ)) − (schouten(Γ) − ∇Υ + Υ⊗Υ), which vanishes identically.
pub fn schouten_shift_residual(gamma: &ConnectionField, upsilon: &OneFormField) -> Result<Vec<Expr>, GeometryError> {
    let n = gamma.dim();
    let shifted = schouten(&projective_shift(gamma, upsilon)?);
    let base = schouten(gamma);
    let nabla = covariant_derivative(gamma, upsilon)?;
    Ok((0..n * n)
        .map(|q| {
            let (a, b) = (q / n, q % n);
            &shifted.p[q] - (&base.p[q] - &nabla[q] + upsilon.get(a) * upsilon.get(b))
        })
        .collect())
}
