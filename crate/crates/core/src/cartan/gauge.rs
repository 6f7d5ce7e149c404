use serde::Serialize;

use super::{AlgebraMask, CartanError, CurvatureMatrix, GaugeMatrix};
use crate::curvature::schouten;
use crate::geometry::{adjugate, det, ConnectionField};
use crate::sample::Sampler;
use crate::symexpr::{is_zero, is_zero_all, sum, Expr, ZeroVerdict};

/// Normal gauge of the projective class of Γ:
/// gl-block Γ^i_jk dx^k − δ^i_j tr/(n+1), last column dx^i, bottom row
/// −P_kj dx^k, corner −tr/(n+1), where tr = Γ^l_lk dx^k.
pub fn normal_gauge(gamma: &ConnectionField) -> GaugeMatrix {
    let n = gamma.dim();
    assert!(n >= 2, "normal gauge needs n >= 2");
    let p = schouten(gamma);
    let w = Expr::ratio(1, n as i64 + 1);
    let tr: Vec<Expr> = (0..n).map(|k| gamma.trace(k) * &w).collect();
    GaugeMatrix::from_fn(&gamma.chart, &gamma.coords, n + 1, |a, b, k| match (a < n, b < n) {
        (true, true) => {
            let g = gamma.get(a, b, k).clone();
            if a == b {
                g - &tr[k]
            } else {
                g
            }
        }
        (true, false) => {
            if a == k {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        (false, true) => -p.get(k, b),
        (false, false) => -&tr[k],
    })
}

/// The flat gauge of dimension `coords.len()`: only the translation column.
pub fn flat_gauge(chart: &str, coords: &[String]) -> GaugeMatrix {
    let n = coords.len();
    GaugeMatrix::from_fn(chart, coords, n + 1, |a, b, k| if b == n && a == k { Expr::one() } else { Expr::zero() })
}

/// Ω(∂_k, ∂_l) = ∂_kω(∂_l) − ∂_lω(∂_k) + [ω(∂_k), ω(∂_l)].
pub fn gauge_curvature(omega: &GaugeMatrix) -> CurvatureMatrix {
    let (n, d) = (omega.size, omega.form_dim());
    let x = &omega.coords;
    let mut coef = vec![Expr::zero(); n * n * d * d];
    for a in 0..n {
        for b in 0..n {
            for k in 0..d {
                for l in k + 1..d {
                    let mut terms = vec![omega.get(a, b, l).diff(&x[k]), -omega.get(a, b, k).diff(&x[l])];
                    for c in 0..n {
                        let (p, q) = (omega.get(a, c, k), omega.get(c, b, l));
                        if !p.is_const_zero() && !q.is_const_zero() {
                            terms.push(p * q);
                        }
                        let (p, q) = (omega.get(a, c, l), omega.get(c, b, k));
                        if !p.is_const_zero() && !q.is_const_zero() {
                            terms.push(-(p * q));
                        }
                    }
                    let v = sum(terms);
                    coef[((a * n + b) * d + l) * d + k] = -&v;
                    coef[((a * n + b) * d + k) * d + l] = v;
                }
            }
        }
    }
    CurvatureMatrix { chart: omega.chart.clone(), coords: omega.coords.clone(), size: n, coef }
}

/// Torsion-free means 𝔥-valued curvature: Ω^i_n = 0 for i < n.
pub fn check_torsion_free(omega: &CurvatureMatrix, sampler: &Sampler) -> (ZeroVerdict, Option<usize>) {
    let n = omega.size - 1;
    let entries: Vec<Expr> = (0..n).flat_map(|i| omega.entry(i, n)).collect();
    let per_row = omega.entry(0, n).len().max(1);
    let (v, idx) = is_zero_all(&entries, sampler);
    (v, idx.map(|q| q / per_row))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub torsion: ZeroVerdict,
    /// Row of the last column that carries torsion, if any.
    pub torsion_row: Option<usize>,
    pub traces: ZeroVerdict,
    /// (j, k) of the first trace Σ_i Ω^i_j(∂_i, ∂_k) that is not zero.
    pub failing_trace: Option<(usize, usize)>,
}

impl NormalityReport {
    pub fn passes(&self) -> bool {
        self.torsion.is_zero() && self.traces.is_zero()
    }

    pub fn verdict(&self) -> ZeroVerdict {
        self.torsion.clone().combine(self.traces.clone())
    }
}

/// Torsion-freeness together with the traces Σ_i Ω^i_j(∂_i, ∂_k) = 0 over the gl-block.
pub fn check_normality_traces(omega: &CurvatureMatrix, sampler: &Sampler) -> NormalityReport {
    let (torsion, torsion_row) = check_torsion_free(omega, sampler);
    let n = omega.size - 1;
    let mut traces = ZeroVerdict::ProvablyZero;
    let mut failing_trace = None;
    for j in 0..n {
        for k in 0..n {
            let e = sum((0..n).map(|i| omega.get(i, j, i, k).clone()));
            let v = is_zero(&e, sampler);
            if !v.is_zero() && failing_trace.is_none() {
                failing_trace = Some((j, k));
            }
            traces = traces.combine(v);
        }
    }
    NormalityReport { torsion, torsion_row, traces, failing_trace }
}

/// ω' = h⁻¹dh + h⁻¹ωh for an H-valued function h (row-major entries).
pub fn gauge_transform(omega: &GaugeMatrix, h: &[Expr], sampler: &Sampler) -> Result<GaugeMatrix, CartanError> {
    let (n, d) = (omega.size, omega.form_dim());
    assert_eq!(h.len(), n * n, "h must be {n}x{n}");
    let residuals = AlgebraMask::H.residuals(h, n);
    for (q, (row, col)) in AlgebraMask::H.constrained(n).into_iter().enumerate() {
        let v = is_zero(&residuals[q], sampler);
        if !v.is_zero() {
            return Err(CartanError::OutsideMask { mask: AlgebraMask::H, row, col, verdict: v });
        }
    }
    let dh = det(h, n);
    let adj = adjugate(h, n);
    let inv: Vec<Expr> = adj.iter().map(|e| e / &dh).collect();
    let x = &omega.coords;
    let mut out = GaugeMatrix::zeros(&omega.chart, x, n);
    for (k, xk) in x.iter().enumerate().take(d) {
        let w = omega.along(k);
        let dhk: Vec<Expr> = h.iter().map(|e| e.diff(xk)).collect();
        let rhs: Vec<Expr> = (0..n * n)
            .map(|q| {
                let (a, b) = (q / n, q % n);
                sum((0..n).map(|c| &w[a * n + c] * &h[c * n + b]).chain(std::iter::once(dhk[q].clone())))
            })
            .collect();
        for a in 0..n {
            for b in 0..n {
                let e = sum((0..n).map(|c| &inv[a * n + c] * &rhs[c * n + b]));
                out.set(a, b, k, e);
            }
        }
    }
    Ok(out)
}
