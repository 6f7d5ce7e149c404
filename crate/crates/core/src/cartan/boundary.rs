use serde::Serialize;

use super::{AlgebraMask, CartanError, GaugeMatrix};
use crate::curvature::schouten;
use crate::geometry::ConnectionField;
use crate::sample::Sampler;
use crate::symexpr::{is_zero, is_zero_all, Expr, ZeroVerdict};

pub(crate) fn boundary_name(chart: &str) -> String {
    format!("{chart}.boundary")
}

fn restrict(e: &Expr, x0: &str) -> Expr {
    e.subs_one(x0, &Expr::zero()).simplify()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPullback {
    /// (n+1)×(n+1) forms in the boundary coordinates.
    pub gauge: GaugeMatrix,
    /// 𝔤̃-membership of the restricted gauge.
    pub membership: ZeroVerdict,
    pub witness: Option<(usize, usize)>,
}

impl BoundaryPullback {
    pub fn is_member(&self) -> bool {
        self.membership.is_zero()
    }
}

/// Restricts ω to {x⁰ = 0}: sets x⁰ = 0 and drops dx⁰.
/// `sampler` samples the boundary coordinates.
pub fn boundary_pullback(omega: &GaugeMatrix, sampler: &Sampler) -> BoundaryPullback {
    let x0 = omega.coords[0].clone();
    let ys = omega.coords[1..].to_vec();
    let gauge = GaugeMatrix::from_fn(&boundary_name(&omega.chart), &ys, omega.size, |a, b, k| {
        restrict(omega.get(a, b, k + 1), &x0)
    });
    let (membership, witness) = AlgebraMask::GTilde.check(&gauge, sampler);
    BoundaryPullback { gauge, membership, witness }
}

/// Image in 𝔤̃/𝔨 ≅ 𝔰𝔩(n): the lower-right n×n block made trace-free.
pub fn mod_k_project(bp: &BoundaryPullback) -> Result<GaugeMatrix, CartanError> {
    if !bp.is_member() {
        let (row, col) = bp.witness.unwrap_or((0, 1));
        return Err(CartanError::NotMember { mask: AlgebraMask::GTilde, row, col, verdict: bp.membership.clone() });
    }
    let g = &bp.gauge;
    let m = g.size - 1;
    let block = GaugeMatrix::from_fn(&g.chart, &g.coords, m, |a, b, k| g.get(a + 1, b + 1, k).clone());
    Ok(block.trace_free())
}

/// Γ̃^μ_ντ(y) = Γ^μ_ντ(0, y), defined when Γ⁰_μν vanishes on the boundary.
pub fn induce_boundary_connection(gamma: &ConnectionField, sampler: &Sampler) -> Result<ConnectionField, CartanError> {
    let n = gamma.dim();
    let x0 = gamma.coords[0].clone();
    for mu in 1..n {
        for nu in mu..n {
            let v = is_zero(&restrict(gamma.get(0, mu, nu), &x0), sampler);
            if !v.is_zero() {
                return Err(CartanError::ObstructionNonzero { mu, nu, verdict: v });
            }
        }
    }
    Ok(ConnectionField::from_fn(&boundary_name(&gamma.chart), &gamma.coords[1..], |i, j, k| {
        restrict(gamma.get(i + 1, j + 1, k + 1), &x0)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchoutenComparison {
    pub coords: Vec<String>,
    /// P_στ of the ambient connection at x⁰ = 0, boundary indices only.
    pub restricted: Vec<Expr>,
    /// Schouten tensor of the induced boundary connection.
    pub induced: Vec<Expr>,
    pub difference: Vec<Expr>,
    pub verdict: ZeroVerdict,
    pub worst: Option<(usize, usize)>,
}

/// Restricted ambient Schouten tensor against the Schouten tensor of the
/// induced boundary connection.
pub fn schouten_compare(gamma: &ConnectionField, sampler: &Sampler) -> Result<SchoutenComparison, CartanError> {
    let n = gamma.dim();
    if n < 3 {
        return Err(CartanError::DimensionTooSmall(n));
    }
    let induced_gamma = induce_boundary_connection(gamma, sampler)?;
    let x0 = gamma.coords[0].clone();
    let m = n - 1;
    let p = schouten(gamma);
    let restricted: Vec<Expr> =
        (0..m * m).map(|q| restrict(p.get(q / m + 1, q % m + 1), &x0)).collect();
    let pi = schouten(&induced_gamma);
    let induced: Vec<Expr> = (0..m * m).map(|q| pi.get(q / m, q % m).clone()).collect();
    let difference: Vec<Expr> = restricted.iter().zip(&induced).map(|(a, b)| (a - b).simplify()).collect();
    let (verdict, idx) = is_zero_all(&difference, sampler);
    Ok(SchoutenComparison {
        coords: induced_gamma.coords.clone(),
        restricted,
        induced,
        difference,
        verdict,
        worst: idx.map(|q| (q / m, q % m)),
    })
}

/// Trace-free part of the leading (N−1)×(N−1) block of a gauge.
pub fn trace_free_gl_block(g: &GaugeMatrix) -> GaugeMatrix {
    let m = g.size - 1;
    GaugeMatrix::from_fn(&g.chart, &g.coords, m, |a, b, k| g.get(a, b, k).clone()).trace_free()
}
