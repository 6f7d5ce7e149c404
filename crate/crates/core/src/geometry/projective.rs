use serde::Serialize;

use super::{adjugate, Chart, ConnectionField, GeometryError, MapField, OneFormField, Transition};
use crate::sample::Sampler;
use crate::symexpr::{is_zero_all, sum, Expr, ZeroVerdict};

fn delta(i: usize, j: usize) -> bool {
    i == j
}

/// Fails if det Dφ vanishes (to 1e-12) at a sample point where it can be evaluated.
pub fn check_jacobian(phi: &MapField, sampler: &Sampler) -> Result<(), GeometryError> {
    let d = phi.jacobian_det().simplify();
    if let Some(v) = d.const_value() {
        if v.abs() <= 1e-12 {
            return Err(GeometryError::SingularJacobian { point: sampler.fixed.clone(), det: v });
        }
        return Ok(());
    }
    let compiled = d.compile(&sampler.vars, &sampler.fixed)?;
    for p in sampler.points() {
        if let Ok(v) = compiled.eval(&p) {
            if v.abs() <= 1e-12 {
                return Err(GeometryError::SingularJacobian { point: sampler.assignment(&p), det: v });
            }
        }
    }
    Ok(())
}

/// Γ̃^i_jk = (Dφ⁻¹)^i_l [∂_j∂_kφ^l + (Γ^l_sm∘φ) ∂_jφ^s ∂_kφ^m], living on the source chart.
pub fn pullback_connection(
    gamma: &ConnectionField,
    phi: &MapField,
    sampler: &Sampler,
) -> Result<ConnectionField, GeometryError> {
    gamma.same_chart(&phi.target)?;
    let n = gamma.dim();
    if phi.dim() != n {
        return Err(GeometryError::Dimension { expected: n, found: phi.dim() });
    }
    check_jacobian(phi, sampler)?;
    let composed = gamma.subs(&phi.substitution());
    let mut inner = vec![Expr::zero(); n * n * n];
    for l in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut terms = vec![phi.hess(l, j, k).clone()];
                for s in 0..n {
                    for m in 0..n {
                        let g = composed.get(l, s, m);
                        if g.is_const_zero() {
                            continue;
                        }
                        terms.push(g * phi.jac(s, j) * phi.jac(m, k));
                    }
                }
                inner[(l * n + j) * n + k] = sum(terms);
            }
        }
    }
    let d = phi.jacobian_det();
    let adj = adjugate(&phi.jacobian, n);
    Ok(ConnectionField::from_fn(&phi.source, &phi.source_coords, |i, j, k| {
        let num = sum((0..n).map(|l| &adj[i * n + l] * &inner[(l * n + j) * n + k]));
        num / &d
    }))
}

/// Expresses Γ in the coordinates of `new_chart`, the target of `transition`.
pub fn christoffel_transform(
    gamma: &ConnectionField,
    transition: &Transition,
    new_chart: &Chart,
    sampler: &Sampler,
) -> Result<ConnectionField, GeometryError> {
    let phi = MapField::new(
        "transition",
        (&new_chart.name, &new_chart.coords),
        (&gamma.chart, &gamma.coords),
        transition.inverse.clone(),
    )?;
    pullback_connection(gamma, &phi, sampler)
}

/// Γ^i_jk + δ^i_jΥ_k + δ^i_kΥ_j.
pub fn projective_shift(gamma: &ConnectionField, upsilon: &OneFormField) -> Result<ConnectionField, GeometryError> {
    gamma.same_chart(&upsilon.chart)?;
    Ok(ConnectionField::from_fn(&gamma.chart, &gamma.coords, |i, j, k| {
        let mut e = gamma.get(i, j, k).clone();
        if delta(i, j) {
            e = e + upsilon.get(k);
        }
        if delta(i, k) {
            e = e + upsilon.get(j);
        }
        e
    }))
}

/// Υ_k = (Γ̂^i_ik − Γ^i_ik)/(n+1).
pub fn extract_upsilon(shifted: &ConnectionField, gamma: &ConnectionField) -> Result<OneFormField, GeometryError> {
    gamma.same_chart(&shifted.chart)?;
    let n = gamma.dim();
    let w = Expr::ratio(1, n as i64 + 1);
    let comps = (0..n).map(|k| (shifted.trace(k) - gamma.trace(k)) * &w).collect();
    OneFormField::new(&gamma.chart, &gamma.coords, comps)
}

/// Π^i_jk = Γ^i_jk − (δ^i_jΓ^l_kl + δ^i_kΓ^l_jl)/(n+1).
pub fn thomas_parameters(gamma: &ConnectionField) -> ConnectionField {
    let n = gamma.dim();
    let w = Expr::ratio(1, n as i64 + 1);
    let traces: Vec<Expr> = (0..n).map(|k| gamma.trace(k)).collect();
    ConnectionField::from_fn(&gamma.chart, &gamma.coords, |i, j, k| {
        let mut e = gamma.get(i, j, k).clone();
        if delta(i, j) {
            e = e - &traces[k] * &w;
        }
        if delta(i, k) {
            e = e - &traces[j] * &w;
        }
        e
    })
}

/// Transformation law of the Thomas parameters under φ:
/// Π̃ = Dφ⁻¹φ'' + Dφ⁻¹(Π∘φ)(Dφ, Dφ) − (δ^i_j t_k + δ^i_k t_j)/(n+1),
/// with t_k = tr(Dφ⁻¹ ∂_k Dφ).
pub fn thomas_transform(pi: &ConnectionField, phi: &MapField, sampler: &Sampler) -> Result<ConnectionField, GeometryError> {
    let n = pi.dim();
    let moved = pullback_connection(pi, phi, sampler)?;
    let d = phi.jacobian_det();
    let adj = adjugate(&phi.jacobian, n);
    let t: Vec<Expr> = (0..n)
        .map(|k| {
            let tr = sum((0..n).flat_map(|i| (0..n).map(move |l| (i, l))).map(|(i, l)| &adj[i * n + l] * phi.hess(l, i, k)));
            tr / &d
        })
        .collect();
    let w = Expr::ratio(1, n as i64 + 1);
    Ok(ConnectionField::from_fn(&moved.chart, &moved.coords, |i, j, k| {
        let mut e = moved.get(i, j, k).clone();
        if delta(i, j) {
            e = e - &t[k] * &w;
        }
        if delta(i, k) {
            e = e - &t[j] * &w;
        }
        e
    }))
}

/// Outcome of an equivalence test: the extracted Υ and the residual
/// Γ̂ − shift(Γ, Υ), indexed like the Christoffel symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: ZeroVerdict,
    pub upsilon: OneFormField,
    pub residual: Vec<Expr>,
    /// Component (i, j, k) that decided a nonzero or undetermined verdict.
    pub worst: Option<[usize; 3]>,
}

impl EquivalenceReport {
    pub fn holds(&self) -> bool {
        self.verdict.is_zero()
    }
}

pub fn is_projectively_equivalent(
    shifted: &ConnectionField,
    gamma: &ConnectionField,
    sampler: &Sampler,
) -> Result<EquivalenceReport, GeometryError> {
    let upsilon = extract_upsilon(shifted, gamma)?;
    let expected = projective_shift(gamma, &upsilon)?;
    let n = gamma.dim();
    let residual: Vec<Expr> = shifted
        .components()
        .iter()
        .zip(expected.components())
        .map(|(a, b)| a - b)
        .collect();
    let (verdict, idx) = is_zero_all(&residual, sampler);
    let worst = idx.map(|q| [q / (n * n), (q / n) % n, q % n]);
    Ok(EquivalenceReport { verdict, upsilon, residual, worst })
}

/// φ is projective from (source, Γ_source) to (target, Γ_target) iff the
/// pullback of Γ_target is a projective shift of Γ_source.
pub fn is_projective_transformation(
    phi: &MapField,
    gamma_target: &ConnectionField,
    gamma_source: &ConnectionField,
    sampler: &Sampler,
) -> Result<EquivalenceReport, GeometryError> {
    let pulled = pullback_connection(gamma_target, phi, sampler)?;
    is_projectively_equivalent(&pulled, gamma_source, sampler)
}
