//! Boundary rigidity: the obstruction Γ⁰_μν on the boundary, the 2-jet
//! system of boundary-fixing projective maps, and Taylor data of candidate maps.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{projective_shift, pullback_connection, ConnectionField, GeometryError, MapField, OneFormField, Scene};
use crate::sample::Sampler;
use crate::symexpr::{EvalError, Expr};

mod jets;
#[cfg(test)]
mod tests;

pub use jets::{
    boundary_identity_residual, boundary_taylor, jet_system_assemble, solve_boundary_jets, JetSolution, JetSystem,
    JetVector, SolveStatus, TaylorJet,
};

/// Verdict at a single boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PointVerdict {
    Rigid,
    NonrigidCandidate,
}

/// Verdict over all sampled boundary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GlobalVerdict {
    Rigid,
    NonrigidCandidate,
    /// Some points rigid, some not. One rigid point already forces rigidity.
    Mixed,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RigidityError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("point {point:?} is not on the boundary x0 = 0")]
    NotOnBoundary { point: Vec<f64> },
    #[error("point has {found} coordinates, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("chart {0} is not a boundary chart")]
    NotBoundaryChart(String),
    #[error("unknown chart {0}")]
    UnknownChart(String),
    #[error("no connection on chart {0}")]
    NoConnection(String),
    #[error("the sampler has no points")]
    EmptySampler,
    #[error("map is not the identity on the boundary: component {component} is off by {residual:e} at {point:?}")]
    BoundaryIdentity { component: usize, point: BTreeMap<String, f64>, residual: f64 },
    #[error("d(phi^0)/dx^0 = {derivative} at the point; rescale x0 by {factor} first")]
    Normalization { derivative: f64, factor: f64 },
}

pub(crate) fn check_boundary_point(gamma: &ConnectionField, point: &[f64]) -> Result<(), RigidityError> {
    if point.len() != gamma.dim() {
        return Err(RigidityError::Dimension { expected: gamma.dim(), found: point.len() });
    }
    if point[0].abs() > 1e-12 {
        return Err(RigidityError::NotOnBoundary { point: point.to_vec() });
    }
    Ok(())
}

/// Γ⁰_μν at a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstruction {
    pub point: Vec<f64>,
    /// Row-major (n−1)×(n−1) values of Γ⁰_μν(p).
    pub values: Vec<f64>,
    /// Γ⁰_μν(0, y) as functions of the boundary coordinates.
    pub restricted: Vec<Expr>,
    pub max_abs: f64,
    /// Largest entry (μ, ν), counting boundary indices from 1.
    pub witness: Option<(usize, usize)>,
    pub verdict: PointVerdict,
}

/// Rigid iff some |Γ⁰_μν(p)| exceeds `tol`.
pub fn boundary_obstruction(
    gamma: &ConnectionField,
    point: &[f64],
    params: &BTreeMap<String, f64>,
    tol: f64,
) -> Result<Obstruction, RigidityError> {
    check_boundary_point(gamma, point)?;
    let n = gamma.dim();
    let env = crate::geometry::point_env(&gamma.coords, point, params);
    let mut values = Vec::with_capacity((n - 1) * (n - 1));
    let mut restricted = Vec::with_capacity((n - 1) * (n - 1));
    let (mut max_abs, mut witness) = (0.0f64, None);
    for mu in 1..n {
        for nu in 1..n {
            let e = gamma.get(0, mu, nu).subs_one(&gamma.coords[0], &Expr::zero()).simplify();
            let v = e.eval(&env)?;
            if v.abs() > max_abs {
                max_abs = v.abs();
                witness = Some((mu, nu));
            }
            values.push(v);
            restricted.push(e);
        }
    }
    let verdict = if max_abs > tol { PointVerdict::Rigid } else { PointVerdict::NonrigidCandidate };
    if verdict == PointVerdict::NonrigidCandidate {
        witness = None;
    }
    Ok(Obstruction { point: point.to_vec(), values, restricted, max_abs, witness, verdict })
}

/// Γ + shift by a random 1-form with affine coefficients in the chart coordinates.
pub fn random_projective_shift(gamma: &ConnectionField, rng: &mut impl Rng) -> Result<ConnectionField, GeometryError> {
    let comps: Vec<Expr> = (0..gamma.dim())
        .map(|_| {
            let mut e = Expr::from_f64(round(rng.gen_range(-1.0..1.0)));
            for x in &gamma.coords {
                e = e + Expr::from_f64(round(rng.gen_range(-1.0..1.0))) * Expr::var(x);
            }
            e.simplify()
        })
        .collect();
    let ups = OneFormField::new(&gamma.chart, &gamma.coords, comps)?;
    projective_shift(gamma, &ups)
}

fn round(v: f64) -> f64 {
    (v * 64.0).round() / 64.0
}

/// A chart change that maps the boundary to itself: old coordinates in terms
/// of new ones (s, w) are x⁰ = s·exp(c·w¹), y = L·w + k·s + m·s².
#[derive(Debug, Clone)]
pub struct ChartChange {
    pub map: MapField,
    pub linear: DMatrix<f64>,
}

impl ChartChange {
    /// New coordinates of an old boundary point (0, y).
    pub fn boundary_image(&self, point: &[f64]) -> Vec<f64> {
        let m = point.len() - 1;
        let y = DMatrix::from_column_slice(m, 1, &point[1..]);
        let w = self.linear.clone().lu().solve(&y).expect("linear part is invertible");
        std::iter::once(0.0).chain(w.iter().copied()).collect()
    }
}

pub fn random_boundary_chart(gamma: &ConnectionField, rng: &mut impl Rng) -> Result<ChartChange, GeometryError> {
    let n = gamma.dim();
    let m = n - 1;
    let new: Vec<String> = std::iter::once("s".to_string()).chain((1..n).map(|k| format!("w{k}"))).collect();
    let s = Expr::var(&new[0]);
    let linear = DMatrix::from_fn(m, m, |i, j| round(if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.3..0.3)));
    let c = round(rng.gen_range(-0.5..0.5));
    let mut comps = vec![(s.clone() * Expr::call(crate::symexpr::Func::Exp, Expr::from_f64(c) * Expr::var(&new[1]))).simplify()];
    for i in 0..m {
        let k = round(rng.gen_range(-0.5..0.5));
        let q = round(rng.gen_range(-0.5..0.5));
        let mut e = Expr::from_f64(k) * &s + Expr::from_f64(q) * s.pow(2);
        for j in 0..m {
            e = e + Expr::from_f64(linear[(i, j)]) * Expr::var(&new[j + 1]);
        }
        comps.push(e.simplify());
    }
    let map = MapField::new("boundary-chart", (&format!("{}'", gamma.chart), &new), (&gamma.chart, &gamma.coords), comps)?;
    Ok(ChartChange { map, linear })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub point: Vec<f64>,
    pub obstruction: Vec<f64>,
    pub max_abs: f64,
    pub verdict: PointVerdict,
    pub shifted: PointVerdict,
    pub rechart: PointVerdict,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    pub chart: String,
    pub verdict: GlobalVerdict,
    /// Some sampled point has a nonzero obstruction, so the boundary is rigid.
    pub rigid_point_found: bool,
    pub points: Vec<PointReport>,
    /// Points whose re-tests disagree; these indicate an implementation error.
    pub disagreements: Vec<Vec<f64>>,
    pub errors: Vec<String>,
    /// Exact boundary restriction of Γ⁰_μν, row-major.
    pub obstruction_exprs: Vec<String>,
}

/// Tests every boundary point of `sampler` (which samples the boundary
/// coordinates) and re-tests it after a random projective shift and in a
/// random boundary-compatible chart.
pub fn rigidity_scan(scene: &Scene, chart: &str, sampler: &Sampler) -> Result<RigidityReport, RigidityError> {
    let ch = scene.chart(chart).ok_or_else(|| RigidityError::UnknownChart(chart.to_string()))?;
    if !ch.boundary {
        return Err(RigidityError::NotBoundaryChart(chart.to_string()));
    }
    let gamma = scene.connection(chart).ok_or_else(|| RigidityError::NoConnection(chart.to_string()))?;
    let points = sampler.points();
    if points.is_empty() {
        return Err(RigidityError::EmptySampler);
    }
    let params = &scene.params;
    let tol = sampler.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed ^ 0x5eed);
    let shifted = random_projective_shift(gamma, &mut rng)?;
    let change = random_boundary_chart(gamma, &mut rng)?;
    let new_coords = &change.map.source_coords;
    let jac_sampler = Sampler::new(new_coords, &ch.bounds).with_fixed(params).with_count(8);
    let rechart = pullback_connection(gamma, &change.map, &jac_sampler)?;

    let results: Vec<Result<PointReport, RigidityError>> = points
        .par_iter()
        .map(|y| {
            let p: Vec<f64> = std::iter::once(0.0).chain(y.iter().copied()).collect();
            let o = boundary_obstruction(gamma, &p, params, tol)?;
            let s = boundary_obstruction(&shifted, &p, params, tol)?;
            let r = boundary_obstruction(&rechart, &change.boundary_image(&p), params, tol)?;
            Ok(PointReport {
                point: p,
                obstruction: o.values,
                max_abs: o.max_abs,
                verdict: o.verdict,
                shifted: s.verdict,
                rechart: r.verdict,
                agree: o.verdict == s.verdict && o.verdict == r.verdict,
            })
        })
        .collect();

    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(p) => reports.push(p),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let disagreements: Vec<Vec<f64>> = reports.iter().filter(|p| !p.agree).map(|p| p.point.clone()).collect();
    let rigid = reports.iter().filter(|p| p.verdict == PointVerdict::Rigid).count();
    let verdict = if !errors.is_empty() || !disagreements.is_empty() || reports.is_empty() {
        GlobalVerdict::Undetermined
    } else if rigid == reports.len() {
        GlobalVerdict::Rigid
    } else if rigid == 0 {
        GlobalVerdict::NonrigidCandidate
    } else {
        GlobalVerdict::Mixed
    };
    let n = gamma.dim();
    let obstruction_exprs = (1..n)
        .flat_map(|mu| (1..n).map(move |nu| (mu, nu)))
        .map(|(mu, nu)| gamma.get(0, mu, nu).subs_one(&gamma.coords[0], &Expr::zero()).simplify().to_string())
        .collect();
    Ok(RigidityReport {
        chart: chart.to_string(),
        verdict,
        rigid_point_found: rigid > 0,
        points: reports,
        disagreements,
        errors,
        obstruction_exprs,
    })
}
