//! Charts, coordinate fields, and operations on projective classes of
//! torsion-free connections.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::sample::Sampler;
use crate::symexpr::{parse_in, EvalError, Expr, ParseError, Scope};

mod projective;
mod scene;

pub use projective::{
    check_jacobian, christoffel_transform, extract_upsilon, is_projective_transformation,
    is_projectively_equivalent, projective_shift, pullback_connection, thomas_parameters, thomas_transform,
    EquivalenceReport,
};
pub use scene::{Scene, SceneError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("field lives on chart {found:?}, expected {expected:?}")]
    ChartMismatch { expected: String, found: String },
    #[error("expected {expected} components, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("Christoffel symbols not symmetric at ({i},{j},{k})")]
    Asymmetric { i: usize, j: usize, k: usize },
    #[error("Jacobian is singular at {point:?} (det = {det:e})")]
    SingularJacobian { point: BTreeMap<String, f64>, det: f64 },
    #[error("point {point:?} is not on the boundary x0 = 0")]
    NotOnBoundary { point: Vec<f64> },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// A transition from the owning chart to chart `to`.
///
/// `forward` gives the target coordinates as functions of the owning chart's
/// coordinates; `inverse` gives the owning chart's coordinates as functions
/// of the target's.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub to: String,
    pub forward: Vec<Expr>,
    pub inverse: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<String>,
    /// x0 is boundary defining: the boundary is {x0 = 0} and the box has x0 >= 0.
    pub boundary: bool,
    pub bounds: Vec<(f64, f64)>,
    pub transitions: Vec<Transition>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], boundary: bool, bounds: &[(f64, f64)]) -> Chart {
        Chart {
            name: name.to_string(),
            coords: coords.iter().map(|c| c.to_string()).collect(),
            boundary,
            bounds: bounds.to_vec(),
            transitions: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn scope(&self, params: &BTreeMap<String, f64>) -> Scope {
        Scope::new(&self.coords, params.keys().cloned())
    }

    pub fn parse(&self, text: &str, params: &BTreeMap<String, f64>) -> Result<Expr, ParseError> {
        parse_in(text, &self.scope(params))
    }

    /// Samples over the chart box with parameters held at their values.
    pub fn sampler(&self, params: &BTreeMap<String, f64>) -> Sampler {
        Sampler::new(&self.coords, &self.bounds).with_fixed(params)
    }

    /// Samples over the boundary face {x0 = 0} of the box.
    pub fn boundary_sampler(&self, params: &BTreeMap<String, f64>) -> Sampler {
        self.sampler(params).pin(&self.coords[0], 0.0)
    }

    pub fn transition(&self, to: &str) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.to == to)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.bounds).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// Christoffel symbols Γ^i_jk of a torsion-free connection in one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionField {
    pub chart: String,
    pub coords: Vec<String>,
    gamma: Vec<Expr>,
}

impl ConnectionField {
    /// Builds the field from Γ^i_jk for j <= k; the other half is mirrored.
    pub fn from_fn(chart: &str, coords: &[String], mut f: impl FnMut(usize, usize, usize) -> Expr) -> ConnectionField {
        let n = coords.len();
        let mut gamma = vec![Expr::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let v = f(i, j, k).simplify();
                    gamma[(i * n + k) * n + j] = v.clone();
                    gamma[(i * n + j) * n + k] = v;
                }
            }
        }
        ConnectionField { chart: chart.to_string(), coords: coords.to_vec(), gamma }
    }

    /// Takes a full n³ array indexed `(i*n + j)*n + k`; rejects asymmetric input.
    pub fn new(chart: &str, coords: &[String], gamma: Vec<Expr>) -> Result<ConnectionField, GeometryError> {
        let n = coords.len();
        if gamma.len() != n * n * n {
            return Err(GeometryError::Dimension { expected: n * n * n, found: gamma.len() });
        }
        let gamma: Vec<Expr> = gamma.iter().map(Expr::simplify).collect();
        for i in 0..n {
            for j in 0..n {
                for k in j + 1..n {
                    if gamma[(i * n + j) * n + k] != gamma[(i * n + k) * n + j] {
                        return Err(GeometryError::Asymmetric { i, j, k });
                    }
                }
            }
        }
        Ok(ConnectionField { chart: chart.to_string(), coords: coords.to_vec(), gamma })
    }

    pub fn flat(chart: &str, coords: &[String]) -> ConnectionField {
        ConnectionField::from_fn(chart, coords, |_, _, _| Expr::zero())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Expr {
        let n = self.dim();
        &self.gamma[(i * n + j) * n + k]
    }

    pub fn components(&self) -> &[Expr] {
        &self.gamma
    }

    /// Γ^i_ik summed over i.
    pub fn trace(&self, k: usize) -> Expr {
        crate::symexpr::sum((0..self.dim()).map(|i| self.get(i, i, k).clone()))
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> ConnectionField {
        let n = self.dim();
        ConnectionField::from_fn(&self.chart, &self.coords, |i, j, k| f(&self.gamma[(i * n + j) * n + k]))
    }

    pub fn subs(&self, values: &BTreeMap<String, Expr>) -> ConnectionField {
        self.map(|e| e.subs(values))
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.iter().all(Expr::is_const_zero)
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        let env = point_env(&self.coords, point, params);
        self.gamma.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn same_chart(&self, other_chart: &str) -> Result<(), GeometryError> {
        if self.chart != other_chart {
            return Err(GeometryError::ChartMismatch { expected: self.chart.clone(), found: other_chart.to_string() });
        }
        Ok(())
    }
}

/// Components Υ_i of a 1-form in one chart.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneFormField {
    pub chart: String,
    pub coords: Vec<String>,
    pub comps: Vec<Expr>,
}

impl OneFormField {
    pub fn new(chart: &str, coords: &[String], comps: Vec<Expr>) -> Result<OneFormField, GeometryError> {
        if comps.len() != coords.len() {
            return Err(GeometryError::Dimension { expected: coords.len(), found: comps.len() });
        }
        Ok(OneFormField {
            chart: chart.to_string(),
            coords: coords.to_vec(),
            comps: comps.iter().map(Expr::simplify).collect(),
        })
    }

    pub fn zero(chart: &str, coords: &[String]) -> OneFormField {
        OneFormField { chart: chart.to_string(), coords: coords.to_vec(), comps: vec![Expr::zero(); coords.len()] }
    }

    pub fn get(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        let env = point_env(&self.coords, point, params);
        self.comps.iter().map(|e| e.eval(&env)).collect()
    }
}

/// A map φ from the source chart into the target chart, with its first and
/// second derivatives precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    pub name: String,
    pub source: String,
    pub target: String,
    pub source_coords: Vec<String>,
    pub target_coords: Vec<String>,
    pub comps: Vec<Expr>,
    /// ∂φ^i/∂x^j at `i*n + j`.
    pub jacobian: Vec<Expr>,
    /// ∂²φ^i/∂x^j∂x^k at `(i*n + j)*n + k`.
    pub hessian: Vec<Expr>,
}

impl MapField {
    pub fn new(
        name: &str,
        source: (&str, &[String]),
        target: (&str, &[String]),
        comps: Vec<Expr>,
    ) -> Result<MapField, GeometryError> {
        let n = source.1.len();
        if target.1.len() != n || comps.len() != n {
            return Err(GeometryError::Dimension { expected: n, found: comps.len().min(target.1.len()) });
        }
        let comps: Vec<Expr> = comps.iter().map(Expr::simplify).collect();
        let mut jacobian = Vec::with_capacity(n * n);
        for c in &comps {
            for x in source.1 {
                jacobian.push(c.diff(x));
            }
        }
        let mut hessian = vec![Expr::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let h = jacobian[i * n + j].diff(&source.1[k]);
                    hessian[(i * n + k) * n + j] = h.clone();
                    hessian[(i * n + j) * n + k] = h;
                }
            }
        }
        Ok(MapField {
            name: name.to_string(),
            source: source.0.to_string(),
            target: target.0.to_string(),
            source_coords: source.1.to_vec(),
            target_coords: target.1.to_vec(),
            comps,
            jacobian,
            hessian,
        })
    }

    pub fn identity(chart: &str, coords: &[String]) -> MapField {
        let comps = coords.iter().map(|c| Expr::var(c)).collect();
        MapField::new("identity", (chart, coords), (chart, coords), comps).expect("dimensions agree")
    }

    pub fn dim(&self) -> usize {
        self.source_coords.len()
    }

    pub fn jac(&self, i: usize, j: usize) -> &Expr {
        &self.jacobian[i * self.dim() + j]
    }

    pub fn hess(&self, i: usize, j: usize, k: usize) -> &Expr {
        let n = self.dim();
        &self.hessian[(i * n + j) * n + k]
    }

    /// Substitution sending target coordinates to the components of φ.
    pub fn substitution(&self) -> BTreeMap<String, Expr> {
        self.target_coords.iter().cloned().zip(self.comps.iter().cloned()).collect()
    }

    pub fn jacobian_det(&self) -> Expr {
        det(&self.jacobian, self.dim())
    }

    pub fn eval(&self, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Vec<f64>, EvalError> {
        let env = point_env(&self.source_coords, point, params);
        self.comps.iter().map(|e| e.eval(&env)).collect()
    }
}

pub(crate) fn point_env(coords: &[String], point: &[f64], params: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let mut env = params.clone();
    for (c, v) in coords.iter().zip(point) {
        env.insert(c.clone(), *v);
    }
    env
}

fn minor(m: &[Expr], n: usize, row: usize, col: usize) -> Vec<Expr> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            out.push(m[i * n + j].clone());
        }
    }
    out
}

/// Determinant of a row-major symbolic matrix by cofactor expansion.
pub fn det(m: &[Expr], n: usize) -> Expr {
    match n {
        0 => Expr::one(),
        1 => m[0].clone(),
        2 => &m[0] * &m[3] - &m[1] * &m[2],
        _ => {
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if m[j].is_const_zero() {
                    continue;
                }
                let t = &m[j] * det(&minor(m, n, 0, j), n - 1);
                terms.push(if j % 2 == 0 { t } else { -t });
            }
            crate::symexpr::sum(terms)
        }
    }
}

/// Classical adjugate, so that `m * adj = det * I`.
pub fn adjugate(m: &[Expr], n: usize) -> Vec<Expr> {
    if n == 1 {
        return vec![Expr::one()];
    }
    let mut adj = vec![Expr::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(m, n, j, i), n - 1);
            adj[i * n + j] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}
