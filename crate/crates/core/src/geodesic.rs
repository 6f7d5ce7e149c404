//! Geodesics ẍ^i + Γ^i_jk ẋ^j ẋ^k = 0 by fixed-step RK4, and the drift of
//! boundary-tangent geodesics off the boundary.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::geometry::ConnectionField;
use crate::symexpr::{Compiled, EvalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {expected} components, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("initial point {0:?} lies outside the chart box")]
    OutsideBox(Vec<f64>),
    #[error("initial velocity is zero")]
    ZeroVelocity,
    #[error("velocity has normal component {0}; boundary-tangent vectors need v0 = 0")]
    NotTangent(f64),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct State {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub chart: String,
    pub h: f64,
    pub states: Vec<State>,
    /// The run stopped early because the next state left the chart box.
    pub exited: bool,
    /// The run stopped early because the connection could not be evaluated.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.x.clone()).collect()
    }

    pub fn end(&self) -> &State {
        self.states.last().expect("a trajectory holds its initial state")
    }
}

/// The geodesic spray of a connection with its Christoffel symbols compiled.
#[derive(Debug, Clone)]
pub struct GeodesicFlow {
    pub chart: String,
    n: usize,
    gamma: Vec<Option<Compiled>>,
}

impl GeodesicFlow {
    pub fn new(gamma: &ConnectionField, params: &BTreeMap<String, f64>) -> Result<GeodesicFlow, GeodesicError> {
        let compiled = gamma
            .components()
            .iter()
            .map(|e| if e.is_const_zero() { Ok(None) } else { e.compile(&gamma.coords, params).map(Some) })
            .collect::<Result<_, _>>()?;
        Ok(GeodesicFlow { chart: gamma.chart.clone(), n: gamma.dim(), gamma: compiled })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// −Γ^i_jk(x) v^j v^k.
    pub fn acceleration(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, EvalError> {
        let n = self.n;
        let mut a = vec![0.0; n];
        for (i, ai) in a.iter_mut().enumerate() {
            for j in 0..n {
                for k in 0..n {
                    if let Some(c) = &self.gamma[(i * n + j) * n + k] {
                        *ai -= c.eval(x)? * v[j] * v[k];
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn rk4_step(&self, s: &State, h: f64) -> Result<State, EvalError> {
        let shift = |base: &[f64], d: &[f64], f: f64| -> Vec<f64> { base.iter().zip(d).map(|(b, d)| b + f * d).collect() };
        let k1x = s.v.clone();
        let k1v = self.acceleration(&s.x, &s.v)?;
        let (x2, v2) = (shift(&s.x, &k1x, h / 2.0), shift(&s.v, &k1v, h / 2.0));
        let k2v = self.acceleration(&x2, &v2)?;
        let (x3, v3) = (shift(&s.x, &v2, h / 2.0), shift(&s.v, &k2v, h / 2.0));
        let k3v = self.acceleration(&x3, &v3)?;
        let (x4, v4) = (shift(&s.x, &v3, h), shift(&s.v, &k3v, h));
        let k4v = self.acceleration(&x4, &v4)?;
        let x = (0..self.n).map(|i| s.x[i] + h / 6.0 * (k1x[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
        let v = (0..self.n).map(|i| s.v[i] + h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i])).collect();
        Ok(State { x, v })
    }

    /// Integrates `steps` steps of size `h`. With `bounds`, the start must lie
    /// in the box and the run is truncated at the first state outside it.
    pub fn integrate(
        &self,
        x0: &[f64],
        v0: &[f64],
        h: f64,
        steps: usize,
        bounds: Option<&[(f64, f64)]>,
    ) -> Result<Trajectory, GeodesicError> {
        let n = self.n;
        for len in [x0.len(), v0.len()] {
            if len != n {
                return Err(GeodesicError::Dimension { expected: n, found: len });
            }
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(GeodesicError::BadStep(h));
        }
        if v0.iter().all(|c| *c == 0.0) {
            return Err(GeodesicError::ZeroVelocity);
        }
        let inside = |x: &[f64]| bounds.is_none_or(|b| x.iter().zip(b).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi));
        if !inside(x0) {
            return Err(GeodesicError::OutsideBox(x0.to_vec()));
        }
        let mut states = vec![State { x: x0.to_vec(), v: v0.to_vec() }];
        let (mut exited, mut failure) = (false, None);
        for _ in 0..steps {
            let next = match self.rk4_step(states.last().expect("nonempty"), h) {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            };
            if next.x.iter().chain(&next.v).any(|c| !c.is_finite()) || next.v.iter().all(|c| *c == 0.0) {
                failure = Some("state is no longer finite with nonzero velocity".to_string());
                break;
            }
            if !inside(&next.x) {
                exited = true;
                break;
            }
            states.push(next);
        }
        Ok(Trajectory { chart: self.chart.clone(), h, states, exited, failure })
    }
}

pub fn geodesic_integrate(
    gamma: &ConnectionField,
    params: &BTreeMap<String, f64>,
    x0: &[f64],
    v0: &[f64],
    h: f64,
    steps: usize,
    bounds: Option<&[(f64, f64)]>,
) -> Result<Trajectory, GeodesicError> {
    GeodesicFlow::new(gamma, params)?.integrate(x0, v0, h, steps, bounds)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drift {
    /// max |x⁰(t)| over the run.
    pub max_abs: f64,
    /// Least-squares fit x⁰(t) ≈ c2 t² + c3 t³ + c4 t⁴.
    pub quadratic: f64,
    pub cubic: f64,
    pub quartic: f64,
    /// −½Γ⁰_μν v^μ v^ν at the start, the expected quadratic coefficient.
    pub predicted: f64,
    pub trajectory: Trajectory,
}

/// Integrates from the boundary point (0, y0) along a boundary-tangent v.
/// The run ignores the chart box, so it may cross to x⁰ < 0.
pub fn tangency_drift(
    gamma: &ConnectionField,
    params: &BTreeMap<String, f64>,
    y0: &[f64],
    v: &[f64],
    h: f64,
    steps: usize,
) -> Result<Drift, GeodesicError> {
    let n = gamma.dim();
    if y0.len() != n - 1 {
        return Err(GeodesicError::Dimension { expected: n - 1, found: y0.len() });
    }
    if v.len() != n {
        return Err(GeodesicError::Dimension { expected: n, found: v.len() });
    }
    if v[0] != 0.0 {
        return Err(GeodesicError::NotTangent(v[0]));
    }
    let x0: Vec<f64> = std::iter::once(0.0).chain(y0.iter().copied()).collect();
    let flow = GeodesicFlow::new(gamma, params)?;
    let trajectory = flow.integrate(&x0, v, h, steps, None)?;
    let predicted = 0.5 * flow.acceleration(&x0, v)?[0];
    let ts: Vec<f64> = (0..trajectory.states.len()).map(|k| k as f64 * h).collect();
    let rs: Vec<f64> = trajectory.states.iter().map(|s| s.x[0]).collect();
    let max_abs = rs.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let (quadratic, cubic, quartic) = if ts.len() < 4 {
        (0.0, 0.0, 0.0)
    } else {
        // scale t to [0, 1] so the normal matrix stays well conditioned
        let tmax = *ts.last().expect("nonempty");
        let a = DMatrix::from_fn(ts.len(), 3, |i, j| (ts[i] / tmax).powi(j as i32 + 2));
        let b = DVector::from_column_slice(&rs);
        let c = a.svd(true, true).solve(&b, 1e-14).expect("SVD with U and V");
        (c[0] / tmax.powi(2), c[1] / tmax.powi(3), c[2] / tmax.powi(4))
    };
    Ok(Drift { max_abs, quadratic, cubic, quartic, predicted, trajectory })
}

/// log₂ of successive error ratios for step sizes halved each time.
pub fn convergence_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 { 0.0 } else { (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0) };
    ap.iter().zip(&ab).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt()
}

/// max over points of `a` of the distance to the polyline through `b`.
pub fn directed_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|p| {
            if b.len() == 1 {
                return segment_distance(p, &b[0], &b[0]);
            }
            b.windows(2).map(|w| segment_distance(p, &w[0], &w[1])).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two sampled traces.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    directed_distance(a, b).max(directed_distance(b, a))
}

/// Largest distance of the points from the line through the first and last.
pub fn chord_deviation(points: &[Vec<f64>]) -> f64 {
    match points {
        [] | [_] => 0.0,
        [first, .., last] => {
            points
                .iter()
                .map(|p| {
                    let ab: Vec<f64> = first.iter().zip(last).map(|(x, y)| y - x).collect();
                    let ap: Vec<f64> = first.iter().zip(p).map(|(x, y)| y - x).collect();
                    let len2: f64 = ab.iter().map(|v| v * v).sum();
                    let t = ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2;
                    ap.iter().zip(&ab).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::{projective_shift, OneFormField};
    use crate::symexpr::{parse, Expr};

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn disk() -> ConnectionField {
        fixtures::projective_disk().scene.connection("polar").unwrap().clone()
    }

    fn flat2() -> ConnectionField {
        fixtures::flat_half_space(2).scene.connections[0].clone()
    }

    fn cartesian(p: &[f64]) -> Vec<f64> {
        vec![(1.0 - p[0]) * p[1].cos(), (1.0 - p[0]) * p[1].sin()]
    }

    /// Exact disk geodesic from (r, t) = (0.2, 0) with velocity (0.3, 1):
    /// the line (0.8 − 0.3s, 0.8s) in Cartesian coordinates.
    fn disk_exact(s: f64) -> Vec<f64> {
        let (x, y) = (0.8 - 0.3 * s, 0.8 * s);
        vec![1.0 - x.hypot(y), y.atan2(x)]
    }

    #[test]
    fn flat_geodesics_are_lines() {
        let t = geodesic_integrate(&flat2(), &no_params(), &[0.1, 0.2], &[0.5, -0.25], 0.01, 50, None).unwrap();
        let end = &t.end().x;
        assert!((end[0] - 0.35).abs() < 1e-14 && (end[1] - 0.075).abs() < 1e-14);
        assert_eq!(t.states.len(), 51);
    }

    #[test]
    fn disk_geodesics_are_straight_in_cartesian_coordinates() {
        let t = geodesic_integrate(&disk(), &no_params(), &[0.2, 0.0], &[0.3, 1.0], 1e-3, 100, None).unwrap();
        let pts: Vec<Vec<f64>> = t.points().iter().map(|p| cartesian(p)).collect();
        assert!(chord_deviation(&pts) <= 1e-8, "{:e}", chord_deviation(&pts));
        let exact = disk_exact(0.1);
        assert!((t.end().x[0] - exact[0]).abs() < 1e-12 && (t.end().x[1] - exact[1]).abs() < 1e-12);
    }

    #[test]
    fn rk4_is_fourth_order_on_the_disk() {
        let flow = GeodesicFlow::new(&disk(), &no_params()).unwrap();
        let t_end = 1.0;
        let errors: Vec<f64> = [1e-2f64, 5e-3, 2.5e-3]
            .iter()
            .map(|&h| {
                let steps = (t_end / h).round() as usize;
                let tr = flow.integrate(&[0.2, 0.0], &[0.3, 1.0], h, steps, None).unwrap();
                let exact = disk_exact(t_end);
                tr.end().x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .collect();
        for o in convergence_orders(&errors) {
            assert!((3.5..=4.5).contains(&o), "order {o}, errors {errors:?}");
        }
    }

    #[test]
    fn leaving_the_box_truncates() {
        let bounds = [(0.0, 0.5), (-1.0, 1.0)];
        let t = geodesic_integrate(&disk(), &no_params(), &[0.2, 0.0], &[-1.0, 0.0], 0.01, 100, Some(&bounds)).unwrap();
        assert!(t.exited);
        assert!(t.states.iter().all(|s| s.x[0] >= 0.0));
        assert!(t.states.len() < 101);
        assert!(matches!(
            geodesic_integrate(&disk(), &no_params(), &[0.7, 0.0], &[1.0, 0.0], 0.01, 1, Some(&bounds)),
            Err(GeodesicError::OutsideBox(_))
        ));
        assert!(matches!(
            geodesic_integrate(&disk(), &no_params(), &[0.2, 0.0], &[0.0, 0.0], 0.01, 1, None),
            Err(GeodesicError::ZeroVelocity)
        ));
    }

    #[test]
    fn evaluation_failure_stops_the_run() {
        let xy = fixtures::half_space_coords(2);
        let mut comps = vec![Expr::zero(); 8];
        comps[3] = parse("sqrt(x)").unwrap();
        let g = ConnectionField::new("half", &xy, comps).unwrap();
        let t = geodesic_integrate(&g, &no_params(), &[0.01, 0.0], &[-1.0, 1.0], 0.1, 10, None).unwrap();
        assert_eq!(t.states.len(), 1);
        assert!(t.failure.unwrap().contains("sqrt"));
    }

    #[test]
    fn shifted_flat_traces_the_same_lines() {
        let xy = fixtures::half_space_coords(2);
        let ups = OneFormField::new("half", &xy, vec![parse("x + 2*y").unwrap(), parse("1 - x").unwrap()]).unwrap();
        let shifted = projective_shift(&flat2(), &ups).unwrap();
        let a = geodesic_integrate(&shifted, &no_params(), &[0.3, 0.1], &[0.4, 0.7], 1e-3, 400, None).unwrap();
        assert!(chord_deviation(&a.points()) <= 1e-8);
        let b = geodesic_integrate(&flat2(), &no_params(), &[0.3, 0.1], &[0.4, 0.7], 1e-3, 4000, None).unwrap();
        assert!(directed_distance(&a.points(), &b.points()) <= 1e-6);
        // truncated to the same extent, the traces agree both ways
        let end = a.end().x.clone();
        let cut: Vec<Vec<f64>> = b.points().into_iter().filter(|p| (p[0] - 0.3) * 0.4 + (p[1] - 0.1) * 0.7 <= (end[0] - 0.3) * 0.4 + (end[1] - 0.1) * 0.7).collect();
        assert!(hausdorff(&a.points(), &cut) <= 1e-3);
    }

    #[test]
    fn shifted_disk_traces_the_same_curves() {
        let rt = vec!["r".to_string(), "t".to_string()];
        let ups = OneFormField::new("polar", &rt, vec![parse("t").unwrap(), parse("r + 1").unwrap()]).unwrap();
        let shifted = projective_shift(&disk(), &ups).unwrap();
        let a = geodesic_integrate(&shifted, &no_params(), &[0.2, 0.0], &[0.3, 1.0], 1e-3, 300, None).unwrap();
        let b = geodesic_integrate(&disk(), &no_params(), &[0.2, 0.0], &[0.3, 1.0], 1e-3, 3000, None).unwrap();
        assert!(directed_distance(&a.points(), &b.points()) <= 1e-6);
    }

    #[test]
    fn disk_boundary_drift_is_quadratic() {
        let d = tangency_drift(&disk(), &no_params(), &[0.0], &[0.0, 1.0], 1e-3, 100).unwrap();
        assert!((d.quadratic + 0.5).abs() < 1e-3, "{}", d.quadratic);
        assert_eq!(d.predicted, -0.5);
        assert!(d.max_abs > 1e-3);
    }

    #[test]
    fn flat_and_tangent_invariant_boundaries_do_not_drift() {
        let d = tangency_drift(&flat2(), &no_params(), &[0.3], &[0.0, 1.0], 1e-3, 500).unwrap();
        assert!(d.max_abs <= 1e-10);
        let g = fixtures::tangent_invariant().scene.connections[0].clone();
        let d = tangency_drift(&g, &no_params(), &[-0.2], &[0.0, 1.5], 1e-3, 500).unwrap();
        assert!(d.max_abs <= 1e-8);
        assert!(matches!(tangency_drift(&g, &no_params(), &[0.0], &[0.1, 1.0], 1e-3, 5), Err(GeodesicError::NotTangent(_))));
    }

    #[test]
    fn quadratic_drift_is_half_the_obstruction() {
        for f in fixtures::all() {
            let Some(g) = f.scene.connection(&f.chart) else { continue };
            let chart = f.scene.chart(&f.chart).unwrap();
            if !chart.boundary {
                continue;
            }
            for y in chart.boundary_sampler(&f.scene.params).with_count(4).points() {
                let point: Vec<f64> = std::iter::once(0.0).chain(y.iter().copied()).collect();
                let o = crate::rigidity::boundary_obstruction(g, &point, &f.scene.params, 1e-9).unwrap();
                let mut v = vec![0.0; g.dim()];
                v[1] = 1.0;
                let d = tangency_drift(g, &f.scene.params, &y, &v, 1e-3, 50).unwrap();
                assert!((d.predicted + 0.5 * o.values[0]).abs() < 1e-12, "{} at {y:?}", f.name);
                assert!((d.quadratic - d.predicted).abs() < 1e-4 * (1.0 + d.predicted.abs()), "{} at {y:?}: {d:?}", f.name);
                if o.verdict == crate::rigidity::PointVerdict::Rigid {
                    assert!(d.max_abs > 1e-10);
                }
            }
        }
    }

    #[test]
    fn trace_distances() {
        let a = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = vec![vec![0.5, 0.5]];
        assert!((directed_distance(&b, &a) - 0.5).abs() < 1e-15);
        assert!((hausdorff(&a, &b) - 0.5f64.hypot(0.5)).abs() < 1e-15);
        assert_eq!(convergence_orders(&[16.0, 1.0]), vec![4.0]);
    }
    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn shifts_preserve_disk_traces(c in proptest::collection::vec(-1.0f64..1.0, 6), vr in -0.5f64..0.5) {
            let rt = vec!["r".to_string(), "t".to_string()];
            let comp = |a: f64, b: f64, c: f64| Expr::from_f64(a) + Expr::from_f64(b) * Expr::var("r") + Expr::from_f64(c) * Expr::var("t");
            let ups = OneFormField::new("polar", &rt, vec![comp(c[0], c[1], c[2]), comp(c[3], c[4], c[5])]).unwrap();
            let shifted = projective_shift(&disk(), &ups).unwrap();
            let a = geodesic_integrate(&shifted, &no_params(), &[0.2, 0.0], &[vr, 1.0], 1e-3, 200, None).unwrap();
            let b = geodesic_integrate(&disk(), &no_params(), &[0.2, 0.0], &[vr, 1.0], 1e-3, 2000, None).unwrap();
            proptest::prop_assert!(a.failure.is_none() && b.failure.is_none());
            proptest::prop_assert!(directed_distance(&a.points(), &b.points()) <= 1e-6);
        }
    }
}
