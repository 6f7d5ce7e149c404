//! The checks behind each subcommand, assembled into reports.

use std::path::Path;

use serde_json::json;

use crate::cartan::{
    boundary_pullback, check_normality_traces, connection_forms, gauge_curvature, induce_boundary_connection,
    mod_k_project, normal_gauge, schouten_compare, trace_free_gl_block, CartanError, GaugeSummary,
};
use crate::geodesic::{tangency_drift, GeodesicError, GeodesicFlow};
use crate::geometry::{is_projective_transformation, Chart, ConnectionField, GeometryError, Scene, SceneError};
use crate::report::{Record, Report, Status, Table};
use crate::rigidity::{
    boundary_identity_residual, rigidity_scan, solve_boundary_jets, GlobalVerdict, PointVerdict, RigidityError,
    SolveStatus,
};
use crate::sample::{Sampler, DEFAULT_SAMPLES, DEFAULT_TOL};
use crate::symexpr::{is_zero_all, EvalError};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

fn input(msg: impl Into<String>) -> CommandError {
    CommandError::Input(msg.into())
}

/// Sampling flags shared by the subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

impl Default for Options {
    fn default() -> Options {
        Options { seed: 0, samples: DEFAULT_SAMPLES, tol: DEFAULT_TOL }
    }
}

impl Options {
    fn apply(&self, s: Sampler) -> Sampler {
        s.with_count(self.samples).with_seed(self.seed).with_tol(self.tol)
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, CommandError> {
    Ok(Scene::load(path)?)
}

/// The named chart, or the first boundary chart that carries a connection.
fn pick_chart<'a>(scene: &'a Scene, name: Option<&str>, need_boundary: bool) -> Result<&'a Chart, CommandError> {
    let chart = match name {
        Some(n) => scene.chart(n).ok_or_else(|| input(format!("unknown chart {n:?}")))?,
        None => scene
            .charts
            .iter()
            .filter(|c| scene.connection(&c.name).is_some())
            .find(|c| c.boundary || !need_boundary)
            .or_else(|| scene.charts.iter().find(|c| scene.connection(&c.name).is_some()))
            .ok_or_else(|| input("the scene has no connection"))?,
    };
    if need_boundary && !chart.boundary {
        return Err(input(format!("chart {:?} is not a boundary chart", chart.name)));
    }
    Ok(chart)
}

fn connection<'a>(scene: &'a Scene, chart: &Chart) -> Result<&'a ConnectionField, CommandError> {
    scene.connection(&chart.name).ok_or_else(|| input(format!("no connection on chart {:?}", chart.name)))
}

fn verdict_name(v: GlobalVerdict) -> &'static str {
    match v {
        GlobalVerdict::Rigid => "RIGID",
        GlobalVerdict::NonrigidCandidate => "NONRIGID_CANDIDATE",
        GlobalVerdict::Mixed => "MIXED",
        GlobalVerdict::Undetermined => "UNDETERMINED",
    }
}

fn point_name(v: PointVerdict) -> &'static str {
    match v {
        PointVerdict::Rigid => "RIGID",
        PointVerdict::NonrigidCandidate => "NONRIGID_CANDIDATE",
    }
}

pub fn cmd_rigidity(scene: &Scene, chart: Option<&str>, opts: &Options) -> Result<Report, CommandError> {
    let chart = pick_chart(scene, chart, true)?;
    let sampler = opts.apply(chart.boundary_sampler(&scene.params));
    let scan = rigidity_scan(scene, &chart.name, &sampler)?;
    let mut report = Report::new("rigidity", Some(scene), opts.seed);

    let max_obstruction = scan.points.iter().fold(0.0f64, |m, p| m.max(p.max_abs));
    let rigid_points: Vec<&Vec<f64>> =
        scan.points.iter().filter(|p| p.verdict == PointVerdict::Rigid).map(|p| &p.point).collect();
    let vanishing: Vec<&Vec<f64>> =
        scan.points.iter().filter(|p| p.verdict != PointVerdict::Rigid).map(|p| &p.point).collect();
    let status = if scan.verdict == GlobalVerdict::Undetermined { Status::Undetermined } else { Status::Pass };
    let mut summary = Record::new(
        "rigidity",
        "the boundary is rigid once Γ⁰_μν is nonzero at one boundary point",
    )
    .input("chart", &chart.name)
    .input("samples", opts.samples)
    .input("tol", opts.tol)
    .status(status)
    .outcome(verdict_name(scan.verdict))
    .residual("max_obstruction", max_obstruction)
    .residual("disagreements", scan.disagreements.len() as f64)
    .residual("errors", scan.errors.len() as f64)
    .details(json!({
        "rigid_points": rigid_points.len(),
        "vanishing_points": vanishing.len(),
        "rigid_point_found": scan.rigid_point_found,
        "errors": scan.errors,
    }));
    if scan.verdict == GlobalVerdict::Mixed {
        summary = summary.witness(json!({ "rigid": rigid_points[0], "vanishing": vanishing[0] }));
    }
    report.push(summary);

    let exact: Vec<crate::Expr> = scan
        .obstruction_exprs
        .iter()
        .map(|s| chart.parse(s, &scene.params))
        .collect::<Result<_, _>>()
        .map_err(|e| input(e.to_string()))?;
    let constant = exact.iter().all(|e| e.free_vars().iter().all(|v| scene.params.contains_key(v)));
    report.push(
        Record::new("rigidity.obstruction", "Γ⁰_μν restricted to the boundary x⁰ = 0, row-major over μ, ν ≥ 1")
            .input("chart", &chart.name)
            .status(Status::Info)
            .outcome(scan.obstruction_exprs.join(", "))
            .details(json!({ "exprs": scan.obstruction_exprs, "constant": constant })),
    );

    for p in &scan.points {
        let mut r = Record::new("rigidity.point", "Γ⁰_μν at a boundary point, re-tested after a projective shift and a chart change")
            .input("point", &p.point)
            .status(if p.agree { Status::Pass } else { Status::Fail })
            .outcome(point_name(p.verdict))
            .residual("max_abs", p.max_abs)
            .details(json!({
                "shifted": point_name(p.shifted),
                "rechart": point_name(p.rechart),
            }));
        if p.verdict == PointVerdict::Rigid {
            r = r.witness(json!({ "obstruction": p.obstruction }));
        }
        report.push(r);
    }
    Ok(report)
}

pub fn cmd_verify_map(scene: &Scene, map: &str, opts: &Options) -> Result<Report, CommandError> {
    let phi = scene.map(map).ok_or_else(|| input(format!("unknown map {map:?}")))?;
    let source = scene.chart(&phi.source).ok_or_else(|| input(format!("unknown chart {:?}", phi.source)))?;
    let target = scene.chart(&phi.target).ok_or_else(|| input(format!("unknown chart {:?}", phi.target)))?;
    let gs = connection(scene, source)?;
    let gt = connection(scene, target)?;
    let sampler = opts.apply(source.sampler(&scene.params));
    let eq = is_projective_transformation(phi, gt, gs, &sampler)?;
    let mut report = Report::new("verify-map", Some(scene), opts.seed);
    let status = Status::from_zero(&eq.verdict);
    let outcome = match status {
        Status::Pass => "projective",
        Status::Fail => "not projective",
        _ => "undetermined",
    };
    let mut r = Record::new(
        "verify_map",
        "φ is projective iff the pulled-back connection is Γ shifted by a 1-form Υ",
    )
    .input("map", map)
    .input("source", &phi.source)
    .input("target", &phi.target)
    .input("samples", opts.samples)
    .input("tol", opts.tol)
    .status(status)
    .outcome(outcome)
    .residual("max_abs", eq.verdict.max_abs())
    .details(json!({
        "upsilon": eq.upsilon.comps.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "verdict": eq.verdict,
    }));
    if let Some(w) = eq.worst {
        r = r.witness(json!({ "component": w }));
    }
    report.push(r);

    if source.boundary && phi.source == phi.target {
        let bs = opts.apply(source.boundary_sampler(&scene.params));
        let (max, component, at) = boundary_identity_residual(phi, &bs)?;
        let fixed = max <= opts.tol;
        let mut r = Record::new("verify_map.boundary_identity", "φ restricts to the identity on the boundary x⁰ = 0")
            .input("map", map)
            .status(Status::Info)
            .outcome(if fixed { "identity on the boundary" } else { "moves the boundary" })
            .residual("max_abs", max);
        if !fixed {
            r = r.witness(json!({ "component": component, "point": at }));
        }
        report.push(r);
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_geodesic(
    scene: &Scene,
    chart: Option<&str>,
    x0: &[f64],
    v0: &[f64],
    h: f64,
    steps: usize,
    opts: &Options,
) -> Result<Report, CommandError> {
    let chart = pick_chart(scene, chart, false)?;
    let gamma = connection(scene, chart)?;
    let flow = GeodesicFlow::new(gamma, &scene.params)?;
    let tr = flow.integrate(x0, v0, h, steps, Some(&chart.bounds))?;
    let mut report = Report::new("geodesic", Some(scene), opts.seed);
    let taken = tr.states.len() - 1;
    let (status, outcome) = match (&tr.failure, tr.exited) {
        (Some(f), _) => (Status::Undetermined, format!("stopped after {taken} steps: {f}")),
        (None, true) => (Status::Pass, format!("left the chart box after {taken} steps")),
        (None, false) => (Status::Pass, format!("completed {taken} steps")),
    };
    report.push(
        Record::new("geodesic", "geodesics solve ẍ^i + Γ^i_jk ẋ^j ẋ^k = 0; fixed-step RK4")
            .input("chart", &chart.name)
            .input("x0", x0)
            .input("v0", v0)
            .input("h", h)
            .input("steps", steps)
            .status(status)
            .outcome(outcome)
            .details(json!({ "end": tr.end(), "exited": tr.exited })),
    );
    let n = x0.len();
    let mut columns = vec!["s".to_string()];
    columns.extend(chart.coords.iter().cloned());
    columns.extend(chart.coords.iter().map(|c| format!("d{c}")));
    report.tables.push(Table {
        name: "trajectory".to_string(),
        columns,
        rows: tr
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| std::iter::once(k as f64 * h).chain(s.x.iter().copied()).chain(s.v.iter().copied()).collect())
            .collect(),
    });

    if chart.boundary && x0[0] == 0.0 && v0[0] == 0.0 {
        let drift = tangency_drift(gamma, &scene.params, &x0[1..n], v0, h, steps)?;
        let stays = drift.max_abs <= opts.tol;
        report.push(
            Record::new(
                "geodesic.tangency",
                "the boundary is totally geodesic iff Γ⁰_μν vanishes there; x⁰(s) ≈ −½Γ⁰_μν v^μ v^ν s²",
            )
            .input("chart", &chart.name)
            .input("tol", opts.tol)
            .status(Status::Info)
            .outcome(if stays { "stays on the boundary" } else { "leaves the boundary" })
            .residual("max_abs", drift.max_abs)
            .residual("quadratic", drift.quadratic)
            .residual("predicted", drift.predicted),
        );
        report.tables.push(Table {
            name: "drift".to_string(),
            columns: vec!["s".to_string(), chart.coords[0].clone()],
            rows: drift.trajectory.states.iter().enumerate().map(|(k, s)| vec![k as f64 * h, s.x[0]]).collect(),
        });
    }
    Ok(report)
}

pub fn cmd_cartan(scene: &Scene, chart: Option<&str>, opts: &Options) -> Result<Report, CommandError> {
    let chart = pick_chart(scene, chart, false)?;
    let gamma = connection(scene, chart)?;
    let n = gamma.dim();
    let sampler = opts.apply(chart.sampler(&scene.params));
    let mut report = Report::new("cartan", Some(scene), opts.seed);

    let omega = normal_gauge(gamma);
    report.push(
        Record::new("cartan.gauge", "normal gauge: Γ − tr Γ/(n+1) in the gl-block, dx in the last column, −P dx in the bottom row")
            .input("chart", &chart.name)
            .status(Status::Info)
            .outcome(format!("{0}x{0} matrix of 1-forms", n + 1))
            .details(GaugeSummary::from(&omega)),
    );

    let curv = gauge_curvature(&omega);
    let (flatness, idx) = is_zero_all(curv.coefficients(), &sampler);
    let mut r = Record::new("cartan.curvature", "Ω = dω + ω∧ω vanishes iff the structure is locally flat")
        .input("chart", &chart.name)
        .status(if flatness.is_undetermined() { Status::Undetermined } else { Status::Info })
        .outcome(if flatness.is_zero() { "flat" } else if flatness.is_nonzero() { "curved" } else { "undetermined" })
        .residual("max_abs", flatness.max_abs());
    if let Some(q) = idx {
        let d = n;
        let size = n + 1;
        let (ab, kl) = (q / (d * d), q % (d * d));
        r = r.witness(json!({ "entry": [ab / size, ab % size], "form": [kl / d, kl % d] }));
    }
    report.push(r);

    let normal = check_normality_traces(&curv, &sampler);
    let mut r = Record::new("cartan.normality", "torsion-free gauge with trace-free gl-block curvature Σ_i Ω^i_j(∂_i, ·) = 0")
        .input("chart", &chart.name)
        .status(Status::from_zero(&normal.verdict()))
        .outcome(if normal.passes() { "normal" } else { "not normal" })
        .residual("torsion", normal.torsion.max_abs())
        .residual("traces", normal.traces.max_abs());
    if let Some(row) = normal.torsion_row {
        r = r.witness(json!({ "torsion_row": row }));
    }
    if let Some(jk) = normal.failing_trace {
        r = r.witness(json!({ "trace": jk }));
    }
    report.push(r);

    if !chart.boundary {
        return Ok(report);
    }
    let bs = opts.apply(chart.boundary_sampler(&scene.params));
    let bp = boundary_pullback(&omega, &bs);
    let member = bp.is_member();
    let mut r = Record::new(
        "cartan.boundary_pullback",
        "the gauge restricted to the boundary takes values in g~ iff the boundary is totally geodesic",
    )
    .input("chart", &chart.name)
    .status(if bp.membership.is_undetermined() { Status::Undetermined } else { Status::Info })
    .outcome(if member { "in g~" } else if bp.membership.is_nonzero() { "not in g~" } else { "undetermined" })
    .residual("max_abs", bp.membership.max_abs())
    .details(GaugeSummary::from(&bp.gauge));
    if let Some((row, col)) = bp.witness {
        r = r.witness(json!({ "entry": [row, col], "form": bp.gauge.render()[row][col] }));
    }
    report.push(r);

    if member {
        let red = mod_k_project(&bp)?;
        let induced = induce_boundary_connection(gamma, &bs)?;
        let lhs = trace_free_gl_block(&red);
        let rhs = connection_forms(&induced).trace_free();
        let diff: Vec<crate::Expr> =
            lhs.coefficients().iter().zip(rhs.coefficients()).map(|(a, b)| (a - b).simplify()).collect();
        let (v, _) = is_zero_all(&diff, &bs);
        report.push(
            Record::new(
                "cartan.mod_k",
                "mod-K reduction of the boundary gauge carries the connection induced on the boundary",
            )
            .input("chart", &chart.name)
            .status(Status::from_zero(&v))
            .outcome(if v.is_zero() { "matches the induced connection" } else { "differs from the induced connection" })
            .residual("max_abs", v.max_abs())
            .details(GaugeSummary::from(&red)),
        );
    } else {
        report.push(
            Record::new("cartan.mod_k", "mod-K reduction of the boundary gauge carries the connection induced on the boundary")
                .input("chart", &chart.name)
                .status(Status::Info)
                .outcome("not applicable: boundary gauge is not in g~"),
        );
    }

    let anchor = "restricted ambient Schouten tensor against the Schouten tensor of the induced connection";
    let rec = match schouten_compare(gamma, &bs) {
        Ok(cmp) => {
            let mut r = Record::new("cartan.schouten", anchor)
                .input("chart", &chart.name)
                .status(if cmp.verdict.is_undetermined() { Status::Undetermined } else { Status::Info })
                .outcome(if cmp.verdict.is_zero() { "equal" } else { "differ" })
                .residual("max_abs", cmp.verdict.max_abs())
                .details(json!({
                    "coords": cmp.coords,
                    "restricted": cmp.restricted.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "induced": cmp.induced.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "difference": cmp.difference.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                }));
            if let Some(w) = cmp.worst {
                r = r.witness(json!({ "entry": w }));
            }
            r
        }
        Err(e @ (CartanError::DimensionTooSmall(_) | CartanError::ObstructionNonzero { .. })) => {
            Record::new("cartan.schouten", anchor).input("chart", &chart.name).status(Status::Info).outcome(format!("not applicable: {e}"))
        }
        Err(e) => return Err(e.into()),
    };
    report.push(rec);
    Ok(report)
}

/// Solves the boundary 2-jet system at `point`, by default the centre of the
/// boundary face of the chart box.
pub fn cmd_jets(scene: &Scene, chart: Option<&str>, point: Option<&[f64]>, opts: &Options) -> Result<Report, CommandError> {
    let chart = pick_chart(scene, chart, true)?;
    let gamma = connection(scene, chart)?;
    let point: Vec<f64> = match point {
        Some(p) => p.to_vec(),
        None => std::iter::once(0.0).chain(chart.bounds[1..].iter().map(|(lo, hi)| 0.5 * (lo + hi))).collect(),
    };
    let sol = solve_boundary_jets(gamma, &point, &scene.params)?;
    let mut report = Report::new("jets", Some(scene), opts.seed);
    let status = match (&sol.status, sol.dimension <= sol.bound) {
        (_, false) => Status::Fail,
        (SolveStatus::Undetermined { .. }, true) => Status::Undetermined,
        (SolveStatus::Determined, true) => Status::Pass,
    };
    report.push(
        Record::new(
            "jets",
            "2-jets (a, b, c) of boundary-fixing projective maps; their dimension is at most n(n+2) and 0 at rigid points",
        )
        .input("chart", &chart.name)
        .input("point", &point)
        .status(status)
        .outcome(format!("solution space of dimension {}", sol.dimension))
        .residual("dimension", sol.dimension as f64)
        .residual("bound", sol.bound as f64)
        .residual("max_residual", sol.max_residual)
        .residual("condition", sol.condition)
        .details(json!({
            "basis": sol.basis,
            "singular_values": sol.singular_values,
            "status": sol.status,
        })),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn opts(samples: usize) -> Options {
        Options { samples, ..Options::default() }
    }

    #[test]
    fn rigidity_reports_match_the_fixtures() {
        let disk = fixtures::projective_disk();
        let r = cmd_rigidity(&disk.scene, None, &opts(32)).unwrap();
        assert_eq!(r.records[0].outcome, "RIGID");
        assert_eq!(r.record("rigidity.obstruction").unwrap().outcome, "1");
        assert_eq!(r.records.iter().filter(|r| r.check == "rigidity.point").count(), 32);
        assert_eq!(r.exit_code(), 0);

        let flat = fixtures::flat_half_space(2);
        let r = cmd_rigidity(&flat.scene, None, &opts(16)).unwrap();
        assert_eq!(r.records[0].outcome, "NONRIGID_CANDIDATE");

        let mixed = fixtures::mixed_half_plane();
        let r = cmd_rigidity(&mixed.scene, None, &opts(16)).unwrap();
        assert_eq!(r.records[0].outcome, "MIXED");
        let w = &r.records[0].witnesses[0];
        assert_eq!(w["vanishing"], json!([0.0, 0.0]));
        assert_ne!(w["rigid"][1], json!(0.0));
    }

    #[test]
    fn reports_are_deterministic() {
        let f = fixtures::mixed_half_plane();
        let o = Options { seed: 5, samples: 8, tol: 1e-9 };
        let a = cmd_rigidity(&f.scene, None, &o).unwrap();
        let b = cmd_rigidity(&f.scene, None, &o).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_text(), b.to_text());
        let c = cmd_rigidity(&f.scene, None, &Options { seed: 6, ..o }).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn verify_map_reports() {
        let m = fixtures::mobius_map(1.2, 0.3);
        let r = cmd_verify_map(&m.scene, "mobius", &opts(16)).unwrap();
        assert_eq!(r.records[0].status, Status::Pass);
        assert_eq!(r.record("verify_map.boundary_identity").unwrap().outcome, "identity on the boundary");
        let r = cmd_verify_map(&m.scene, "identity", &opts(16)).unwrap();
        assert_eq!(r.exit_code(), 0);
        let s = fixtures::shear_map();
        let r = cmd_verify_map(&s.scene, "shear", &opts(16)).unwrap();
        assert_eq!(r.records[0].status, Status::Fail);
        assert_eq!(r.exit_code(), 1);
        assert!(matches!(cmd_verify_map(&s.scene, "nope", &opts(4)), Err(CommandError::Input(_))));
    }

    #[test]
    fn geodesic_reports() {
        let d = fixtures::projective_disk();
        let r = cmd_geodesic(&d.scene, None, &[0.0, 0.0], &[0.0, 1.0], 1e-3, 100, &opts(4)).unwrap();
        // the polar box starts at r = 0, so the inward-curving geodesic exits at once
        assert_eq!(r.tables[0].name, "trajectory");
        let t = r.record("geodesic.tangency").unwrap();
        assert_eq!(t.outcome, "leaves the boundary");
        assert!((t.residuals["quadratic"] + 0.5).abs() < 1e-3);
        let f = fixtures::flat_half_space(2);
        let r = cmd_geodesic(&f.scene, None, &[0.0, 0.0], &[0.0, 1.0], 1e-2, 50, &opts(4)).unwrap();
        assert_eq!(r.record("geodesic.tangency").unwrap().outcome, "stays on the boundary");
        assert_eq!(r.tables[0].rows.len(), 51);
        assert!(matches!(
            cmd_geodesic(&f.scene, None, &[0.0], &[1.0], 1e-2, 5, &opts(4)),
            Err(CommandError::Geodesic(GeodesicError::Dimension { .. }))
        ));
    }

    #[test]
    fn cartan_reports() {
        let f = fixtures::flat_half_space(2);
        let r = cmd_cartan(&f.scene, None, &opts(8)).unwrap();
        assert_eq!(r.record("cartan.curvature").unwrap().outcome, "flat");
        assert_eq!(r.record("cartan.normality").unwrap().status, Status::Pass);
        assert_eq!(r.record("cartan.boundary_pullback").unwrap().outcome, "in g~");
        assert_eq!(r.record("cartan.mod_k").unwrap().status, Status::Pass);
        assert!(r.record("cartan.schouten").unwrap().outcome.starts_with("not applicable"));

        let d = fixtures::projective_disk();
        let r = cmd_cartan(&d.scene, None, &opts(8)).unwrap();
        let bp = r.record("cartan.boundary_pullback").unwrap();
        assert_eq!(bp.outcome, "not in g~");
        assert_eq!(bp.witnesses[0], json!({ "entry": [0, 1], "form": "dt" }));
        assert_eq!(r.exit_code(), 0);

        let p = fixtures::product_boundary();
        let r = cmd_cartan(&p.scene, None, &opts(8)).unwrap();
        assert_eq!(r.record("cartan.mod_k").unwrap().status, Status::Pass);
        assert_eq!(r.record("cartan.schouten").unwrap().outcome, "differ");
    }

    #[test]
    fn jets_reports() {
        let f = fixtures::flat_half_space(2);
        let r = cmd_jets(&f.scene, None, None, &opts(4)).unwrap();
        assert_eq!(r.records[0].residuals["dimension"], 2.0);
        assert_eq!(r.records[0].inputs["point"], json!([0.0, 0.0]));
        let d = fixtures::projective_disk();
        let r = cmd_jets(&d.scene, None, Some(&[0.0, 0.3]), &opts(4)).unwrap();
        assert_eq!(r.records[0].residuals["dimension"], 0.0);
        assert!(matches!(cmd_jets(&d.scene, None, Some(&[0.1, 0.3]), &opts(4)), Err(CommandError::Rigidity(_))));
        assert!(matches!(cmd_jets(&d.scene, Some("affine"), None, &opts(4)), Err(CommandError::Input(_))));
    }
}
