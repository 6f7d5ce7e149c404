use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures::{self, Fixture};
use crate::geometry::{pullback_connection, Scene};
use crate::symexpr::{parse, Expr};

fn no_params() -> BTreeMap<String, f64> {
    BTreeMap::new()
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn connection(f: &Fixture) -> ConnectionField {
    f.scene.connection(&f.chart).unwrap().clone()
}

fn boundary_sampler(f: &Fixture) -> Sampler {
    f.scene.chart(&f.chart).unwrap().boundary_sampler(&f.scene.params)
}

fn disk() -> ConnectionField {
    connection(&fixtures::projective_disk())
}

fn flat2() -> ConnectionField {
    connection(&fixtures::flat_half_space(2))
}

#[test]
fn disk_obstruction_is_one() {
    for t in [-0.9, 0.0, 0.4] {
        let o = boundary_obstruction(&disk(), &[0.0, t], &no_params(), 1e-9).unwrap();
        assert_eq!(o.values, vec![1.0]);
        assert_eq!(o.restricted, vec![Expr::one()]);
        assert_eq!(o.verdict, PointVerdict::Rigid);
        assert_eq!(o.witness, Some((1, 1)));
    }
}

#[test]
fn flat_obstruction_vanishes() {
    let o = boundary_obstruction(&flat2(), &[0.0, 0.3], &no_params(), 1e-9).unwrap();
    assert_eq!(o.verdict, PointVerdict::NonrigidCandidate);
    assert_eq!(o.max_abs, 0.0);
    assert!(matches!(
        boundary_obstruction(&flat2(), &[0.1, 0.3], &no_params(), 1e-9),
        Err(RigidityError::NotOnBoundary { .. })
    ));
    assert!(matches!(boundary_obstruction(&flat2(), &[0.0], &no_params(), 1e-9), Err(RigidityError::Dimension { .. })));
}

#[test]
fn shifting_the_disk_keeps_its_obstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let s = random_projective_shift(&disk(), &mut rng).unwrap();
        for t in [-0.5, 0.2] {
            let a = boundary_obstruction(&disk(), &[0.0, t], &no_params(), 1e-9).unwrap();
            let b = boundary_obstruction(&s, &[0.0, t], &no_params(), 1e-9).unwrap();
            assert_eq!(a.values, b.values);
        }
    }
}

#[test]
fn flat_half_plane_in_the_exponential_chart() {
    // old coordinates in terms of new: x = s·e^(−v), y = v, i.e. s = x·e^y
    let xy = names(&["x", "y"]);
    let sv = names(&["s", "v"]);
    let phi = MapField::new("c", ("sv", &sv), ("half", &xy), vec![parse("s*exp(-v)").unwrap(), parse("v").unwrap()]).unwrap();
    let sampler = Sampler::new(&sv, &[(0.0, 1.0), (-1.0, 1.0)]).with_count(8);
    let moved = pullback_connection(&flat2(), &phi, &sampler).unwrap();
    assert!(!moved.is_flat());
    for v in [-0.7, 0.0, 0.9] {
        let o = boundary_obstruction(&moved, &[0.0, v], &no_params(), 1e-9).unwrap();
        assert_eq!(o.verdict, PointVerdict::NonrigidCandidate);
    }
}

#[test]
fn random_boundary_charts_preserve_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for f in [fixtures::projective_disk(), fixtures::flat_half_space(2), fixtures::mixed_half_plane()] {
        let g = connection(&f);
        let bounds = f.scene.chart(&f.chart).unwrap().bounds.clone();
        for _ in 0..3 {
            let change = random_boundary_chart(&g, &mut rng).unwrap();
            let js = Sampler::new(&change.map.source_coords, &bounds).with_count(4);
            let moved = pullback_connection(&g, &change.map, &js).unwrap();
            for y in [-0.4, 0.0, 0.3] {
                let a = boundary_obstruction(&g, &[0.0, y], &no_params(), 1e-9).unwrap();
                let b = boundary_obstruction(&moved, &change.boundary_image(&[0.0, y]), &no_params(), 1e-9).unwrap();
                assert_eq!(a.verdict, b.verdict, "{} at y = {y}", f.name);
            }
        }
    }
}

#[test]
fn scan_verdicts_match_fixture_expectations() {
    for f in fixtures::all() {
        let chart = f.scene.chart(&f.chart).unwrap();
        if !chart.boundary || f.scene.connection(&f.chart).is_none() {
            continue;
        }
        let r = rigidity_scan(&f.scene, &f.chart, &boundary_sampler(&f).with_count(12)).unwrap();
        assert!(r.disagreements.is_empty(), "{}: {:?}", f.name, r.disagreements);
        assert!(r.errors.is_empty(), "{}: {:?}", f.name, r.errors);
        assert_eq!(r.verdict, f.expected, "{}", f.name);
        assert_eq!(r.points.len(), 12);
    }
}

#[test]
fn disk_scan_at_32_points() {
    let f = fixtures::projective_disk();
    let r = rigidity_scan(&f.scene, "polar", &boundary_sampler(&f).with_count(32)).unwrap();
    assert_eq!(r.verdict, GlobalVerdict::Rigid);
    assert!(r.points.iter().all(|p| p.obstruction == vec![1.0] && p.agree));
    assert_eq!(r.obstruction_exprs, vec!["1"]);
}

#[test]
fn scan_refuses_non_boundary_charts() {
    let f = fixtures::projective_disk();
    let s = boundary_sampler(&f);
    assert!(matches!(rigidity_scan(&f.scene, "affine", &s), Err(RigidityError::NotBoundaryChart(_))));
    assert!(matches!(rigidity_scan(&f.scene, "nope", &s), Err(RigidityError::UnknownChart(_))));
    assert!(matches!(rigidity_scan(&f.scene, "polar", &s.with_count(0)), Err(RigidityError::EmptySampler)));
}

#[test]
fn flat_jets_at_the_origin() {
    let sol = solve_boundary_jets(&flat2(), &[0.0, 0.0], &no_params()).unwrap();
    assert_eq!(sol.dimension, 2);
    assert_eq!(sol.status, SolveStatus::Determined);
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
    assert!(close(&sol.basis[0].unknowns(), &[1.0, 0.0, 1.0]), "{:?}", sol.basis);
    assert!(close(&sol.basis[1].unknowns(), &[0.0, 1.0, 0.0]), "{:?}", sol.basis);
    assert!(close(&sol.basis[0].c, &[0.0]) && close(&sol.basis[1].c, &[0.0]));
    assert!(sol.max_residual <= 1e-10);

    let flat3 = connection(&fixtures::flat_half_space(3));
    let sol = solve_boundary_jets(&flat3, &[0.0, 0.2, -0.4], &no_params()).unwrap();
    assert_eq!(sol.dimension, 3);
}

#[test]
fn disk_jets_are_trivial() {
    for t in [-0.3, 0.0, 0.8] {
        let sol = solve_boundary_jets(&disk(), &[0.0, t], &no_params()).unwrap();
        assert_eq!(sol.dimension, 0, "t = {t}");
        assert_eq!(sol.status, SolveStatus::Determined);
    }
}

#[test]
fn transverse_coupling_links_db_to_a_and_b() {
    let g = connection(&fixtures::transverse_coupling());
    let sol = solve_boundary_jets(&g, &[0.0, 0.1], &no_params()).unwrap();
    assert_eq!(sol.dimension, 2);
    for v in &sol.basis {
        assert!((v.db[0] - v.a - 2.0 * v.b[0]).abs() < 1e-12);
        assert!((v.upsilon0 - v.a - v.b[0]).abs() < 1e-12);
    }
}

#[test]
fn differentiated_row_pins_b_where_the_obstruction_has_a_zero() {
    let g = connection(&fixtures::mixed_half_plane());
    let sol = solve_boundary_jets(&g, &[0.0, 0.0], &no_params()).unwrap();
    assert_eq!(sol.dimension, 1);
    let v = &sol.basis[0];
    assert_eq!(v.b, vec![0.0]);
    assert!((v.db[0] - v.a).abs() < 1e-12);
}

#[test]
fn mobius_jet_solves_the_system_along_the_boundary() {
    let (beta, gamma) = (1.2, 0.3);
    for y in [-0.8, -0.1, 0.0, 0.5] {
        let sys = jet_system_assemble(&flat2(), &[0.0, y], &no_params()).unwrap();
        let a = -gamma;
        let b = beta - gamma * y;
        assert!(sys.residual(&[a, b, -gamma]) < 1e-12);
        assert!((sys.c_for(a, &[b])[0] - a * b).abs() < 1e-12);
    }
}

/// φ = (x + a x², y + (b + db·(y − y0)) x + c x²) built from a jet vector.
fn polynomial_map(g: &ConnectionField, p: &[f64], v: &JetVector) -> MapField {
    let n = g.dim();
    let m = n - 1;
    let x = Expr::var(&g.coords[0]);
    let k = |v: f64| Expr::from_f64(v);
    let mut comps = vec![(&x + k(v.a) * x.pow(2)).simplify()];
    for mu in 0..m {
        let mut slope = k(v.b[mu]);
        for nu in 0..m {
            slope = slope + k(v.db[mu * m + nu]) * (Expr::var(&g.coords[nu + 1]) - k(p[nu + 1]));
        }
        comps.push((Expr::var(&g.coords[mu + 1]) + slope * &x + k(v.c[mu]) * x.pow(2)).simplify());
    }
    MapField::new("jet", (&g.chart, &g.coords), (&g.chart, &g.coords), comps).unwrap()
}

/// Largest entry of φ*Γ − Γ − (δΥ + δΥ) at p with Υ = Υ₀dx⁰, and the
/// tangential derivative of b^μ(y)Γ⁰_ντ(0, y) by central differences.
fn oracle(g: &ConnectionField, p: &[f64], v: &JetVector) -> (f64, f64) {
    let n = g.dim();
    let phi = polynomial_map(g, p, v);
    let s = Sampler::new(&g.coords, &vec![(-0.01, 0.01); n]).with_count(2);
    let pulled = pullback_connection(g, &phi, &s.pin(&g.coords[0], 0.0)).unwrap().eval(p, &no_params()).unwrap();
    let base = g.eval(p, &no_params()).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let q = (i * n + j) * n + k;
                let ups = |a: usize| if a == 0 { v.upsilon0 } else { 0.0 };
                let shift = if i == j { ups(k) } else { 0.0 } + if i == k { ups(j) } else { 0.0 };
                worst = worst.max((pulled[q] - base[q] - shift).abs());
            }
        }
    }
    let m = n - 1;
    let h = 1e-5;
    let mut dworst: f64 = 0.0;
    for s in 0..m {
        let f = |sign: f64| {
            let mut y = p.to_vec();
            y[s + 1] += sign * h;
            let gv = g.eval(&y, &no_params()).unwrap();
            let mut out = Vec::new();
            for mu in 0..m {
                let b = v.b[mu] + sign * h * v.db[mu * m + s];
                for nu in 0..m {
                    for tau in 0..m {
                        out.push(b * gv[(nu + 1) * n + tau + 1]);
                    }
                }
            }
            out
        };
        let (up, down) = (f(1.0), f(-1.0));
        for (a, b) in up.iter().zip(&down) {
            dworst = dworst.max(((a - b) / (2.0 * h)).abs());
        }
    }
    (worst, dworst)
}

#[test]
fn jet_solutions_pass_the_polynomial_map_oracle() {
    let cases: Vec<(Fixture, Vec<f64>)> = vec![
        (fixtures::flat_half_space(2), vec![0.0, 0.3]),
        (fixtures::flat_half_space(3), vec![0.0, 0.3, -0.2]),
        (fixtures::transverse_coupling(), vec![0.0, -0.4]),
        (fixtures::tangent_invariant(), vec![0.0, 0.6]),
        (fixtures::mixed_half_plane(), vec![0.0, 0.0]),
        (fixtures::product_boundary(), vec![0.0, 0.5, -0.5]),
    ];
    for (f, p) in cases {
        let g = connection(&f);
        let sol = solve_boundary_jets(&g, &p, &no_params()).unwrap();
        assert!(sol.dimension > 0, "{}", f.name);
        let combo = sol.basis.iter().enumerate().fold(vec![0.0; sol.system.unknowns()], |mut acc, (i, v)| {
            for (a, z) in acc.iter_mut().zip(v.unknowns()) {
                *a += (0.7 - 0.4 * i as f64) * z;
            }
            acc
        });
        for v in sol.basis.iter().cloned().chain(std::iter::once(sol.system.vector(&combo))) {
            let (r, d) = oracle(&g, &p, &v);
            assert!(r < 1e-9, "{}: pullback residual {r:e} for {v:?}", f.name);
            assert!(d < 1e-7, "{}: boundary derivative {d:e}", f.name);
        }
        // a vector outside the solution space fails the oracle
        let mut bad = vec![0.0; sol.system.unknowns()];
        bad[0] = 1.0;
        let v = sol.system.vector(&bad);
        if sol.span_residual(&v) > 1e-6 {
            let (r, d) = oracle(&g, &p, &v);
            assert!(r > 1e-3 || d > 1e-3, "{}", f.name);
        }
    }
}

#[test]
fn mobius_taylor_data() {
    let (beta, gamma) = (1.2, 0.3);
    let f = fixtures::mobius_map(beta, gamma);
    let phi = f.scene.map("mobius").unwrap();
    let s = boundary_sampler(&f).with_count(16);
    for y in [-0.5, 0.0, 0.7] {
        let t = boundary_taylor(phi, &[0.0, y], &s, &f.scene.params).unwrap();
        let (a, b) = (-gamma, beta - gamma * y);
        assert!((t.a - a).abs() < 1e-8);
        assert!((t.b[0] - b).abs() < 1e-8);
        assert!((t.c[0] - a * b).abs() < 1e-8);
        assert!((t.db[0] + gamma).abs() < 1e-8);
        // the Taylor data lies in the solution span at the same point
        let sol = solve_boundary_jets(&connection(&f), &[0.0, y], &f.scene.params).unwrap();
        let ups = sol.system.upsilon0(t.a, &t.b);
        assert!(sol.span_residual(&t.as_vector(ups)) < 1e-9);
    }
}

#[test]
fn identity_taylor_data_is_zero() {
    let f = fixtures::mobius_map(1.2, 0.3);
    let id = f.scene.map("identity").unwrap();
    let t = boundary_taylor(id, &[0.0, 0.2], &boundary_sampler(&f), &f.scene.params).unwrap();
    assert_eq!((t.a, t.b.clone(), t.c.clone()), (0.0, vec![0.0], vec![0.0]));
}

#[test]
fn taylor_preconditions() {
    let f = fixtures::o21_map(0.0, 0.3, 0.0);
    let phi = f.scene.map("o21_polar").unwrap();
    let err = boundary_taylor(phi, &[0.0, 0.0], &boundary_sampler(&f).with_count(16), &f.scene.params).unwrap_err();
    match err {
        RigidityError::BoundaryIdentity { residual, .. } => assert!(residual > 1e-3),
        other => panic!("unexpected {other:?}"),
    }
    let xy = names(&["x", "y"]);
    let stretch = MapField::new("s", ("half", &xy), ("half", &xy), vec![parse("2*x").unwrap(), parse("y").unwrap()]).unwrap();
    let s = Sampler::new(&xy, &[(0.0, 1.0), (-1.0, 1.0)]).pin("x", 0.0);
    let err = boundary_taylor(&stretch, &[0.0, 0.0], &s, &no_params()).unwrap_err();
    assert_eq!(err, RigidityError::Normalization { derivative: 2.0, factor: 0.5 });
}

#[test]
fn solution_dimension_respects_the_bound() {
    for f in fixtures::all() {
        let Some(g) = f.scene.connection(&f.chart) else { continue };
        if !f.scene.chart(&f.chart).unwrap().boundary {
            continue;
        }
        for p in boundary_sampler(&f).with_count(4).points() {
            let point: Vec<f64> = std::iter::once(0.0).chain(p).collect();
            let sol = solve_boundary_jets(g, &point, &f.scene.params).unwrap();
            assert!(sol.dimension <= sol.bound, "{}", f.name);
            assert!(sol.max_residual <= 1e-10, "{}", f.name);
        }
    }
}

#[test]
fn rigid_points_have_no_nonzero_jets() {
    for f in fixtures::all() {
        let Some(g) = f.scene.connection(&f.chart) else { continue };
        if !f.scene.chart(&f.chart).unwrap().boundary {
            continue;
        }
        for p in boundary_sampler(&f).with_count(6).points() {
            let point: Vec<f64> = std::iter::once(0.0).chain(p).collect();
            let o = boundary_obstruction(g, &point, &f.scene.params, 1e-9).unwrap();
            let sol = solve_boundary_jets(g, &point, &f.scene.params).unwrap();
            if o.verdict == PointVerdict::Rigid {
                assert_eq!(sol.dimension, 0, "{} at {point:?}", f.name);
            } else {
                assert!(sol.dimension > 0, "{} at {point:?}", f.name);
            }
        }
    }
}

#[test]
fn scan_handles_scene_files() {
    let text = r#"{"dimension": 2,
        "charts": [{"name": "h", "coordinates": ["r", "s"], "boundary": true, "box": [[0, 1], [-1, 1]]}],
        "connections": [{"chart": "h", "christoffel": {"0,1,1": "cos(s) + r"}}]}"#;
    let scene = Scene::from_json_str(text).unwrap();
    let s = scene.chart("h").unwrap().boundary_sampler(&scene.params).with_count(8);
    let r = rigidity_scan(&scene, "h", &s).unwrap();
    assert_eq!(r.verdict, GlobalVerdict::Rigid);
    assert_eq!(r.obstruction_exprs, vec!["cos(s)"]);
}
