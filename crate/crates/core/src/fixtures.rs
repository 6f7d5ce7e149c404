//! Built-in scenes with known answers.
//!
//! Each fixture is written in the scene file format and loaded through the
//! same validation as user scenes.

use serde_json::{json, Value};

use crate::geometry::Scene;
use crate::rigidity::GlobalVerdict;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub scene: Scene,
    /// Boundary chart the rigidity verdict refers to.
    pub chart: String,
    pub expected: GlobalVerdict,
    pub notes: &'static str,
}

impl Fixture {
    fn build(name: &str, chart: &str, expected: GlobalVerdict, notes: &'static str, scene: Value) -> Fixture {
        let scene = Scene::from_json_str(&scene.to_string())
            .unwrap_or_else(|e| panic!("fixture {name} does not validate: {e}"));
        Fixture { name: name.to_string(), scene, chart: chart.to_string(), expected, notes }
    }
}

/// Coordinate names of the half-space charts: (x, y) in the plane,
/// (x, y1, .., y_{n-1}) above.
pub fn half_space_coords(n: usize) -> Vec<String> {
    if n == 2 {
        return vec!["x".into(), "y".into()];
    }
    std::iter::once("x".to_string()).chain((1..n).map(|k| format!("y{k}"))).collect()
}

fn half_space_chart(n: usize, x_max: f64) -> Value {
    let mut bounds = vec![(0.0, x_max)];
    bounds.extend(std::iter::repeat_n((-1.0, 1.0), n - 1));
    json!({
        "name": "half",
        "coordinates": half_space_coords(n),
        "boundary": true,
        "box": bounds,
    })
}

fn flat_scene(n: usize, x_max: f64) -> Value {
    json!({
        "dimension": n,
        "charts": [half_space_chart(n, x_max)],
        "connections": [{ "chart": "half", "christoffel": {} }],
    })
}

/// Flat connection on the half-space {x >= 0}.
pub fn flat_half_space(n: usize) -> Fixture {
    assert!(n >= 2, "dimension must be at least 2");
    Fixture::build(
        &format!("flat-half-space-{n}"),
        "half",
        GlobalVerdict::NonrigidCandidate,
        "flat model; the boundary hyperplane is totally geodesic and admits boundary-fixing projective maps",
        flat_scene(n, 1.0),
    )
}

/// Flat half-plane with the map (x, y) ↦ (x/(γx+1), (βx+y)/(γx+1)) and the identity.
///
/// For γ < 0 the box is cut down so the pole stays outside.
pub fn mobius_map(beta: f64, gamma: f64) -> Fixture {
    let x_max = if gamma < 0.0 { (0.5 / gamma.abs()).min(1.0) } else { 1.0 };
    let mut scene = flat_scene(2, x_max);
    scene["params"] = json!({ "beta": beta, "gamma": gamma });
    scene["maps"] = json!([
        { "name": "mobius", "source": "half", "target": "half",
          "components": ["x/(gamma*x+1)", "(beta*x+y)/(gamma*x+1)"] },
        { "name": "identity", "source": "half", "target": "half", "components": ["x", "y"] },
    ]);
    Fixture::build(
        "mobius",
        "half",
        GlobalVerdict::NonrigidCandidate,
        "linear fractional maps fixing the boundary line pointwise; projective with Υ = -γ/(1+γx) dx",
        scene,
    )
}

/// Flat half-plane with the shear (x, y) ↦ (x, y + x²), which bends lines.
pub fn shear_map() -> Fixture {
    let mut scene = flat_scene(2, 1.0);
    scene["maps"] = json!([
        { "name": "shear", "source": "half", "target": "half", "components": ["x", "y + x^2"] },
    ]);
    Fixture::build("shear", "half", GlobalVerdict::NonrigidCandidate, "a diffeomorphism that is not projective", scene)
}

fn disk_scene() -> Value {
    json!({
        "dimension": 2,
        "charts": [
            {
                "name": "polar",
                "coordinates": ["r", "t"],
                "boundary": true,
                "box": [[0.0, 0.5], [-1.0, 1.0]],
                "transitions": [{
                    "to": "affine",
                    "forward": ["(1-r)*cos(t)", "(1-r)*sin(t)"],
                    "inverse": ["1 - sqrt(x^2 + y^2)", "atan(y/x)"],
                }],
            },
            {
                "name": "affine",
                "coordinates": ["x", "y"],
                "boundary": false,
                "box": [[-0.6, 0.6], [-0.6, 0.6]],
                "transitions": [{
                    "to": "polar",
                    "forward": ["1 - sqrt(x^2 + y^2)", "atan(y/x)"],
                    "inverse": ["(1-r)*cos(t)", "(1-r)*sin(t)"],
                }],
            },
        ],
        "connections": [
            { "chart": "polar", "christoffel": { "0,1,1": "1-r", "1,0,1": "-1/(1-r)" } },
            { "chart": "affine", "christoffel": {} },
        ],
    })
}

/// The unit disk x² + y² < 1 with its flat connection, in the polar boundary
/// chart x = (1-r)cos t, y = (1-r)sin t and in the affine chart.
pub fn projective_disk() -> Fixture {
    Fixture::build(
        "disk",
        "polar",
        GlobalVerdict::Rigid,
        "interior of a non-degenerate conic; Γ⁰₁₁(0, t) = 1 on the boundary",
        disk_scene(),
    )
}

/// Homogeneous coordinates (X, Y, Z) of g·(x, y, 1) for g = R(θ)B(ψ)R(φ).
fn o21_homogeneous(x: &str, y: &str) -> [String; 3] {
    let u = format!("(cos(phi)*{x} - sin(phi)*{y})");
    let v = format!("(sin(phi)*{x} + cos(phi)*{y})");
    let w = format!("(cosh(psi)*{u} + sinh(psi))");
    [
        format!("(cos(theta)*{w} - sin(theta)*{v})"),
        format!("(sin(theta)*{w} + cos(theta)*{v})"),
        format!("(sinh(psi)*{u} + cosh(psi))"),
    ]
}

/// Components of the O(2,1) Euler-angle map in the affine chart.
pub fn o21_affine_components() -> [String; 2] {
    let [x, y, z] = o21_homogeneous("x", "y");
    [format!("{x}/{z}"), format!("{y}/{z}")]
}

/// Components of the O(2,1) Euler-angle map in the polar chart.
pub fn o21_polar_components() -> [String; 2] {
    let [x, y, z] = o21_homogeneous("((1-r)*cos(t))", "((1-r)*sin(t))");
    [format!("1 - sqrt({x}^2 + {y}^2)/{z}"), format!("atan({y}/{x})")]
}

/// The disk with the element R(θ)B(ψ)R(φ) of O(2,1) acting as a map, in
/// both charts (`o21` in the affine chart, `o21_polar` in the polar chart).
pub fn o21_map(theta: f64, psi: f64, phi: f64) -> Fixture {
    let mut scene = disk_scene();
    scene["params"] = json!({ "theta": theta, "psi": psi, "phi": phi });
    scene["maps"] = json!([
        { "name": "o21", "source": "affine", "target": "affine", "components": o21_affine_components() },
        { "name": "o21_polar", "source": "polar", "target": "polar", "components": o21_polar_components() },
    ]);
    Fixture::build(
        "o21",
        "polar",
        GlobalVerdict::Rigid,
        "projective automorphisms of the disk; only the identity fixes the boundary circle",
        scene,
    )
}

/// The half-space bounded by a degenerate conic: flat, not rigid.
pub fn degenerate_conic_halfspace(n: usize) -> Fixture {
    assert!(n >= 2, "dimension must be at least 2");
    Fixture::build(
        &format!("degenerate-conic-{n}"),
        "half",
        GlobalVerdict::NonrigidCandidate,
        "boundary on a degenerate conic; the flat model in dimension n",
        flat_scene(n, 1.0),
    )
}

/// Γ⁰₁₁ = y: the obstruction vanishes on the boundary only at y = 0.
pub fn mixed_half_plane() -> Fixture {
    let mut scene = flat_scene(2, 1.0);
    scene["connections"] = json!([{ "chart": "half", "christoffel": { "0,1,1": "y" } }]);
    Fixture::build(
        "mixed",
        "half",
        GlobalVerdict::Mixed,
        "obstruction vanishes along y = 0 only; rigid as soon as one point has nonzero obstruction",
        scene,
    )
}

/// Γ⁰₁₁ = x: nonzero inside, zero on the boundary.
pub fn tangent_invariant() -> Fixture {
    let mut scene = flat_scene(2, 1.0);
    scene["connections"] = json!([{ "chart": "half", "christoffel": { "0,1,1": "x" } }]);
    Fixture::build(
        "tangent-invariant",
        "half",
        GlobalVerdict::NonrigidCandidate,
        "Γ⁰₁₁ vanishes on the boundary but not inside; the boundary stays totally geodesic",
        scene,
    )
}

/// Γ⁰₀₁ = 1: tangential obstruction zero, but the normal row couples b and a.
pub fn transverse_coupling() -> Fixture {
    let mut scene = flat_scene(2, 1.0);
    scene["connections"] = json!([{ "chart": "half", "christoffel": { "0,0,1": "1" } }]);
    Fixture::build(
        "transverse",
        "half",
        GlobalVerdict::NonrigidCandidate,
        "Γ⁰₀₁ = 1 with Γ⁰_μν = 0 on the boundary",
        scene,
    )
}

/// n = 3, Γ⁰_μν ≡ 0 and curved boundary directions (Γ¹₂₂ = y1, Γ²₁₁ = y2).
pub fn product_boundary() -> Fixture {
    let mut scene = flat_scene(3, 1.0);
    scene["connections"] = json!([{
        "chart": "half",
        "christoffel": { "1,2,2": "y1", "2,1,1": "y2", "1,0,1": "x" },
    }]);
    Fixture::build(
        "product-boundary",
        "half",
        GlobalVerdict::NonrigidCandidate,
        "totally geodesic boundary carrying a curved induced connection",
        scene,
    )
}

pub const NAMES: &[&str] = &[
    "flat-half-space-2",
    "flat-half-space-3",
    "mobius",
    "shear",
    "disk",
    "o21",
    "degenerate-conic-3",
    "mixed",
    "tangent-invariant",
    "transverse",
    "product-boundary",
];

/// Looks a fixture up by name, with default parameters where it has any.
pub fn by_name(name: &str) -> Option<Fixture> {
    Some(match name {
        "flat-half-space-2" => flat_half_space(2),
        "flat-half-space-3" => flat_half_space(3),
        "mobius" => mobius_map(1.2, 0.3),
        "shear" => shear_map(),
        "disk" => projective_disk(),
        "o21" => o21_map(0.1, 0.2, -0.1),
        "degenerate-conic-3" => degenerate_conic_halfspace(3),
        "mixed" => mixed_half_plane(),
        "tangent-invariant" => tangent_invariant(),
        "transverse" => transverse_coupling(),
        "product-boundary" => product_boundary(),
        _ => return None,
    })
}

pub fn all() -> Vec<Fixture> {
    NAMES.iter().map(|n| by_name(n).expect("listed fixture exists")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_round_trips_through_the_file_format() {
        for f in all() {
            let text = f.scene.to_json_pretty();
            let back = Scene::from_json_str(&text).unwrap();
            assert_eq!(back, f.scene, "{}", f.name);
            assert_eq!(back.hash(), f.scene.hash());
        }
    }

    #[test]
    fn disk_symbols_are_as_written() {
        let f = projective_disk();
        let g = f.scene.connection("polar").unwrap();
        assert_eq!(g.get(0, 1, 1).to_string(), "1 - r");
        assert_eq!(g.get(1, 0, 1), g.get(1, 1, 0));
        assert_eq!(g.get(1, 1, 0).to_string(), "-1/(1 - r)");
        assert!(g.get(0, 0, 0).is_const_zero() && g.get(1, 1, 1).is_const_zero());
    }

    #[test]
    fn o21_at_zero_angles_is_the_identity() {
        let f = o21_map(0.0, 0.0, 0.0);
        let m = f.scene.map("o21").unwrap();
        let v = m.eval(&[0.3, -0.2], &f.scene.params).unwrap();
        assert!((v[0] - 0.3).abs() < 1e-15 && (v[1] + 0.2).abs() < 1e-15);
        let m = f.scene.map("o21_polar").unwrap();
        let v = m.eval(&[0.25, 0.4], &f.scene.params).unwrap();
        assert!((v[0] - 0.25).abs() < 1e-14 && (v[1] - 0.4).abs() < 1e-14);
    }
}
