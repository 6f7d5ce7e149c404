//! Scenes: charts, connections and maps with parameter values, and their
//! JSON file format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{Chart, ConnectionField, GeometryError, MapField, Transition};
use crate::symexpr::{Expr, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed scene JSON: {0}")]
    Json(String),
    #[error("{location}: {source}")]
    Expr { location: String, source: ParseError },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Invalid { location: location.into(), message: message.into() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    dimension: usize,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    charts: Vec<RawChart>,
    #[serde(default)]
    connections: Vec<RawConnection>,
    #[serde(default)]
    maps: Vec<RawMap>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    name: String,
    coordinates: Vec<String>,
    #[serde(default)]
    boundary: bool,
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
    #[serde(default)]
    transitions: Vec<RawTransition>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    to: String,
    forward: Vec<String>,
    inverse: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    chart: String,
    #[serde(default)]
    christoffel: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    name: String,
    source: String,
    target: String,
    components: Vec<String>,
}

/// Everything a command needs: charts, at most one connection per chart,
/// named maps, and the numeric values of the symbolic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub dimension: usize,
    pub params: BTreeMap<String, f64>,
    pub charts: Vec<Chart>,
    pub connections: Vec<ConnectionField>,
    pub maps: Vec<MapField>,
}

impl Scene {
    pub fn chart(&self, name: &str) -> Option<&Chart> {
        self.charts.iter().find(|c| c.name == name)
    }

    pub fn connection(&self, chart: &str) -> Option<&ConnectionField> {
        self.connections.iter().find(|c| c.chart == chart)
    }

    pub fn map(&self, name: &str) -> Option<&MapField> {
        self.maps.iter().find(|m| m.name == name)
    }

    pub fn boundary_charts(&self) -> impl Iterator<Item = &Chart> {
        self.charts.iter().filter(|c| c.boundary)
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SceneError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Scene::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Scene, SceneError> {
        let raw: RawScene = serde_json::from_str(text).map_err(|e| SceneError::Json(e.to_string()))?;
        Scene::from_raw(raw)
    }

    fn from_raw(raw: RawScene) -> Result<Scene, SceneError> {
        let n = raw.dimension;
        if n < 2 {
            return Err(invalid("dimension", format!("must be at least 2, got {n}")));
        }
        for (name, v) in &raw.params {
            if !v.is_finite() {
                return Err(invalid(format!("params.{name}"), "value must be finite"));
            }
        }
        let mut charts: Vec<Chart> = Vec::new();
        for (ci, rc) in raw.charts.iter().enumerate() {
            let loc = format!("charts[{ci}]");
            if charts.iter().any(|c| c.name == rc.name) {
                return Err(invalid(&loc, format!("duplicate chart name {:?}", rc.name)));
            }
            if rc.coordinates.len() != n {
                return Err(invalid(
                    format!("{loc}.coordinates"),
                    format!("expected {n} names, got {}", rc.coordinates.len()),
                ));
            }
            for (k, c) in rc.coordinates.iter().enumerate() {
                let ok = c.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic())
                    && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
                if !ok || rc.coordinates[..k].contains(c) || raw.params.contains_key(c) {
                    return Err(invalid(format!("{loc}.coordinates[{k}]"), format!("bad coordinate name {c:?}")));
                }
            }
            if rc.bounds.len() != n {
                return Err(invalid(format!("{loc}.box"), format!("expected {n} intervals")));
            }
            for (k, (lo, hi)) in rc.bounds.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(format!("{loc}.box[{k}]"), "interval must be finite with lo <= hi"));
                }
            }
            if rc.boundary && rc.bounds[0].0 != 0.0 {
                return Err(invalid(
                    format!("{loc}.box[0]"),
                    "a boundary chart's box must start at x0 = 0",
                ));
            }
            let coords: Vec<&str> = rc.coordinates.iter().map(String::as_str).collect();
            charts.push(Chart::new(&rc.name, &coords, rc.boundary, &rc.bounds));
        }
        if charts.is_empty() {
            return Err(invalid("charts", "at least one chart is required"));
        }

        for (ci, rc) in raw.charts.iter().enumerate() {
            let mut transitions = Vec::new();
            for (ti, rt) in rc.transitions.iter().enumerate() {
                let loc = format!("charts[{ci}].transitions[{ti}]");
                let target = charts
                    .iter()
                    .find(|c| c.name == rt.to)
                    .ok_or_else(|| invalid(format!("{loc}.to"), format!("unknown chart {:?}", rt.to)))?;
                let forward = parse_list(&charts[ci], &raw.params, &rt.forward, n, &format!("{loc}.forward"))?;
                let inverse = parse_list(target, &raw.params, &rt.inverse, n, &format!("{loc}.inverse"))?;
                transitions.push(Transition { to: rt.to.clone(), forward, inverse });
            }
            charts[ci].transitions = transitions;
        }
        for (ci, chart) in charts.iter().enumerate() {
            for (ti, t) in chart.transitions.iter().enumerate() {
                let target = charts.iter().find(|c| c.name == t.to).expect("checked above");
                check_boundary_transition(chart, target, t, &raw.params)
                    .map_err(|m| invalid(format!("charts[{ci}].transitions[{ti}]"), m))?;
            }
        }

        let mut connections: Vec<ConnectionField> = Vec::new();
        for (gi, rg) in raw.connections.iter().enumerate() {
            let loc = format!("connections[{gi}]");
            let chart = charts
                .iter()
                .find(|c| c.name == rg.chart)
                .ok_or_else(|| invalid(format!("{loc}.chart"), format!("unknown chart {:?}", rg.chart)))?;
            if connections.iter().any(|c| c.chart == rg.chart) {
                return Err(invalid(&loc, format!("second connection on chart {:?}", rg.chart)));
            }
            let mut entries: BTreeMap<(usize, usize, usize), (String, Expr)> = BTreeMap::new();
            for (key, text) in &rg.christoffel {
                let eloc = format!("{loc}.christoffel[{key:?}]");
                let (i, j, k) = parse_index(key, n).ok_or_else(|| invalid(&eloc, "key must be \"i,j,k\" with indices below the dimension"))?;
                let e = chart
                    .parse(text, &raw.params)
                    .map_err(|source| SceneError::Expr { location: eloc.clone(), source })?
                    .simplify();
                let (j, k) = (j.min(k), j.max(k));
                if let Some((prev_key, prev)) = entries.get(&(i, j, k)) {
                    if *prev != e {
                        return Err(invalid(
                            &eloc,
                            format!("not symmetric: disagrees with {prev_key:?} ({prev} vs {e})"),
                        ));
                    }
                }
                entries.insert((i, j, k), (key.clone(), e));
            }
            connections.push(ConnectionField::from_fn(&chart.name, &chart.coords, |i, j, k| {
                entries.get(&(i, j, k)).map(|(_, e)| e.clone()).unwrap_or_else(Expr::zero)
            }));
        }

        let mut maps: Vec<MapField> = Vec::new();
        for (mi, rm) in raw.maps.iter().enumerate() {
            let loc = format!("maps[{mi}]");
            if maps.iter().any(|m| m.name == rm.name) {
                return Err(invalid(&loc, format!("duplicate map name {:?}", rm.name)));
            }
            let source = charts
                .iter()
                .find(|c| c.name == rm.source)
                .ok_or_else(|| invalid(format!("{loc}.source"), format!("unknown chart {:?}", rm.source)))?;
            let target = charts
                .iter()
                .find(|c| c.name == rm.target)
                .ok_or_else(|| invalid(format!("{loc}.target"), format!("unknown chart {:?}", rm.target)))?;
            let comps = parse_list(source, &raw.params, &rm.components, n, &format!("{loc}.components"))?;
            let map = MapField::new(&rm.name, (&source.name, &source.coords), (&target.name, &target.coords), comps)
                .map_err(|e: GeometryError| invalid(&loc, e.to_string()))?;
            maps.push(map);
        }

        Ok(Scene { dimension: n, params: raw.params, charts, connections, maps })
    }

    /// The scene in its file format. Keys are sorted, so the text is canonical.
    pub fn to_json(&self) -> Value {
        let charts: Vec<Value> = self
            .charts
            .iter()
            .map(|c| {
                let transitions: Vec<Value> = c
                    .transitions
                    .iter()
                    .map(|t| {
                        json!({
                            "to": t.to,
                            "forward": t.forward.iter().map(Expr::to_string).collect::<Vec<_>>(),
                            "inverse": t.inverse.iter().map(Expr::to_string).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({
                    "name": c.name,
                    "coordinates": c.coords,
                    "boundary": c.boundary,
                    "box": c.bounds,
                    "transitions": transitions,
                })
            })
            .collect();
        let connections: Vec<Value> = self
            .connections
            .iter()
            .map(|g| {
                let n = g.dim();
                let mut entries = BTreeMap::new();
                for i in 0..n {
                    for j in 0..n {
                        for k in j..n {
                            let e = g.get(i, j, k);
                            if !e.is_const_zero() {
                                entries.insert(format!("{i},{j},{k}"), e.to_string());
                            }
                        }
                    }
                }
                json!({ "chart": g.chart, "christoffel": entries })
            })
            .collect();
        let maps: Vec<Value> = self
            .maps
            .iter()
            .map(|m| {
                json!({
                    "name": m.name,
                    "source": m.source,
                    "target": m.target,
                    "components": m.comps.iter().map(Expr::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "dimension": self.dimension,
            "params": self.params,
            "charts": charts,
            "connections": connections,
            "maps": maps,
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("scene JSON serialises")
    }

    /// SHA-256 of the compact canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.to_json()).expect("scene JSON serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl Serialize for Scene {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

fn parse_list(
    chart: &Chart,
    params: &BTreeMap<String, f64>,
    texts: &[String],
    n: usize,
    loc: &str,
) -> Result<Vec<Expr>, SceneError> {
    if texts.len() != n {
        return Err(invalid(loc, format!("expected {n} expressions, got {}", texts.len())));
    }
    texts
        .iter()
        .enumerate()
        .map(|(k, t)| {
            chart
                .parse(t, params)
                .map(|e| e.simplify())
                .map_err(|source| SceneError::Expr { location: format!("{loc}[{k}]"), source })
        })
        .collect()
}

fn parse_index(key: &str, n: usize) -> Option<(usize, usize, usize)> {
    let parts: Vec<usize> = key.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
    match parts[..] {
        [i, j, k] if i < n && j < n && k < n => Some((i, j, k)),
        _ => None,
    }
}

/// Between boundary charts the transition must keep {x0 = 0} and orient x0
/// inward: x̄0(0, y) = 0 and ∂x̄0/∂x0 > 0 on the boundary face.
fn check_boundary_transition(
    from: &Chart,
    to: &Chart,
    t: &Transition,
    params: &BTreeMap<String, f64>,
) -> Result<(), String> {
    if !(from.boundary && to.boundary) {
        return Ok(());
    }
    let sampler = from.boundary_sampler(params).with_count(16);
    let r0 = &t.forward[0];
    let dr0 = r0.diff(&from.coords[0]);
    for env in sampler.assignments() {
        if let Ok(v) = r0.eval(&env) {
            if v.abs() > 1e-9 {
                return Err(format!("boundary not preserved: x0 maps to {v} at {env:?}"));
            }
        }
        if let Ok(v) = dr0.eval(&env) {
            if v <= 0.0 {
                return Err(format!("d(new x0)/d(x0) = {v} is not positive at {env:?}"));
            }
        }
    }
    Ok(())
}
