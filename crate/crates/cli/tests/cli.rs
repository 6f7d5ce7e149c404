use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn projbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projbound")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn disk_is_rigid() {
    let out = projbound(&["rigidity", "--fixture", "disk", "--samples", "32", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["records"][0]["outcome"], "RIGID");
    assert_eq!(r["records"][1]["outcome"], "1");
    let records = r["records"].as_array().unwrap();
    assert_eq!(records.iter().filter(|r| r["check"] == "rigidity.point").count(), 32);
    for rec in records {
        assert!(!rec["anchor"].as_str().unwrap().is_empty());
    }
}

#[test]
fn flat_and_mixed_verdicts() {
    let r = json(&projbound(&["rigidity", "--fixture", "flat-half-space-2", "--samples", "8", "--format", "json"]));
    assert_eq!(r["records"][0]["outcome"], "NONRIGID_CANDIDATE");
    let r = json(&projbound(&["rigidity", "--fixture", "mixed", "--samples", "8", "--format", "json"]));
    assert_eq!(r["records"][0]["outcome"], "MIXED");
    assert_eq!(r["records"][0]["witnesses"][0]["vanishing"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for format in ["text", "json"] {
        let args = ["rigidity", "--fixture", "mixed", "--samples", "16", "--seed", "3", "--format", format];
        let a = projbound(&args);
        let b = projbound(&args);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn verify_map_exit_codes() {
    let out = projbound(&["verify-map", "--fixture", "mobius", "--map", "mobius", "--samples", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let out = projbound(&["verify-map", "--fixture", "shear", "--map", "shear", "--samples", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] verify_map: not projective"));
    let out = projbound(&["verify-map", "--fixture", "shear", "--map", "missing"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_with_2() {
    let out = projbound(&["rigidity", "--scene", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));

    let dir = scratch("bad-scenes");
    let path = dir.join("unknown-function.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2, "charts": [{"name": "h", "coordinates": ["x", "y"], "boundary": true, "box": [[0, 1], [-1, 1]]}],
            "connections": [{"chart": "h", "christoffel": {"0,1,1": "y + frob(x)"}}]}"#,
    )
    .unwrap();
    let out = projbound(&["rigidity", "--scene", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("frob"), "{err}");

    let out = projbound(&["jets", "--fixture", "disk", "--point", "0.2,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = projbound(&["rigidity", "--fixture", "disk", "--tol", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = projbound(&["rigidity"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn undetermined_exits_with_3() {
    let dir = scratch("undetermined");
    let path = dir.join("log.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2, "charts": [{"name": "h", "coordinates": ["x", "y"], "boundary": true, "box": [[0, 1], [-1, 1]]}],
            "connections": [{"chart": "h", "christoffel": {"0,1,1": "log(x)"}}]}"#,
    )
    .unwrap();
    let out = projbound(&["rigidity", "--scene", path.to_str().unwrap(), "--samples", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["records"][0]["outcome"], "UNDETERMINED");
}

#[test]
fn exported_fixtures_load_back_with_the_same_hash() {
    let dir = scratch("export");
    let out = projbound(&["fixtures", "export", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let listed = projbound(&["fixtures", "list"]);
    let names: Vec<String> =
        String::from_utf8_lossy(&listed.stdout).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert!(names.contains(&"disk".to_string()));
    for name in names {
        let path = dir.join(format!("{name}.json"));
        assert!(path.exists(), "{name}");
    }
    let from_file = json(&projbound(&["cartan", "--scene", dir.join("disk.json").to_str().unwrap(), "--format", "json", "--samples", "4"]));
    let builtin = json(&projbound(&["cartan", "--fixture", "disk", "--format", "json", "--samples", "4"]));
    assert_eq!(from_file, builtin);

    let single = projbound(&["fixtures", "export", "disk"]);
    let text = String::from_utf8(single.stdout).unwrap();
    assert_eq!(text, std::fs::read_to_string(dir.join("disk.json")).unwrap());
    assert_eq!(projbound(&["fixtures", "export", "nope"]).status.code(), Some(2));
}

#[test]
fn cartan_on_the_disk() {
    let r = json(&projbound(&["cartan", "--fixture", "disk", "--format", "json", "--samples", "8"]));
    let records = r["records"].as_array().unwrap();
    let bp = records.iter().find(|r| r["check"] == "cartan.boundary_pullback").unwrap();
    assert_eq!(bp["outcome"], "not in g~");
    assert_eq!(bp["witnesses"][0]["form"], "dt");
    let curv = records.iter().find(|r| r["check"] == "cartan.curvature").unwrap();
    assert_eq!(curv["outcome"], "flat");
}

#[test]
fn geodesic_table_and_drift() {
    let out = projbound(&[
        "geodesic", "--fixture", "flat-half-space-2", "--point", "0,0.1", "--velocity", "0,1", "--step", "0.01", "--steps",
        "20", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["tables"][0]["name"], "trajectory");
    assert_eq!(r["tables"][0]["rows"].as_array().unwrap().len(), 21);
    assert_eq!(r["records"][1]["outcome"], "stays on the boundary");
    let text = projbound(&["geodesic", "--fixture", "disk", "--point", "0.2,0", "--velocity", "0.3,1", "--steps", "5"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("table trajectory (6 rows)"));
}

#[test]
fn jets_dimensions() {
    let r = json(&projbound(&["jets", "--fixture", "flat-half-space-2", "--format", "json"]));
    assert_eq!(r["records"][0]["residuals"]["dimension"], 2.0);
    let r = json(&projbound(&["jets", "--fixture", "flat-half-space-3", "--point", "0,0.1,-0.2", "--format", "json"]));
    assert_eq!(r["records"][0]["residuals"]["dimension"], 3.0);
    let r = json(&projbound(&["jets", "--fixture", "disk", "--format", "json"]));
    assert_eq!(r["records"][0]["residuals"]["dimension"], 0.0);
}
