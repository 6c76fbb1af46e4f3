//! Runs the `jetlab` binary against the bundled configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bundled(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.json")]
        .iter()
        .collect()
}

fn jetlab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetlab"))
        .arg(args[0])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(&args[1..])
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Writes a modified copy of a bundled config.
fn variant(dir: &TempDir, name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v = read_json(&bundled(name));
    edit(&mut v);
    let path = dir.path().join(format!("{name}_variant.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

#[test]
fn verify_passes_on_every_bundled_config() {
    for name in [
        "rotation",
        "gradient",
        "sphere_orbits",
        "pfaff_closed",
        "pfaff_nonclosed",
        "group_commuting",
        "yang_mills_q2",
        "oscillator_order2",
        "flat",
    ] {
        let dir = TempDir::new().unwrap();
        let out = jetlab(&["verify"], &bundled(name), dir.path());
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = read_json(&dir.path().join("report.json"));
        assert_eq!(report["pass"], true, "{name}");
        let eq2 = report["maxwell_eq2_max_residual"].as_f64().unwrap();
        assert!(eq2.is_finite() && eq2 >= 0.0);
    }
}

#[test]
fn rotation_report_lists_checks_and_sign_findings() {
    let dir = TempDir::new().unwrap();
    jetlab(&["verify"], &bundled("rotation"), dir.path());
    let report = read_json(&dir.path().join("report.json"));
    let checks = report["checks"].as_array().unwrap();
    for c in checks {
        for key in ["name", "max_residual", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
    let findings = report["sign_findings"].as_array().unwrap();
    let resolution = |name: &str| {
        findings.iter().find(|f| f["name"] == name).unwrap()["resolution"].as_str().unwrap().to_string()
    };
    assert_eq!(resolution("spray_drift_bracket_form"), "printed");
    assert_eq!(resolution("spray_drift_closed_form"), "flipped");
    assert_eq!(resolution("nonlinear_connection_general"), "printed");
}

#[test]
fn asymmetric_metric_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "pfaff_nonclosed", |v| {
        v["metric_h"] = serde_json::json!([["1", "t1"], ["0", "1"]]);
    });
    let out = jetlab(&["verify"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("metric_h") && err.contains("(1,2)") && err.contains("(2,1)"), "{err}");
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn malformed_configs_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let edits: [(&str, fn(&mut Value), &str); 4] = [
        ("syntax", |v| v["metric_phi"][1][1] = "sin x1".into(), "column 5"),
        ("grid", |v| v["grid"] = serde_json::json!([3]), "at least 5"),
        ("both", |v| v["X"] = serde_json::json!([["1"], ["0"]]), "exactly one"),
        ("unknown key", |v| v["solver"]["tolerance"] = 1.0.into(), "unknown field"),
    ];
    for (label, edit, needle) in edits {
        let cfg = variant(&dir, "rotation", edit);
        let out = jetlab(&["verify"], &cfg, dir.path());
        assert_eq!(out.status.code(), Some(2), "{label}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{label}: {err}");
    }
    let out = jetlab(&["verify"], &dir.path().join("missing.json"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_hard_check_gives_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "rotation", |v| v["verify"]["el_tol"] = 1e-300.into());
    let out = jetlab(&["verify"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_json(&dir.path().join("report.json"))["pass"], false);
}

#[test]
fn rotation_em_field_entry() {
    let dir = TempDir::new().unwrap();
    let out = jetlab(&["analyze", "--samples", "1", "--seed", "7"], &bundled("rotation"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let a = read_json(&dir.path().join("analysis.json"));
    let em = a["objects"]["em_field"].as_array().unwrap();
    let entry = em.iter().find(|e| e["index"] == serde_json::json!([1, 1, 2])).unwrap();
    assert_eq!(entry["value"].as_f64(), Some(-1.0));
    assert_eq!(entry["point"], 1);
}

#[test]
fn flat_config_has_vanishing_curvature_and_torsion() {
    let dir = TempDir::new().unwrap();
    jetlab(&["analyze", "--samples", "5"], &bundled("flat"), dir.path());
    let a = read_json(&dir.path().join("analysis.json"));
    for key in ["curvature_h", "curvature_phi", "torsion_rtt", "torsion_rtj", "torsion_rjk"] {
        let entries = a["objects"][key].as_array().unwrap();
        assert!(!entries.is_empty());
        assert!(entries.iter().all(|e| e["value"].as_f64() == Some(0.0)), "{key}");
    }
}

#[test]
fn analyze_and_verify_are_byte_identical_across_runs() {
    for cmd in [&["analyze", "--samples", "3", "--seed", "11"][..], &["verify"][..]] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        jetlab(cmd, &bundled("sphere_orbits"), a.path());
        jetlab(cmd, &bundled("sphere_orbits"), b.path());
        let file = if cmd[0] == "analyze" { "analysis.json" } else { "report.json" };
        let (x, y) = (std::fs::read(a.path().join(file)).unwrap(), std::fs::read(b.path().join(file)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{}", cmd[0]);
    }
}

#[test]
fn seed_changes_the_sample() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    jetlab(&["analyze", "--seed", "1"], &bundled("rotation"), a.path());
    jetlab(&["analyze", "--seed", "2"], &bundled("rotation"), b.path());
    assert_ne!(read_json(&a.path().join("analysis.json"))["points"], read_json(&b.path().join("analysis.json"))["points"]);
}

#[test]
fn rotation_solve_writes_the_circle() {
    let dir = TempDir::new().unwrap();
    let out = jetlab(&["solve"], &bundled("rotation"), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t1,x1,x2,L"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2001);
    assert!(rows.iter().all(|r| r.len() == 1 + 2 + 1));
    let first = &rows[0];
    assert_eq!(&first[..3], &[0.0, 1.0, 0.0]);
    assert!(first[3].abs() < 1e-9);

    let summary = read_json(&dir.path().join("summary.json"));
    assert!(summary["final_energy"].as_f64().unwrap() <= 1e-6);
    assert!(summary["initial_energy"].as_f64().unwrap() > summary["final_energy"].as_f64().unwrap());
    assert!(summary["iterations"].as_u64().unwrap() <= 5000);
    assert!(summary["final_max_el_residual"].as_f64().unwrap().is_finite());
    assert_eq!(summary["termination"], "converged");
}

#[test]
fn exact_start_returns_at_once() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "rotation", |v| {
        v["solver"]["init"] = serde_json::json!(["cos(t1)", "sin(t1)"]);
        v["solver"]["grad_tol"] = 1e-4.into();
    });
    assert_eq!(jetlab(&["solve"], &cfg, dir.path()).status.code(), Some(0));
    let s = read_json(&dir.path().join("summary.json"));
    assert!(s["iterations"].as_u64().unwrap() <= 1);
    let (e0, e1) = (s["initial_energy"].as_f64().unwrap(), s["final_energy"].as_f64().unwrap());
    assert!((e0 - e1).abs() <= 1e-12);
}

#[test]
fn exhausted_iterations_give_exit_one_with_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = variant(&dir, "gradient", |v| {
        v["solver"] = serde_json::json!({ "max_iters": 1, "metric": "euclidean", "init": ["0.5 + t1", "0.5"] });
    });
    let out = jetlab(&["solve"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("map.csv").exists());
    assert_eq!(read_json(&dir.path().join("summary.json"))["termination"], "max_iterations");
}

#[test]
fn two_dimensional_solve_has_one_row_per_node() {
    let dir = TempDir::new().unwrap();
    let out = jetlab(&["solve"], &bundled("pfaff_closed"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("map.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t1,t2,x1,L");
    assert_eq!(lines.len(), 1 + 21 * 21);
    // Row-major: the last axis varies fastest.
    let second: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(second[0], 0.0);
    assert!((second[1] - 0.05).abs() < 1e-15);
    for l in &lines[1..] {
        let r: Vec<f64> = l.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((r[2] - (r[0] * r[1] + 0.25)).abs() <= 1e-3, "{l}");
    }
}

#[test]
fn reduce_emits_a_solvable_first_order_config() {
    let dir = TempDir::new().unwrap();
    let out = jetlab(&["reduce"], &bundled("oscillator_order2"), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("first-order n = 2") && stdout.contains("jet dimension 5"), "{stdout}");
    let reduced = dir.path().join("oscillator_order2_reduced.json");
    let v = read_json(&reduced);
    assert_eq!(v["dims"]["n"], 2);
    assert_eq!(v["X"], serde_json::json!([["x1_1"], ["-x1"]]));
    assert!(v.get("scenario").is_none());

    let solved = TempDir::new().unwrap();
    assert_eq!(jetlab(&["solve"], &reduced, solved.path()).status.code(), Some(0));
    assert_eq!(jetlab(&["verify"], &reduced, solved.path()).status.code(), Some(0));

    assert_eq!(jetlab(&["reduce"], &bundled("rotation"), dir.path()).status.code(), Some(2));
}

#[test]
fn einstein_block_in_analysis() {
    let dir = TempDir::new().unwrap();
    jetlab(&["analyze"], &bundled("sphere_orbits"), dir.path());
    let a = read_json(&dir.path().join("analysis.json"));
    let ttt = a["objects"]["einstein_t_tt"].as_array().unwrap();
    assert_eq!(ttt[0]["point"], 0);
    assert!((ttt[0]["value"].as_f64().unwrap() + 1.0).abs() <= 1e-8);
}
