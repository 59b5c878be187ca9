use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simplicial"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_exit_codes() {
    let torus = fixture("torus");
    let out = run(&["validate", "--instance", path(&torus)]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["valid"], true);

    let bad = fixture("bad_triangle");
    let out = run(&["validate", "--instance", path(&bad)]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["metric"]["violations"][0]["face"], 0);

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"complex\": ").unwrap();
    let out = run(&["validate", "--instance", path(&broken)]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
}

#[test]
fn separate_files_can_replace_instance_parts() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("metric.json");
    std::fs::write(&metric, r#"{"lengths": [1.0, 1.0, 5.0]}"#).unwrap();
    let torus = fixture("torus");
    let out = run(&["validate", "--instance", path(&torus), "--metric", path(&metric)]);
    assert_eq!(code(&out), 1);
    std::fs::write(&metric, r#"{"lengths": [1.0, 1.0]}"#).unwrap();
    let out = run(&["validate", "--instance", path(&torus), "--metric", path(&metric)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn energy_reports_infinite_status() {
    let inf = fixture("infinite_energy");
    let out = run(&["energy", "--instance", path(&inf)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["status"], "infinite");
    assert_eq!(r["energy"], "infinite");
}

#[test]
fn energy_of_isometric_torus_equals_area() {
    let torus = fixture("torus");
    let r = report(&run(&["energy", "--instance", path(&torus)]));
    let e = r["energy"].as_f64().unwrap();
    let a = r["map_simplicial_area"].as_f64().unwrap();
    assert!((e - a).abs() <= 1e-12 * a);
    assert_eq!(r["conformal"], true);
}

#[test]
fn skeleton_energy_fields() {
    let tet = fixture("double_tetrahedron");
    let r = report(&run(&["energy", "--instance", path(&tet)]));
    let e2 = r["energy2"].as_f64().unwrap();
    let v2 = r["volume2"].as_f64().unwrap();
    assert!(e2 >= v2);
}

#[test]
fn flow_writes_map_report_and_monotone_trace() {
    let dir = tempfile::tempdir().unwrap();
    let disk = fixture("dirichlet_disk");
    let out = run(&["flow", "--instance", path(&disk), "--out", path(dir.path())]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["termination"], "converged");
    for name in ["map.json", "instance.json", "flow_report.json", "trace.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let mut rdr = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    let energies: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[1].parse().unwrap())
        .collect();
    assert!(energies.len() > 1);
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));

    // the flowed instance verifies as harmonic
    let inst = dir.path().join("instance.json");
    let out = run(&["verify", "--instance", path(&inst), "--checks", "mean_value,convex_hull", "--check-tol", "1e-7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn zero_energy_flow_leaves_map_unchanged() {
    let tree = fixture("annulus_tree");
    let r = report(&run(&["flow", "--instance", path(&tree)]));
    assert_eq!(r["unchanged"], true);
    assert_eq!(r["iterations"], 0);
}

#[test]
fn reports_are_reproducible() {
    let g = fixture("genus2_fan");
    let args = ["--seed", "7", "flow", "--instance", path(&g), "--perturb", "0.3", "--tol", "1e-6"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["--seed", "8", "flow", "--instance", path(&g), "--perturb", "0.3", "--tol", "1e-6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn family_flow() {
    let dir = tempfile::tempdir().unwrap();
    let disk: Value = serde_json::from_str(&std::fs::read_to_string(fixture("dirichlet_disk")).unwrap()).unwrap();
    for i in 0..3 {
        let mut map = disk["map"].clone();
        for p in map["vertex_images"].as_array_mut().unwrap() {
            p[0] = Value::from(p[0].as_f64().unwrap() + 0.01 * i as f64);
        }
        std::fs::write(dir.path().join(format!("m{i}.json")), map.to_string()).unwrap();
    }
    let pattern = dir.path().join("m*.json");
    let out_dir = dir.path().join("out");
    let out = run(&[
        "flow",
        "--instance",
        path(&fixture("dirichlet_disk")),
        "--family",
        path(&pattern),
        "--warm-start",
        "--out",
        path(&out_dir),
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["members"].as_array().unwrap().len(), 3);
    assert!(out_dir.join("map_002.json").exists());
    assert!(out_dir.join("family_report.json").exists());
}

#[test]
fn verify_selects_checks_and_rejects_unknown_names() {
    let torus = fixture("torus");
    let out = run(&["verify", "--instance", path(&torus), "--checks", "embedding,good_triangulation"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["checks"].as_array().unwrap().len(), 2);
    let out = run(&["verify", "--instance", path(&torus), "--checks", "e_ge_a,bogus"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_fails_on_non_harmonic_map() {
    let disk = fixture("dirichlet_disk");
    let out = run(&["verify", "--instance", path(&disk), "--checks", "mean_value"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn genus2_verify_after_flow() {
    let g = fixture("genus2_46");
    let out = run(&[
        "verify",
        "--instance",
        path(&g),
        "--flow",
        "--tol",
        "1e-5",
        "--perturb",
        "0.2",
        "--checks",
        "e_ge_a,area_bound,angle_sums,embedding",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn export_obj_counts() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("torus.obj");
    let out = run(&["export-obj", "--instance", path(&fixture("torus")), "--out", path(&obj)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!((r["vertices"].as_u64(), r["faces"].as_u64()), (Some(1), Some(2)));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 2);

    let out = run(&["export-obj", "--instance", path(&fixture("annulus_tree")), "--out", path(&obj)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn optimize_metric_trace_and_collapse_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "optimize-metric",
        "--instance",
        path(&fixture("dirichlet_disk")),
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["monotone"], true);
    assert!(dir.path().join("area_trace.csv").exists());
    assert_eq!(r["final_energy"], r["final_area"]);

    let r = report(&run(&["optimize-metric", "--instance", path(&fixture("annulus_tree"))]));
    assert!(!r["zero_edges"].as_array().unwrap().is_empty());
    assert!(r["collapse"].is_object());
}

#[test]
fn compare_weights_writes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("witness.json");
    let out = run(&["compare-weights", "--instances", "200", "--out", path(&w)]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["simplicial_violations"], 0);
    assert!(r["cotangent_violations"].as_u64().unwrap() >= 1);
    assert!(w.exists());
}
