use std::path::PathBuf;
use std::process::{Command, Output};

fn rhg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhg"))
        .args(args)
        .output()
        .expect("failed to launch rhg")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rhg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn rho_out_of_range_is_a_usage_error() {
    for rho in ["1.6", "-1.5708", "nan"] {
        let out = rhg(&["constants", "--rho", rho]);
        assert_eq!(out.status.code(), Some(2), "rho = {rho}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("rho"), "{err}");
    }
}

#[test]
fn constants_json_has_expected_values() {
    let out = rhg(&["constants", "--rho", "0.5", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let a = v["a"].as_f64().unwrap();
    let b = v["b"].as_f64().unwrap();
    let area = v["area"].as_f64().unwrap();
    assert!((8.0 * a * b - area).abs() < 1e-12 * area);
    let big_a = v["A"].as_f64().unwrap();
    let big_b = v["B"].as_f64().unwrap();
    assert!((4.0 * (big_a + big_b) * area - 1.0).abs() < 1e-9);
    assert_eq!(v["C"].as_f64().unwrap(), 0.0);
    let eta1 = &v["eta1"];
    assert!((eta1[0].as_f64().unwrap() + 0.8177845921).abs() < 1e-8);
    assert!((eta1[1].as_f64().unwrap() - 0.1964205256).abs() < 1e-8);
}

#[test]
fn constants_csv_lists_every_name() {
    let out = rhg(&["constants", "--rho", "0"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = s.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    for n in ["a", "b", "omega1", "omega2", "e1", "e2", "e3", "c", "d", "eta1", "eta2", "A", "B", "C", "k"] {
        assert!(names.contains(&n), "missing {n}");
    }
}

#[test]
fn surface_outputs_are_deterministic() {
    let p1 = scratch("s1.csv");
    let p2 = scratch("s2.csv");
    for p in [&p1, &p2] {
        let out = rhg(&["surface", "--rho", "0.5", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert!(stdout.contains("A = ") && stdout.contains("|T| = "));
    }
    let a = std::fs::read(&p1).unwrap();
    assert_eq!(a, std::fs::read(&p2).unwrap());
    let s = String::from_utf8(a).unwrap();
    assert_eq!(s.lines().next(), Some("x,y,G"));
    // 121 x 121 samples plus header
    assert_eq!(s.lines().count(), 121 * 121 + 1);
}

#[test]
fn surface_pgm_has_sidecar() {
    let p = scratch("s.pgm");
    let out = rhg(&["surface", "--rho", "-0.4", "--format", "pgm", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let bytes = std::fs::read(&p).unwrap();
    assert!(bytes.starts_with(b"P5\n121 121\n65535\n"));
    assert_eq!(bytes.len(), 17 + 2 * 121 * 121);
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(scratch("s.pgm.json")).unwrap()).unwrap();
    assert_eq!(side["min"].as_f64(), Some(0.0));
    assert!(side["max"].as_f64().unwrap() > 0.0);
}

#[test]
fn surface_warns_when_minimum_moves() {
    let p = scratch("far.csv");
    let out = rhg(&["surface", "--rho", "1.0", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("minimum"));
}

#[test]
fn verify_passes_and_writes_json() {
    let p = scratch("verify.json");
    let out = rhg(&["verify", "--rho", "0.5", "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    assert!(v["fitting_gap"].as_f64().unwrap() < 1e-8);
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks pass"));
}

#[test]
fn verify_fails_where_minimum_is_negative() {
    let out = rhg(&["verify", "--rho", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("nonneg_min"));
}

#[test]
fn mesh_dump_csv() {
    let p = scratch("mesh.csv");
    let out = rhg(&["mesh-dump", "--rho", "0.2", "--mesh", "21", "19", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let s = std::fs::read_to_string(&p).unwrap();
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("part,row,col,wp_re,wp_im,z_re,z_im,zeta_re,zeta_im"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 9));
    assert!(rows.iter().any(|r| r[0] == "mirror"));
    assert_eq!(rows.iter().filter(|r| r[0] == "half").count(), 21 * 19);
}

#[test]
fn pgm_is_rejected_for_constants() {
    let out = rhg(&["constants", "--format", "pgm"]);
    assert_eq!(out.status.code(), Some(1));
}
