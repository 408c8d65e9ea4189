use std::process::{Command, Output};

use serde_json::Value;

fn adheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adheat"))
        .args(args)
        .env_remove("ADHEAT_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = adheat(&all);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).expect("one JSON document")
}

fn first_f64(doc: &Value, key: &str) -> f64 {
    doc["rows"][0][key].as_f64().expect("numeric cell")
}

#[test]
fn heat_kernel_at_a2_is_the_gaussian_exponent() {
    let doc = json(&["eval", "heat-kernel", "--a", "2", "--N", "3", "--x", "0,0,0", "--y", "1,0,0", "--t", "1"]);
    assert!((first_f64(&doc, "value") - 0.6065306597126334).abs() < 1e-13);
    // the density carries (2π)^{-3/2}
    let density = first_f64(&doc, "density");
    assert!((density - 0.6065306597126334 * (2.0 * std::f64::consts::PI).powf(-1.5)).abs() < 1e-15);
    assert_eq!(doc["config"]["a"], 2.0);
    assert_eq!(doc["config"]["N"], 3);
}

#[test]
fn scripti_examples() {
    let doc = json(&["eval", "scripti", "--b", "1", "--nu", "0.5", "--w", "2", "--t", "0.3"]);
    assert!((first_f64(&doc, "value_re") - 0.6f64.exp()).abs() < 1e-14);
    assert_eq!(doc["rows"][0]["method"], "series");

    let doc = json(&["eval", "scripti", "--w", "0"]);
    assert_eq!(first_f64(&doc, "value_re"), 1.0);

    // a grid of complex w and negative t
    let doc = json(&["eval", "scripti", "--w", "1+2i,-3", "--t", "-0.5,0.5", "--method", "contour"]);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
    assert_eq!(doc["rows"][0]["method"], "contour");
}

#[test]
fn other_kernels() {
    let doc = json(&["eval", "fourier-kernel", "--x", "0,0,0", "--y", "1,2,3"]);
    assert!((first_f64(&doc, "value_re") - 1.0).abs() < 1e-14);
    let doc = json(&["eval", "laguerre-kernel", "--x", "0.8,-0.3,0", "--y", "0,1,0", "--z", "0.5+1i"]);
    assert!(first_f64(&doc, "value_re").is_finite());
}

#[test]
fn csv_has_header_round_trip_floats_and_config() {
    let o = adheat(&["eval", "heat-kernel", "--a", "1.5", "--N", "2", "--x", "0.3,-0.2", "--y", "1,0", "--y", "0,1", "--t", "0.5,2"]);
    assert!(o.status.success());
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    let header = rd.headers().unwrap().clone();
    assert_eq!(header.iter().last(), Some("config"));
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    let col = header.iter().position(|h| h == "value").unwrap();
    let printed: f64 = rows[0][col].parse().unwrap();
    let again = json(&["eval", "heat-kernel", "--a", "1.5", "--N", "2", "--x", "0.3,-0.2", "--y", "1,0", "--t", "0.5"]);
    assert_eq!(printed, first_f64(&again, "value"));
    let cfg: Value = serde_json::from_str(&rows[0][header.len() - 1]).unwrap();
    assert_eq!(cfg["command"], "eval heat-kernel");
    assert_eq!(cfg["args"]["t"], serde_json::json!([0.5, 2.0]));
    assert!(rows[1][header.len() - 1].is_empty());
}

#[test]
fn exit_codes() {
    // invalid deformation parameter
    assert_eq!(adheat(&["eval", "scripti", "--a", "0.5", "--N", "1"]).status.code(), Some(2));
    assert_eq!(adheat(&["eval", "heat-kernel", "--x", "0,0", "--y", "1,0,0"]).status.code(), Some(2));
    assert_eq!(adheat(&["eval", "heat-kernel", "--x", "0,0,0", "--y", "1,0,0", "--t", "-1"]).status.code(), Some(2));
    assert_eq!(adheat(&["eval", "scripti", "--w", "abc"]).status.code(), Some(2));
    assert_eq!(adheat(&["frobnicate"]).status.code(), Some(2));
    // the series runs out of terms
    assert_eq!(adheat(&["eval", "scripti", "--w", "900", "--t", "0.1", "--method", "series"]).status.code(), Some(3));
}

#[test]
fn verify_reports_checks() {
    let o = adheat(&["verify", "specfun"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = doc["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    for c in checks {
        for key in ["name", "paper_ref", "value", "expected", "tol", "pass"] {
            assert!(c.get(key).is_some(), "missing {key} in {c}");
        }
        assert_eq!(c["pass"], true, "{c}");
    }
    assert_eq!(doc["config"]["args"]["suite"], "specfun");

    let doc = json(&["verify", "scripti", "--quick"]);
    assert!(doc["checks"].as_array().unwrap().iter().any(|c| c["paper_ref"] == "contour integral representation"));
}

#[test]
fn verify_kernel_identities_quick() {
    let doc = json(&["verify", "kernel-identities", "--a", "1", "--N", "3", "--quick"]);
    let checks = doc["checks"].as_array().unwrap();
    for want in ["total integral", "composition at the origin", "semigroup composition"] {
        assert!(checks.iter().any(|c| c["paper_ref"] == want), "no {want} check");
    }
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn simulated_paths_are_reproducible() {
    let args = ["simulate", "paths", "--paths", "2", "--steps", "8", "--seed", "17", "--x0", "0.5,0,0"];
    let a = adheat(&args);
    let b = adheat(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 2 * 9);
    assert_ne!(text, stdout(&adheat(&["simulate", "paths", "--paths", "2", "--steps", "8", "--seed", "18", "--x0", "0.5,0,0"])));
}

#[test]
fn moments_match_closed_form() {
    let doc = json(&["simulate", "moments", "--a", "1", "--N", "3", "--x0", "origin", "--t", "1", "--paths", "100000", "--m", "1"]);
    let row = &doc["rows"][0];
    // a(λ_a + 1)t = 2t at a = 1, N = 3
    assert_eq!(row["expected"], 2.0);
    assert!(row["z"].as_f64().unwrap().abs() < 4.0, "{row}");
}

#[test]
fn feynman_kac_decay_table() {
    let doc = json(&["simulate", "feynman-kac", "--V", "oscillator", "--f", "ground", "--t", "0.5,1", "--paths", "5000"]);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r["expected_rate"], 2.0);
        assert!((r["rate"].as_f64().unwrap() / 2.0 - 1.0).abs() < 0.05, "{r}");
        assert_eq!(r["seed"].as_u64().is_some(), true);
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_adheat"))
        .args(["simulate", "continuity", "--paths", "2000", "--t", "0.01,0.1"])
        .env("ADHEAT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("simulate-continuity.csv")).unwrap();
    assert!(text.starts_with("t,mean,stderr,power,slope,n_paths,seed,config"));

    let out = dir.path().join("sub").join("k.json");
    let o = adheat(&["eval", "scripti", "--w", "1", "--out", out.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["output"], out.to_str().unwrap());
}
