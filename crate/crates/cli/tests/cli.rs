use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn tentomo(args: &[&str], output_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tentomo"));
    cmd.args(args).env_remove("OUTPUT_DIR");
    if let Some(d) = output_dir {
        cmd.env("OUTPUT_DIR", d);
    }
    cmd.output().unwrap()
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    tentomo(&args, None)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn passing_golden_config_exits_zero_with_exact_residuals() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&golden("pass.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("identities.ibp.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["scenario"], "identities.ibp");
    let rows = report["residuals"].as_array().unwrap();
    assert!(rows.len() >= 18);
    assert!(rows.iter().all(|r| r["value"] == 0.0 && r["pass"] == true));
    let csv = std::fs::read_to_string(out.path().join("identities.ibp.csv")).unwrap();
    assert!(csv.starts_with("check_name,parameters,residual,tolerance,pass,seconds\n"));
    assert_eq!(csv.lines().count(), rows.len() + 1);
}

#[test]
fn inverted_negative_control_exits_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&golden("fail.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let csv = std::fs::read_to_string(out.path().join("ucp.ray.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("ray.control.") && l.contains(",false,")), "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("ray.potential.") && l.contains(",true,")));
}

#[test]
fn malformed_config_exits_two_with_position() {
    let o = tentomo(&["validate", "--config", golden("invalid.json").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5") && err.contains("rule_degre"), "{err}");
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run(&golden("invalid.json"), out.path(), &[]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), "{ \"scenario\": ");
    assert_eq!(tentomo(&["validate", "--config", p.to_str().unwrap()], None).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(tentomo(&["validate", "--config", missing.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn precondition_violation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), r#"{"scenario": "identities.mrt", "m": 1, "k": 2}"#);
    let o = tentomo(&["validate", "--config", p.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("field `k`"));
    assert_eq!(run(&p, dir.path(), &[]).status.code(), Some(3));
}

#[test]
fn validate_accepts_golden_configs() {
    for name in ["pass.json", "fail.json"] {
        let o = tentomo(&["validate", "--config", golden(name).to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(0), "{name}");
    }
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(
        dir.path(),
        r#"{"scenario": "identities.john", "m": 2, "samples": 3, "seed": 5, "record_timing": false}"#,
    );
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(run(&p, &a, &[]).status.code(), Some(0));
    assert_eq!(run(&p, &b, &[]).status.code(), Some(0));
    for file in ["identities.john.csv", "identities.john.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    assert_eq!(run(&p, &c, &["--seed", "6"]).status.code(), Some(0));
    assert_ne!(std::fs::read(a.join("identities.john.csv")).unwrap(), std::fs::read(c.join("identities.john.csv")).unwrap());
}

#[test]
fn output_dir_env_and_suite_override() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let o = tentomo(
        &["run", "--config", golden("pass.json").to_str().unwrap(), "--suite", "ucp.trt"],
        Some(&env_dir),
    );
    assert_eq!(o.status.code(), Some(3), "ucp.trt with n = 2 is rejected: {}", String::from_utf8_lossy(&o.stderr));
    let p = write_config(dir.path(), r#"{"scenario": "ucp.trt", "n": 3, "m": 2, "samples": 5}"#);
    let o = tentomo(&["run", "--config", p.to_str().unwrap()], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("ucp.trt.csv").exists());
    let flag_dir = dir.path().join("from_flag");
    let o = tentomo(&["run", "--config", p.to_str().unwrap(), "--out", flag_dir.to_str().unwrap()], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("ucp.trt.json").exists());
    let bad = tentomo(&["run", "--config", p.to_str().unwrap(), "--suite", "nope"], None);
    assert_eq!(bad.status.code(), Some(2));
}
