use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const MODEL: &str = r#"{
  "grid": {"e_min": 0.0, "e_max": 4.0, "bins": 128},
  "density": {"type": "flat", "value": 1.0},
  "vectors": {
    "f": {"type": "gaussian_shell", "center": 1.0, "width": 0.5},
    "g": {"type": "gaussian_shell", "center": 1.3, "width": 0.4}
  }
}"#;

const PHI: &str = r#"{"type": "gaussian", "amplitude": 0.3989422804014327, "center": 0.0, "width": 1.0}"#;

fn ldl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ldl")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes the model and an experiment file with `n` copies of `symbol`.
fn setup(dir: &Path, symbol: &str, n: usize, experiment: &str) -> PathBuf {
    fs::write(dir.join("model.json"), MODEL).unwrap();
    let symbols = vec![symbol; n].join(",");
    let cfg = format!(
        r#"{{"model_file": "model.json", "symbols": [{symbols}], "epsilons": [0.2, 0.1], "experiment": {experiment}}}"#
    );
    let path = dir.join("config.json");
    fs::write(&path, cfg).unwrap();
    path
}

fn ff_symbol() -> String {
    format!(r#"{{"f": "f", "g": "f", "omega_index": 0, "phi": {PHI}}}"#)
}

#[test]
fn minimal_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &ff_symbol(), 1, r#"{"kind": "limit"}"#);
    let o = ldl(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("n,coefficient_re,coefficient_im,delta_order,smeared_re,smeared_im\n"));
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn non_integer_omega_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = format!(r#"{{"f": "f", "g": "f", "omega_index": 1.5, "phi": {PHI}}}"#);
    let cfg = setup(dir.path(), &bad, 1, r#"{"kind": "limit"}"#);
    let o = ldl(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("symbols[0].omega_index"), "{}", stderr(&o));
}

#[test]
fn five_symbol_sweep_hits_the_arity_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &ff_symbol(), 5, r#"{"kind": "sweep"}"#);
    let o = ldl(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n <= 4"), "{}", stderr(&o));
}

#[test]
fn poisson_assert_passes_with_unit_cumulants() {
    let o = ldl(&["poisson", "--lambda", "1", "--orders", "6", "--assert"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for r in rows {
        let kappa: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!((kappa - 1.0).abs() <= 1e-12, "{r}");
    }
}

#[test]
fn poisson_misaligned_lambda_is_an_error() {
    let o = ldl(&["poisson", "--lambda", "1", "--e-max", "3", "--grid-bins", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bin edge"), "{}", stderr(&o));
}

#[test]
fn free_check_reports_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let fg = format!(r#"{{"f": "f", "g": "g", "phi": {PHI}}}"#);
    let cfg = setup(dir.path(), &fg, 2, r#"{"kind": "free-check"}"#);
    let o = ldl(&["run", "--config", cfg.to_str().unwrap(), "--format", "json", "--assert"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let row = &v["rows"][0];
    assert!(row["limit"].is_array() && row["free_moment"].is_array());
    assert!(row["abs_diff"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn broken_model_path_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, r#"{"model_file": "missing.json", "experiment": {"kind": "limit"}}"#).unwrap();
    let o = ldl(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read"), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_two_under_assert() {
    let o = ldl(&["delta-lemma", "--epsilons", "2,1", "--assert"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = ldl(&["delta-lemma", "--epsilons", "2,1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn output_is_deterministic_and_sidecar_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &ff_symbol(), 2, r#"{"kind": "sweep"}"#);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for out in [&a, &b] {
        let o = ldl(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = fs::read(&a).unwrap();
    assert_eq!(first, fs::read(&b).unwrap());
    assert!(String::from_utf8_lossy(&first)
        .starts_with("epsilon,n,value_re,value_im,limit_re,limit_im,abs_err,rel_err,warnings\n"));

    let meta = dir.path().join("a.csv.meta.json");
    let sidecar: serde_json::Value = serde_json::from_slice(&fs::read(&meta).unwrap()).unwrap();
    assert_eq!(sidecar["grid"]["bins"], 128);
    assert_eq!(sidecar["symbol_digest"].as_str().unwrap().len(), 64);
    assert_eq!(sidecar["version"], env!("CARGO_PKG_VERSION"));
    let o = ldl(&["run", "--config", meta.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, fs::read(&c).unwrap());
}

#[test]
fn wn_expect_checks_against_the_limit() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("model.json"), MODEL).unwrap();
    let model = dir.path().join("model.json");
    let o = ldl(&[
        "wn-expect",
        "--config",
        model.to_str().unwrap(),
        "--symbols",
        "f:g,g:f:0:0.3:0.7,f:f",
        "--assert",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("\"{1,2,3}\",2,")), "{out}");
}

#[test]
fn diagram_census_and_bell() {
    let o = ldl(&["diagrams", "--n", "4", "--assert"]);
    assert!(o.status.success());
    let irreducible = stdout(&o).lines().skip(1).filter(|l| l.split(',').nth(1) == Some("true")).count();
    assert_eq!(irreducible, 6);
    let o = ldl(&["bell", "--n", "8", "--assert"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("8,4140,4140"));
}
