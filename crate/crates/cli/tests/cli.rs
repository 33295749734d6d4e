use std::path::Path;
use std::process::{Command, Output};

fn rangewalk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rangewalk"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RANGEWALK_OUT")
        .output()
        .unwrap()
}

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn constants_below_five_dimensions_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rangewalk(&["constants", "--dim", "4"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("block constants require d ≥ 5"));
}

#[test]
fn unknown_flag_and_bad_config_key_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        rangewalk(&["heatkernel", "--bogus"], tmp.path())
            .status
            .code(),
        Some(2)
    );
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let out = rangewalk(
        &["heatkernel", "--config", cfg.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rangewalk(&["volume", "--config", "/nonexistent/x.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn flags_override_file_which_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nenvs = 3\nnmax = 32\nseed = 9\n").unwrap();
    let out = rangewalk(
        &[
            "exit-times",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "4",
        ],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(tmp.path(), "exit-times.json");
    assert_eq!(s["config"]["envs"], 3);
    assert_eq!(s["config"]["nmax"], 32);
    assert_eq!(s["config"]["seed"], 4);
    assert_eq!(s["config"]["dim"], 4);
    assert_eq!(s["master_seed"], 4);
    assert!(s["config"].get("workers").is_none());
    assert!(s.get("wall_clock_seconds").is_none());
}

#[test]
fn heatkernel_series_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rangewalk(
        &["heatkernel", "--envs", "2", "--nmax", "512", "--timing"],
        tmp.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("heatkernel.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,p_return,stderr"));
    assert_eq!(lines.next(), Some("0,1,0"));
    assert_eq!(lines.next(), Some("2,0.5,0"));
    assert_eq!(csv.lines().count(), 1 + 257);
    let s = summary(tmp.path(), "heatkernel.json");
    assert_eq!(s["experiment"], "heatkernel");
    assert!(s["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(s["invariant_violations"].as_array().unwrap().len(), 0);
}

#[test]
fn constants_summary_has_every_estimate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rangewalk(
        &["constants", "--envs", "8", "--horizon", "500"],
        tmp.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = summary(tmp.path(), "constants.json");
    for k in ["tau", "delta", "rho", "nu", "eta", "kappa1", "kappa2"] {
        assert!(s[k]["value"].as_f64().unwrap() > 0.0, "{k}");
        assert!(s[k]["stderr"].as_f64().unwrap() >= 0.0, "{k}");
    }
}

#[test]
fn d4_diagnostics_needs_dimension_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rangewalk(&["d4-diagnostics", "--dim", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
