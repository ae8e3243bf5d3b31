use std::fs;
use std::path::Path;
use std::process::Command;

fn gqfpe(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gqfpe")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) {
    let out = gqfpe(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn figure1_defaults_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        run_ok(&["figure1", "--out-dir", d.path().to_str().unwrap()]);
    }
    for beta in ["0.5", "1", "5"] {
        let name = format!("fig1_beta{beta}.csv");
        let x = fs::read_to_string(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read_to_string(b.path().join(&name)).unwrap());
        assert!(x.starts_with("t_s,Gamma,R_pq,R_qq,R_pp,alpha,D,r_m\n"));
        assert_eq!(x.lines().count(), 2002);
    }
    let s = summary(a.path(), "fig1_summary.json");
    assert_eq!(s["manifest"].as_array().unwrap().len(), 3);
    assert_eq!(s["summary"][2]["uniform_sign"], "negative");
    assert_eq!(s["summary"][0]["steady_sign"], "positive");
    assert_eq!(s["metadata"]["config"]["steps"], 2000);
    let tail = (s["summary"][0]["steady"]["Gamma"].as_f64().unwrap() - 1.25).abs();
    assert!(tail < 1e-6);
}

#[test]
fn coeffs_from_flags_with_beta_list() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_str().unwrap();
    run_ok(&["coeffs", "--out-dir", p, "--gamma-s", "0.1", "--beta-s", "0.5,1,5", "--steps", "200"]);
    for beta in ["0.5", "1", "5"] {
        assert!(d.path().join(format!("coeffs_beta{beta}.csv")).exists());
    }
}

#[test]
fn config_errors_exit_2_with_line() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    fs::write(&cfg, "[coeffs]\ngamma_s = 0.1\nbeta_s = 1\ntypo = 2\n").unwrap();
    let out = gqfpe(&["coeffs", "--config", cfg.to_str().unwrap(), "--out-dir", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    let out = gqfpe(&["coeffs", "--out-dir", d.path().to_str().unwrap(), "--gamma-s", "-0.1", "--beta-s", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_s"));
    assert_eq!(gqfpe(&["coeffs"]).status.code(), Some(2));
}

#[test]
fn anharmonic_compare_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_str().unwrap();
    let out = gqfpe(&["compare", "--out-dir", p, "--gamma-s", "0.1", "--beta-s", "1", "--set", "quartic=0.1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn numerical_failure_exits_3_with_diagnostics() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().to_str().unwrap();
    let out = gqfpe(&[
        "propagate",
        "--out-dir",
        p,
        "--gamma-s",
        "0.7",
        "--beta-s",
        "1",
        "--n-basis",
        "32",
        "--t-end",
        "5",
        "--dt",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(d.path(), "error.json");
    assert!(s["summary"]["error"].as_str().unwrap().contains("non-positive effective mass"));
}

#[test]
fn propagate_oracle_kernels_wigner_outputs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    fs::write(
        &cfg,
        r#"{
  "propagate": {"gamma_s": 0.1, "beta_s": 1.0, "n_basis": 24, "dt": 0.01, "t_end": 1.0},
  "oracle": {"gamma_s": 0.1, "beta_s": 1.0, "n_modes": 64, "t_end": 1.0, "dt": 0.1},
  "kernels": {"gamma_s": 0.1, "beta_s": 1.0, "t_max": 2.0, "steps": 20},
  "wigner": {"state": "coherent", "q0": 1.0, "n_basis": 32}
}"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let p = d.path().to_str().unwrap();
    for cmd in ["propagate", "oracle", "kernels", "wigner"] {
        run_ok(&[cmd, "--config", c, "--out-dir", p]);
    }
    let header = "t_s,trace,q_mean,p_mean,q_var,p_var,qp_sym,purity,min_eig,energy";
    let traj = fs::read_to_string(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), header);
    assert_eq!(traj.lines().count(), 12);
    let oracle = fs::read_to_string(d.path().join("oracle.csv")).unwrap();
    assert_eq!(oracle.lines().next().unwrap(), header);
    // min_eig is unavailable for the oracle
    assert!(oracle.lines().nth(1).unwrap().contains(",,"));
    let k = fs::read_to_string(d.path().join("kernels.csv")).unwrap();
    assert_eq!(k.lines().next().unwrap(), "t_s,KI0,KI1,KI2,KR0,KR1,KR2,KI1_tilde,KR1_tilde");
    let w = fs::read_to_string(d.path().join("wigner.csv")).unwrap();
    assert_eq!(w.lines().count(), 162);
    assert_eq!(w.lines().next().unwrap().split(',').count(), 162);
    let s = summary(d.path(), "wigner_summary.json");
    assert!((s["summary"]["integral"].as_f64().unwrap() - 1.0).abs() < 1e-4);
}
