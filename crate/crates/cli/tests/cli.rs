use std::process::Command;

fn retroalign(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_retroalign")).args(args).output().unwrap()
}

#[test]
fn verify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = retroalign(&[
        "--scheme", "x_retro_csit", "--mode", "verify", "--trials", "50", "--seed", "7", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["results"]["decode_ok"], 50);
    assert_eq!(v["results"]["per_trial"].as_array().unwrap().len(), 50);
    assert_eq!(v["config"]["seed"], 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let p = dir.path().join(name);
        let o = retroalign(&[
            "--scheme", "bc_mat", "--mode", "dof_sweep", "--snr-grid", "20,30,40", "--trials", "30",
            "--threads", threads, "--out", p.to_str().unwrap(),
        ]);
        assert!(o.status.code().is_some());
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.json", "1"), run("b.json", "4"));
}

#[test]
fn config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"scheme": "ic3_retro_csit", "mode": "audit", "trials": 5, "output_format": "json"}"#)
        .unwrap();
    let o = retroalign(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["feedback_fraction"], "5/8");
    assert_eq!(v["config"]["trials"], 5);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["--scheme", "bc_mat", "--mode", "dof_sweep"][..],
        &["--scheme", "bc_mat", "--mode", "audit", "--format", "csv"][..],
        &["--scheme", "bc_mat", "--mode", "verify", "--bogus"][..],
        &["--mode", "verify"][..],
    ] {
        let o = retroalign(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn failing_sweep_exits_one() {
    // A sweep at low SNR does not reach the high-SNR slope.
    let o = retroalign(&["--scheme", "x_retro_csit", "--mode", "dof_sweep", "--snr-grid", "-20,-10,0", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn help_exits_zero() {
    let o = retroalign(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("--snr-grid"));
}
