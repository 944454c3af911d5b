use std::path::Path;
use std::process::{Command, Output};

fn bpr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpr")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_then_solve_recovers_the_signal() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let inst = inst.to_str().unwrap();
    let out = bpr(&[
        "gen", "--n", "32", "--k", "2", "--snr", "inf", "--seed", "5", "--out", inst,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["h.bpr", "y.bpr", "a.bpr", "yt.bpr", "x.bpr", "meta.json"] {
        assert!(Path::new(inst).join(f).exists(), "{f} missing");
    }

    let est = dir.path().join("x_hat.bpr");
    let out = bpr(&[
        "solve",
        "--instance",
        inst,
        "--seed",
        "5",
        "--out",
        est.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["k"], 2);
    assert!(report["nmse"].as_f64().unwrap() <= 1e-6);
    assert!(est.exists());
}

#[test]
fn solve_from_config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 64, "k": 4, "snr_db": null, "seed": 3}"#).unwrap();
    let out = bpr(&["solve", "--config", cfg.to_str().unwrap(), "--n", "32"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["n"], 32);
    assert_eq!(report["k"], 4);
    assert_eq!(report["per_block_reports"].as_array().unwrap().len(), 4);
}

#[test]
fn sweeps_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("n.csv");
    let out = bpr(&[
        "sweep-n",
        "--n-list",
        "32,64",
        "--k",
        "2",
        "--trials",
        "1",
        "--snr",
        "inf",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);

    let out = bpr(&[
        "sweep-k", "--n", "32", "--k-list", "1,2", "--trials", "1", "--format", "json",
    ]);
    assert!(out.status.success());
    let table: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn table1_lists_reference_values() {
    let out = bpr(&[
        "table1",
        "--n-list",
        "256",
        "--trials",
        "1",
        "--restarts",
        "1",
        "--parallelism",
        "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.trim_start().starts_with("256")).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[1], "4");
    assert_eq!(cols[2], "4");
    assert_eq!(cols[4], "1.2");
}

#[test]
fn exit_codes_follow_error_kind() {
    assert_eq!(bpr(&["solve", "--n", "10", "--k", "4"]).status.code(), Some(2));
    assert_eq!(bpr(&["solve", "--snr", "loud"]).status.code(), Some(2));
    assert_eq!(bpr(&["sweep-n", "--n-list", "32", "--bogus"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing");
    assert_eq!(
        bpr(&["solve", "--instance", missing.to_str().unwrap()]).status.code(),
        Some(3)
    );
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, "{\"n\": ").unwrap();
    assert_eq!(
        bpr(&["solve", "--config", bad_cfg.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn solver_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst");
    let inst_s = inst.to_str().unwrap();
    assert!(bpr(&["gen", "--n", "16", "--k", "2", "--snr", "inf", "--out", inst_s])
        .status
        .success());
    // Zero intensities make every block solver fail.
    let zeros = bpr_core::ComplexVec::zeros(96);
    bpr_core::io::save_bpr(inst.join("y.bpr"), &bpr_core::io::BprObject::Vector(zeros)).unwrap();
    assert_eq!(bpr(&["solve", "--instance", inst_s]).status.code(), Some(1));
}
