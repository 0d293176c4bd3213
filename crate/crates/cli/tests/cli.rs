use std::process::{Command, Output};

fn ustat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ustat")).args(args).output().expect("failed to spawn ustat")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is not JSON")
}

fn data_file(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("data.csv");
    std::fs::write(&path, "x1,y\n0,1\n1,2\n2,4\n3,8\n").unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn predict_complete_mean() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(&dir);
    let v = json(&ustat(&["predict", "--data", &data, "--kernel", r#"{"kind":"mean"}"#, "--s", "2", "--scheme", "complete"]));
    assert_eq!(v["theta_hat"], 3.75);
    assert_eq!(v["realized_N"], 6);
}

#[test]
fn predict_reads_kernel_file_and_dumps_design() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(&dir);
    let kernel = dir.path().join("kernel.json");
    std::fs::write(&kernel, r#"{"kind":"knn","k":1,"target_x":[0.2]}"#).unwrap();
    let dump = dir.path().join("design.jsonl");
    let out = ustat(&[
        "predict", "--data", &data, "--kernel", &format!("@{}", kernel.display()), "--s", "2", "--N", "4",
        "--scheme", "fixedn", "--dump-design", dump.to_str().unwrap(), "--seed", "3",
    ]);
    let v = json(&out);
    assert_eq!(v["realized_N"], 4);
    let lines = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(lines.lines().count(), 4);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first["indices"].is_array());
}

#[test]
fn invalid_arguments_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(&dir);
    let out = ustat(&["predict", "--data", &data, "--kernel", r#"{"kind":"mean"}"#, "--s", "9", "--scheme", "complete"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumeration_cap_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_file(&dir);
    let out = ustat(&[
        "predict", "--data", &data, "--kernel", r#"{"kind":"mean"}"#, "--s", "2", "--scheme", "complete",
        "--enumeration-cap", "3",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn hdecomp_reports_consistent_variances() {
    let v = json(&ustat(&[
        "hdecomp", "--kernel", r#"{"kind":"variance"}"#, "--generator",
        r#"{"family":"two_point","values":[0,1],"probs":[0.3,0.7]}"#, "--s", "3", "--n", "5",
    ]));
    let var_h = v["var_h"].as_f64().unwrap();
    assert!((v["sum_binom_V"].as_f64().unwrap() - var_h).abs() < 1e-12);
    assert!((v["theta"].as_f64().unwrap() - 0.42).abs() < 1e-12);
}

#[test]
fn ck_csv_shape() {
    let out = ustat(&["ck", "--k-max", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "experiment,grid_key,grid_value,stat,value,se");
    assert_eq!(lines[1], "ck,k,1,c_k,2,");
    assert_eq!(lines.len(), 4);
}

#[test]
fn ci_is_symmetric() {
    let v = json(&ustat(&["ci", "--theta", "-1.0", "--zeta1", "0.01", "--zetas", "1", "--n", "1000", "--s", "10", "--N", "500"]));
    let (lo, hi) = (v["lower"].as_f64().unwrap(), v["upper"].as_f64().unwrap());
    assert!((lo + hi + 2.0).abs() < 1e-12 && lo < -1.0);
}

#[test]
fn report_sidecar_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ck.csv");
    let out = ustat(&["ck", "--k-max", "5", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("ck.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "ck");
}
