use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_anytime-ppm"));
    c.env_remove("ANYTIME_PPM_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write_toy_dmc(dir: &Path) -> String {
    let path = dir.join("toy.dmc");
    std::fs::write(&path, "# x0 then x1\n2 2\n0 1\n0.95 0.05\n0.1 0.9\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn theory_table_hits_continuity_point() {
    let text = stdout(&["theory", "--eb-grid", "ln2:8ln2:16"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eb,eb_over_ln2,rate_fraction,exponent_eb");
    assert_eq!(lines.len(), 17);
    let row: Vec<&str> = lines[11].split(',').collect();
    assert_eq!(row[1], "4");
    assert!(row[3].starts_with("0.693147"), "{}", lines[11]);
}

#[test]
fn theory_rate_table() {
    let text = stdout(&["theory", "--rate-grid", "0:1:5", "--c-inf", "1"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("0,0,0.34657359027997264,"));
    assert!(lines[5].ends_with(",0,"));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["theory", "--rate-grid", "0:1:5", "--format", "json"])).unwrap();
    assert_eq!(json["result"].as_array().unwrap().len(), 5);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["sim-genie", "--eb", "2.7726", "--delays", "2:6", "--trials", "3000", "--seed", "7"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let mut one = args.to_vec();
    one.extend(["--workers", "1"]);
    let mut eight = args.to_vec();
    eight.extend(["--workers", "8"]);
    assert_eq!(stdout(&one), stdout(&eight));
    assert_eq!(a, stdout(&one));
    assert!(a.starts_with("d,trials,errors,p_hat,ci_lo,ci_hi\n2,3000,"));
}

#[test]
fn fit_recovers_synthetic_slope() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    let mut csv = String::from("d,trials,errors,p_hat,ci_lo,ci_hi\n");
    for d in 0..8 {
        let p = (-0.7 * d as f64).exp();
        csv += &format!("{d},1000000,1000,{p},0,1\n");
    }
    std::fs::write(&path, csv).unwrap();
    let text = stdout(&["fit", path.to_str().unwrap()]);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[0] - 0.7).abs() < 1e-9, "{text}");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["sim-genie", "--eb", "2", "--bogus"]), 2);
    assert_eq!(code(&["sim-genie", "--eb", "2", "--rate-fraction", "0.5"]), 2);
    assert_eq!(code(&["sim-genie"]), 2);
    assert_eq!(code(&["sim-genie", "--eb", "-1", "--trials", "1"]), 2);
    assert_eq!(code(&["sim-genie", "--eb", "2", "--delays", "0:27", "--trials", "1"]), 3);
    assert_eq!(code(&["sim-anytime", "--eb", "2", "--bit-index", "20", "--delays", "5", "--trials", "1"]), 3);
    assert_eq!(code(&["sim-block", "--eb", "2", "--messages", "2000000", "--trials", "1"]), 3);
    assert_eq!(code(&["sim-genie", "--eb", "2", "--trials", "1", "--workers", "0"]), 2);
    assert_eq!(code(&["fit", "/nonexistent/curve.csv"]), 1);
    assert_eq!(code(&["--help"]), 0);
    let dir = tempfile::tempdir().unwrap();
    let sparse = dir.path().join("sparse.csv");
    std::fs::write(&sparse, "d,trials,errors\n1,100,3\n2,100,1\n").unwrap();
    assert_eq!(code(&["fit", sparse.to_str().unwrap()]), 3);
}

#[test]
fn config_file_and_json_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "rate-fraction = 0.5\ntrials = 400\nseed = 99\ndelays = 0:3\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let text = stdout(&["sim-genie", "--config", cfg, "--seed", "5", "--format", "json"]);
    let rec: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rec["command"], "sim-genie");
    assert_eq!(rec["params"]["run"]["seed"], 5);
    assert_eq!(rec["params"]["run"]["trials"], 400);
    assert_eq!(rec["params"]["snr"]["rate_fraction"], 0.5);
    assert_eq!(rec["params"]["delays"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(rec["config"].as_array().unwrap().len(), 4);
    assert!(rec["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(rec["result"]["points"].as_array().unwrap().len(), 4);

    // the record's parameters reproduce the run
    let again = stdout(&["sim-genie", "--rate-fraction", "0.5", "--trials", "400", "--seed", "5", "--delays", "0:3"]);
    let direct = stdout(&["sim-genie", "--config", cfg, "--seed", "5"]);
    assert_eq!(again, direct);

    // a flag overrides its exclusive partner from the file
    let eb = stdout(&["sim-genie", "--config", cfg, "--eb", "3", "--format", "json"]);
    let rec: serde_json::Value = serde_json::from_str(&eb).unwrap();
    assert_eq!(rec["params"]["snr"]["eb"], 3.0);
    assert!(rec["params"]["snr"]["rate_fraction"].is_null());
}

#[test]
fn output_locations() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sim-block", "--eb", "2ln2", "--messages", "4", "--trials", "500"])
        .env("ANYTIME_PPM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("sim-block.csv")).unwrap();
    assert!(text.starts_with("messages,eb,trials,errors,p_hat,ci_lo,ci_hi,exact\n4,"));

    let explicit = dir.path().join("fb.json");
    stdout(&[
        "sim-feedback", "--eb", "4ln2", "--length", "6", "--trials", "200",
        "--format", "json", "--output", explicit.to_str().unwrap(),
    ]);
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(explicit).unwrap()).unwrap();
    assert_eq!(rec["result"]["histogram"]["points"].as_array().unwrap().len(), 7);
    assert!(rec["result"]["derived_log2_slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn cost_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let dmc = write_toy_dmc(dir.path());
    let text = stdout(&[
        "sim-cost", "--dmc", &dmc, "--threshold-multiple", "2", "--burst-length", "2",
        "--delays", "0,2,4", "--trials", "300",
    ]);
    let header = text.lines().next().unwrap();
    assert_eq!(header, "d,trials,errors,p_hat,ci_lo,ci_hi,cost_per_delay_unit");
    assert_eq!(text.lines().count(), 4);
    let code = run(&["sim-cost", "--dmc", &dmc, "--eb-cost", "0.1", "--burst-length", "1", "--trials", "1"])
        .status
        .code();
    assert_eq!(code, Some(3));
}
