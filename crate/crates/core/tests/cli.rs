use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sobolev-growth"))
}

fn stdout(cmd: &mut Command) -> String {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn constants_table_and_json() {
    let text = stdout(bin().args(["constants", "--p", "4", "12"]));
    assert!(text.contains("C1             7372800"));
    assert!(text.contains("a              98304"));
    assert!(!text.contains("FAIL"));
    let json: serde_json::Value = serde_json::from_str(&stdout(bin().args(["constants", "--p", "4", "--json"]))).unwrap();
    assert_eq!(json[0]["c1_exact"], "7372800");
}

#[test]
fn analyze_reports_resonances() {
    let v: serde_json::Value = serde_json::from_str(&stdout(bin().args(["analyze", "--p", "4", "--jmax", "12"]))).unwrap();
    assert_eq!(v["resonance"]["passed"], true);
    assert_eq!(v["resonance"]["monomials"].as_array().unwrap().len(), 4);
    assert!(v["min_divisor_one_normal"].as_f64().unwrap() >= v["gamma"].as_f64().unwrap() / 16.0);

    let v: serde_json::Value = serde_json::from_str(&stdout(bin().args([
        "analyze", "--equation", "nls", "--N", "8", "--q", "1.25,1.5,1.75", "--gamma-bound", "0.001",
    ])))
    .unwrap();
    assert_eq!(v["resonance"]["monomials"].as_array().unwrap().len(), 2);
}

#[test]
fn channel_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("orbit.csv");
    let v: serde_json::Value = serde_json::from_str(&stdout(bin().args([
        "channel",
        "--equation",
        "nls",
        "--eps",
        "0.01",
        "--out",
        csv.to_str().unwrap(),
    ])))
    .unwrap();
    assert!((v["endpoints"]["final"][3].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-8);
    let body = std::fs::read_to_string(csv).unwrap();
    assert!(body.starts_with("time,I_1,I_2,I_3,I_4,mass,hamiltonian_value\n"));
}

#[test]
fn simulate_from_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "equation = \"wave\"\np = 2\ns = 3.0\nmu = 10.0\nepsilon = 1e-3\nj_max = 8\ndt = 0.01\nsample_stride = 40\n",
    )
    .unwrap();
    let (csv, report) = (dir.path().join("m.csv"), dir.path().join("r.json"));
    stdout(bin().args([
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--mu",
        "12",
        "--out",
        csv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["mu"], 12.0);
    assert_eq!(v["config"]["dt"], 0.01);
    let header = std::fs::read_to_string(csv).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "time,action_1,action_-1,action_2,action_-2,hamiltonian,momentum,sobolev_3,model_distance"
    );

    let text = stdout(bin().args([
        "simulate", "--p", "2", "--jmax", "8", "--dt", "0.01", "--eps", "0.001", "--format", "text",
    ]));
    assert!(text.contains("ratio") && text.contains("T "));
}

#[test]
fn sweep_writes_runs_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "[[run]]\nequation = \"wave\"\np = 2\ns = 3.0\nmu = 10.0\nj_max = 8\ndt = 0.01\n\n\
         [[run]]\nequation = \"wave\"\np = 2\ns = 3.0\nmu = 20.0\nj_max = 8\ndt = 0.01\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    stdout(bin().args(["sweep", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]));
    let merged: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(merged[0]["mu"], 10.0);
    assert_eq!(merged[1]["mu"], 20.0);
    assert!(out.join("run_001.csv").exists());
}

#[test]
fn errors_exit_nonzero() {
    let out = bin().args(["simulate", "--p", "3"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = bin().args(["constants", "--p", "5"]).output().unwrap();
    assert!(!out.status.success());
}
