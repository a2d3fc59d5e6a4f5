use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hofer-bounds"))
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn defect_emits_versioned_json() {
    let out = bin().args(["defect", "--tau", "3/8"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["data"]["defect"], "12");
    assert_eq!(report["data"]["tau"], "3/8");
}

#[test]
fn coupled_fixture_is_an_error() {
    let out = bin().args(["defect", "--fixture", &fixture("f2_zero.json")]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("coupled"));
}

#[test]
fn geometry_check_exit_codes() {
    let ok = bin().args(["geometry-check", "--delta", "0.95", "--tau", "0.49", "--grid", "180"]).output().unwrap();
    assert!(ok.status.success());
    let bad = bin().args(["geometry-check", "--delta", "0.9", "--tau", "1/2", "--grid", "180"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let failures: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(failures["failures"][0], "torus_contained");
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let config = dir.path().join("config.json");
    let body = serde_json::json!({ "delta": 1.0, "mu_grid": [60, 60], "output": out_path });
    std::fs::write(&config, body.to_string()).unwrap();
    let out = bin()
        .args(["--config", config.to_str().unwrap(), "--text", "diameter-table", "--h-values", "1", "10", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("49.924009"));
    let saved: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(saved["data"]["delta"], 1.0);
}

#[test]
fn phi_bounds_reads_function_samples() {
    let out =
        bin().args(["phi-bounds", "--f", &fixture("bump_f.json"), "--g", &fixture("bump_g.json")]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let cert = &report["data"]["certificate"];
    for key in [
        "delta",
        "tau",
        "mu_value",
        "lipschitz",
        "defect_bound",
        "defect_valuation",
        "volume",
        "lower_bound",
        "upper_bound",
        "inputs",
    ] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
}
