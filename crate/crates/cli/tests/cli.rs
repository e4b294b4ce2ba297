use std::path::Path;
use std::process::{Command, Output};

fn patchsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchsim")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SCAN: &str = r#"{
    "experiment": "cmi_scan",
    "descriptor": {"geometry": {"dims": [4, 4]}, "depth": 6, "gate_family": "clifford2q",
                   "noise": {"kind": "heralded_reset", "gamma": 0.2}, "seed": 3},
    "ells": [1, 2],
    "depths": [2, 6],
    "realizations": 20
}"#;

#[test]
fn cmi_scan_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scan.json", SCAN);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = patchsim(&["cmi-scan", "--config", &config, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,n,d,gamma,ell,mean_cmi,stderr,realizations");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("stabilizer,16,2,0.2,1,"));
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scan.json", SCAN);
    let base = patchsim(&["cmi-scan", "--config", &config, "--realizations", "5"]);
    let seeded = patchsim(&["cmi-scan", "--config", &config, "--realizations", "5", "--seed", "99"]);
    let base = String::from_utf8(base.stdout).unwrap();
    assert!(base.lines().nth(1).unwrap().ends_with(",5"));
    assert_ne!(base, String::from_utf8(seeded.stdout).unwrap());
}

#[test]
fn capacity_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "big.json",
        r#"{"experiment": "cmi_scan", "model": "dense",
            "descriptor": {"geometry": {"dims": [4, 4]}, "depth": 2, "gate_family": "haar2q",
                           "noise": {"kind": "amplitude_damping", "gamma": 0.1}, "seed": 1}}"#,
    );
    let o = patchsim(&["cmi-scan", "--config", &config]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn wrong_subcommand_for_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scan.json", SCAN);
    let o = patchsim(&["mpoee-bench", "--config", &config]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mpoee_bench_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bench.json",
        r#"{"experiment": "mpoee_bench",
            "descriptor": {"geometry": {"dims": [6]}, "depth": 4, "gate_family": "haar2q",
                           "noise": {"kind": "amplitude_damping", "gamma": 0.1}, "seed": 1},
            "depths": [2, 4], "chis": [8, 64], "realizations": 2}"#,
    );
    let o = patchsim(&["mpoee-bench", "--config", &config]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("n,d,gamma,chi,cut,mpoee"));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn patch_sample_writes_lines_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sample.json",
        r#"{"experiment": "patch_sample",
            "descriptor": {"geometry": {"dims": [4, 4]}, "depth": 3, "gate_family": "haar2q",
                           "noise": {"kind": "amplitude_damping", "gamma": 0.2}, "seed": 4},
            "ells": [2], "d_star": 1, "samples": 25}"#,
    );
    let out = dir.path().join("samples.txt");
    let o = patchsim(&["patch-sample", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert!(text.lines().all(|l| l.len() == 16 && l.chars().all(|c| c == '0' || c == '1')));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("samples.txt.json")).unwrap()).unwrap();
    assert_eq!(sidecar["ell"], 2);
    assert_eq!(sidecar["d_star"], 1);
    assert_eq!(sidecar["backend"], "dense");
    assert_eq!(sidecar["samples"], 25);
}

#[test]
fn corrupted_tableau_validation_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "validate.json",
        r#"{"experiment": "validate", "corrupt_tableau": true,
            "descriptor": {"geometry": {"dims": [4]}, "depth": 1, "gate_family": "haar2q",
                           "noise": {"kind": "none"}, "seed": 7}}"#,
    );
    let o = patchsim(&["validate", "--config", &config]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("integrity"), "{stderr}");
}
