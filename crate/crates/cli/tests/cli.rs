use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cstar-compact"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../scenarios/{name}.json"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

fn read(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Unit of A = M_2 ⊕ C as serialized blocks.
fn unit() -> Value {
    json!({"blocks": [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0]]]})
}

fn zero() -> Value {
    json!({"blocks": [[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0]]]})
}

#[test]
fn axioms_default_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(bin().args(["axioms", "--quiet", "--out"]).arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read(dir.path().join("axioms_report.json"));
    assert_eq!(report["checks"].as_array().unwrap().len(), 9);
}

#[test]
fn axioms_with_config_file() {
    let out = run(bin()
        .args(["axioms", "--quiet", "--specs", "4"])
        .arg(scenario("axioms_default")));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn forced_inadmissible_system_exits_two() {
    let dir = TempDir::new().unwrap();
    let e0 = json!({"entries": [unit(), zero()]});
    let cfg = json!({
        "module_len": 2,
        "triples": 20,
        "specs": 2,
        "forced_system": {"elements": [e0, e0]}
    });
    let path = write(&dir, "forced.json", &cfg);
    let out = run(bin().args(["axioms", "--quiet"]).arg(path));
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_json_exits_65() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, "{ not json").unwrap();
    assert_eq!(code(&run(bin().arg("certify").arg(&p))), 65);
    assert_eq!(code(&run(bin().arg("axioms").arg(&p))), 65);
    let unknown = write(&dir, "unknown.json", &json!({"tripels": 3}));
    assert_eq!(code(&run(bin().arg("axioms").arg(unknown))), 65);
}

#[test]
fn missing_file_exits_66() {
    let out = run(bin().args(["certify", "/nonexistent/scenario.json"]));
    assert_eq!(code(&out), 66);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(bin().arg("frobnicate"))), 64);
    assert_eq!(code(&run(&mut bin())), 64);
    assert_eq!(code(&run(bin().args(["net", "a.json"]))), 64);
    assert_eq!(code(&run(bin().arg("--help"))), 0);
}

#[test]
fn certify_and_replay_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("certify")
        .arg(scenario("diag_pow2"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("COMPACT_CONSISTENT"));
    for f in ["report.json", "tail_norms.csv", "nets.csv", "nets_D32.csv"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(dir.path().join("tail_norms.csv")).unwrap();
    assert!(csv.starts_with("D,kappa_D\n"));

    let report = dir.path().join("report.json");
    let out = run(bin().arg("replay").arg(&report));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(bin()
        .arg("replay")
        .arg(&report)
        .arg("--config")
        .arg(scenario("identity")));
    assert_eq!(code(&out), 2);
}

#[test]
fn tampered_report_fails_replay() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("certify")
        .arg(scenario("diag_pow2"))
        .arg("--quiet")
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code(&out), 0);
    let path = dir.path().join("report.json");
    let mut report = read(path.clone());
    let probes = report["boundedness"]["levels"][3]["probes"]
        .as_array_mut()
        .unwrap();
    let centers = probes[2]["nets"][0]["centers"].as_array_mut().unwrap();
    assert!(centers.len() > 1);
    centers.pop();
    fs::write(&path, serde_json::to_string(&report).unwrap()).unwrap();
    let out = run(bin().arg("replay").arg(&path));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn certify_identity_is_witnessed() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("certify")
        .arg(scenario("identity"))
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("NONCOMPACT_WITNESSED"));
}

#[test]
fn net_with_large_epsilon_has_one_center() {
    let dir = TempDir::new().unwrap();
    let scalar =
        |t: f64| json!({"blocks": [[[t, 0.0], [0.0, 0.0], [0.0, 0.0], [t, 0.0]], [[t, 0.0]]]});
    // e_0, e_0/2 and 3e_0/5: distances 0.5 and 0.4 from the first point.
    let points = json!([
        {"entries": [unit(), zero()]},
        {"entries": [scalar(0.5), zero()]},
        {"entries": [scalar(0.6), zero()]},
    ]);
    let spec = json!({
        "id": 0,
        "system": {"elements": [{"entries": [unit(), zero()]}, {"entries": [zero(), unit()]}]},
        "states": [
            {"weights": [0.5, 0.5], "densities": [[[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]], [[1.0, 0.0]]]},
            {"weights": [0.5, 0.5], "densities": [[[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]], [[1.0, 0.0]]]}
        ]
    });
    let p = write(&dir, "points.json", &points);
    let s = write(&dir, "spec.json", &spec);
    let out = run(bin()
        .arg("net")
        .arg(&p)
        .arg(&s)
        .args(["--eps", "0.999"])
        .arg("--out")
        .arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let net = read(dir.path().join("net_report.json"));
    assert_eq!(net["centers"], json!([0]));
    assert_eq!(net["covered"], json!(true));

    let out = run(bin()
        .arg("net")
        .arg(&p)
        .arg(&s)
        .args(["--eps", "0.05", "--out"])
        .arg(dir.path()));
    assert_eq!(code(&out), 0);
    let net = read(dir.path().join("net_report.json"));
    assert_eq!(net["centers"].as_array().unwrap().len(), 3);
}

#[test]
fn witness_command_reports_the_bound() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("witness")
        .arg(scenario("identity"))
        .args(["--d", "8", "--out"])
        .arg(dir.path()));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let w = read(dir.path().join("witness.json"));
    assert_eq!(w["status"], json!("witnessed"));
    assert_eq!(w["bound"], json!(0.25));
    assert_eq!(w["points"].as_array().unwrap().len(), 8);

    let out = run(bin()
        .arg("witness")
        .arg(scenario("zero"))
        .args(["--d", "8"]));
    assert_eq!(code(&out), 3);
}
