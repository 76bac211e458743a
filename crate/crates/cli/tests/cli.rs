use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qfi_cli::{load_custom, save_custom};
use qfi_core::sampling::random_scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn qfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfi"))
        .args(args)
        .output()
        .expect("qfi runs")
}

fn with_config(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    qfi(&args)
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_record(o: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().last().expect("stderr has an error record");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("bad record {line:?}: {e}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn assert_exit(o: &Output, code: i32, kind: &str) {
    assert_eq!(
        o.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rec = error_record(o);
    assert_eq!(rec["error"]["exit_code"], code);
    assert_eq!(rec["error"]["kind"], kind);
    assert!(rec["error"]["message"]
        .as_str()
        .is_some_and(|m| !m.is_empty()));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = with_config("run", Path::new("/definitely/not/here.json"), &[]);
    assert_exit(&o, 4, "io");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = with_config(
        "run",
        &fixture("counterexample.json"),
        &["--out", "/definitely/not/here/out.csv"],
    );
    assert_exit(&o, 4, "io");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.json", "{oops");
    assert_exit(&with_config("run", &path, &[]), 2, "parse");
    let path = write(
        dir.path(),
        "unknown.json",
        r#"{"scenario":"example3","params":{"z":0.5,"zz":1}}"#,
    );
    assert_exit(&with_config("run", &path, &[]), 2, "parse");
}

#[test]
fn out_of_range_parameters_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"scenario":"example3","params":{"z":2}}"#,
        r#"{"scenario":"example2","params":{"N":1}}"#,
        r#"{"scenario":"example1","params":{}}"#,
        r#"{"scenario":"example1","params":{"N":4,"alpha_sq":1}}"#,
        r#"{"scenario":"custom","dim":1,"k_matrix":[[1,0]],"g_matrix":[[1,0]],"psi0":[[0.5,0]]}"#,
        r#"{"scenario":"custom","dim":2,"k_matrix":[[0,0],[1,0],[0,0],[0,0]],"g_matrix":[[1,0],[0,0],[0,0],[1,0]],"psi0":[[1,0],[0,0]]}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let path = write(dir.path(), &format!("case{i}.json"), text);
        assert_exit(&with_config("run", &path, &[]), 2, "validation");
    }
}

#[test]
fn overflowing_generators_are_numerical_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "big.json",
        r#"{"scenario":"custom","params":{"lambda":0.5},"dim":2,
            "k_matrix":[[1e200,0],[0,0],[0,0],[-1e200,0]],
            "g_matrix":[[1,0],[1,0],[1,0],[2,0]],
            "psi0":[[0.7071067811865476,0],[0.7071067811865475,0]]}"#,
    );
    assert_exit(&with_config("run", &path, &[]), 3, "numerical");
}

#[test]
fn unknown_flags_fail_through_clap() {
    let o = qfi(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"]["kind"], "parse");
}

#[test]
fn uniform_sweep_follows_one_minus_inverse_n() {
    let out = stdout(&with_config("run", &fixture("example1_uniform.json"), &[]));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 19);
    for row in rows {
        let n: f64 = row["N"].parse().unwrap();
        let bob: f64 = row["bob_qfi"].parse().unwrap();
        assert!((bob - (1.0 - 1.0 / n)).abs() < 1e-9, "N={n}: {bob}");
    }
}

#[test]
fn json_and_csv_carry_identical_values() {
    let cfg = fixture("example3_lambda.json");
    let csv = csv_rows(&stdout(&with_config("run", &cfg, &[])));
    let json: Value =
        serde_json::from_str(&stdout(&with_config("run", &cfg, &["--format", "json"]))).unwrap();
    let json = json.as_array().unwrap();
    assert_eq!(csv.len(), 61);
    assert_eq!(json.len(), 61);
    for (c, j) in csv.iter().zip(json) {
        for key in ["lambda", "alice_qfi", "bob_qfi", "loss", "cov_gk"] {
            let a: f64 = c[key].parse().unwrap();
            assert_eq!(a, j[key].as_f64().unwrap(), "{key}");
        }
    }
}

#[test]
fn out_writes_file_and_quiet_silences_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.csv");
    let cfg = fixture("example3_lambda.json");
    let loud = with_config("run", &cfg, &["--out", out.to_str().unwrap()]);
    assert!(loud.status.success());
    assert!(loud.stdout.is_empty());
    assert!(String::from_utf8_lossy(&loud.stderr).contains("61"));
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written, stdout(&with_config("run", &cfg, &[])));
    let quiet = with_config("run", &cfg, &["--out", out.to_str().unwrap(), "--quiet"]);
    assert!(quiet.status.success());
    assert!(quiet.stderr.is_empty());
}

#[test]
fn cluster_tol_flag_reaches_the_output() {
    let cfg = fixture("example3_lambda.json");
    let rows = csv_rows(&stdout(&with_config(
        "run",
        &cfg,
        &["--cluster-tol", "1e-6"],
    )));
    let tol: f64 = rows[0]["cluster_tol"].parse().unwrap();
    assert_eq!(tol, 1e-6);
}

#[test]
fn seed_is_reproducible_and_changes_nothing_material() {
    let cfg = fixture("optimize.json");
    let a = stdout(&with_config(
        "optimize",
        &cfg,
        &["--seed", "11", "--format", "json"],
    ));
    let b = stdout(&with_config(
        "optimize",
        &cfg,
        &["--seed", "11", "--format", "json"],
    ));
    assert_eq!(a, b);
    let c = stdout(&with_config(
        "optimize",
        &cfg,
        &["--seed", "12", "--format", "json"],
    ));
    let (a, c): (Value, Value) = (
        serde_json::from_str(&a).unwrap(),
        serde_json::from_str(&c).unwrap(),
    );
    for (x, y) in a.as_array().unwrap().iter().zip(c.as_array().unwrap()) {
        let (qx, qy) = (
            x["qfi_optimal"].as_f64().unwrap(),
            y["qfi_optimal"].as_f64().unwrap(),
        );
        assert!((qx - qy).abs() < 1e-6, "{qx} vs {qy}");
        assert!(qx >= x["qfi_coherent"].as_f64().unwrap() - 1e-6);
    }
}

#[test]
fn every_fixture_loads() {
    for entry in std::fs::read_dir(fixture("")).unwrap() {
        let path = entry.unwrap().path();
        let o = with_config("load", &path, &[]);
        assert!(stdout(&o).starts_with("valid"), "{}", path.display());
    }
}

#[test]
fn proportional_to_identity_noise_loses_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "flat.json",
        r#"{"scenario":"custom","params":{"lambda":0.3},"dim":2,
            "k_matrix":[[0,0],[1,0],[1,0],[0,0]],
            "g_matrix":[[2,0],[0,0],[0,0],[2,0]],
            "psi0":[[1,0],[0,0]]}"#,
    );
    let out = stdout(&with_config("check", &path, &[]));
    assert!(out.contains("no_loss=true"), "{out}");
    let rows = csv_rows(&stdout(&with_config("run", &path, &[])));
    let loss: f64 = rows[0]["loss"].parse().unwrap();
    assert_eq!(loss, 0.0);
}

#[test]
fn spin_on_the_equator_loses_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "eq.json",
        r#"{"scenario":"example3","params":{"z":0,"lambda":1.1}}"#,
    );
    let out = stdout(&with_config("check", &path, &[]));
    assert!(out.contains("no_loss=true"), "{out}");
}

#[test]
fn identity_encoding_carries_no_information() {
    let out = stdout(&with_config(
        "check",
        &fixture("identity_k.json"),
        &["--format", "json"],
    ));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["alice_qfi"].as_f64().unwrap().abs() < 1e-12);
    assert!(v["bob_qfi"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn counterexample_check_reports_max_loss() {
    let out = stdout(&with_config("check", &fixture("counterexample.json"), &[]));
    assert!(out.contains("max_loss=true"));
    assert!(out.contains("no_loss=false"));
    assert!(out.contains("cov_gk=0.0000000000000000e0"));
}

#[test]
fn check_rejects_sweeps() {
    assert_exit(
        &with_config("check", &fixture("example3_lambda.json"), &[]),
        2,
        "validation",
    );
}

fn assert_bit_exact(a: &qfi_core::Scenario, b: &qfi_core::Scenario) {
    assert_eq!(a.lambda().to_bits(), b.lambda().to_bits());
    assert_eq!(a.k().matrix(), b.k().matrix());
    assert_eq!(a.g().matrix(), b.g().matrix());
    assert_eq!(a.fiducial().amplitudes(), b.fiducial().amplitudes());
}

#[test]
fn custom_scenarios_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let original = load_custom(&fixture("random_dim8.json")).unwrap();
    let first = dir.path().join("first.json");
    save_custom(&first, &original).unwrap();
    let reloaded = load_custom(&first).unwrap();
    assert_bit_exact(&original, &reloaded);
    let second = dir.path().join("second.json");
    save_custom(&second, &reloaded).unwrap();
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for dim in [1, 3, 7, 16] {
        let s = random_scenario(&mut rng, dim, dim % 2 == 1);
        let path = dir.path().join(format!("r{dim}.json"));
        save_custom(&path, &s).unwrap();
        assert_bit_exact(&s, &load_custom(&path).unwrap());
    }
}

#[test]
fn load_custom_rejects_other_scenarios() {
    let err = load_custom(&fixture("example3_lambda.json")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
