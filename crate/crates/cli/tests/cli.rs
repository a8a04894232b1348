use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lambshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambshift"))
        .args(args)
        .env_remove("LAMBSHIFT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = lambshift(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(name: &str, doc: &Value) {
    let validator = jsonschema::validator_for(&schema(name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn every_command_matches_its_schema() {
    let cases: [(&str, &[&str]); 12] = [
        (
            "spectrum",
            &["spectrum", "--n", "3", "--twice-j", "3", "--k", "3"],
        ),
        (
            "spectrum",
            &["spectrum", "--n", "2", "--twice-j", "0", "--k", "4"],
        ),
        ("degeneracy", &["degeneracy", "--n", "9"]),
        ("degeneracy", &["degeneracy", "--n", "300"]),
        ("jstar", &["jstar", "--n", "1000"]),
        (
            "variance-scan",
            &["variance-scan", "--n", "3", "--k-max", "10"],
        ),
        (
            "variance-scan",
            &[
                "variance-scan",
                "--n",
                "40",
                "--k-max",
                "60",
                "--support-mass",
                "0.99",
            ],
        ),
        ("slope", &["slope", "--n", "20"]),
        (
            "dos",
            &[
                "dos",
                "--n",
                "4",
                "--k-max",
                "6",
                "--omega-over-g",
                "50",
                "--bins",
                "64",
            ],
        ),
        (
            "bounds",
            &["bounds", "--n", "3", "--twice-j", "3", "--k", "3"],
        ),
        (
            "rwa-check",
            &[
                "rwa-check",
                "--n",
                "20",
                "--k",
                "5",
                "--omega-over-g",
                "500",
            ],
        ),
        ("oracle-check", &["oracle-check", "--n", "3", "--k", "3"]),
    ];
    for (name, args) in cases {
        assert_valid(name, &json(args));
    }
}

#[test]
fn schemas_reject_malformed_documents() {
    let doc = serde_json::json!({"n": 3, "twice_j": 3, "k": 3});
    let validator = jsonschema::validator_for(&schema("spectrum")).unwrap();
    assert!(!validator.is_valid(&doc));
}

#[test]
fn spectrum_csv_of_three_spin_block() {
    let out = lambshift(&[
        "spectrum",
        "--n",
        "3",
        "--twice-j",
        "3",
        "--k",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eigenvalue"));
    let values: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 4);
    let r = 73f64.sqrt();
    let want = [
        -(10.0 + r).sqrt(),
        -(10.0 - r).sqrt(),
        (10.0 - r).sqrt(),
        (10.0 + r).sqrt(),
    ];
    for (a, b) in values.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn jstar_at_one_thousand() {
    let out = lambshift(&["jstar", "--n", "1000", "--format", "json"]);
    assert_eq!(
        stdout(&out),
        "{\"n\":1000,\"twice_j_star\":30,\"j_star_asymptotic\":15.316658763608844}\n"
    );
}

#[test]
fn variance_scan_rows_for_three_spins() {
    let out = lambshift(&[
        "variance-scan",
        "--n",
        "3",
        "--k-max",
        "10",
        "--format",
        "csv",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,variance"));
    for line in lines {
        let (k, v) = line.split_once(',').unwrap();
        let (k, v): (u64, f64) = (k.parse().unwrap(), v.parse().unwrap());
        if k >= 3 {
            assert_eq!(v, 3.0 * (k - 1) as f64);
        }
    }
}

#[test]
fn floats_round_trip() {
    let doc = json(&["spectrum", "--n", "7", "--twice-j", "5", "--k", "9"]);
    let out = lambshift(&[
        "spectrum",
        "--n",
        "7",
        "--twice-j",
        "5",
        "--k",
        "9",
        "--format",
        "csv",
    ]);
    let csv: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.parse().unwrap())
        .collect();
    let from_json: Vec<f64> = doc["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(csv, from_json);
}

#[test]
fn output_is_independent_of_thread_count() {
    let cases: [&[&str]; 3] = [
        &[
            "dos",
            "--n",
            "20",
            "--k-max",
            "40",
            "--omega-over-g",
            "100",
            "--format",
            "csv",
        ],
        &[
            "variance-scan",
            "--n",
            "300",
            "--k-max",
            "900",
            "--format",
            "csv",
        ],
        &[
            "spectrum",
            "--n",
            "1200",
            "--twice-j",
            "1200",
            "--k",
            "1500",
        ],
    ];
    for args in cases {
        let runs: Vec<Vec<u8>> = ["1", "3", "8"]
            .iter()
            .map(|t| {
                let mut a = args.to_vec();
                a.extend(["--threads", t]);
                let out = lambshift(&a);
                assert!(out.status.success());
                out.stdout
            })
            .collect();
        assert!(runs.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_lambshift"))
        .args(["jstar", "--n", "10"])
        .env("LAMBSHIFT_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_lambshift"))
        .args(["jstar", "--n", "10"])
        .env("LAMBSHIFT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_two_with_one_line() {
    let cases: [&[&str]; 10] = [
        &["spectrum", "--n", "3", "--twice-j", "2", "--k", "3"],
        &["spectrum", "--n", "3", "--twice-j", "1", "--k", "0"],
        &["spectrum", "--n", "3", "--k", "3"],
        &[
            "spectrum",
            "--n",
            "3",
            "--twice-j",
            "3",
            "--k",
            "3",
            "--bogus",
        ],
        &["jstar", "--n", "0"],
        &["slope", "--n", "3", "--k-min", "3", "--k-max", "10"],
        &["dos", "--n", "3", "--k-max", "3", "--omega-over-g", "-1"],
        &[
            "dos",
            "--n",
            "3",
            "--k-max",
            "3",
            "--omega-over-g",
            "10",
            "--bins",
            "5",
        ],
        &[
            "variance-scan",
            "--n",
            "3",
            "--k-max",
            "3",
            "--support-mass",
            "1.5",
        ],
        &["oracle-check", "--n", "13", "--k", "1"],
    ];
    for args in cases {
        let out = lambshift(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn unwritable_output_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.json");
    let out = lambshift(&["jstar", "--n", "10", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("scan.csv");
    let out = lambshift(&[
        "variance-scan",
        "--n",
        "2",
        "--k-max",
        "0",
        "--format",
        "csv",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(target).unwrap(),
        "k,variance\n0,0\n"
    );
}

#[test]
fn rwa_regimes() {
    let ok = json(&[
        "rwa-check",
        "--n",
        "20",
        "--k",
        "5",
        "--omega-over-g",
        "500",
    ]);
    assert_eq!(ok["valid"], true);
    assert!(ok["cluster_gap"].as_f64().unwrap() > 0.0);
    let bad = json(&[
        "rwa-check",
        "--n",
        "20",
        "--k",
        "40",
        "--omega-over-g",
        "100",
    ]);
    assert_eq!(bad["valid"], false);
    assert!(bad["ratio"].as_f64().unwrap() > 0.5);
    let ground = json(&[
        "rwa-check",
        "--n",
        "20",
        "--k",
        "0",
        "--omega-over-g",
        "100",
    ]);
    assert_eq!(ground["max_shift"].as_f64(), Some(0.0));
}

#[test]
fn dos_mass_and_shape() {
    let doc = json(&[
        "dos",
        "--n",
        "1",
        "--k-max",
        "2",
        "--omega-over-g",
        "10",
        "--bins",
        "400",
    ]);
    assert_eq!(doc["n"], 1);
    let total: f64 = doc["bins"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["weight"].as_f64().unwrap())
        .sum();
    assert!((total - 5.0).abs() < 1e-9);
    let out = lambshift(&[
        "dos",
        "--n",
        "1",
        "--k-max",
        "2",
        "--omega-over-g",
        "10",
        "--format",
        "csv",
    ]);
    assert!(stdout(&out).starts_with("bin_center,weight\n"));
}

#[test]
fn oracle_check_passes_for_small_systems() {
    for (n, k) in [("1", "1"), ("2", "2"), ("3", "3"), ("6", "7")] {
        let doc = json(&["oracle-check", "--n", n, "--k", k]);
        assert_eq!(doc["pass"], true, "n={n} k={k}");
    }
    let doc = json(&["oracle-check", "--n", "2", "--k", "2"]);
    assert_eq!(doc["states"], 4);
}

#[test]
fn help_exits_zero() {
    assert!(lambshift(&["--help"]).status.success());
    assert!(lambshift(&["dos", "--help"]).status.success());
}
