//! End-to-end command tests: exit codes per error class, output schemas,
//! generation round trips, and determinism of the binary itself.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn kmpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kmpe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn solve_reproduces_the_fixture_optimum() {
    let model = fixture("tables12.json");
    let evidence = fixture("evidence_hgja.json");
    let out = kmpe(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--evidence",
        evidence.to_str().unwrap(),
        "--k",
        "1",
        "--seed",
        "42",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let row = &json["results"][0];
    assert_eq!(row["rank"], 1);
    let score = row["score"].as_f64().unwrap();
    assert!((score - 0.01100484).abs() < 1e-8, "score {score}");
    assert_eq!(row["assignment"]["A"], "a1");
    assert_eq!(row["assignment"]["F"], "f1");
    assert_eq!(row["assignment"]["I"], "i2");
    assert!(json["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn oracle_agrees_with_solve_on_the_fixture() {
    let model = fixture("tables12.json");
    let evidence = fixture("evidence_hgja.json");
    let out = kmpe(&[
        "oracle",
        "--model",
        model.to_str().unwrap(),
        "--evidence",
        evidence.to_str().unwrap(),
        "--k",
        "1",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let score = json["results"][0]["score"].as_f64().unwrap();
    assert!((score - 0.011004844032).abs() < 1e-12);
}

#[test]
fn k_zero_is_a_usage_error() {
    let model = fixture("tables12.json");
    let out = kmpe(&["solve", "--model", model.to_str().unwrap(), "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_evidence_file_is_a_parse_error_with_no_partial_output() {
    let model = fixture("tables12.json");
    let out = kmpe(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--evidence",
        "/nonexistent/evidence.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_model_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = kmpe(&["check", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_model_fails_check_and_solve_with_the_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{
            "kind": "bayesian",
            "variables": [{"name": "x", "values": ["x0", "x1"]}],
            "cpts": [{"child": "x", "table": [0.5, 0.4]}]
        }"#,
    )
    .unwrap();
    let check = kmpe(&["check", "--model", path.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(4));
    assert!(stdout_str(&check).contains("sums to 0.9"));
    let solve = kmpe(&["solve", "--model", path.to_str().unwrap()]);
    assert_eq!(solve.status.code(), Some(4));
    assert!(solve.stdout.is_empty());
}

#[test]
fn check_passes_the_bundled_fixture() {
    let out = kmpe(&["check", "--model", fixture("tables12.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn no_solution_exit_code_when_the_space_is_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let evidence = dir.path().join("all_clamped.json");
    std::fs::write(
        &evidence,
        r#"{"A": ["a1"], "B": ["b1"], "C": ["c1"], "D": ["d1"], "E": ["e1"],
            "F": ["f1"], "G": ["g1"], "H": ["h1"], "I": ["i1"], "J": ["j1"]}"#,
    )
    .unwrap();
    let out = kmpe(&[
        "solve",
        "--model",
        fixture("tables12.json").to_str().unwrap(),
        "--evidence",
        evidence.to_str().unwrap(),
        "--k",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(out.stdout.is_empty());
}

#[test]
fn oracle_capacity_guard_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("big.json");
    let gen = kmpe(&[
        "gen",
        "--kind",
        "bayesian",
        "--vars",
        "30",
        "--max-frame",
        "2",
        "--seed",
        "1",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = kmpe(&["oracle", "--model", model.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(6));
}

#[test]
fn oracle_returns_k_rows_when_the_space_allows() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("small.json");
    std::fs::write(
        &model,
        r#"{
            "kind": "bayesian",
            "variables": [
                {"name": "x", "values": ["x0", "x1"]},
                {"name": "y", "values": ["y0", "y1"]}
            ],
            "cpts": [
                {"child": "x", "table": [0.3, 0.7]},
                {"child": "y", "table": [0.4, 0.6]}
            ]
        }"#,
    )
    .unwrap();
    let out = kmpe(&["oracle", "--model", model.to_str().unwrap(), "--k", "3"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(json["results"].as_array().unwrap().len(), 3);
    let scores: Vec<f64> = json["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["score"].as_f64().unwrap())
        .collect();
    assert!((scores[0] - 0.42).abs() < 1e-12);
    assert!((scores[1] - 0.28).abs() < 1e-12);
    assert!((scores[2] - 0.18).abs() < 1e-12);
}

#[test]
fn qtable_on_a_bayesian_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bayes.json");
    let gen = kmpe(&[
        "gen", "--kind", "bayesian", "--vars", "3", "--seed", "0", "--out",
        model.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = kmpe(&["qtable", "--model", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qtable_edge_universes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edge.json");
    // One vacuous universe and one categorical (single focal singleton).
    std::fs::write(
        &path,
        r#"{
            "kind": "dst",
            "variables": [{"name": "x", "values": ["x0", "x1", "x2"]}],
            "masses": [
                {"vars": ["x"], "focal": [
                    {"tuples": [["x0"], ["x1"], ["x2"]], "mass": 1.0}
                ]},
                {"vars": ["x"], "focal": [
                    {"tuples": [["x1"]], "mass": 1.0}
                ]}
            ]
        }"#,
    )
    .unwrap();
    let out = kmpe(&["qtable", "--model", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let rows: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("  ("))
        .map(|l| l.rsplit(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rows, vec![1.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
}

#[test]
fn generated_models_are_deterministic_and_valid() {
    for kind in ["bayesian", "dst"] {
        let a = kmpe(&["gen", "--kind", kind, "--vars", "6", "--seed", "9"]);
        let b = kmpe(&["gen", "--kind", kind, "--vars", "6", "--seed", "9"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "kind {kind}");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gen.json");
        std::fs::write(&path, &a.stdout).unwrap();
        let check = kmpe(&["check", "--model", path.to_str().unwrap()]);
        assert_eq!(check.status.code(), Some(0), "kind {kind}");
    }
}

#[test]
fn solve_writes_identical_bytes_to_stdout_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("result.json");
    let model = fixture("tables12.json");
    let evidence = fixture("evidence_hgja.json");
    let args_base = [
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--evidence",
        evidence.to_str().unwrap(),
        "--k",
        "2",
        "--seed",
        "7",
    ];
    let stdout_run = kmpe(&args_base);
    assert!(stdout_run.status.success());
    let mut file_args = args_base.to_vec();
    file_args.extend(["--out", out_path.to_str().unwrap()]);
    let file_run = kmpe(&file_args);
    assert!(file_run.status.success());
    let file_bytes = std::fs::read(&out_path).unwrap();
    assert_eq!(stdout_run.stdout, file_bytes);
}

#[test]
fn selection_flag_accepts_known_schemes_only() {
    let model = fixture("tables12.json");
    for good in ["roulette", "tournament", "tournament:3"] {
        let out = kmpe(&[
            "solve",
            "--model",
            model.to_str().unwrap(),
            "--seed",
            "1",
            "--gens",
            "5",
            "--selection",
            good,
        ]);
        assert!(out.status.success(), "selection {good}");
    }
    let bad = kmpe(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--selection",
        "steady-state",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn text_format_prints_decimal_and_log_scores() {
    let model = fixture("tables12.json");
    let evidence = fixture("evidence_hgja.json");
    let out = kmpe(&[
        "solve",
        "--model",
        model.to_str().unwrap(),
        "--evidence",
        evidence.to_str().unwrap(),
        "--seed",
        "3",
        "--format",
        "text",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("ln(score)"), "{text}");
    assert!(text.contains("A=a1"), "{text}");
}
