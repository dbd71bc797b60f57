use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn it2fgp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_it2fgp"))
        .args(args)
        .env("IT2FGP_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture_path(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn infeasible_program() -> Value {
    json!({
        "variables": ["x1", "x2"],
        "objectives": [
            {"sense": "maximize", "terms": [{"coeff": 1.0, "exponents": [1, 0]}]},
            {"sense": "minimize", "terms": [{"coeff": 1.0, "exponents": [0, 1]}]}
        ],
        "constraints": [
            {"terms": [{"coeff": 1.0, "exponents": [1, 0]}, {"coeff": 1.0, "exponents": [0, 1]}], "relation": "<=", "rhs": 1.0},
            {"terms": [{"coeff": 1.0, "exponents": [1, 0]}], "relation": ">=", "rhs": 3.0}
        ]
    })
}

#[test]
fn defuzzify_writes_expected_value_coefficients() {
    let o = it2fgp(&["defuzzify", &fixture_path("example1_fuzzy.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let crisp: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let coeffs: Vec<f64> = crisp["objectives"][0]["terms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["coeff"].as_f64().unwrap())
        .collect();
    let want = [22.854, -2.631, 23.100, -3.963, 22.980, -3.660];
    assert_eq!(coeffs.len(), want.len());
    for (c, w) in coeffs.iter().zip(want) {
        assert!((c - w).abs() < 1e-3, "{coeffs:?}");
    }
}

#[test]
fn defuzzify_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("crisp.json");
    let o = it2fgp(&["defuzzify", "example2_fuzzy", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let v = it2fgp(&["validate", out.to_str().unwrap()]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("crisp"));
}

#[test]
fn payoff_reports_individual_optima() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.jsonl");
    let o = it2fgp(&["payoff", "example1_crisp", "--json", "--restarts", "16", "--run-log", log.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["payoff"]["rows"].as_array().unwrap();
    assert!((rows[0]["max"]["value"].as_f64().unwrap() - 76.694).abs() < 0.05);
    assert!((rows[1]["min"]["value"].as_f64().unwrap() - 54.698).abs() < 0.05);
    assert_eq!(v["box"]["lower"].as_array().unwrap().len(), 3);

    let lines: Vec<Value> = std::fs::read_to_string(&log)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4 * 16);
    for key in ["objective", "sense", "start", "iterations", "value", "violation"] {
        assert!(lines[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn payoff_table_text() {
    let o = it2fgp(&["payoff", "example1_crisp", "--restarts", "16", "--sequential"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("Max f1") && text.contains("Min f2"));
    assert!(text.contains("<= x3 <="));
}

#[test]
fn bad_files_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    for args in [
        vec!["validate", garbage.to_str().unwrap()],
        vec!["validate", "/nonexistent/problem.json"],
        vec!["payoff", garbage.to_str().unwrap()],
        vec!["--strict-validation", "validate", "example1_fuzzy"],
    ] {
        let o = it2fgp(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    let o = it2fgp(&["validate", "example1_fuzzy"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("warning:").count(), 2);
}

#[test]
fn infeasible_programs_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("infeasible.json");
    std::fs::write(&path, infeasible_program().to_string()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(it2fgp(&["validate", p]).status.code(), Some(0));
    assert_eq!(it2fgp(&["payoff", p, "--restarts", "4"]).status.code(), Some(3));
    assert_eq!(it2fgp(&["solve", p, "--restarts", "4"]).status.code(), Some(3));
}

#[test]
fn solve_replays_a_decision_script() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("decisions.json");
    let trace = dir.path().join("trace.json");
    std::fs::write(&script, r#"{"decisions":[{"verdict":"revise","targets":[0]},{"verdict":"satisfied"}]}"#).unwrap();
    let o = it2fgp(&[
        "solve",
        "example2_crisp",
        "--decisions",
        script.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
        "--dump-lp",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("status: finished"));
    assert_eq!(String::from_utf8_lossy(&o.stderr).matches("goal LP, iteration").count(), 2);

    let t: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["status"], "finished");
    let its = t["iterations"].as_array().unwrap();
    assert_eq!(its.len(), 2);
    let f = its[0]["proposal"]["objective_values"].as_array().unwrap();
    assert!((f[0].as_f64().unwrap() - 270.366).abs() < 0.5);
    assert!((f[1].as_f64().unwrap() - 20.820).abs() < 0.1);
    assert_eq!(its[0]["decision"]["targets"], json!([0]));
}

#[test]
fn impossible_scripted_revision_is_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("decisions.json");
    std::fs::write(&script, r#"{"decisions":[{"verdict":"revise","targets":[7]}]}"#).unwrap();
    let o = it2fgp(&["solve", "example2_crisp", "--decisions", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn interactive_reads_answers_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_it2fgp"))
        .args(["interactive", "example2_crisp"])
        .env("IT2FGP_LOG", "off")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"r 1\nwhat\ns\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("iteration 2"));
    assert!(text.contains("unknown answer: what"));
    assert!(text.contains("final compromise solution is iteration 2"));
}
