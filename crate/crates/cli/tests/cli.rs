use std::path::Path;
use std::process::{Command, Output};

use qkdgame::attacks::builtin;
use serde_json::Value;

fn qkdgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdgame"))
        .args(args)
        .env_remove("QKDGAME_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = qkdgame(&full);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn close(v: &Value, expected: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < 1e-9
}

#[test]
fn stats_identity_attack() {
    let v = json(&["stats", "--protocol", "pp", "--encoding", "A1", "--attack", "E4"]);
    let s = &v["stats"];
    assert!(close(&s["i_ab"], 1.0) && close(&s["i_e_sum"], 0.0) && close(&s["p_d"], 0.0));
}

#[test]
fn stats_double_cnot_on_bit_flip_encoding() {
    let v = json(&["stats", "--protocol", "pp", "--encoding", "A2", "--attack", "E3"]);
    let s = &v["stats"];
    assert!(close(&s["i_ab"], 1.0) && close(&s["i_e_sum"], 2.0) && close(&s["p_d"], 0.0));
}

#[test]
fn stats_intercept_resend_on_lm05() {
    let v = json(&["stats", "--protocol", "lm05", "--attack", "IR"]);
    let s = &v["stats"];
    assert!(close(&s["i_ab"], 0.1887) && close(&s["i_e_sum"], 1.1887) && close(&s["detection_cost"], 0.125));
}

#[test]
fn stats_error_codes() {
    assert_eq!(qkdgame(&["stats", "--protocol", "pp", "--encoding", "A1", "--attack", "E9"]).status.code(), Some(2));
    assert_eq!(qkdgame(&["stats", "--protocol", "qq", "--attack", "E4"]).status.code(), Some(2));
    assert_eq!(qkdgame(&["stats", "--protocol", "pp", "--attack", "E4"]).status.code(), Some(2));
    let missing = qkdgame(&["stats", "--protocol", "lm05", "--attack", "E2"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(stderr(&missing).contains("E2"));
    assert_eq!(qkdgame(&["stats", "--bogus-flag"]).status.code(), Some(2));
}

#[test]
fn payoff_tables_are_symbolic_without_weights() {
    let pp = json(&["payoff-table", "--game", "pp"]);
    assert_eq!(pp["alice"].as_array().unwrap().len(), 2);
    assert_eq!(pp["alice"][0].as_array().unwrap().len(), 4);
    assert_eq!(pp["alice"][1][2], "w_a-2w_b");
    assert_eq!(pp["eve"][0][3], "-w_e+w_f");

    let eq = json(&["payoff-table", "--game", "pp", "--scenario", "equal-weights"]);
    assert_eq!(eq["alice"][1][0], "-0.549w_I+0.5w_P");

    let tw = json(&["payoff-table", "--game", "twoway"]);
    assert_eq!(tw["rows"], serde_json::json!(["PPP", "LM05"]));
    assert_eq!(tw["cols"].as_array().unwrap().len(), 3);
    assert_eq!(tw["alice"][1][1], "w_g-2w_h+0.125w_i");
    assert_eq!(tw["eve"][1][1], "2w_k-w_l+0.875w_m");
}

#[test]
fn payoff_table_rejects_malformed_weights() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"w_a\": ");
    let o = qkdgame(&["payoff-table", "--game", "pp", "--weights", &bad]);
    assert_eq!(o.status.code(), Some(2));
    let negative = write(dir.path(), "neg.json", r#"{"w_I": -1, "w_P": 1, "w_1": 0, "w_2": 0, "w_3": 0}"#);
    let o = qkdgame(&["payoff-table", "--game", "pp", "--scenario", "equal-weights", "--weights", &negative]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn nash_at_equal_weight_point() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.json", r#"{"w_I": 0.6, "w_P": 1, "w_1": 0.1, "w_2": 0.1, "w_3": 0.1}"#);
    let v = json(&["nash", "--game", "pp", "--scenario", "equal-weights", "--weights", &w]);
    let both = serde_json::json!(["(A1,E4)", "(A2,E4)"]);
    assert_eq!(v["nash"], both);
    assert_eq!(v["pareto_nash"], both);
    let p = json(&["pareto", "--game", "pp", "--scenario", "equal-weights", "--weights", &w]);
    assert_eq!(p["pareto_nash"], both);
}

#[test]
fn nash_with_zero_weights_is_every_profile() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(
        dir.path(),
        "w.json",
        r#"{"w_a":0,"w_b":0,"w_c":0,"w_d":0,"w_e":0,"w_f":0,"w_1":0,"w_2":0,"w_3":0}"#,
    );
    let v = json(&["nash", "--game", "pp", "--weights", &w]);
    assert_eq!(v["nash"].as_array().unwrap().len(), 8);
}

#[test]
fn nash_two_way_lm05_ir() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.json", r#"{"w_g":1,"w_h":1,"w_i":1,"w_j":0.5,"w_k":0.2,"w_l":1,"w_m":1}"#);
    let v = json(&["nash", "--game", "twoway", "--weights", &w]);
    assert!(v["nash"].as_array().unwrap().iter().any(|p| p == "(LM05,IR)"));
}

#[test]
fn nash_missing_weight_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let w = write(dir.path(), "w.json", r#"{"w_I": 0.6, "w_P": 1, "w_1": 0.1, "w_2": 0.1}"#);
    let o = qkdgame(&["nash", "--game", "pp", "--scenario", "equal-weights", "--weights", &w]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("w_3"));
}

#[test]
fn unsupported_scenario_is_exit_3() {
    let o = qkdgame(&["regions", "--game", "twoway", "--profile", "LM05,IR", "--scenario", "no-dos"]);
    assert_eq!(o.status.code(), Some(3));
}

fn active_inequalities(v: &Value) -> Vec<String> {
    v["inequalities"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["status"] == "active")
        .map(|e| e["inequality"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn regions_examples() {
    let v = json(&["regions", "--game", "pp", "--profile", "A2,E4", "--scenario", "no-dos"]);
    assert!(active_inequalities(&v).contains(&"w_d ≤ 4w_1+2w_2+w_3".to_string()));

    let v = json(&["regions", "--game", "twoway", "--profile", "LM05,DCNOT"]);
    assert!(active_inequalities(&v).contains(&"w_k ≥ w_l".to_string()));

    let v = json(&["regions", "--game", "pp", "--profile", "A1,E4"]);
    let active = active_inequalities(&v);
    assert!(active.contains(&"0.5w_f+10w_1+4w_2+2w_3 ≥ 0.385w_d+0.689w_e".to_string()), "{active:?}");
    assert!(active.contains(&"0.5w_f+10.5w_1+5.5w_2+2w_3 ≥ 0.377w_d+0.812w_e".to_string()), "{active:?}");
}

#[test]
fn regions_unknown_profile() {
    assert_eq!(qkdgame(&["regions", "--game", "pp", "--profile", "A3,E1"]).status.code(), Some(2));
}

#[test]
fn verify_paper_passes_and_is_deterministic() {
    let a = qkdgame(&["verify-paper", "--seed", "5", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = qkdgame(&["verify-paper", "--seed", "5", "--format", "json"]);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["cells"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn verify_paper_seed_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_qkdgame"));
        c.args(["verify-paper", "--format", "json"]).args(args).env_remove("QKDGAME_SEED");
        if let Some(seed) = env {
            c.env("QKDGAME_SEED", seed);
        }
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("9"), &[]), run(None, &["--seed", "9"]));
    assert_ne!(run(Some("9"), &[]), run(None, &["--seed", "10"]));
}

#[test]
fn verify_paper_fails_on_corrupted_statistics() {
    let mut e1: Value = serde_json::from_str(&builtin("E1").unwrap().to_file_json()).unwrap();
    e1["table"]["pp/A1"]["i_ab"] = serde_json::json!(0.5);
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "e1.json", &e1.to_string());
    let o = qkdgame(&["verify-paper", "--attack-file", &path]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("cell pp-alice (A1,E1)"), "{err}");
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn attack_file_adds_a_new_attack() {
    let mut e4: Value = serde_json::from_str(&builtin("E4").unwrap().to_file_json()).unwrap();
    e4["name"] = serde_json::json!("NOOP");
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "noop.json", &e4.to_string());
    let v = json(&["--attack-file", &path, "stats", "--protocol", "lm05", "--attack", "NOOP"]);
    assert!(close(&v["stats"]["i_ab"], 1.0));
    let bad = write(dir.path(), "bad.json", r#"{"name": "X", "form": "circuit"}"#);
    assert_eq!(qkdgame(&["--attack-file", &bad, "stats", "--protocol", "lm05", "--attack", "X"]).status.code(), Some(2));
}

#[test]
fn csv_and_markdown_outputs() {
    let o = qkdgame(&["--format", "csv", "stats", "--protocol", "lm05", "--attack", "DCNOT"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("attack,key,i_ab"));
    assert!(lines.next().unwrap().starts_with("DCNOT,lm05,1.000000"));

    let o = qkdgame(&["payoff-table", "--game", "pp"]);
    let md = stdout(&o);
    assert!(md.contains("| A2 | 0.311w_a-0.86w_b+0.5w_c |"), "{md}");
}
