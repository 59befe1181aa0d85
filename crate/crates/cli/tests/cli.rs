use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ergolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args).env_remove("ERGOLAB_THREADS").output().expect("spawn ergolab")
}

fn json_out(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn tame_shear_from_file() {
    let dir = TempDir::new().unwrap();
    let shear = write(&dir, "shear.json", r#"{"rows": [[1, 1], [0, 1]]}"#);
    let v = json_out(&ergolab(&["tame", "--matrix", &shear]));
    assert_eq!(v["verdict"], "untame");
    assert_eq!(v["witness"], Value::Null);
    assert_eq!(v["d"], 2);
    assert_eq!(v["L"], 12);
}

#[test]
fn tame_rotation_with_shift_records_note() {
    let v = json_out(&ergolab(&["tame", "--matrix", "[[0,-1],[1,0]]", "--shift", "1/2,0"]));
    assert_eq!(v["verdict"], "tame");
    assert_eq!(v["witness"], serde_json::json!([0, 4]));
    assert_eq!(v["shift"], serde_json::json!(["1/2", "0"]));
    assert!(v["note"].is_string());
}

#[test]
fn large_dimension_needs_flag() {
    let rows: Vec<Vec<i64>> = (0..9).map(|i| (0..9).map(|j| i64::from(i == j)).collect()).collect();
    let m = serde_json::to_string(&rows).unwrap();
    let out = ergolab(&["tame", "--matrix", &m]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--allow-large-d"));
}

#[test]
fn validate_cesaro_exact() {
    let v = json_out(&ergolab(&["validate-method", "--method", "cesaro", "--max-n", "100"]));
    assert_eq!(v["variation_exact"], "1/101");
    assert_eq!(v["row_sum_defect_exact"], "0");
    let f: f64 = v["variation"].to_string().parse().unwrap();
    assert_eq!(f, 1.0 / 101.0);
}

#[test]
fn floats_have_seventeen_significant_digits() {
    let v = json_out(&ergolab(&["validate-method", "--method", "riesz:log", "--max-n", "50", "--arith", "float"]));
    let text = v["variation"].to_string();
    let mantissa = text.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{text}");
}

#[test]
fn average_doubling_cycle() {
    let out = ergolab(&["average", "--system", "torus:A=[[2]]", "--point", "1/7", "--n", "299", "--observable", "coord0"]);
    let v = json_out(&out);
    assert_eq!(v["arith"], "exact");
    let exact = v["values_exact"]["coord0"].as_array().unwrap();
    assert_eq!(exact.last().unwrap(), "1/3");
    assert_eq!(v["verdict"]["status"], "converged");
    assert!(v["residuals"]["coord0"].is_array());
}

#[test]
fn average_block_sequence_oscillates() {
    let v = json_out(&ergolab(&[
        "average", "--system", "shift:rule=blocks4", "--n", "5460", "--checkpoints", "list:83,339,1363,5459", "--observable",
        "x0", "--tol", "0.05",
    ]));
    assert_eq!(v["verdict"]["status"], "oscillating");
    let step: f64 = v["verdict"]["max_step_gap"].to_string().parse().unwrap();
    assert!(step >= 0.4);
}

#[test]
fn few_checkpoints_report_no_verdict() {
    let v = json_out(&ergolab(&["average", "--system", "rotation:alpha=1/3", "--point", "0", "--n", "9", "--checkpoints", "3,9"]));
    assert_eq!(v["verdict"], Value::Null);
    assert!(v["verdict_error"].as_str().unwrap().contains("checkpoints"));
}

#[test]
fn decompose_square_two_components() {
    let v = json_out(&ergolab(&[
        "decompose", "--system", "interval:square", "--grid", "100", "--n", "2000", "--eps", "0.05", "--checkpoints",
        "geometric:1.5,from=100",
    ]));
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[1]["members"], serde_json::json!([100]));
    assert_eq!(v["separation"]["pass"], true);
    assert_eq!(v["separation"]["pairs"][0]["separating"], "t");
    assert_eq!(v["undecided"].as_array().unwrap().len(), 0);
}

#[test]
fn decompose_doubling_certifies_cycles() {
    let v = json_out(&ergolab(&["decompose", "--system", "torus:A=[[2]]", "--grid", "list:1/7;2/7;4/7;1/15", "--n", "1199", "--eps", "0.01"]));
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert_eq!(comps[0]["certificate"]["period"], 3);
    assert_eq!(comps[1]["certificate"]["period"], 4);
}

#[test]
fn flatness_dichotomy() {
    let v = json_out(&ergolab(&["flatness", "--system", "shift", "--observable", "x0", "--shifts", "0..6", "--grid", "cylinder"]));
    let value: f64 = v["value"].to_string().parse().unwrap();
    assert!(value >= 0.5 - 1e-9);
    let v = json_out(&ergolab(&["flatness", "--system", "rotation:alpha=golden", "--observable", "cos1", "--shifts", "0,1,2", "--grid", "64"]));
    let value: f64 = v["value"].to_string().parse().unwrap();
    assert!(value <= 1e-8);
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let out = ergolab(&["average", "--system", "torus:A=[[2]]", "--point", "1/7", "--n", "9", "--method", "abel"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--method"));
    let out = ergolab(&["average", "--system", "warp:9", "--point", "0", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--system"));
    assert_eq!(ergolab(&["tame", "--matrix", "[[1]]", "--bogus"]).status.code(), Some(2));
    assert_eq!(ergolab(&[]).status.code(), Some(2));
    assert_eq!(ergolab(&["scenarios", "--only", "nonexistent"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_error_name() {
    let out = ergolab(&["average", "--system", "torus:A=[[2]]", "--point", "1/7", "--n", "9", "--checkpoints", "list:5,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[UnorderedCheckpoints]"));
    let out = ergolab(&["tame", "--matrix", "[[1,2],[3]]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error["));
    let out = ergolab(&["average", "--system", "projective:T=[[1,2],[2,4]]", "--point", "1,0", "--n", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[SingularMatrix]"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(ergolab(&["--help"]).status.code(), Some(0));
    assert_eq!(ergolab(&["--version"]).status.code(), Some(0));
    assert_eq!(ergolab(&["decompose", "--help"]).status.code(), Some(0));
}

#[test]
fn config_mirrors_flags_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "run.json",
        r#"{"system": "torus:A=[[2]]", "point": "1/7", "n": 299, "observable": "coord0", "float_points": false}"#,
    );
    let from_flags = ergolab(&["average", "--system", "torus:A=[[2]]", "--point", "1/7", "--n", "299", "--observable", "coord0"]);
    let from_config = ergolab(&["average", "--config", &cfg]);
    assert!(from_config.status.success(), "{}", stderr(&from_config));
    assert_eq!(from_flags.stdout, from_config.stdout);

    let overridden = json_out(&ergolab(&["average", "--config", &cfg, "--point", "1/15"]));
    assert_eq!(overridden["values_exact"]["coord0"].as_array().unwrap().last().unwrap(), "1/4");

    let with_command = write(&dir, "cmd.json", r#"{"command": "validate-method", "method": "cesaro", "max_n": 10}"#);
    let v = json_out(&ergolab(&["--config", &with_command]));
    assert_eq!(v["variation_exact"], "1/11");

    let bad = write(&dir, "bad.json", r#"{"system": "torus:A=[[2]]", "point": "1/7", "n": 9, "colour": "red"}"#);
    assert_eq!(ergolab(&["average", "--config", &bad]).status.code(), Some(2));
    assert_eq!(ergolab(&["average", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let args = |out: &str| {
        vec![
            "decompose".to_string(),
            "--system".into(),
            "torus:A=[[2]]".into(),
            "--grid".into(),
            "15".into(),
            "--n".into(),
            "1199".into(),
            "--eps".into(),
            "0.01".into(),
            "--out".into(),
            dir.path().join(out).display().to_string(),
        ]
    };
    let run = |out: &str, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_ergolab")).args(args(out)).env("ERGOLAB_THREADS", threads).status().unwrap();
        assert!(status.success());
    };
    run("a.json", "1");
    run("b.json", "1");
    run("c.json", "4");
    let a = read(&dir.path().join("a.json"));
    assert_eq!(a, read(&dir.path().join("b.json")));
    assert_eq!(a, read(&dir.path().join("c.json")));
}

#[test]
fn invalid_thread_count_is_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(["validate-method", "--method", "cesaro", "--max-n", "5"])
        .env("ERGOLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ERGOLAB_THREADS"));
}

#[test]
fn scenario_summary_files() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("s.json");
    let csv = dir.path().join("s.csv");
    let out = ergolab(&[
        "scenarios", "--only", "torus-shear,doubling-cycle", "--out", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&read(&json)).unwrap();
    assert_eq!(v["passed"], 2);
    assert_eq!(v["scenarios"][0]["id"], "torus-shear");
    let text = String::from_utf8(read(&csv)).unwrap();
    assert!(text.starts_with("id,criterion,source,check,measured,expected,tolerance,pass"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    let list = ergolab(&["scenarios", "--list"]);
    assert_eq!(String::from_utf8_lossy(&list.stdout).lines().count(), 9);
}
