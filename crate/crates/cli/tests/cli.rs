use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_thirdorder"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const CIRCLES: &str = "m = 2\nf1 = 3*q1*(p1*q1 + p2*q2)/(1 + p1^2 + p2^2)\nf2 = 3*q2*(p1*q1 + p2*q2)/(1 + p1^2 + p2^2)";

#[test]
fn eval_reports_circle_i4() {
    let out = run(&["--json", "eval", "-", "--at", "0,0,0,1,0,0,0"], CIRCLES);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["I4"][0][0], 0.125);
    assert_eq!(v["I4"][1][1], 0.25);
    assert_eq!(v["I4"][0][1], 0.0);
    assert!(!stdout(&run(&["eval", "-", "--at", "0,0,0,1,0,0,0"], CIRCLES)).contains("-0\n"));
}

#[test]
fn reads_a_system_file() {
    let path = std::env::temp_dir().join(format!("thirdorder-cli-{}.ode", std::process::id()));
    std::fs::write(&path, "m = 2\nf1 = x\nf2 = 0\n").unwrap();
    let out = run(&["trivializable", path.to_str().unwrap()], "");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "trivializable\n");
}

#[test]
fn verdict_names_nonvanishing_invariants() {
    let out = run(&["trivializable", "-"], CIRCLES);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("nonvanishing: ") && text.contains("I4"), "{text}");
}

#[test]
fn check_at_explicit_points() {
    let out = run(
        &["check", "-", "--at", "0.1,0.2,0.3,0.5,-0.5,1,2;0,0,0,0,0,0,0"],
        CIRCLES,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS oracle")).count(), 2);
    assert!(text.ends_with("all checks passed\n"));
}

#[test]
fn diagnostics_go_to_stderr() {
    let out = run(&["eval", "-", "--at", "1,2"], CIRCLES);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}

#[test]
fn bad_oracle_step_is_an_error() {
    assert_eq!(run(&["check", "-", "--step", "0"], CIRCLES).status.code(), Some(2));
}
