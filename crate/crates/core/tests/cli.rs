use std::process::{Command, Output};

use serde_json::Value;

fn qtazrp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtazrp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn result<'a>(report: &'a Value, method: &str) -> &'a Value {
    report["results"]
        .as_array()
        .expect("results")
        .iter()
        .find(|r| r["method"] == method)
        .unwrap_or_else(|| panic!("no {method} row"))
}

#[test]
fn symbolic_hitting_probability_with_exact_q() {
    let out = qtazrp(&["hitprob", "--x", "0,-2,-2", "--y", "1,2,2", "--q", "3/5", "--symbolic"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["header"]["query"]["q"], "3/5");
    let sym = result(&r, "symbolic")["symbolic"].as_str().unwrap();
    assert!(sym.contains("89*q^7"), "{sym}");
    assert_eq!(result(&r, "rational")["symbolic"], "24123592/1473661917");
}

#[test]
fn all_modes_agree_and_report_checks() {
    let out = qtazrp(&[
        "cdf", "--x", "0,0,0", "--y", "0,1,3", "--q", "0.6", "--t", "2", "--mode", "all", "--samples", "20000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    let exact = result(&r, "exact")["value"].as_f64().unwrap();
    assert!((exact - 0.0695753).abs() < 1e-6);
    assert!((result(&r, "contour")["value"].as_f64().unwrap() - exact).abs() < 1e-7);
    let checks = r["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn output_is_deterministic_for_a_seed() {
    let args = ["cdf", "--x", "0,-1", "--y", "2,2", "--q", "0.3", "--t", "1", "--mode", "mc", "--samples", "5000"];
    let a = qtazrp(&args);
    let b = qtazrp(&[&args[..], &["--threads", "1"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(result(&json(&a), "mc"), result(&json(&b), "mc"));
}

#[test]
fn table_defaults_to_csv() {
    let out = qtazrp(&["table", "--samples", "2000", "--seed", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("x,y-x,estimate,stderr,samples,seed"));
    assert_eq!(lines.count(), 35);
}

#[test]
fn invalid_input_exits_with_code_two() {
    let out = qtazrp(&["cdf", "--x", "0", "--y", "1", "--q", "1.5", "--t", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qtazrp(&["cdf", "--x", "0,0", "--y", "1", "--q", "0.5", "--t", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
