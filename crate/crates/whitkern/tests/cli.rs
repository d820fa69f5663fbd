use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn whitkern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whitkern"))
        .args(args)
        .env_remove("WHITKERN_OUT_DIR")
        .output()
        .expect("spawn whitkern")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// (header key=value pairs, column names, rows) of a CSV document.
fn parse_csv(s: &str) -> (Vec<(String, String)>, Vec<String>, Vec<Vec<String>>) {
    let mut header = Vec::new();
    let mut lines = s.lines();
    let mut first = None;
    for l in lines.by_ref() {
        match l.strip_prefix("# ") {
            Some(kv) => {
                let (k, v) = kv.split_once('=').unwrap();
                header.push((k.to_string(), v.to_string()));
            }
            None => {
                first = Some(l);
                break;
            }
        }
    }
    let cols = first.unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, cols, rows)
}

fn header_value<'a>(h: &'a [(String, String)], key: &str) -> Option<&'a str> {
    h.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn column(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_resolvent_reports_each_level() {
    let o = whitkern(&[
        "verify", "--what", "resolvent", "--z", "0.3+0.4i", "--z-prime", "0.3-0.4i", "--nodes", "40", "--levels",
        "2", "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["what"], "resolvent");
    assert_eq!(v["config"]["status"], "pass");
    assert!(v["config"].get("timestamp").is_none());
    let recs = v["records"].as_array().unwrap();
    assert!(!recs.is_empty());
    for level in [0, 1] {
        assert!(recs.iter().any(|r| r["level"] == level && r["block"] == "pp"));
    }
    assert!(recs.iter().all(|r| r["residual"].as_f64().unwrap() < 1e-2));
}

#[test]
fn verify_tolerance_failure_exits_3() {
    let o = whitkern(&["verify", "--what", "factorization", "--nodes", "30", "--levels", "1", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["status"], "fail");
    assert!(stderr(&o).contains("tolerance"));
}

#[test]
fn verify_rejects_unbounded_parameters() {
    let o = whitkern(&["verify", "--z", "0.6", "--z-prime", "0.45", "--nodes", "30", "--levels", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn finite_d_example_matches_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let d = 0.7;
    let input = write(dir.path(), "k2.json", r#"{"n1": 1, "n2": 1, "entries": [[0, 0], [0.7, 0], [-0.7, 0], [0, 0]]}"#);
    let o = whitkern(&["finite", "--input", &input, "--enumerate", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, cols, rows) = parse_csv(&stdout(&o));
    assert_eq!(header_value(&h, "command"), Some("finite"));
    assert_eq!(rows.len(), 4);
    let q = 1.0 + d * d;
    let prob = column(&cols, "probability");
    let corr = column(&cols, "correlation_re");
    let incl = column(&cols, "inclusion");
    let num = |r: &[String], i: usize| r[i].parse::<f64>().unwrap();
    let want_prob = [1.0 / q, 0.0, 0.0, d * d / q];
    let want_corr = [1.0, d * d / q, d * d / q, d * d / q];
    for (k, r) in rows.iter().enumerate() {
        assert!((num(r, prob) - want_prob[k]).abs() < 1e-15, "{r:?}");
        assert!((num(r, corr) - want_corr[k]).abs() < 1e-14, "{r:?}");
        assert!((num(r, corr) - num(r, incl)).abs() < 1e-14, "{r:?}");
    }
}

#[test]
fn finite_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let short = write(dir.path(), "short.json", r#"{"n1": 1, "n2": 1, "entries": [[0, 0]]}"#);
    assert_eq!(whitkern(&["finite", "--input", &short]).status.code(), Some(2));
    let junk = write(dir.path(), "junk.json", "{not json");
    assert_eq!(whitkern(&["finite", "--input", &junk]).status.code(), Some(64));
    assert_eq!(whitkern(&["finite"]).status.code(), Some(64));
}

#[test]
fn integer_parameter_is_a_validation_error() {
    let o = whitkern(&["eval", "--block", "pp", "--x", "1", "--y", "1", "--z", "1", "--z-prime", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("must not be integers"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_64() {
    let o = whitkern(&["eval", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(whitkern(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(whitkern(&["eval", "--z", "0.3+0.4"]).status.code(), Some(64));
    assert_eq!(whitkern(&["eval", "--a", "0.1", "--mu", "0.2i", "--z", "0.3"]).status.code(), Some(64));
    assert_eq!(whitkern(&["eval", "--format", "xml"]).status.code(), Some(64));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# grid\nx = 3\ny=0.5\n");
    let o = whitkern(&["eval", "--config", &cfg, "--x", "2", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, _, rows) = parse_csv(&stdout(&o));
    assert_eq!(header_value(&h, "x"), Some("2"));
    assert_eq!(header_value(&h, "y"), Some("0.5"));
    assert_eq!(rows[0][1..3], ["2.0".to_string(), "0.5".to_string()]);

    let empty = write(dir.path(), "empty.cfg", "");
    let a = whitkern(&["eval", "--config", &empty, "--no-timestamp"]);
    let b = whitkern(&["eval", "--no-timestamp"]);
    assert_eq!(parse_csv(&stdout(&a)).2, parse_csv(&stdout(&b)).2);

    let bad = write(dir.path(), "bad.cfg", "x=1\n\n# c\n\ny=1\n\nthis line is broken\n");
    let o = whitkern(&["eval", "--config", &bad]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 7"), "{}", stderr(&o));
    let unknown = write(dir.path(), "unknown.cfg", "nodes=320\n");
    assert_eq!(whitkern(&["eval", "--config", &unknown]).status.code(), Some(64));
}

#[test]
fn deterministic_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k.json", r#"{"n1": 1, "n2": 1, "entries": [[0.5, 0], [0.3, 0.1], [-0.3, 0.1], [0.2, 0]]}"#);
    let args = ["finite", "--input", &input, "--samples", "500", "--seed", "9", "--no-timestamp"];
    let (a, b) = (whitkern(&args), whitkern(&args));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let stamped = whitkern(&args[..args.len() - 1]);
    assert!(header_value(&parse_csv(&stdout(&stamped)).0, "timestamp").is_some());
}

#[test]
fn output_directory_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_whitkern"))
        .args(["eval", "--block", "all", "--x", "0.5,1", "--y", "2", "--format", "json"])
        .env("WHITKERN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("eval.json")).unwrap()).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 8);
    let out = dir.path().join("sub").join("x.csv");
    let o = whitkern(&["eval", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(out).unwrap().contains("block,x,y,value"));
}

#[test]
fn limit_table_converges() {
    let o = whitkern(&["limit", "--z0", "0.5+0.3i", "--z0-prime", "0.5-0.3i", "--N-list", "8,16,32", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, cols, rows) = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 12);
    let ratio = column(&cols, "ratio");
    for r in rows.iter().filter(|r| !r[ratio].is_empty()) {
        assert!(r[ratio].parse::<f64>().unwrap() <= 0.7, "{r:?}");
    }
    assert_eq!(whitkern(&["limit", "--N-list", "8,15"]).status.code(), Some(2));
}

#[test]
fn tail_symbols_and_profiles() {
    let o = whitkern(&["tail", "--z", "0.6", "--z-prime", "0.4", "--block", "pp,pm", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, cols, rows) = parse_csv(&stdout(&o));
    assert!(header_value(&h, "rate_b").is_some());
    let (kind, point, re, err) = (column(&cols, "kind"), column(&cols, "point"), column(&cols, "re"), column(&cols, "abs_error"));
    let sym: Vec<_> = rows.iter().filter(|r| r[kind] == "symbol").collect();
    assert_eq!(sym.len(), 18);
    assert!(sym.iter().all(|r| r[err].parse::<f64>().unwrap() < 1e-4));
    let at_zero = rows.iter().find(|r| r[kind] == "profile" && r[1] == "pp" && r[point] == "0.0").unwrap();
    assert!((at_zero[re].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(whitkern(&["tail", "--z", "0.4", "--z-prime", "0.4"]).status.code(), Some(2));
}

#[test]
fn spectrum_columns() {
    let o = whitkern(&[
        "spectrum", "--a", "0.2", "--mu", "0.1i", "--m-list", "0.6", "--nodes", "60", "--level", "0", "--no-timestamp",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (h, cols, rows) = parse_csv(&stdout(&o));
    assert_eq!(cols[..4], ["m", "lambda_closed", "lambda_resolvent", "lambda_rayleigh"]);
    assert!(header_value(&h, "z").is_none() && header_value(&h, "a") == Some("0.2"));
    let v: Vec<f64> = rows[0][1..4].iter().map(|s| s.parse().unwrap()).collect();
    assert!((v[0] - v[1]).abs() < 1e-14);
    assert!((v[0] - v[2]).abs() / v[0] < 1e-3, "{v:?}");
}
