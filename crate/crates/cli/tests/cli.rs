use std::collections::BTreeMap;
use std::process::{Command, Output};

use serde_json::Value;

fn apnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apnlab")).args(args).output().expect("run apnlab")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn analyze_binomial() {
    let v = json(&apnlab(&["analyze", "--m", "10", "--poly", "3:1,36:0xed"]));
    for key in ["tool_version", "m", "poly", "command", "results"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let flags = &v["results"]["flags"];
    assert_eq!(flags["apn"], true);
    assert_eq!(flags["crooked"], true);
    assert_eq!(flags["degree"], 2);
    assert_eq!(v["results"]["uniformity"], 2);
    assert_eq!(v["poly"], "0x409");
}

#[test]
fn analyze_identity_lut() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.lut");
    let text: String = (0..32).map(|x| format!("{x:x}\n")).collect();
    std::fs::write(&path, text).unwrap();
    let v = json(&apnlab(&["analyze", "--m", "5", "--lut-file", path.to_str().unwrap()]));
    assert_eq!(v["results"]["flags"]["apn"], false);
    assert_eq!(v["results"]["flags"]["degree"], 1);
    assert_eq!(v["results"]["uniformity"], 32);
}

/// Flattens JSON into the same dotted keys the CSV writer uses.
fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&join(k), x, out)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, out)),
        Value::String(s) => {
            out.insert(prefix.into(), s.clone());
        }
        other => {
            out.insert(prefix.into(), other.to_string());
        }
    }
}

#[test]
fn csv_and_json_agree() {
    let args = ["analyze", "--m", "6", "--poly", "3:1"];
    let v = json(&apnlab(&args));
    let mut expected = BTreeMap::new();
    flatten("", &v, &mut expected);
    let out = apnlab(&[&args[..], &["--csv"]].concat());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("key,value"));
    let got: BTreeMap<String, String> = lines
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.trim_matches('"').to_string())
        })
        .collect();
    assert_eq!(got, expected);
}

#[test]
fn catalog_lists_families() {
    let v = json(&apnlab(&["catalog", "--m", "10"]));
    let exps: Vec<u64> = v["results"].as_array().unwrap().iter().map(|e| e["exponent"].as_u64().unwrap()).collect();
    assert_eq!(exps, vec![3, 9, 57, 339]);
    let v = json(&apnlab(&["catalog", "--m", "10", "--theorem1-us"]));
    assert_eq!(v["results"]["theorem1_us"].as_array().unwrap().len(), 62);
}

#[test]
fn verify_theorem1_exits_zero() {
    let v = json(&apnlab(&["verify", "--suite", "theorem1"]));
    assert_eq!(v["results"]["passed"], true);
}

#[test]
fn search_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap().to_string();
        let mut args = vec!["--jobs", jobs, "search", "--m", "6", "--out", &p];
        args.extend_from_slice(extra);
        let out = apnlab(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(&path).unwrap()
    };
    let one = run("a.jsonl", "1", &[]);
    let eight = run("b.jsonl", "8", &[]);
    assert_eq!(one, eight);
    assert!(!one.is_empty());
    // resuming a finished run changes nothing
    assert_eq!(run("a.jsonl", "2", &["--resume"]), one);
}

#[test]
fn rank_matches_oracle_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let basis = dir.path().join("b.bin");
    let b = basis.to_str().unwrap();
    let closure = json(&apnlab(&["rank", "--m", "5", "--poly", "3:1", "--save-basis", b]));
    let oracle = json(&apnlab(&["rank", "--m", "5", "--poly", "3:1", "--oracle"]));
    assert_eq!(closure["results"]["dimension"], 42);
    assert_eq!(oracle["results"]["dimension"], 42);
    let resumed = json(&apnlab(&["rank", "--m", "5", "--poly", "3:1", "--resume-basis", b]));
    assert_eq!(resumed["results"]["dimension"], 42);
    let graph = json(&apnlab(&["rank", "--m", "4", "--poly", "5:1", "--target", "graph"]));
    assert_eq!(graph["results"]["dimension"], 64);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(apnlab(&["analyze", "--m", "10"]).status.code(), Some(2));
    assert_eq!(apnlab(&["analyze", "--m", "10", "--poly", "3:1", "--lut-file", "x"]).status.code(), Some(2));
    let out = apnlab(&["analyze", "--m", "5", "--lut-file", "/does/not/exist"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/does/not/exist"));
    assert_eq!(apnlab(&["rank", "--m", "4", "--poly", "5:1"]).status.code(), Some(2));
    assert_eq!(apnlab(&["verify", "--suite", "nope"]).status.code(), Some(2));
}
