use std::fs;
use std::process::Command;

use covergame::cli::{run, EXIT_CAP, EXIT_INVALID, EXIT_OK};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("covergame").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const CX_II_JSON: &str = r#"{
  "agents": ["p1", "p2", "p3"],
  "resources": [{"id": "r1", "value": "9"}, {"id": "r2", "value": "9.5"}, {"id": "r3", "value": "20"}],
  "action_sets": [
    {"type": "explicit", "actions": [["r1"], ["r2"]]},
    {"type": "explicit", "actions": [["r2"], ["r3"]]},
    {"type": "explicit", "actions": [["r1"], ["r2"], ["r3"]]}
  ]
}"#;

#[test]
fn rules_prints_fractions_and_decimals() {
    let (code, out, _) = call(&["rules", "--rule", "optimal:3", "--k", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("rule optimal:3\n"));
    assert!(out.contains("3/7") && out.contains("0.428571428571"), "{out}");
    assert!(out.contains("poa  7/11 (0.636363636364)"), "{out}");
    let (_, text, _) = call(&["rules", "--rule", "risky:2:3", "--text"]);
    assert_eq!(text, "rule risky:2:3\n1 1/1\n2 1/2\n3 1/3\n");
    let (_, ext, _) = call(&["rules", "--rule", "optimal:1", "--extend-to", "3", "--text"]);
    assert_eq!(ext, "rule optimal:1\n1 1/1\n2 1/1\n3 1/1\n");
    assert_eq!(call(&["rules", "--rule", "risky:3:3"]).0, EXIT_INVALID);
    assert_eq!(call(&["rules", "--rule", "optimal:65"]).0, EXIT_INVALID);
}

#[test]
fn poa_table_rows_and_comparison() {
    let (code, out, _) = call(&["poa-table", "--k-max", "3", "--k", "3", "--kbar", "6"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("7/11 0.636363636364"), "{out}");
    for d in ["-6.727", "0.670", "0.083", "0.009"] {
        assert!(out.contains(d), "{out}");
    }
    let (_, single, _) = call(&["poa-table", "--k-max", "1"]);
    assert_eq!(single.lines().count(), 2);
    assert!(single.lines().nth(1).unwrap().trim_end().ends_with("1/1 1"));
    assert_eq!(call(&["poa-table", "--k-max", "0"]).0, EXIT_INVALID);
    assert_eq!(call(&["poa-table", "--k", "3"]).0, EXIT_INVALID);
}

#[test]
fn dynamics_reproduces_the_scheduled_learning_run() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("cx2.json");
    let init = dir.path().join("init.json");
    let trace = dir.path().join("trace.txt");
    fs::write(&inst, CX_II_JSON).unwrap();
    fs::write(&init, r#"[["r2"], ["r3"], ["r1"]]"#).unwrap();
    let args = [
        "dynamics",
        "--instance",
        inst.to_str().unwrap(),
        "--schedule",
        "perm:3,1,2",
        "--init",
        &format!("file:{}", init.display()),
        "--trace-out",
        trace.to_str().unwrap(),
    ];
    let (code, out, err) = call(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("0 p3 [r1] [r3] [1,1,2]"), "{out}");
    assert!(out.contains("welfare 59/2 (29.5)"), "{out}");
    assert_eq!(fs::read_to_string(&trace).unwrap(), out);
    assert_eq!(call(&args).1, out);

    let (code, out, _) = call(&["dynamics", "--instance", "builtin:counterexample-ii", "--rule", "optimal:3"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("welfare 77/2 (38.5)"), "{out}");
    let (code, _, _) = call(&["dynamics", "--instance", "builtin:counterexample-ii", "--rule", "optimal:3", "--numeric", "float"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn dynamics_input_errors() {
    assert_eq!(call(&["dynamics", "--instance", "/nonexistent.json"]).0, EXIT_INVALID);
    assert_eq!(call(&["dynamics", "--instance", "builtin:nope"]).0, EXIT_INVALID);
    assert_eq!(call(&["dynamics", "--instance", "builtin:counterexample-i", "--schedule", "sideways"]).0, EXIT_INVALID);
    assert_eq!(call(&["dynamics", "--instance", "builtin:counterexample-i", "--init", "guess"]).0, EXIT_INVALID);
    assert_eq!(call(&["dynamics", "--instance", "builtin:counterexample-i", "--max-rounds", "0"]).0, EXIT_INVALID);
}

#[test]
fn oracle_report_and_caps() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let (code, out, _) = call(&[
        "oracle",
        "--instance",
        "builtin:counterexample-i",
        "--rule",
        "optimal:3",
        "--learning",
        "--json-out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("nash ([r2], [r3], [r1]) welfare 23/1 (23)"), "{out}");
    assert!(out.contains("23/24"), "{out}");
    assert!(out.contains("learning runs        108\nlearning optimal     108\n"), "{out}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["optimal_welfare"], "24/1");
    assert_eq!(call(&["oracle", "--instance", "builtin:counterexample-i", "--cap", "10"]).0, EXIT_CAP);
}

#[test]
fn counterexample_verdicts() {
    let (code, out, _) = call(&["counterexample", "--case", "i"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.ends_with("PASS\n") && out.contains("23/24"), "{out}");
    let (code, out, _) = call(&["counterexample", "--case", "ii", "--values", "9,9.5,20"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("29.5") && out.contains("38.5"), "{out}");
    assert_eq!(call(&["counterexample", "--case", "i", "--values", "11,7,5,6"]).0, EXIT_INVALID);
    assert_eq!(call(&["counterexample", "--case", "ii", "--values", "1,2"]).0, EXIT_INVALID);
}

#[test]
fn bench_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let hist = dir.path().join("hist.csv");
    let base = ["bench", "--instances", "3", "--seed", "5", "--stations", "40", "--items", "200"];
    let mut first: Vec<&str> = base.to_vec();
    first.extend(["--out", a.to_str().unwrap(), "--hist-out", hist.to_str().unwrap()]);
    let (code, table, err) = call(&first);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(table.contains("learning"));
    let mut second: Vec<&str> = base.to_vec();
    second.extend(["--out", b.to_str().unwrap(), "--sequential"]);
    assert_eq!(call(&second).0, EXIT_OK);
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert!(csv.starts_with("instance,rule,welfare,w_tot,ratio,rounds,k,k_m\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
    for line in csv.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[1] == "learning", !fields[7].is_empty(), "{line}");
    }
    assert!(fs::read_to_string(&hist).unwrap().starts_with("rule,bin_start,bin_end,count\n"));
    assert_eq!(call(&["bench", "--instances", "0"]).0, EXIT_INVALID);
    assert_eq!(call(&["bench", "--instances", "1", "--rules", "greedy"]).0, EXIT_INVALID);
    assert_eq!(
        call(&["bench", "--instances", "1", "--stations", "2", "--require-k", "5", "--resample-cap", "2"]).0,
        EXIT_CAP
    );
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_covergame");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["counterexample", "--case", "ii"]);
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));
    assert_eq!(status(&["rules"]).status.code(), Some(EXIT_INVALID));
    assert_eq!(status(&["--help"]).status.code(), Some(EXIT_OK));
}
