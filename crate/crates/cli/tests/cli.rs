use std::path::PathBuf;
use std::process::{Command, Output};

fn programs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/programs")
}

fn file(name: &str) -> String {
    programs().join(name).to_string_lossy().into_owned()
}

fn logpot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logpot")).args(args).output().expect("run logpot")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("logpot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_certifies_splay() {
    let o = logpot(&["check", &file("splay.lam"), &file("splay.sig")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("splay costed #0: typable"));
}

#[test]
fn check_rejects_zero_budget() {
    let sig = scratch("zero.sig");
    std::fs::write(&sig, "fn splay : B * T -> T | costed { rank: [0] } -> { rank: [0] }").unwrap();
    let o = logpot(&["check", &file("splay.lam"), sig.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("NOT typable"));
}

#[test]
fn malformed_input_is_a_usage_error() {
    let bad = scratch("bad.lam");
    std::fs::write(&bad, "splay a t = match t with | leaf ->").unwrap();
    assert_eq!(code(&logpot(&["check", bad.to_str().unwrap(), &file("splay.sig")])), 2);
    let sig = scratch("bad.sig");
    std::fs::write(&sig, "fn splay : B * T -> T | costed { rank: [1 } -> { }").unwrap();
    assert_eq!(code(&logpot(&["check", &file("splay.lam"), sig.to_str().unwrap()])), 2);
    assert_eq!(code(&logpot(&["check", "/nonexistent.lam", &file("splay.sig")])), 2);
    assert_eq!(code(&logpot(&["infer", &file("splay.lam"), "--template", "a=0..1,b=5..1"])), 2);
}

#[test]
fn check_writes_json_report() {
    let out = scratch("check.json");
    let o = logpot(&["check", &file("splay.lam"), &file("splay.sig"), "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["command"], "check");
    assert_eq!(report["typable"], true);
    assert_eq!(report["verdicts"][0]["function"], "splay");
    assert!(report["verdicts"][0]["constraints"].as_u64().unwrap() > 0);
}

#[test]
fn infer_identity_is_free() {
    let out = scratch("id.sig");
    let o = logpot(&["infer", &file("id.lam"), "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("costed { rank: [0]; log: {} }\n    -> { rank: [0]; log: {} }"), "{text}");
}

#[test]
fn infer_reports_infeasibility_with_a_hint() {
    let o = logpot(&["infer", &file("loop.lam")]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--template a=0..1,b=0..3"), "{}", stderr(&o));
}

#[test]
fn eval_prints_value_and_cost() {
    let o = logpot(&["eval", &file("splay.lam"), "splay", "1", "leaf"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "value: nil\ncost: 1\n");
    let o = logpot(&["eval", &file("insert.lam"), "--with", &file("splay.lam"), "insert", "1", "leaf"]);
    assert_eq!(stdout(&o), "value: (nil, 1, nil)\ncost: 1\n");
    let o = logpot(&["eval", &file("splay.lam"), "splay", "1", "((leaf, 1, leaf), 2, leaf)"]);
    assert_eq!(stdout(&o), "value: (nil, 1, (nil, 2, nil))\ncost: 1\n");
    let o = logpot(&["eval", &file("splay.lam"), "--cost-free", "splay", "1", "((leaf, 1, leaf), 2, leaf)"]);
    assert!(stdout(&o).ends_with("cost: 0\n"));
}

#[test]
fn eval_errors() {
    assert_eq!(code(&logpot(&["eval", &file("splay.lam"), "splay", "1"])), 2);
    assert_eq!(code(&logpot(&["eval", &file("splay.lam"), "splay", "1", "(leaf,"])), 2);
    let o = logpot(&["eval", &file("loop.lam"), "loop", "leaf", "--fuel", "50"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("nontermination"));
}

#[test]
fn validate_passes_for_the_certified_bound() {
    let out = scratch("validate.json");
    let o = logpot(&["validate", &file("splay.lam"), &file("splay.sig"), "--exhaustive", "7", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["corpus_size"], 1 + 1 + 2 + 5 + 14 + 42 + 132);
    assert!(report["min_slack"].as_f64().unwrap() >= -1e-6);
    assert!(report["telescoping"][0]["worst_excess"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn validate_finds_a_witness_against_a_weak_bound() {
    let o = logpot(&["validate", &file("splay.lam"), &file("splay_weak.sig"), "--exhaustive", "8"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--force"));
    let o = logpot(&["validate", &file("splay.lam"), &file("splay_weak.sig"), "--exhaustive", "10", "--force"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("VIOLATED on ("), "{}", stdout(&o));
}

#[test]
fn empty_corpus_is_flagged() {
    let o = logpot(&["validate", &file("splay.lam"), &file("splay.sig"), "--random", "0"]);
    assert!(stderr(&o).contains("empty corpus"));
}

#[test]
fn reports_match_the_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../report.schema.json")).expect("schema is JSON");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let runs: [(&str, Vec<String>); 4] = [
        ("check", vec!["check".into(), file("splay.lam"), file("splay.sig")]),
        ("infer", vec!["infer".into(), file("id.lam")]),
        ("infer-none", vec!["infer".into(), file("loop.lam")]),
        ("validate", vec!["validate".into(), file("splay.lam"), file("splay.sig"), "--random".into(), "20".into()]),
    ];
    for (name, mut args) in runs {
        let out = scratch(&format!("{name}-schema.json"));
        args.extend(["--json".to_string(), out.to_string_lossy().into_owned()]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        logpot(&args);
        let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
    let mut broken: serde_json::Value = serde_json::json!({"command": "check", "typable": "yes"});
    assert!(!validator.is_valid(&broken));
    broken["typable"] = true.into();
    assert!(!validator.is_valid(&broken));
}
