//! The fuzz targets' round-trip properties, run over their seed corpora.

use std::path::PathBuf;

use logpot::lang::{parse, parse_value, print_program};
use logpot::potential::{parse_annotation, parse_signatures, print_signatures};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("seed-"))
        .map(|p| (p.display().to_string(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn program_seeds_round_trip() {
    for (name, src) in seeds("parse") {
        let p = parse(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(parse(&print_program(&p)).unwrap().same_ast(&p), "{name}");
    }
}

#[test]
fn value_seeds_round_trip() {
    for (name, src) in seeds("parse_value") {
        let v = parse_value(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_value(&v.to_string()).unwrap(), v, "{name}");
    }
}

#[test]
fn annotation_seeds_round_trip() {
    for (name, src) in seeds("parse_annotation") {
        let q = parse_annotation(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_annotation(&q.to_string()).unwrap(), q, "{name}");
    }
}

#[test]
fn signature_seeds_round_trip() {
    for (name, src) in seeds("parse_signatures") {
        let sigs = parse_signatures(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(parse_signatures(&print_signatures(&sigs)).unwrap(), sigs, "{name}");
    }
}
