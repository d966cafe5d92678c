mod common;

use std::path::Path;
use std::process::{Command, Output};

use catchup::ingest::save_records;
use catchup::synth::{embed_cases, generate, GenConfig};

fn catchup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catchup")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.contains("timestamp")).collect::<Vec<_>>().join("\n")
}

fn population(dir: &Path) -> String {
    let recs = generate(&GenConfig {
        n_records: 800,
        years: vec![2015, 2017],
        regions: vec![1, 2, 3],
        noise_spread: 0.5,
        seed: 4,
        ..GenConfig::default()
    })
    .unwrap();
    let recs = embed_cases(recs, &common::reference_cases()).unwrap();
    let path = dir.join("pop.csv");
    save_records(&path, &recs).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(catchup(&[]).status.code(), Some(1));
    assert_eq!(catchup(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(catchup(&["scan"]).status.code(), Some(1));
    assert_eq!(catchup(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "case_id,year,gender,region,g1,g2,g3,g4\n1,2015,1,1,3,4,x,5\n").unwrap();
    let o = catchup(&["scan", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let missing = dir.path().join("nope.csv");
    assert_eq!(catchup(&["scan", "--input", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn scan_lists_the_reference_cases() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.csv");
    save_records(&path, &common::reference_cases()).unwrap();
    let o = catchup(&["scan", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for id in ["77594", "77833", "80183", "122915"] {
        assert!(text.contains(id), "{text}");
    }
    assert!(text.contains("rescuable: 4 valid: 4"), "{text}");
}

#[test]
fn machine_output_is_json_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = population(dir.path());
    let o = catchup(&["eval-regression", "--input", &input, "--reps", "5", "--seed", "3", "--format", "machine"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["manifest"]["command"], "eval-regression");
    assert_eq!(doc["manifest"]["seed"], 3);
    assert_eq!(doc["manifest"]["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn every_command_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = population(dir.path());
    let gen_out = dir.path().join("gen.csv");
    let gen_out = gen_out.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["gen", "--n", "300", "--seed", "9", "--out", gen_out],
        vec!["scan", "--input", &input],
        vec!["eval-regression", "--input", &input, "--reps", "6", "--seed", "2"],
        vec!["eval-hybrid", "--input", &input, "--reps", "4", "--seed", "2", "--k", "15"],
        vec!["predict", "--input", &input, "--case", "80183", "--reps", "9"],
        vec!["rescue-all", "--input", &input, "--reps", "9", "--engine", "hybrid", "--k", "20"],
    ];
    for args in runs {
        let a = catchup(&args);
        let first_file = std::fs::read(gen_out).ok();
        let b = catchup(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(without_timestamp(&stdout(&a)), without_timestamp(&stdout(&b)), "{args:?}");
        assert_eq!(first_file, std::fs::read(gen_out).ok());
    }
}
