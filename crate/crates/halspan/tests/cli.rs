mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{cache_dir, corpus_path, fixture_dir};

fn halspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halspan"))
        .args(args)
        .env_remove("HALSPAN_CHAT_URL")
        .env_remove("HALSPAN_TRANSLATE_URL")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn detect_replay_reproduces_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub.jsonl");
    let o = halspan(&[
        "detect",
        "--corpus",
        s(&corpus_path()),
        "--output",
        s(&out),
        "--cache-dir",
        s(&cache_dir()),
        "--workers",
        "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&out).unwrap(), fs::read(fixture_dir().join("expected_final.jsonl")).unwrap());
    assert!(dir.path().join("sub.audit.jsonl").exists());
}

#[test]
fn language_filter_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zh.jsonl");
    let o = halspan(&[
        "detect", "--corpus", s(&corpus_path()), "--output", s(&out), "--cache-dir", s(&cache_dir()), "--lang", "zh,ar",
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4);

    let gold = dir.path().join("gold.jsonl");
    let corpus = common::fixture_corpus();
    let subset: Vec<_> = corpus.into_iter().filter(|i| ["zh", "ar"].contains(&i.lang.code())).collect();
    halspan::jsonl::write_corpus(&gold, &subset).unwrap();
    let reports = dir.path().join("report");
    let o = halspan(&["evaluate", "--submission", s(&out), "--gold", s(&gold), "--out-dir", s(&reports)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("Arabic (ar)") && table.contains("Chinese (zh)"));
    assert_eq!(table.lines().count(), 2 + 2 + 1);
    for f in ["report.json", "report.csv", "instances.csv", "report.txt"] {
        assert!(reports.join(f).exists(), "{f}");
    }
}

#[test]
fn empty_corpus_gives_empty_submission() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    fs::write(&corpus, "").unwrap();
    let out = dir.path().join("sub.jsonl");
    let o = halspan(&["detect", "--corpus", s(&corpus), "--output", s(&out), "--cache-dir", s(&cache_dir())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
}

#[test]
fn uncached_instance_fails_run_but_keeps_submission_complete() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let mut text = fs::read_to_string(corpus_path()).unwrap();
    text.push_str(r#"{"id":"new","lang":"en","model_input":"Who?","model_output_text":"Nobody at all."}"#);
    text.push('\n');
    fs::write(&corpus, text).unwrap();
    let out = dir.path().join("sub.jsonl");
    let audit = dir.path().join("audit.jsonl");
    let o = halspan(&[
        "detect", "--corpus", s(&corpus), "--output", s(&out), "--audit", s(&audit), "--cache-dir", s(&cache_dir()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<String> = fs::read_to_string(&out).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 25);
    assert_eq!(lines[24], r#"{"id":"new","hard_labels":[],"soft_labels":[]}"#);
    let audit = fs::read_to_string(&audit).unwrap();
    assert!(audit.contains(r#""id":"new","strategy":"final","kind":"instance_failed""#), "{audit}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub.jsonl");
    let missing_cache = dir.path().join("nope");
    let (corpus, cache) = (corpus_path(), cache_dir());
    let (corpus, cache) = (s(&corpus), s(&cache));
    let cases: Vec<Vec<&str>> = vec![
        vec!["detect", "--corpus", corpus, "--output", s(&out)],
        vec!["detect", "--corpus", corpus, "--output", s(&out), "--cache-dir", s(&missing_cache)],
        vec!["detect", "--corpus", corpus, "--output", s(&out), "--cache-dir", cache, "--workers", "0"],
        vec!["detect", "--corpus", corpus, "--output", s(&out), "--plan", "few_shot,none,cross,a"],
        vec!["detect", "--corpus", corpus, "--output", s(&out), "--lang", "xx"],
        vec!["bogus"],
    ];
    for args in cases {
        assert_eq!(halspan(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn evaluate_rejects_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("sub.jsonl");
    fs::write(&sub, "{\"id\":\"ghost\",\"hard_labels\":[],\"soft_labels\":[]}\n").unwrap();
    let o = halspan(&["evaluate", "--submission", s(&sub), "--gold", s(&corpus_path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ghost"));
}

#[test]
fn baseline_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("none.jsonl");
    let o = halspan(&["baseline", "--corpus", s(&corpus_path()), "--kind", "mark-none", "--output", s(&out)]);
    assert!(o.status.success());
    let table = String::from_utf8(o.stdout).unwrap();
    // half of the fixture instances have empty gold
    assert!(table.lines().last().unwrap().starts_with("All           24  0.5000"), "{table}");
}

#[test]
fn grid_writes_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let o = halspan(&[
        "grid",
        "--corpus",
        s(&corpus_path()),
        "--cache-dir",
        s(&cache_dir()),
        "--cell",
        "final",
        "--cell",
        "zero_shot,none,none,a",
        "--out-dir",
        s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 13);
    assert!(dir.path().join("grid.txt").exists());
    assert!(dir.path().join("cell2.jsonl").exists());
}
