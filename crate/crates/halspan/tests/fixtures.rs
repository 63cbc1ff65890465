mod common;

use std::collections::BTreeSet;
use std::fs;

use common::{fixture_corpus, fixture_dir, oracle, replay_provider, SHOWCASE_IDS};
use halspan::core::metrics::score_instance;
use halspan::core::{baseline, char_length, evaluate, Baseline, HardSpan, Lang};
use halspan::jsonl::{load_audit, write_submission, AuditKind};
use halspan::pipeline::{ModelSettings, Pipeline, Plan, DEFAULT_MODEL_A, DEFAULT_MODEL_B};
use halspan::runner::detect;

fn final_plan() -> Plan {
    Plan::final_system(DEFAULT_MODEL_A, DEFAULT_MODEL_B)
}

#[test]
fn corpus_covers_languages_with_empty_gold() {
    let corpus = fixture_corpus();
    let langs: BTreeSet<Lang> = corpus.iter().map(|i| i.lang).collect();
    assert!(langs.len() >= 6);
    assert!(langs.contains(&Lang::Zh));
    assert!(langs.contains(&Lang::Ar) || langs.contains(&Lang::Fa));
    for lang in langs {
        assert!(
            corpus
                .iter()
                .any(|i| i.lang == lang && i.gold_hard_canonical().unwrap().is_empty()),
            "{lang} has no gold-empty instance"
        );
    }
}

#[test]
fn english_gold_span_is_haute_loire() {
    let corpus = fixture_corpus();
    let en = corpus.iter().find(|i| i.id == "en-1").unwrap();
    let gold = en.gold_hard_canonical().unwrap();
    assert_eq!(gold, vec![HardSpan::new(41, 52)]);
    assert_eq!(gold[0].len(), 11);
}

#[test]
fn showcase_instances_score_perfect_iou() {
    let corpus = fixture_corpus();
    let provider = replay_provider();
    let pipeline = Pipeline::new(&provider);
    for id in SHOWCASE_IDS {
        let inst = corpus.iter().find(|i| i.id == *id).unwrap();
        let out = pipeline.try_run(inst, &final_plan()).unwrap();
        let gold = inst.gold_hard_canonical().unwrap();
        assert_eq!(out.prediction.hard, gold, "{id}");
        assert_eq!(oracle::iou(&out.prediction.hard, &gold), 1.0, "{id}");
        assert_eq!(score_instance(&out.prediction, inst).unwrap().iou, 1.0, "{id}");
    }
}

#[test]
fn replay_matches_frozen_submission_and_audit() {
    let corpus = fixture_corpus();
    let det = detect(&corpus, &final_plan(), &replay_provider(), ModelSettings::default(), 4).unwrap();
    assert!(det.failed.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sub.jsonl");
    write_submission(&out, &det.predictions).unwrap();
    assert_eq!(
        fs::read(&out).unwrap(),
        fs::read(fixture_dir().join("expected_final.jsonl")).unwrap()
    );
    assert_eq!(det.audit, load_audit(fixture_dir().join("expected_final.audit.jsonl")).unwrap());
}

#[test]
fn component_quirks_are_absorbed() {
    let corpus = fixture_corpus();
    let provider = replay_provider();
    let pipeline = Pipeline::new(&provider);
    let run = |id: &str| {
        let inst = corpus.iter().find(|i| i.id == id).unwrap();
        (inst.clone(), pipeline.try_run(inst, &final_plan()).unwrap())
    };

    // decomposed "Jičín" lands on the composed characters
    let (cs, out) = run("cs-1");
    let c3 = &out.components[2];
    assert!(c3.aligned.unmatched.is_empty());
    let start = cs.model_output_text.find("Jičín").unwrap();
    let start = char_length(&cs.model_output_text[..start]);
    assert!(c3.aligned.ranges.contains(&HardSpan::new(start, start + 5)));

    // corner-bracket quotes
    let (_, out) = run("zh-1");
    assert!(out.components[1].raw_text.contains('「'));
    assert_eq!(out.components[1].aligned.ranges.len(), 2);

    // missing protocol sentence, answered after the reminder
    let (_, out) = run("eu-1");
    assert!(out.components[2].reprompted);
    assert!(out.components[2].extraction.had_marker);
    assert!(!out.components[0].reprompted);

    // invented span is audited and ignored
    let (_, out) = run("sv-1");
    assert_eq!(out.components[1].aligned.unmatched, vec!["New York City".to_string()]);
    assert_eq!(out.audit.len(), 1);
    assert_eq!(out.audit[0].kind, AuditKind::UnmatchedSpan);

    // a single dissenting component gives probability 1/3 and no hard span
    let (_, out) = run("en-2");
    assert!(out.prediction.hard.is_empty());
    assert_eq!(out.prediction.soft.len(), 1);
    assert!((out.prediction.soft[0].prob - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn baselines_on_fixture_corpus() {
    let corpus = fixture_corpus();
    let none: Vec<_> = corpus.iter().map(|i| baseline(Baseline::MarkNone, i)).collect();
    let empty = corpus
        .iter()
        .filter(|i| i.gold_hard_canonical().unwrap().is_empty())
        .count();
    let report = evaluate(&none, &corpus).unwrap();
    assert_eq!(report.overall.mean_iou, empty as f64 / corpus.len() as f64);

    for inst in &corpus {
        let gold = inst.gold_hard_canonical().unwrap();
        let all = baseline(Baseline::MarkAll, inst);
        let s = score_instance(&all, inst).unwrap();
        if !gold.is_empty() {
            let covered: usize = gold.iter().map(HardSpan::len).sum();
            assert_eq!(s.iou, covered as f64 / inst.char_len() as f64, "{}", inst.id);
        }
    }
}

#[test]
fn metrics_agree_with_oracle_on_fixture_predictions() {
    let corpus = fixture_corpus();
    let det = detect(&corpus, &final_plan(), &replay_provider(), ModelSettings::default(), 1).unwrap();
    for (p, inst) in det.predictions.iter().zip(&corpus) {
        let s = score_instance(p, inst).unwrap();
        let n = inst.char_len();
        let gold_soft = inst.gold_soft.as_ref().unwrap();
        let expect_corr = oracle::spearman(&oracle::char_probs(&p.soft, n), &oracle::char_probs(gold_soft, n));
        assert!((s.corr - expect_corr).abs() < 1e-9, "{}", inst.id);
        assert_eq!(oracle::char_set(&p.hard), oracle::hard_chars(&p.soft, n), "{}", inst.id);
    }
}
