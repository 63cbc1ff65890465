mod common;

use std::sync::Arc;

use halspan::core::span::is_canonical;
use halspan::core::{extract_spans, Instance, Lang};
use halspan::jsonl::AuditKind;
use halspan::pipeline::{ModelSettings, Plan};
use halspan::providers::{
    CacheStore, ChatRequest, ChatTransport, Provider, ProviderMode, RetryPolicy, TranslateTransport, TransportError,
};
use halspan::runner::detect;
use proptest::prelude::*;

/// Answers every request with one of `texts`, chosen by the request's shape.
struct Fuzzed {
    texts: Vec<String>,
}

impl Fuzzed {
    fn pick(&self, key: usize) -> String {
        self.texts[key % self.texts.len()].clone()
    }
}

impl ChatTransport for Fuzzed {
    fn complete(&self, req: &ChatRequest) -> Result<String, TransportError> {
        Ok(self.pick(req.user_prompt.len() * 31 + req.model_ref.len() + req.system_prompt.len()))
    }
}

impl TranslateTransport for Fuzzed {
    fn translate(&self, text: &str, _: Lang, _: Lang) -> Result<String, TransportError> {
        Ok(format!("{} {}", self.pick(text.len()), text))
    }
}

fn adversarial_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "\\PC{0,12}",
        Just("So the hallucinations are:".to_string()),
        Just("so THE hallucinations ARE".to_string()),
        prop::sample::select(vec!["\"", "“", "”", "„", "「", "」", "＂", "'", ",", "\n", "Haute-Loire", "Jic\u{30c}i\u{301}n", "北京"])
            .prop_map(String::from),
    ];
    prop::collection::vec(piece, 0..12).prop_map(|v| v.concat())
}

fn small_corpus() -> Vec<Instance> {
    common::fixture_corpus()
        .into_iter()
        .filter(|i| ["en-1", "cs-1", "zh-1", "ar-1", "fi-2"].contains(&i.id.as_str()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fuzzed_answers_never_abort(texts in prop::collection::vec(adversarial_text(), 1..6)) {
        let corpus = small_corpus();
        let plan = Plan::final_system("model-a", "model-b");
        let dir = tempfile::tempdir().unwrap();
        let fuzz = Arc::new(Fuzzed { texts });
        let recorder = Provider::new(ProviderMode::Record, Some(CacheStore::open(dir.path()).unwrap()), fuzz.clone(), fuzz)
            .unwrap()
            .with_retry(RetryPolicy::none());
        let live = detect(&corpus, &plan, &recorder, ModelSettings::default(), 2).unwrap();
        prop_assert!(live.failed.is_empty());
        for (p, inst) in live.predictions.iter().zip(&corpus) {
            prop_assert!(is_canonical(&p.hard));
            prop_assert!(p.soft.iter().all(|s| s.end <= inst.char_len() && s.start < s.end));
            prop_assert!(p.soft.iter().all(|s| [1.0 / 3.0, 2.0 / 3.0, 1.0].contains(&s.prob)));
        }

        let replayed = detect(&corpus, &plan, &Provider::replay(CacheStore::at(dir.path())), ModelSettings::default(), 3).unwrap();
        prop_assert_eq!(&replayed, &live);
    }
}

#[test]
fn missing_markers_yield_empty_prediction_and_audit() {
    let corpus = small_corpus();
    let fuzz = Arc::new(Fuzzed { texts: vec!["I cannot tell.".into()] });
    let provider = Provider::new(ProviderMode::Live, None, fuzz.clone(), fuzz).unwrap();
    let det = detect(&corpus, &Plan::final_system("a", "b"), &provider, ModelSettings::default(), 1).unwrap();
    assert!(det.failed.is_empty());
    assert!(det.predictions.iter().all(|p| p.hard.is_empty() && p.soft.is_empty()));
    assert_eq!(det.audit.len(), 3 * corpus.len());
    assert!(det.audit.iter().all(|a| a.kind == AuditKind::MissingMarker));
    assert!(!extract_spans("I cannot tell.").had_marker);
}

#[test]
fn transport_errors_mark_instance_failed() {
    struct Down;
    impl ChatTransport for Down {
        fn complete(&self, _: &ChatRequest) -> Result<String, TransportError> {
            Err(TransportError::Transient("connection reset".into()))
        }
    }
    impl TranslateTransport for Down {
        fn translate(&self, _: &str, _: Lang, _: Lang) -> Result<String, TransportError> {
            Err(TransportError::RateLimited("slow down".into()))
        }
    }
    let corpus = small_corpus();
    let provider = Provider::new(ProviderMode::Live, None, Arc::new(Down), Arc::new(Down))
        .unwrap()
        .with_retry(RetryPolicy::none());
    let det = detect(&corpus, &Plan::final_system("a", "b"), &provider, ModelSettings::default(), 2).unwrap();
    assert_eq!(det.failed.len(), corpus.len());
    assert_eq!(det.predictions.len(), corpus.len());
    assert!(det.audit.iter().all(|a| a.kind == AuditKind::InstanceFailed));
}
