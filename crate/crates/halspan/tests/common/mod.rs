#![allow(dead_code)]

pub mod oracle;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use halspan::core::{Instance, Lang};
use halspan::jsonl::load_corpus;
use halspan::providers::{
    CacheStore, ChatRequest, ChatTransport, Provider, ProviderMode, TranslateTransport, TransportError,
};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/showcase")
}

pub fn corpus_path() -> PathBuf {
    fixture_dir().join("corpus.jsonl")
}

pub fn cache_dir() -> PathBuf {
    fixture_dir().join("cache")
}

pub fn fixture_corpus() -> Vec<Instance> {
    load_corpus(corpus_path(), true).expect("fixture corpus loads")
}

/// Hallucinated instances whose recorded ensemble answer scores IoU 1.0.
pub const SHOWCASE_IDS: &[&str] = &["en-1", "sv-1", "it-1", "de-1", "eu-1", "ca-1", "fi-1", "zh-1", "cs-1", "fr-1"];

pub struct NoNetwork;

impl ChatTransport for NoNetwork {
    fn complete(&self, req: &ChatRequest) -> Result<String, TransportError> {
        panic!("chat request reached the network: {}", req.model_ref)
    }
}

impl TranslateTransport for NoNetwork {
    fn translate(&self, text: &str, _: Lang, _: Lang) -> Result<String, TransportError> {
        panic!("translation reached the network: {text:?}")
    }
}

/// Replay provider over the fixture cache whose transports panic if touched.
pub fn replay_provider() -> Provider {
    Provider::new(
        ProviderMode::Replay,
        Some(CacheStore::at(cache_dir())),
        Arc::new(NoNetwork),
        Arc::new(NoNetwork),
    )
    .unwrap()
}
