//! Chat-completion and translation clients with record/replay caching.
//!
//! Every request is keyed by a SHA-256 fingerprint. In `record` mode live
//! responses are persisted under that key; in `replay` mode responses come
//! only from the store and the transports are never touched, which makes
//! the whole pipeline a pure function of its inputs.

mod cache;
mod fingerprint;
pub mod http;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use halspan_core::Lang;
use serde::{Deserialize, Serialize};

pub use cache::{CacheRecord, CacheStore, CachedRequest, CachedResponse, SCHEMA};
pub use fingerprint::{fingerprint, translation_fingerprint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_ref: String,
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.system_prompt.is_empty() || self.user_prompt.is_empty() {
            return Err(ProviderError::InvalidRequest("empty prompt".into()));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(ProviderError::InvalidRequest(format!(
                "temperature {} is not a non-negative number",
                self.temperature
            )));
        }
        Ok(())
    }

    fn cached(&self) -> CachedRequest {
        CachedRequest::Chat {
            model_ref: self.model_ref.clone(),
            system_prompt: self.system_prompt.clone(),
            user_prompt: self.user_prompt.clone(),
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Live,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub text: String,
    pub provenance: Provenance,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationRecord {
    pub source_text: String,
    pub source_lang: Lang,
    pub target_lang: Lang,
    pub translated_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderMode {
    Live,
    Record,
    Replay,
}

impl FromStr for ProviderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(ProviderMode::Live),
            "record" => Ok(ProviderMode::Record),
            "replay" => Ok(ProviderMode::Replay),
            other => Err(format!("unknown provider mode {other:?}")),
        }
    }
}

impl fmt::Display for ProviderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderMode::Live => "live",
            ProviderMode::Record => "record",
            ProviderMode::Replay => "replay",
        })
    }
}

/// Failure reported by a transport for a single attempt.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("transport failure: {0}")]
    Transient(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    /// Not worth retrying (bad credentials, malformed request, ...).
    #[error("request rejected: {0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("no cached response for fingerprint {0} (replay mode)")]
    ReplayMiss(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: TransportError },
    #[error(transparent)]
    Rejected(TransportError),
    #[error("cache store: {0}")]
    Cache(String),
    #[error("{0} mode requires a cache directory")]
    NoStore(ProviderMode),
}

/// A chat-completion backend. One call is one attempt; retries live in
/// [`Provider`].
pub trait ChatTransport: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<String, TransportError>;
}

/// A machine-translation backend.
pub trait TranslateTransport: Send + Sync {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String, TransportError>;
}

/// Transport used when no live backend is configured.
#[derive(Debug, Default, Clone, Copy)]
pub struct Unconfigured;

impl ChatTransport for Unconfigured {
    fn complete(&self, _: &ChatRequest) -> Result<String, TransportError> {
        Err(TransportError::Fatal("no chat endpoint configured".into()))
    }
}

impl TranslateTransport for Unconfigured {
    fn translate(&self, _: &str, _: Lang, _: Lang) -> Result<String, TransportError> {
        Err(TransportError::Fatal("no translation endpoint configured".into()))
    }
}

/// Exponential backoff: after the first failed attempt wait `base_delay`,
/// then twice that, and so on, for at most `max_retries` retries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        // 1s, 2s, 4s
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_secs(1),
        }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy {
            max_retries: 0,
            base_delay: Duration::ZERO,
        }
    }

    pub fn delay(&self, retry: u32) -> Duration {
        self.base_delay.saturating_mul(1u32 << retry.min(16))
    }

    fn run<T>(&self, mut attempt: impl FnMut() -> Result<T, TransportError>) -> Result<T, ProviderError> {
        let mut retry = 0;
        loop {
            match attempt() {
                Ok(v) => return Ok(v),
                Err(TransportError::Fatal(m)) => {
                    return Err(ProviderError::Rejected(TransportError::Fatal(m)))
                }
                Err(e) if retry >= self.max_retries => {
                    return Err(ProviderError::Exhausted {
                        attempts: retry + 1,
                        last: e,
                    })
                }
                Err(e) => {
                    log::warn!("{e}; retrying in {:?}", self.delay(retry));
                    std::thread::sleep(self.delay(retry));
                    retry += 1;
                }
            }
        }
    }
}

/// Chat and translation entry point shared by all pipeline workers.
pub struct Provider {
    mode: ProviderMode,
    store: Option<CacheStore>,
    chat: Arc<dyn ChatTransport>,
    translator: Arc<dyn TranslateTransport>,
    retry: RetryPolicy,
}

impl fmt::Debug for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Provider")
            .field("mode", &self.mode)
            .field("store", &self.store.as_ref().map(CacheStore::root))
            .field("retry", &self.retry)
            .finish_non_exhaustive()
    }
}

impl Provider {
    pub fn new(
        mode: ProviderMode,
        store: Option<CacheStore>,
        chat: Arc<dyn ChatTransport>,
        translator: Arc<dyn TranslateTransport>,
    ) -> Result<Self, ProviderError> {
        if mode != ProviderMode::Live && store.is_none() {
            return Err(ProviderError::NoStore(mode));
        }
        Ok(Provider {
            mode,
            store,
            chat,
            translator,
            retry: RetryPolicy::default(),
        })
    }

    /// Replay-only provider: live transports are unconfigured.
    pub fn replay(store: CacheStore) -> Self {
        Provider {
            mode: ProviderMode::Replay,
            store: Some(store),
            chat: Arc::new(Unconfigured),
            translator: Arc::new(Unconfigured),
            retry: RetryPolicy::default(),
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn mode(&self) -> ProviderMode {
        self.mode
    }

    pub fn store(&self) -> Option<&CacheStore> {
        self.store.as_ref()
    }

    fn cached(&self, fp: &str) -> Result<String, ProviderError> {
        let store = self.store.as_ref().ok_or(ProviderError::NoStore(self.mode))?;
        store
            .get(fp)?
            .map(|r| r.response.text)
            .ok_or_else(|| ProviderError::ReplayMiss(fp.to_string()))
    }

    pub fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, ProviderError> {
        req.validate()?;
        let fp = fingerprint(req);
        if self.mode == ProviderMode::Replay {
            return Ok(ChatResponse {
                text: self.cached(&fp)?,
                provenance: Provenance::Replay,
                fingerprint: fp,
            });
        }
        let text = self.retry.run(|| self.chat.complete(req))?;
        if self.mode == ProviderMode::Record {
            if let Some(store) = &self.store {
                store.put(&fp, req.cached(), &text)?;
            }
        }
        Ok(ChatResponse {
            text,
            provenance: Provenance::Live,
            fingerprint: fp,
        })
    }

    /// Translates `text`. Identical languages short-circuit without touching
    /// the cache or the backend.
    pub fn translate(
        &self,
        text: &str,
        source: Lang,
        target: Lang,
    ) -> Result<TranslationRecord, ProviderError> {
        let record = |translated_text: String| TranslationRecord {
            source_text: text.to_string(),
            source_lang: source,
            target_lang: target,
            translated_text,
        };
        if source == target {
            return Ok(record(text.to_string()));
        }
        let fp = translation_fingerprint(text, source, target);
        if self.mode == ProviderMode::Replay {
            return self.cached(&fp).map(record);
        }
        let translated = self.retry.run(|| self.translator.translate(text, source, target))?;
        if self.mode == ProviderMode::Record {
            if let Some(store) = &self.store {
                let req = CachedRequest::Translation {
                    text: text.to_string(),
                    source_lang: source.code().to_string(),
                    target_lang: target.code().to_string(),
                };
                store.put(&fp, req, &translated)?;
            }
        }
        Ok(record(translated))
    }
}
