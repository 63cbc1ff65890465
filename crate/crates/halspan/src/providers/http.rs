//! Live HTTP transports.
//!
//! Chat uses the OpenAI-style `POST {base}/chat/completions` shape, which
//! most gateways (including Bedrock proxies) accept. Translation posts
//! `{q, source, target, format}` to the configured URL and understands both
//! LibreTranslate (`translatedText`) and Google v2 (`data.translations`)
//! response bodies. Credentials come from environment variables.

use std::time::Duration;

use halspan_core::Lang;
use serde_json::{json, Value};

use super::{ChatRequest, ChatTransport, TranslateTransport, TransportError};

pub const CHAT_KEY_ENV: &str = "HALSPAN_CHAT_API_KEY";
pub const TRANSLATE_KEY_ENV: &str = "HALSPAN_TRANSLATE_API_KEY";

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn classify(status: u16, body: &str) -> TransportError {
    let msg = format!("HTTP {status}: {}", body.chars().take(300).collect::<String>());
    match status {
        429 => TransportError::RateLimited(msg),
        500..=599 | 408 => TransportError::Transient(msg),
        _ => TransportError::Fatal(msg),
    }
}

fn post_json(agent: &ureq::Agent, url: &str, key: Option<&str>, body: &Value) -> Result<Value, TransportError> {
    let mut req = agent.post(url);
    if let Some(k) = key {
        req = req.header("Authorization", &format!("Bearer {k}"));
    }
    let mut resp = req
        .send_json(body)
        .map_err(|e| TransportError::Transient(e.to_string()))?;
    let status = resp.status().as_u16();
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| TransportError::Transient(e.to_string()))?;
    if !(200..300).contains(&status) {
        return Err(classify(status, &text));
    }
    serde_json::from_str(&text).map_err(|e| TransportError::Fatal(format!("bad response body: {e}")))
}

pub struct HttpChat {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpChat {
    pub fn new(base_url: &str, api_key: Option<String>) -> Self {
        HttpChat {
            agent: agent(Duration::from_secs(300)),
            url: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
        }
    }

    pub fn from_env(base_url: &str) -> Self {
        Self::new(base_url, std::env::var(CHAT_KEY_ENV).ok())
    }
}

pub(crate) fn chat_body(req: &ChatRequest) -> Value {
    json!({
        "model": req.model_ref,
        "messages": [
            {"role": "system", "content": req.system_prompt},
            {"role": "user", "content": req.user_prompt},
        ],
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    })
}

pub(crate) fn chat_text(v: &Value) -> Option<String> {
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
}

impl ChatTransport for HttpChat {
    fn complete(&self, req: &ChatRequest) -> Result<String, TransportError> {
        let v = post_json(&self.agent, &self.url, self.api_key.as_deref(), &chat_body(req))?;
        chat_text(&v).ok_or_else(|| TransportError::Fatal("response has no choices[0].message.content".into()))
    }
}

pub struct HttpTranslator {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
}

impl HttpTranslator {
    pub fn new(url: &str, api_key: Option<String>) -> Self {
        HttpTranslator {
            agent: agent(Duration::from_secs(60)),
            url: url.to_string(),
            api_key,
        }
    }

    pub fn from_env(url: &str) -> Self {
        Self::new(url, std::env::var(TRANSLATE_KEY_ENV).ok())
    }
}

pub(crate) fn translated_text(v: &Value) -> Option<String> {
    v.get("translatedText")
        .or_else(|| v.pointer("/data/translations/0/translatedText"))
        .and_then(Value::as_str)
        .map(str::to_string)
}

impl TranslateTransport for HttpTranslator {
    fn translate(&self, text: &str, source: Lang, target: Lang) -> Result<String, TransportError> {
        let body = json!({"q": text, "source": source.code(), "target": target.code(), "format": "text"});
        let v = post_json(&self.agent, &self.url, self.api_key.as_deref(), &body)?;
        translated_text(&v).ok_or_else(|| TransportError::Fatal("response has no translatedText".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chat_wire_format() {
        let req = ChatRequest {
            model_ref: "meta.llama3-1-405b-instruct-v1:0".into(),
            system_prompt: "s".into(),
            user_prompt: "u".into(),
            temperature: 0.0,
            max_tokens: 7,
        };
        let body = chat_body(&req);
        assert_eq!(body["model"], "meta.llama3-1-405b-instruct-v1:0");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "u");
        assert_eq!(body["max_tokens"], 7);
        let resp = json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]});
        assert_eq!(chat_text(&resp).as_deref(), Some("hi"));
        assert_eq!(chat_text(&json!({"choices": []})), None);
    }

    #[test]
    fn translation_response_shapes() {
        assert_eq!(translated_text(&json!({"translatedText": "Where?"})).as_deref(), Some("Where?"));
        assert_eq!(
            translated_text(&json!({"data": {"translations": [{"translatedText": "Where?"}]}})).as_deref(),
            Some("Where?")
        );
        assert_eq!(translated_text(&json!({})), None);
    }

    #[test]
    fn status_classification() {
        assert!(matches!(classify(429, ""), TransportError::RateLimited(_)));
        assert!(matches!(classify(503, ""), TransportError::Transient(_)));
        assert!(matches!(classify(401, ""), TransportError::Fatal(_)));
    }

    #[test]
    fn unreachable_endpoint_is_transient() {
        let chat = HttpChat::new("http://127.0.0.1:9", None);
        let req = ChatRequest {
            model_ref: "m".into(),
            system_prompt: "s".into(),
            user_prompt: "u".into(),
            temperature: 0.0,
            max_tokens: 1,
        };
        assert!(matches!(chat.complete(&req), Err(TransportError::Transient(_))));
    }
}
