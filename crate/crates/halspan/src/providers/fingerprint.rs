use halspan_core::Lang;
use sha2::{Digest, Sha256};

use super::ChatRequest;

fn field(h: &mut Sha256, bytes: &[u8]) {
    h.update((bytes.len() as u64).to_le_bytes());
    h.update(bytes);
}

/// SHA-256 over a length-prefixed encoding of every request field. Stable
/// across platforms: integers are little-endian and the temperature is
/// hashed by its IEEE-754 bit pattern.
pub fn fingerprint(req: &ChatRequest) -> String {
    let mut h = Sha256::new();
    field(&mut h, b"halspan/chat/v1");
    field(&mut h, req.model_ref.as_bytes());
    field(&mut h, req.system_prompt.as_bytes());
    field(&mut h, req.user_prompt.as_bytes());
    h.update(req.temperature.to_bits().to_le_bytes());
    h.update(req.max_tokens.to_le_bytes());
    hex::encode(h.finalize())
}

/// Cache key of a translation request.
pub fn translation_fingerprint(text: &str, source: Lang, target: Lang) -> String {
    let mut h = Sha256::new();
    field(&mut h, b"halspan/translate/v1");
    field(&mut h, text.as_bytes());
    field(&mut h, source.code().as_bytes());
    field(&mut h, target.code().as_bytes());
    hex::encode(h.finalize())
}
