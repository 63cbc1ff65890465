//! Parsing of detector answers.
//!
//! A detector ends its answer with the protocol sentence followed by the
//! hallucinated parts in double quotes, e.g.
//! `So the hallucinations are: "saint George","73","10 JUly 1935".`

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// The protocol sentence every detector answer must end with.
pub const MARKER: &str = "So the hallucinations are:";

/// Marker text matched in answers, ASCII case-insensitively. The colon is
/// optional because models drop or quote it.
const MARKER_PHRASE: &str = "so the hallucinations are";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtractionResult {
    pub spans: Vec<String>,
    pub had_marker: bool,
    /// Everything after the last marker, kept for auditing unquoted answers.
    pub trailing_text: String,
}

/// Characters treated as a double quote when pairing. CJK corner brackets are
/// included because Chinese answers frequently quote with them.
pub fn is_double_quote(c: char) -> bool {
    matches!(
        c,
        '"' | '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{300C}' | '\u{300D}' | '\u{FF02}'
    )
}

fn rfind_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let (h, n) = (haystack.as_bytes(), needle.as_bytes());
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len())
        .rev()
        .find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Extracts the quoted spans following the last protocol marker in `response`.
pub fn extract_spans(response: &str) -> ExtractionResult {
    let Some(pos) = rfind_ascii_ci(response, MARKER_PHRASE) else {
        return ExtractionResult::default();
    };
    // the phrase is ASCII, so this is a char boundary
    let mut tail = &response[pos + MARKER_PHRASE.len()..];
    // tolerate `:`, `':`, `:'`, `’:` and similar decorations around the colon
    let decorated = tail.trim_start_matches([' ', '\'', '\u{2019}']);
    if let Some(rest) = decorated.strip_prefix(':') {
        tail = rest.trim_start_matches(['\'', '\u{2019}']);
    }

    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, c) in tail.char_indices() {
        if !is_double_quote(c) {
            continue;
        }
        match open.take() {
            None => open = Some(i + c.len_utf8()),
            Some(start) => {
                let s = tail[start..i].trim();
                if !s.is_empty() {
                    spans.push(s.to_string());
                }
            }
        }
    }

    ExtractionResult {
        spans,
        had_marker: true,
        trailing_text: tail.to_string(),
    }
}

/// The protocol sentence listing `spans`, in the shape detectors are asked
/// to produce.
pub fn render_protocol(spans: &[String]) -> String {
    let mut out = String::from(MARKER);
    out.push(' ');
    for (i, s) in spans.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('"');
        out.push_str(s);
        out.push('"');
    }
    out
}
