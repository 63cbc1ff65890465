//! Mapping extracted span strings back onto character ranges of the output.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::{is_nfc_quick, IsNormalized, UnicodeNormalization};

use crate::span::{canonicalize, char_byte_offsets, HardSpan};

/// Aligned ranges in canonical form plus the span strings that matched nowhere.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignedSpans {
    pub ranges: Vec<HardSpan>,
    pub unmatched: Vec<String>,
}

/// Start character index of every (possibly overlapping) occurrence of
/// `needle` in `hay`, both given as char slices.
fn occurrences(hay: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    hay.windows(needle.len())
        .enumerate()
        .filter(|(_, w)| *w == needle)
        .map(|(i, _)| i)
        .collect()
}

/// Chunks of `text` delimited at NFC-safe boundaries, as char-index ranges.
/// A boundary is safe before a starter that cannot compose with what
/// precedes it, so normalizing chunk by chunk equals normalizing the whole.
fn nfc_chunks(chars: &[char]) -> Vec<(usize, usize)> {
    let mut chunks: Vec<(usize, usize)> = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        let boundary = i == 0
            || (unicode_normalization::char::canonical_combining_class(c) == 0
                && is_nfc_quick(core::iter::once(c)) == IsNormalized::Yes);
        match chunks.last_mut() {
            Some(last) if !boundary => last.1 = i + 1,
            _ => chunks.push((i, i + 1)),
        }
    }
    chunks
}

fn nfc_eq(a: &str, b: &str) -> bool {
    a.nfc().eq(b.nfc())
}

/// Every character range of `output_text` where `span` occurs verbatim. When
/// there is none, matching is retried on NFC-normalized forms and any hit is
/// mapped back to the original text's character indices.
pub fn align_span(output_text: &str, span: &str) -> Vec<HardSpan> {
    if span.is_empty() {
        return Vec::new();
    }
    let hay: Vec<char> = output_text.chars().collect();
    let needle: Vec<char> = span.chars().collect();
    let exact: Vec<HardSpan> = occurrences(&hay, &needle)
        .into_iter()
        .map(|s| HardSpan::new(s, s + needle.len()))
        .collect();
    if !exact.is_empty() {
        return exact;
    }
    align_nfc(output_text, &hay, span)
}

fn align_nfc(output_text: &str, hay: &[char], span: &str) -> Vec<HardSpan> {
    let needle: Vec<char> = span.nfc().collect();
    if needle.is_empty() {
        return Vec::new();
    }
    // normalized text, plus for every normalized char the index of the
    // original chunk it came from
    let chunks = nfc_chunks(hay);
    let mut norm: Vec<char> = Vec::with_capacity(hay.len());
    let mut owner: Vec<usize> = Vec::with_capacity(hay.len());
    for (k, &(s, e)) in chunks.iter().enumerate() {
        for c in hay[s..e].iter().copied().nfc() {
            norm.push(c);
            owner.push(k);
        }
    }
    let bytes = char_byte_offsets(output_text);
    let mut out = Vec::new();
    for start in occurrences(&norm, &needle) {
        let first = chunks[owner[start]];
        let last = chunks[owner[start + needle.len() - 1]];
        let found = narrowest_match(output_text, &bytes, first, last, span);
        if let Some(candidate) = found.filter(|c| out.last() != Some(c)) {
            out.push(candidate);
        }
    }
    out
}

/// A range starting in chunk `first` and ending in chunk `last` whose text is
/// NFC-equal to `span`; whole chunks are tried first. A span that starts or
/// ends with a combining mark only matches part of a chunk.
fn narrowest_match(
    text: &str,
    bytes: &[usize],
    first: (usize, usize),
    last: (usize, usize),
    span: &str,
) -> Option<HardSpan> {
    for a in first.0..first.1 {
        for b in (last.0 + 1..=last.1).rev() {
            if b > a && nfc_eq(&text[bytes[a]..bytes[b]], span) {
                return Some(HardSpan::new(a, b));
            }
        }
    }
    None
}

/// Union of [`align_span`] over `spans`, canonicalized. Strings that align
/// nowhere are listed once each in `unmatched`, in first-seen order.
pub fn align_all<S: AsRef<str>>(output_text: &str, spans: &[S]) -> AlignedSpans {
    let mut ranges = Vec::new();
    let mut unmatched: Vec<String> = Vec::new();
    for s in spans {
        let s = s.as_ref();
        let found = align_span(output_text, s);
        if found.is_empty() {
            if !unmatched.iter().any(|u| u == s) {
                unmatched.push(String::from(s));
            }
        } else {
            ranges.extend(found);
        }
    }
    AlignedSpans {
        ranges: canonicalize(ranges),
        unmatched,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::{char_slice, is_canonical};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn hs(s: usize, e: usize) -> HardSpan {
        HardSpan::new(s, e)
    }

    /// Brute-force oracle: compare every window of the right length.
    fn oracle(text: &str, span: &str) -> Vec<HardSpan> {
        let n = text.chars().count();
        let m = span.chars().count();
        (0..=n.saturating_sub(m))
            .filter(|&i| m > 0 && i + m <= n && char_slice(text, i, i + m) == Some(span))
            .map(|i| hs(i, i + m))
            .collect()
    }

    #[test]
    fn finds_single_occurrence() {
        let text = "The Olympic Games of 2004 took place in Florida.";
        assert_eq!(align_span(text, "Florida"), vec![hs(40, 47)]);
        assert_eq!(oracle(text, "Florida"), vec![hs(40, 47)]);
    }

    #[test]
    fn finds_every_occurrence() {
        assert_eq!(align_span("aba aba", "aba"), vec![hs(0, 3), hs(4, 7)]);
        assert_eq!(align_span("aaa", "aa"), vec![hs(0, 2), hs(1, 3)]);
    }

    #[test]
    fn absent_or_empty_span() {
        assert!(align_span("anything at all", "Athens").is_empty());
        assert!(align_span("anything", "").is_empty());
        assert!(align_span("", "x").is_empty());
    }

    #[test]
    fn case_sensitive() {
        assert!(align_span("consecrated on 10 July 1935", "10 JUly 1935").is_empty());
    }

    #[test]
    fn cjk_offsets_are_scalar_indices() {
        let text = "新缬草原产于欧洲，特别是地中海沿岸地区";
        assert_eq!(align_span(text, "原产于欧洲"), vec![hs(3, 8)]);
    }

    #[test]
    fn nfc_fallback_maps_to_original_indices() {
        // decomposed "é" in the output, precomposed in the span
        let text = "Cafe\u{301} de Flore";
        let got = align_span(text, "Caf\u{e9}");
        assert_eq!(got, vec![hs(0, 5)]);
        // and the other way round
        let text = "Caf\u{e9} de Flore, caf\u{e9}";
        assert_eq!(align_span(text, "cafe\u{301}"), vec![hs(15, 19)]);
    }

    #[test]
    fn nfc_fallback_rejects_partial_cluster() {
        // "e" alone must not match inside a decomposed "é" after NFC
        assert!(align_span("Cafe\u{301}", "Cafe").len() == 1);
        assert!(align_span("Caf\u{e9}", "Cafe").is_empty());
    }

    #[test]
    fn nfc_fallback_with_leading_combining_mark() {
        // the caron attaches to nothing; the match starts inside a chunk
        let text = "x \u{30c}A\u{30a}b";
        assert_eq!(align_span(text, "\u{30c}\u{c5}b"), vec![hs(2, 6)]);
        assert_eq!(align_span(text, "\u{30c}\u{212b}"), vec![hs(2, 5)]);
    }

    #[test]
    fn align_all_unions_and_records_misses() {
        let text = "The Olympic Games of 2004 took place in Florida.";
        let got = align_all(text, &["Florida"]);
        assert_eq!(got.ranges, vec![hs(40, 47)]);
        assert!(got.unmatched.is_empty());
        assert_eq!(align_all(text, &["Florida", "Florida"]), got);
        let none: [&str; 0] = [];
        assert_eq!(align_all(text, &none), AlignedSpans::default());
        let got = align_all(text, &["Athens", "2004", "Athens"]);
        assert_eq!(got.ranges, vec![hs(21, 25)]);
        assert_eq!(got.unmatched, vec!["Athens".to_string()]);
    }

    #[test]
    fn align_all_merges_touching_ranges() {
        let got = align_all("New York City", &["New York", " City"]);
        assert_eq!(got.ranges, vec![hs(0, 13)]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(text in "[ab ]{0,30}", span in "[ab]{1,4}") {
            prop_assert_eq!(align_span(&text, &span), oracle(&text, &span));
        }

        #[test]
        fn ranges_relocate_span(text in "\\PC{0,60}", a in 0usize..60, len in 1usize..8) {
            let n = text.chars().count();
            prop_assume!(a < n);
            let b = (a + len).min(n);
            let span = char_slice(&text, a, b).unwrap().to_string();
            let got = align_span(&text, &span);
            prop_assert!(got.contains(&hs(a, b)));
            for r in got {
                let at = char_slice(&text, r.start, r.end).unwrap();
                prop_assert!(at == span || nfc_eq(at, &span));
            }
        }

        #[test]
        fn align_all_ignores_order_and_duplicates(
            text in "[abc ]{0,30}",
            spans in proptest::collection::vec("[abc]{1,3}", 0..5),
        ) {
            let base = align_all(&text, &spans);
            prop_assert!(is_canonical(&base.ranges));
            let mut rev = spans.clone();
            rev.reverse();
            rev.extend(spans.iter().cloned());
            prop_assert_eq!(align_all(&text, &rev).ranges, base.ranges);
        }
    }
}
