//! Character-offset spans and the interval algebra shared by every module.

use alloc::vec::Vec;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of Unicode scalar values in `text`. This is the unit of every
/// offset in the crate.
pub fn char_length(text: &str) -> usize {
    text.chars().count()
}

/// A half-open character range `[start, end)` marked as hallucinated.
///
/// Serialized as a two-element array `[start, end]`, the submission format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HardSpan {
    pub start: usize,
    pub end: usize,
}

impl HardSpan {
    pub const fn new(start: usize, end: usize) -> Self {
        HardSpan { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub const fn contains(&self, i: usize) -> bool {
        self.start <= i && i < self.end
    }

    pub const fn within(&self, char_len: usize) -> bool {
        self.start < self.end && self.end <= char_len
    }
}

impl Serialize for HardSpan {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.start)?;
        t.serialize_element(&self.end)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for HardSpan {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairVisitor;

        impl<'de> Visitor<'de> for PairVisitor {
            type Value = HardSpan;

            fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str("a [start, end] pair")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<HardSpan, A::Error> {
                let start = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let end = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(HardSpan { start, end })
            }
        }

        deserializer.deserialize_tuple(2, PairVisitor)
    }
}

/// A character range together with the probability that it is hallucinated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftSpan {
    pub start: usize,
    pub end: usize,
    pub prob: f64,
}

impl SoftSpan {
    pub const fn new(start: usize, end: usize, prob: f64) -> Self {
        SoftSpan { start, end, prob }
    }

    pub const fn range(&self) -> HardSpan {
        HardSpan::new(self.start, self.end)
    }
}

/// Sorts and merges `spans` into the canonical form: disjoint, ascending,
/// and with no two ranges touching. Empty ranges are dropped.
pub fn canonicalize(mut spans: Vec<HardSpan>) -> Vec<HardSpan> {
    spans.retain(|s| !s.is_empty());
    spans.sort_unstable();
    let mut out: Vec<HardSpan> = Vec::with_capacity(spans.len());
    for s in spans {
        match out.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max(s.end),
            _ => out.push(s),
        }
    }
    out
}

/// True when `spans` is already canonical.
pub fn is_canonical(spans: &[HardSpan]) -> bool {
    spans.iter().all(|s| !s.is_empty()) && spans.windows(2).all(|w| w[0].end < w[1].start)
}

/// Hard labels from soft labels: the maximal ranges of characters covered by
/// at least one soft span whose probability is strictly greater than 0.5.
pub fn derive_hard_labels(soft: &[SoftSpan]) -> Vec<HardSpan> {
    canonicalize(
        soft.iter()
            .filter(|s| s.prob > 0.5)
            .map(SoftSpan::range)
            .collect(),
    )
}

/// Total number of characters covered by a canonical span list.
pub fn covered(spans: &[HardSpan]) -> usize {
    spans.iter().map(HardSpan::len).sum()
}

/// Number of characters covered by both canonical lists.
pub fn intersection_len(a: &[HardSpan], b: &[HardSpan]) -> usize {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].start.max(b[j].start);
        let hi = a[i].end.min(b[j].end);
        if lo < hi {
            total += hi - lo;
        }
        if a[i].end < b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

/// Byte offset of every character boundary in `text`, including the final
/// one, so `offsets[i]..offsets[j]` slices characters `i..j`.
pub fn char_byte_offsets(text: &str) -> Vec<usize> {
    let mut offsets: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    offsets.push(text.len());
    offsets
}

/// Characters `start..end` of `text`. Returns `None` when out of range.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut it = text.char_indices().map(|(b, _)| b).chain(core::iter::once(text.len()));
    let b0 = it.nth(start)?;
    let b1 = if end == start { b0 } else { it.nth(end - start - 1)? };
    Some(&text[b0..b1])
}
