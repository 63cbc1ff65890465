//! Corpus instances and the invariants every loaded instance satisfies.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::Lang;
use crate::span::{char_length, derive_hard_labels, HardSpan, SoftSpan};

/// One corpus item: the prompt a model was given, the text it produced, and
/// optionally the annotators' labels over that text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub lang: Lang,
    pub model_input: String,
    pub model_output_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, rename = "soft_labels", skip_serializing_if = "Option::is_none")]
    pub gold_soft: Option<Vec<SoftSpan>>,
    #[serde(default, rename = "hard_labels", skip_serializing_if = "Option::is_none")]
    pub gold_hard: Option<Vec<HardSpan>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusError {
    SpanOutOfBounds {
        id: String,
        start: usize,
        end: usize,
        char_len: usize,
    },
    InvalidProbability {
        id: String,
        start: usize,
        end: usize,
        prob: f64,
    },
    MissingGold {
        id: String,
    },
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::SpanOutOfBounds { id, start, end, char_len } => write!(
                f,
                "instance {id}: span [{start}, {end}) is empty or exceeds output length {char_len}"
            ),
            CorpusError::InvalidProbability { id, start, end, prob } => write!(
                f,
                "instance {id}: soft span [{start}, {end}) has probability {prob} outside (0, 1]"
            ),
            CorpusError::MissingGold { id } => write!(f, "instance {id}: no gold soft labels"),
        }
    }
}

impl core::error::Error for CorpusError {}

impl Instance {
    pub fn char_len(&self) -> usize {
        char_length(&self.model_output_text)
    }

    pub fn has_gold(&self) -> bool {
        self.gold_soft.is_some()
    }

    /// Checks span bounds and probabilities against the output text.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let char_len = self.char_len();
        let oob = |start, end| CorpusError::SpanOutOfBounds {
            id: self.id.clone(),
            start,
            end,
            char_len,
        };
        for s in self.gold_soft.iter().flatten() {
            if !s.range().within(char_len) {
                return Err(oob(s.start, s.end));
            }
            if !(s.prob > 0.0 && s.prob <= 1.0) {
                return Err(CorpusError::InvalidProbability {
                    id: self.id.clone(),
                    start: s.start,
                    end: s.end,
                    prob: s.prob,
                });
            }
        }
        for h in self.gold_hard.iter().flatten() {
            if !h.within(char_len) {
                return Err(oob(h.start, h.end));
            }
        }
        Ok(())
    }

    /// Gold hard labels in canonical form. Falls back to deriving them from
    /// the soft labels when the corpus omits `hard_labels`.
    pub fn gold_hard_canonical(&self) -> Option<Vec<HardSpan>> {
        match (&self.gold_hard, &self.gold_soft) {
            (Some(h), _) => Some(crate::span::canonicalize(h.clone())),
            (None, Some(s)) => Some(derive_hard_labels(s)),
            (None, None) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn inst(output: &str, soft: Vec<SoftSpan>) -> Instance {
        Instance {
            id: "x1".to_string(),
            lang: Lang::En,
            model_input: "q".to_string(),
            model_output_text: output.to_string(),
            model_id: None,
            gold_hard: Some(derive_hard_labels(&soft)),
            gold_soft: Some(soft),
        }
    }

    #[test]
    fn accepts_in_bounds_gold() {
        let i = inst(
            "Mouthier is located in the department of Haute-Loire.",
            vec![SoftSpan::new(41, 52, 0.9)],
        );
        assert!(i.validate().is_ok());
        assert_eq!(i.gold_hard_canonical().unwrap(), vec![HardSpan::new(41, 52)]);
    }

    #[test]
    fn rejects_span_past_end() {
        let i = inst("short", vec![SoftSpan::new(2, 6, 0.9)]);
        let err = i.validate().unwrap_err();
        assert!(matches!(err, CorpusError::SpanOutOfBounds { end: 6, char_len: 5, .. }));
        assert!(err.to_string().contains("x1"));
    }

    #[test]
    fn rejects_zero_and_oversized_probability() {
        for p in [0.0, 1.5, f64::NAN] {
            let mut i = inst("short", vec![]);
            i.gold_soft = Some(vec![SoftSpan::new(0, 2, p)]);
            assert!(matches!(i.validate(), Err(CorpusError::InvalidProbability { .. })));
        }
    }

    #[test]
    fn offsets_count_chars_not_bytes() {
        let i = inst("新缬草原产于欧洲", vec![SoftSpan::new(3, 8, 1.0)]);
        assert!(i.validate().is_ok());
        let bad = inst("新缬草原产于欧洲", vec![SoftSpan::new(3, 9, 1.0)]);
        assert!(bad.validate().is_err());
    }
}
