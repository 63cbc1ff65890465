//! Vote-ratio ensembling of several detector runs.
//!
//! Each component contributes a set of character ranges. A character's
//! probability is the fraction of components that marked it, so with three
//! components the only possible values are 0, 1/3, 2/3 and 1.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::span::{derive_hard_labels, HardSpan, SoftSpan};

/// Detector output for one instance, in submission form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(rename = "id")]
    pub instance_id: String,
    #[serde(rename = "hard_labels")]
    pub hard: Vec<HardSpan>,
    #[serde(rename = "soft_labels")]
    pub soft: Vec<SoftSpan>,
    /// Per-character vote counts. Not part of the submission format.
    #[serde(skip)]
    pub votes: Vec<u32>,
    /// Number of components that voted.
    #[serde(skip)]
    pub components: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnsembleError {
    NoComponents,
    RangeOutOfBounds {
        component: usize,
        range: HardSpan,
        char_len: usize,
    },
}

impl fmt::Display for EnsembleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleError::NoComponents => f.write_str("at least one component is required"),
            EnsembleError::RangeOutOfBounds { component, range, char_len } => write!(
                f,
                "component {component}: range [{}, {}) outside output of {char_len} characters",
                range.start, range.end
            ),
        }
    }
}

impl core::error::Error for EnsembleError {}

/// Combines the ranges marked by each component into per-character votes,
/// soft spans (maximal runs of equal non-zero probability) and hard spans
/// (probability strictly above one half).
///
/// Overlapping ranges within one component count once.
pub fn combine(
    instance_id: impl Into<String>,
    char_len: usize,
    component_ranges: &[Vec<HardSpan>],
) -> Result<Prediction, EnsembleError> {
    if component_ranges.is_empty() {
        return Err(EnsembleError::NoComponents);
    }
    let k = component_ranges.len();
    let mut votes = vec![0u32; char_len];
    let mut marked = vec![false; char_len];
    for (c, ranges) in component_ranges.iter().enumerate() {
        marked.iter_mut().for_each(|m| *m = false);
        for r in ranges {
            if !r.within(char_len) {
                return Err(EnsembleError::RangeOutOfBounds {
                    component: c,
                    range: *r,
                    char_len,
                });
            }
            marked[r.start..r.end].iter_mut().for_each(|m| *m = true);
        }
        for (v, &m) in votes.iter_mut().zip(&marked) {
            *v += u32::from(m);
        }
    }
    let k = k as u32;
    let soft = soft_spans_from_votes(&votes, k);
    let hard = derive_hard_labels(&soft);
    Ok(Prediction {
        instance_id: instance_id.into(),
        hard,
        soft,
        votes,
        components: k,
    })
}

fn soft_spans_from_votes(votes: &[u32], k: u32) -> Vec<SoftSpan> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < votes.len() {
        let v = votes[i];
        let mut j = i + 1;
        while j < votes.len() && votes[j] == v {
            j += 1;
        }
        if v > 0 {
            out.push(SoftSpan::new(i, j, f64::from(v) / f64::from(k)));
        }
        i = j;
    }
    out
}

impl Prediction {
    /// Per-character probability vector of length `char_len`, expanded from
    /// the soft spans. Where spans overlap the maximum wins.
    pub fn char_probs(&self, char_len: usize) -> Vec<f64> {
        let mut probs = vec![0.0f64; char_len];
        for s in &self.soft {
            let end = s.end.min(char_len);
            for p in probs.iter_mut().take(end).skip(s.start) {
                if s.prob > *p {
                    *p = s.prob;
                }
            }
        }
        probs
    }

    /// A prediction with nothing marked.
    pub fn empty(instance_id: impl Into<String>, char_len: usize) -> Self {
        Prediction {
            instance_id: instance_id.into(),
            hard: Vec::new(),
            soft: Vec::new(),
            votes: vec![0; char_len],
            components: 1,
        }
    }
}
