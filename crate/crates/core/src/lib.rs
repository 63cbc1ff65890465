//! Core algorithms for character-level hallucination span detection.
//!
//! Everything here is pure and allocation-only: span algebra over Unicode
//! scalar offsets, corpus validation, prompt assembly from bundled template
//! resources, parsing of detector responses, string-to-offset alignment,
//! vote-ratio ensembling and the IoU / rank-correlation metrics.
//!
//! All character offsets in this crate count Unicode scalar values (Rust
//! `char`s), never bytes or grapheme clusters.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod alignment;
pub mod corpus;
pub mod ensemble;
pub mod extraction;
pub mod lang;
pub mod metrics;
pub mod prompting;
pub mod span;
mod templates;

pub use alignment::{align_all, align_span, AlignedSpans};
pub use corpus::{CorpusError, Instance};
pub use ensemble::{combine, EnsembleError, Prediction};
pub use extraction::{extract_spans, ExtractionResult, MARKER};
pub use lang::Lang;
pub use metrics::{
    baseline, corr, evaluate, gold_char_probs, iou, Baseline, EvalReport, InstanceScore,
    MetricsError, ScoreSummary,
};
pub use prompting::{
    build_hypothesis_prompt, build_system_prompt, build_user_prompt, HypothesisMode, PromptBundle,
    PromptError, PromptMode, StrategyConfig, TranslationMode, TranslationPair,
};
pub use span::{char_length, derive_hard_labels, HardSpan, SoftSpan};
