//! IO, providers and orchestration around `halspan-core`.
//!
//! * [`jsonl`] reads and writes corpora, submissions and audit logs.
//! * [`providers`] wraps chat-completion and translation endpoints behind a
//!   content-addressed record/replay cache.
//! * [`pipeline`] runs detector components for one instance and ensembles
//!   them.
//! * [`runner`] implements the `detect`, `evaluate`, `grid` and `baseline`
//!   commands; [`report`] renders their outputs.

pub mod error;
pub mod jsonl;
pub mod pipeline;
pub mod providers;
pub mod report;
pub mod runner;

pub use error::{Error, Result};
pub use halspan_core as core;
