//! JSON-lines files: corpora, submissions and the audit log.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use halspan_core::{HardSpan, Instance, Lang, Prediction, SoftSpan};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Corpus line as found on disk. `id` may be a string or a number and
/// `lang` is matched case-insensitively; unknown fields are ignored.
#[derive(Deserialize)]
struct RawInstance {
    id: serde_json::Value,
    lang: String,
    model_input: String,
    model_output_text: String,
    #[serde(default)]
    model_id: Option<String>,
    #[serde(default)]
    soft_labels: Option<Vec<SoftSpan>>,
    #[serde(default)]
    hard_labels: Option<Vec<HardSpan>>,
}

fn id_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Non-blank lines of `path`, numbered from 1.
fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

/// Loads and validates a corpus. With `require_gold`, every instance must
/// carry soft labels.
pub fn load_corpus(path: impl AsRef<Path>, require_gold: bool) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line_no, line) in lines(path)? {
        let json_err = |source| Error::Json {
            path: path.to_path_buf(),
            line: line_no,
            source,
        };
        let raw: RawInstance = serde_json::from_str(&line).map_err(json_err)?;
        let id = id_string(&raw.id).ok_or_else(|| {
            json_err(serde::de::Error::custom("`id` must be a string or a number"))
        })?;
        let lang: Lang = raw.lang.parse().map_err(|_| Error::UnknownLang {
            path: path.to_path_buf(),
            line: line_no,
            code: raw.lang.clone(),
        })?;
        let inst = Instance {
            id,
            lang,
            model_input: raw.model_input,
            model_output_text: raw.model_output_text,
            model_id: raw.model_id,
            gold_soft: raw.soft_labels,
            gold_hard: raw.hard_labels,
        };
        let invalid = |source| Error::Invalid {
            path: path.to_path_buf(),
            line: line_no,
            source,
        };
        inst.validate().map_err(invalid)?;
        if require_gold && !inst.has_gold() {
            return Err(invalid(halspan_core::CorpusError::MissingGold { id: inst.id }));
        }
        if !seen.insert(inst.id.clone()) {
            return Err(Error::DuplicateId {
                path: path.to_path_buf(),
                line: line_no,
                id: inst.id,
            });
        }
        out.push(inst);
    }
    Ok(out)
}

fn write_lines<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus(path: impl AsRef<Path>, corpus: &[Instance]) -> Result<()> {
    write_lines(path.as_ref(), corpus)
}

/// Writes predictions as submission lines `{id, hard_labels, soft_labels}`.
pub fn write_submission(path: impl AsRef<Path>, preds: &[Prediction]) -> Result<()> {
    write_lines(path.as_ref(), preds)
}

pub fn load_submission(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    lines(path)?
        .into_iter()
        .map(|(line, text)| {
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line,
                source,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    /// An extracted span string occurs nowhere in the output text.
    UnmatchedSpan,
    /// The detector answered twice without the protocol sentence.
    MissingMarker,
    /// The instance could not be processed; a mark-none prediction was written.
    InstanceFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub id: String,
    pub strategy: String,
    pub kind: AuditKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

pub fn write_audit(path: impl AsRef<Path>, entries: &[AuditEntry]) -> Result<()> {
    write_lines(path.as_ref(), entries)
}

pub fn load_audit(path: impl AsRef<Path>) -> Result<Vec<AuditEntry>> {
    let path = path.as_ref();
    lines(path)?
        .into_iter()
        .map(|(line, text)| {
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                line,
                source,
            })
        })
        .collect()
}
