//! Character-level scoring: IoU of hard labels and Spearman correlation of
//! per-character probabilities, aggregated per language.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::ensemble::Prediction;
use crate::lang::Lang;
use crate::span::{canonicalize, covered, intersection_len, HardSpan, SoftSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricsError {
    SpanOutOfBounds { span: HardSpan, char_len: usize },
    LengthMismatch { pred: usize, gold: usize },
    MissingGold { id: String },
    UnknownId { id: String },
    DuplicatePrediction { id: String },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::SpanOutOfBounds { span, char_len } => write!(
                f,
                "span [{}, {}) outside text of {char_len} characters",
                span.start, span.end
            ),
            MetricsError::LengthMismatch { pred, gold } => {
                write!(f, "probability vectors differ in length ({pred} vs {gold})")
            }
            MetricsError::MissingGold { id } => write!(f, "instance {id} has no gold labels"),
            MetricsError::UnknownId { id } => write!(f, "prediction {id} matches no corpus instance"),
            MetricsError::DuplicatePrediction { id } => write!(f, "more than one prediction for {id}"),
        }
    }
}

impl core::error::Error for MetricsError {}

fn check_bounds(spans: &[HardSpan], char_len: usize) -> Result<(), MetricsError> {
    match spans.iter().find(|s| !s.within(char_len)) {
        Some(&span) => Err(MetricsError::SpanOutOfBounds { span, char_len }),
        None => Ok(()),
    }
}

/// Intersection over union of the character sets covered by `pred` and
/// `gold`. Two empty sets score 1.0.
pub fn iou(pred: &[HardSpan], gold: &[HardSpan], char_len: usize) -> Result<f64, MetricsError> {
    check_bounds(pred, char_len)?;
    check_bounds(gold, char_len)?;
    let p = canonicalize(pred.to_vec());
    let g = canonicalize(gold.to_vec());
    let inter = intersection_len(&p, &g);
    let union = covered(&p) + covered(&g) - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// Per-character maximum of the covering soft-span probabilities.
pub fn soft_char_probs(soft: &[SoftSpan], char_len: usize) -> Vec<f64> {
    let mut probs = vec![0.0f64; char_len];
    for s in soft {
        for p in probs.iter_mut().take(s.end.min(char_len)).skip(s.start) {
            *p = p.max(s.prob);
        }
    }
    probs
}

/// Gold probability of every output character of `inst`.
pub fn gold_char_probs(inst: &Instance) -> Result<Vec<f64>, MetricsError> {
    let soft = inst.gold_soft.as_ref().ok_or_else(|| MetricsError::MissingGold {
        id: inst.id.clone(),
    })?;
    Ok(soft_char_probs(soft, inst.char_len()))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank (i+1 + j) / 2
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Spearman rank correlation of two probability vectors.
///
/// Degenerate inputs: when both vectors are constant (including empty) the
/// result is 1.0; when exactly one is constant it is 0.0.
pub fn corr(pred: &[f64], gold: &[f64]) -> Result<f64, MetricsError> {
    if pred.len() != gold.len() {
        return Err(MetricsError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    match (is_constant(pred), is_constant(gold)) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        (false, false) => {}
    }
    let rp = average_ranks(pred);
    let rg = average_ranks(gold);
    let mean = (pred.len() as f64 + 1.0) / 2.0;
    let (mut cov, mut vp, mut vg) = (0.0, 0.0, 0.0);
    for (a, b) in rp.iter().zip(&rg) {
        let (da, db) = (a - mean, b - mean);
        cov += da * db;
        vp += da * da;
        vg += db * db;
    }
    Ok((cov / libm::sqrt(vp * vg)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub id: String,
    pub lang: Lang,
    pub iou: f64,
    pub corr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub mean_iou: f64,
    pub mean_corr: f64,
    pub n: usize,
}

impl ScoreSummary {
    fn of<'a>(scores: impl Iterator<Item = &'a InstanceScore>) -> Self {
        let (mut si, mut sc, mut n) = (0.0, 0.0, 0usize);
        for s in scores {
            si += s.iou;
            sc += s.corr;
            n += 1;
        }
        if n == 0 {
            return ScoreSummary { mean_iou: 0.0, mean_corr: 0.0, n };
        }
        ScoreSummary {
            mean_iou: si / n as f64,
            mean_corr: sc / n as f64,
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_instance: Vec<InstanceScore>,
    pub per_language: BTreeMap<Lang, ScoreSummary>,
    pub overall: ScoreSummary,
}

/// Scores one prediction against its gold instance.
pub fn score_instance(pred: &Prediction, inst: &Instance) -> Result<InstanceScore, MetricsError> {
    let gold_hard = inst.gold_hard_canonical().ok_or_else(|| MetricsError::MissingGold {
        id: inst.id.clone(),
    })?;
    let char_len = inst.char_len();
    let gold_probs = gold_char_probs(inst)?;
    check_bounds(&pred.soft.iter().map(SoftSpan::range).collect::<Vec<_>>(), char_len)?;
    Ok(InstanceScore {
        id: inst.id.clone(),
        lang: inst.lang,
        iou: iou(&pred.hard, &gold_hard, char_len)?,
        corr: corr(&pred.char_probs(char_len), &gold_probs)?,
    })
}

/// Scores every prediction against `corpus`. Per-instance scores keep the
/// order of `preds`; means are plain arithmetic means.
pub fn evaluate(preds: &[Prediction], corpus: &[Instance]) -> Result<EvalReport, MetricsError> {
    let by_id: BTreeMap<&str, &Instance> = corpus.iter().map(|i| (i.id.as_str(), i)).collect();
    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    let mut per_instance = Vec::with_capacity(preds.len());
    for p in preds {
        let inst = by_id.get(p.instance_id.as_str()).ok_or_else(|| MetricsError::UnknownId {
            id: p.instance_id.clone(),
        })?;
        if seen.insert(p.instance_id.as_str(), ()).is_some() {
            return Err(MetricsError::DuplicatePrediction {
                id: p.instance_id.clone(),
            });
        }
        per_instance.push(score_instance(p, inst)?);
    }
    let langs: BTreeMap<Lang, ()> = per_instance.iter().map(|s| (s.lang, ())).collect();
    let per_language = langs
        .into_keys()
        .map(|l| (l, ScoreSummary::of(per_instance.iter().filter(|s| s.lang == l))))
        .collect();
    let overall = ScoreSummary::of(per_instance.iter());
    Ok(EvalReport {
        per_instance,
        per_language,
        overall,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    MarkAll,
    MarkNone,
}

/// The degenerate reference systems: everything or nothing marked.
pub fn baseline(kind: Baseline, inst: &Instance) -> Prediction {
    let n = inst.char_len();
    match kind {
        Baseline::MarkNone => Prediction::empty(inst.id.clone(), n),
        Baseline::MarkAll if n == 0 => Prediction::empty(inst.id.clone(), n),
        Baseline::MarkAll => Prediction {
            instance_id: inst.id.clone(),
            hard: vec![HardSpan::new(0, n)],
            soft: vec![SoftSpan::new(0, n, 1.0)],
            votes: vec![1; n],
            components: 1,
        },
    }
}
