//! Deliberately naive reference scorer: per-character sets and O(n²) ranks.

use std::collections::BTreeSet;

use halspan::core::{HardSpan, SoftSpan};

pub fn char_set(spans: &[HardSpan]) -> BTreeSet<usize> {
    spans.iter().flat_map(|s| s.start..s.end).collect()
}

pub fn iou(pred: &[HardSpan], gold: &[HardSpan]) -> f64 {
    let p = char_set(pred);
    let g = char_set(gold);
    let union = p.union(&g).count();
    if union == 0 {
        return 1.0;
    }
    p.intersection(&g).count() as f64 / union as f64
}

/// Probability of each character: the largest among the spans covering it.
pub fn char_probs(soft: &[SoftSpan], len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            soft.iter()
                .filter(|s| s.start <= i && i < s.end)
                .map(|s| s.prob)
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Characters whose probability is strictly above one half.
pub fn hard_chars(soft: &[SoftSpan], len: usize) -> BTreeSet<usize> {
    char_probs(soft, len)
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 0.5)
        .map(|(i, _)| i)
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|x| {
            let below = v.iter().filter(|y| *y < x).count() as f64;
            let tied = v.iter().filter(|y| *y == x).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Spearman correlation; 1.0 when both vectors are constant, 0.0 when one is.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let constant = |v: &[f64]| v.iter().all(|x| *x == v[0]);
    let (ca, cb) = (a.is_empty() || constant(a), b.is_empty() || constant(b));
    if ca && cb {
        return 1.0;
    }
    if ca || cb {
        return 0.0;
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}
