use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::label::Token;

/// How a frame-level argmax string collapses to tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollapseMode {
    /// Merge consecutive repeats, then drop blanks.
    Ctc,
    /// Drop blanks only.
    Stc,
}

/// Per-frame argmax; ties go to the lowest column. Column 0 is the blank.
pub fn best_path(log_probs: ArrayView2<'_, f64>) -> Vec<u32> {
    log_probs
        .outer_iter()
        .map(|row| {
            let mut best = 0;
            for (k, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = k;
                }
            }
            best as u32
        })
        .collect()
}

pub fn collapse(path: &[u32], mode: CollapseMode) -> Vec<Token> {
    let mut out = Vec::new();
    let mut prev = None;
    for &c in path {
        let repeat = prev == Some(c);
        prev = Some(c);
        if c == 0 || (mode == CollapseMode::Ctc && repeat) {
            continue;
        }
        out.push(c);
    }
    out
}

pub fn greedy_decode(log_probs: ArrayView2<'_, f64>, mode: CollapseMode) -> Vec<Token> {
    collapse(&best_path(log_probs), mode)
}

pub fn edit_distance(hyp: &[Token], reference: &[Token]) -> usize {
    let mut prev: Vec<usize> = (0..=reference.len()).collect();
    let mut cur = vec![0; reference.len() + 1];
    for (i, h) in hyp.iter().enumerate() {
        cur[0] = i + 1;
        for (j, r) in reference.iter().enumerate() {
            let sub = prev[j] + usize::from(h != r);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[reference.len()]
}

/// Token error rate: edit distance over `max(1, |reference|)`.
pub fn edit_distance_rate(hyp: &[Token], reference: &[Token]) -> f64 {
    edit_distance(hyp, reference) as f64 / reference.len().max(1) as f64
}
