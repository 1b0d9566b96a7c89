//! Weak labels by random token deletion.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{keyed_unit, Sample};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DropStrategy {
    /// One drop probability for every token.
    Uniform,
    /// Samples are split randomly into parts, each with its own probability.
    PerSampleSplit,
    /// The vocabulary is split randomly into parts, each with its own
    /// probability.
    PerTokenSplit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropConfig {
    pub strategy: DropStrategy,
    /// One probability for `Uniform`, one per split otherwise.
    pub p_drop: Vec<f64>,
    pub seed: u64,
}

const TAG_TOKEN: u64 = 1;
const TAG_SAMPLE_SPLIT: u64 = 2;
const TAG_VOCAB_SPLIT: u64 = 3;

impl DropConfig {
    pub fn uniform(p_drop: f64, seed: u64) -> Self {
        DropConfig {
            strategy: DropStrategy::Uniform,
            p_drop: vec![p_drop],
            seed,
        }
    }

    pub fn num_splits(&self) -> usize {
        self.p_drop.len()
    }

    fn validate(&self) -> Result<()> {
        if self.p_drop.is_empty() {
            return Err(Error::Config("p_drop needs at least one value".into()));
        }
        if self.strategy == DropStrategy::Uniform && self.p_drop.len() != 1 {
            return Err(Error::Config("uniform dropping takes exactly one p_drop".into()));
        }
        if let Some(p) = self.p_drop.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("p_drop must be in [0, 1], got {p}")));
        }
        Ok(())
    }

    fn split_of(&self, key: &str, tag: u64) -> usize {
        let u = keyed_unit(self.seed, key, tag, 0);
        ((u * self.num_splits() as f64) as usize).min(self.num_splits() - 1)
    }
}

/// Deletes label tokens independently, keeping each with probability
/// `1 - p_drop`, and prunes samples left with an empty partial label.
/// Each decision is keyed by `(seed, sample id, token index)`.
pub fn apply_drop(samples: &[Sample], cfg: &DropConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        let sample_p = match cfg.strategy {
            DropStrategy::Uniform => Some(cfg.p_drop[0]),
            DropStrategy::PerSampleSplit => Some(cfg.p_drop[cfg.split_of(&s.id, TAG_SAMPLE_SPLIT)]),
            DropStrategy::PerTokenSplit => None,
        };
        let partial: Vec<_> = s
            .full_label
            .iter()
            .enumerate()
            .filter(|&(i, &t)| {
                let p = sample_p.unwrap_or_else(|| {
                    cfg.p_drop[cfg.split_of(&t.to_string(), TAG_VOCAB_SPLIT)]
                });
                keyed_unit(cfg.seed, &s.id, TAG_TOKEN, i as u64) >= p
            })
            .map(|(_, &t)| t)
            .collect();
        if !partial.is_empty() {
            out.push(Sample {
                partial_label: partial,
                ..s.clone()
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    /// Sample counts per equal-width bin over `[0, 1]`; the last bin
    /// includes 1.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let bins = self.counts.len();
        let total = self.total().max(1) as f64;
        let mut out = String::from("bin_start,bin_end,count,fraction\n");
        for (i, &c) in self.counts.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                i as f64 / bins as f64,
                (i + 1) as f64 / bins as f64,
                c,
                c as f64 / total
            )
            .unwrap();
        }
        out
    }
}

/// Histogram of the per-sample retained fraction `|partial| / |full|`.
pub fn retention_histogram(samples: &[Sample], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let mut counts = vec![0; bins];
    for s in samples.iter().filter(|s| !s.full_label.is_empty()) {
        let frac = s.partial_label.len() as f64 / s.full_label.len() as f64;
        counts[((frac * bins as f64) as usize).min(bins - 1)] += 1;
    }
    Histogram { counts }
}
