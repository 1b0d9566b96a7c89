//! Wall-clock comparisons: CTC against STC training epochs, and the full
//! against the reduced STC emission alphabet.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Sample;
use crate::error::Result;
use crate::label::Token;
use crate::loss::{stc_loss, AlphabetMode, Emissions};
use crate::semiring::log_sum_exp;
use crate::train::{LossKind, RunConfig, Trainer};

/// Per-epoch seconds of two otherwise identical training runs.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochTiming {
    pub ctc: Vec<f64>,
    pub stc: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

impl EpochTiming {
    pub fn ctc_mean(&self) -> f64 {
        mean(&self.ctc)
    }

    pub fn stc_mean(&self) -> f64 {
        mean(&self.stc)
    }

    /// Mean STC epoch time over mean CTC epoch time.
    pub fn ratio(&self) -> f64 {
        self.stc_mean() / self.ctc_mean()
    }
}

/// Trains a CTC model and an STC model from the same initialization for
/// `epochs` epochs each and records the epoch times. Only the loss kind
/// differs between the two runs.
pub fn time_epochs(
    samples: &[Sample],
    base: &RunConfig,
    input_dim: usize,
    classes: usize,
    epochs: usize,
) -> Result<EpochTiming> {
    let run = |loss: LossKind| -> Result<Vec<f64>> {
        let cfg = RunConfig {
            loss,
            ..base.clone()
        };
        let mut trainer = Trainer::new(cfg, input_dim, classes)?;
        (0..epochs)
            .map(|_| trainer.train_epoch(samples).map(|s| s.seconds))
            .collect()
    };
    Ok(EpochTiming {
        ctc: run(LossKind::Ctc)?,
        stc: run(LossKind::Stc)?,
    })
}

/// Seconds per STC loss evaluation in each alphabet mode, plus the largest
/// disagreement between the two modes.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphabetTiming {
    pub vocab_size: usize,
    pub full: f64,
    pub reduced: f64,
    pub max_loss_diff: f64,
    pub max_grad_diff: f64,
}

impl AlphabetTiming {
    /// Reduced time over full time.
    pub fn ratio(&self) -> f64 {
        self.reduced / self.full
    }
}

/// Random normalized `frames x (vocab_size + 1)` emissions.
pub fn random_emissions(frames: usize, vocab_size: usize, seed: u64) -> Emissions {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lp = Array2::from_shape_fn((frames, vocab_size + 1), |_| rng.random_range(-4.0..4.0));
    for mut row in lp.outer_iter_mut() {
        let z = log_sum_exp(row.as_slice().expect("standard layout"));
        row.mapv_inplace(|v| v - z);
    }
    Emissions::unchecked(lp)
}

/// Times `repeats` STC evaluations per mode on one random instance with a
/// partial label of `label_len` tokens, keeping the fastest of each.
pub fn time_alphabets(
    vocab_size: usize,
    frames: usize,
    label_len: usize,
    repeats: usize,
    seed: u64,
) -> Result<AlphabetTiming> {
    let em = random_emissions(frames, vocab_size, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let partial: Vec<Token> = (0..label_len)
        .map(|_| rng.random_range(1..=vocab_size as Token))
        .collect();
    let penalty = 0.5f64.ln();
    let time = |mode: AlphabetMode| -> Result<(f64, crate::loss::LossOutput)> {
        let mut best = f64::INFINITY;
        let mut out = None;
        for _ in 0..repeats.max(1) {
            let start = Instant::now();
            let o = stc_loss(&em, &partial, penalty, mode)?;
            best = best.min(start.elapsed().as_secs_f64());
            out = Some(o);
        }
        Ok((best, out.expect("at least one repeat")))
    };
    let (full, full_out) = time(AlphabetMode::Full)?;
    let (reduced, reduced_out) = time(AlphabetMode::Reduced)?;
    let max_grad_diff = full_out
        .grad
        .iter()
        .zip(&reduced_out.grad)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(AlphabetTiming {
        vocab_size,
        full,
        reduced,
        max_loss_diff: (full_out.loss - reduced_out.loss).abs(),
        max_grad_diff,
    })
}
