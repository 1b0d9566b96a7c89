use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::error::{Error, Result};
use crate::label::Token;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub vocab_size: usize,
    pub num_samples: usize,
    /// Inclusive label-length range.
    pub len_range: (usize, usize),
    /// Inclusive number of frames each token occupies.
    pub frames_per_token: (usize, usize),
    /// Standard deviation of the Gaussian feature noise.
    pub noise: f64,
    pub seed: u64,
    /// Sample ids are `{prefix}-{index}`.
    pub id_prefix: String,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            vocab_size: 30,
            num_samples: 2000,
            len_range: (3, 8),
            frames_per_token: (1, 3),
            noise: 0.3,
            seed: 1,
            id_prefix: "s".into(),
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        if self.vocab_size < 2 {
            return Err(Error::Config("vocab_size must be at least 2".into()));
        }
        let (lo, hi) = self.len_range;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("bad label length range {lo}..={hi}")));
        }
        let (lo, hi) = self.frames_per_token;
        if lo == 0 || lo > hi {
            return Err(Error::Config(format!("bad frames-per-token range {lo}..={hi}")));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!("noise must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }
}

/// Generates fully labeled samples. A token's frames are its one-hot vector
/// (dimension `vocab_size`, token `t` at index `t - 1`) plus Gaussian noise.
/// Consecutive tokens are always distinct, since identical neighbours would
/// produce an unsegmentable run of identical frames.
pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Vec<Sample>> {
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.noise).map_err(|e| Error::Config(e.to_string()))?;
    Ok((0..cfg.num_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let len = rng.random_range(cfg.len_range.0..=cfg.len_range.1);
            let mut label: Vec<Token> = Vec::with_capacity(len);
            while label.len() < len {
                let t = rng.random_range(1..=cfg.vocab_size as Token);
                if label.last() != Some(&t) {
                    label.push(t);
                }
            }
            let counts: Vec<usize> = label
                .iter()
                .map(|_| rng.random_range(cfg.frames_per_token.0..=cfg.frames_per_token.1))
                .collect();
            let total: usize = counts.iter().sum();
            let mut frames = Array2::zeros((total, cfg.vocab_size));
            let mut row = 0;
            for (&t, &n) in label.iter().zip(&counts) {
                for _ in 0..n {
                    frames[[row, t as usize - 1]] = 1.0;
                    if cfg.noise > 0.0 {
                        for v in frames.row_mut(row).iter_mut() {
                            *v += normal.sample(&mut rng);
                        }
                    }
                    row += 1;
                }
            }
            Sample {
                id: format!("{}-{i}", cfg.id_prefix),
                frames,
                partial_label: label.clone(),
                full_label: label,
            }
        })
        .collect())
}
