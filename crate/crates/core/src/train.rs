//! Mini-batch training and evaluation of a [`FrameClassifier`] with any of
//! the sequence criteria, plus checkpointing.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::loss::{AlphabetMode, Criterion, Emissions, PenaltySchedule};
use crate::model::{
    edit_distance, greedy_decode, Adagrad, ClassifierConfig, CollapseMode, FrameClassifier,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Ctc,
    SelflessCtc,
    Stc,
}

impl LossKind {
    /// Collapse used when decoding a model trained with this loss.
    pub fn collapse_mode(self) -> CollapseMode {
        match self {
            LossKind::Ctc => CollapseMode::Ctc,
            LossKind::SelflessCtc | LossKind::Stc => CollapseMode::Stc,
        }
    }
}

/// Everything that determines a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub loss: LossKind,
    pub p0: f64,
    pub p_max: f64,
    /// Steps for the insertion probability to get halfway to `p_max`.
    pub half_life: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub alphabet: AlphabetMode,
    pub context: usize,
    pub hidden: Option<usize>,
    /// Loss worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            loss: LossKind::Stc,
            p0: 0.5,
            p_max: 0.9,
            half_life: 10_000.0,
            learning_rate: 0.1,
            batch_size: 16,
            epochs: 10,
            seed: 1,
            alphabet: AlphabetMode::Reduced,
            context: 1,
            hidden: None,
            workers: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.half_life.is_nan() || self.half_life <= 0.0 {
            return Err(Error::Config("half_life must be positive".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        self.schedule()?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<PenaltySchedule> {
        PenaltySchedule::from_half_life(self.p0, self.p_max, self.half_life)
    }
}

/// Result of one training epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean loss over samples with at least one valid alignment.
    pub loss: f64,
    /// Samples skipped because their loss was infinite.
    pub skipped: usize,
    /// Penalty in effect at the end of the epoch (`NaN` for CTC losses).
    pub lambda: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalStats {
    pub loss: f64,
    /// Token error rate against the full labels, pooled over the corpus.
    pub ter: f64,
    pub samples: usize,
}

/// Serialized training state: enough to resume bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config: RunConfig,
    pub model: FrameClassifier,
    pub optimizer: Adagrad,
    pub step: u64,
    pub epoch: usize,
}

pub const CHECKPOINT_VERSION: u32 = 1;

impl Checkpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string(self).map_err(std::io::Error::from)?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::Data(format!(
                "unsupported checkpoint version {}",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }
}

pub struct Trainer {
    config: RunConfig,
    schedule: PenaltySchedule,
    model: FrameClassifier,
    optimizer: Adagrad,
    step: u64,
    epoch: usize,
    pool: rayon::ThreadPool,
}

impl Trainer {
    /// Fresh model with seeded random initialization.
    pub fn new(config: RunConfig, input_dim: usize, classes: usize) -> Result<Self> {
        let model = FrameClassifier::random(
            ClassifierConfig {
                input_dim,
                context: config.context,
                hidden: config.hidden,
                classes,
            },
            None,
            config.seed,
        )?;
        Self::with_model(config, model)
    }

    pub fn with_model(config: RunConfig, model: FrameClassifier) -> Result<Self> {
        config.validate()?;
        let optimizer = Adagrad::new(model.param_count(), config.learning_rate);
        Self::assemble(config, model, optimizer, 0, 0)
    }

    pub fn from_checkpoint(ckpt: Checkpoint) -> Result<Self> {
        Self::assemble(ckpt.config, ckpt.model, ckpt.optimizer, ckpt.step, ckpt.epoch)
    }

    fn assemble(
        config: RunConfig,
        model: FrameClassifier,
        optimizer: Adagrad,
        step: u64,
        epoch: usize,
    ) -> Result<Self> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Trainer {
            schedule: config.schedule()?,
            config,
            model,
            optimizer,
            step,
            epoch,
            pool,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn model(&self) -> &FrameClassifier {
        &self.model
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            model: self.model.clone(),
            optimizer: self.optimizer.clone(),
            step: self.step,
            epoch: self.epoch,
        }
    }

    /// Penalty at the current step, or `NaN` when the loss has none.
    pub fn lambda(&self) -> f64 {
        match self.config.loss {
            LossKind::Stc => self.schedule.penalty(self.step as f64),
            _ => f64::NAN,
        }
    }

    pub fn criterion(&self) -> Criterion {
        criterion_at(&self.config, &self.schedule, self.step)
    }

    pub fn train_epoch(&mut self, samples: &[Sample]) -> Result<EpochStats> {
        let start = Instant::now();
        let mut order: Vec<usize> = (0..samples.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(self.epoch as u64 + 1);
        order.shuffle(&mut rng);

        let mut total = 0.0;
        let mut counted = 0usize;
        let mut skipped = 0usize;
        for batch in order.chunks(self.config.batch_size) {
            let criterion = self.criterion();
            let model = &self.model;
            let results: Vec<Result<Option<SampleGradient>>> = self.pool.install(|| {
                batch
                    .par_iter()
                    .map(|&i| sample_gradient(model, criterion, &samples[i]))
                    .collect()
            });
            let mut grad = vec![0.0; self.model.param_count()];
            let mut used = 0usize;
            for r in results {
                match r? {
                    Some((loss, g)) => {
                        total += loss;
                        used += 1;
                        for (acc, v) in grad.iter_mut().zip(&g) {
                            *acc += v;
                        }
                    }
                    None => skipped += 1,
                }
            }
            counted += used;
            if used > 0 {
                let scale = 1.0 / batch.len() as f64;
                grad.iter_mut().for_each(|g| *g *= scale);
                self.optimizer.step(self.model.params_mut(), &grad);
            }
            self.step += 1;
        }
        self.epoch += 1;
        Ok(EpochStats {
            epoch: self.epoch,
            loss: if counted > 0 { total / counted as f64 } else { f64::NAN },
            skipped,
            lambda: self.lambda(),
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Loss on partial labels with the current criterion, and greedy-decode
    /// token error rate against full labels.
    pub fn evaluate(&self, samples: &[Sample]) -> Result<EvalStats> {
        let criterion = self.criterion();
        let mode = self.config.loss.collapse_mode();
        let model = &self.model;
        let per_sample: Vec<Result<(f64, usize, usize)>> = self.pool.install(|| {
            samples
                .par_iter()
                .map(|s| {
                    let lp = model.forward(s.frames.view())?;
                    let hyp = greedy_decode(lp.view(), mode);
                    let em = Emissions::unchecked(lp);
                    let loss = criterion.loss(&em, &s.partial_label)?.loss;
                    Ok((loss, edit_distance(&hyp, &s.full_label), s.full_label.len()))
                })
                .collect()
        });
        let (mut loss, mut finite, mut errors, mut tokens) = (0.0, 0usize, 0usize, 0usize);
        for r in per_sample {
            let (l, e, n) = r?;
            if l.is_finite() {
                loss += l;
                finite += 1;
            }
            errors += e;
            tokens += n;
        }
        Ok(EvalStats {
            loss: if finite > 0 { loss / finite as f64 } else { f64::NAN },
            ter: errors as f64 / tokens.max(1) as f64,
            samples: samples.len(),
        })
    }
}

fn criterion_at(config: &RunConfig, schedule: &PenaltySchedule, step: u64) -> Criterion {
    match config.loss {
        LossKind::Ctc => Criterion::Ctc,
        LossKind::SelflessCtc => Criterion::SelflessCtc,
        LossKind::Stc => Criterion::Stc {
            penalty: schedule.penalty(step as f64),
            mode: config.alphabet,
        },
    }
}

/// Loss and parameter gradient of one sample.
pub type SampleGradient = (f64, Vec<f64>);

/// Loss and parameter gradient for one sample, or `None` when no alignment
/// exists.
pub fn sample_gradient(
    model: &FrameClassifier,
    criterion: Criterion,
    sample: &Sample,
) -> Result<Option<SampleGradient>> {
    let cache = model.forward_cached(sample.frames.view())?;
    let em = Emissions::unchecked(cache.log_probs().clone());
    let out = criterion.loss(&em, &sample.partial_label)?;
    if !out.loss.is_finite() {
        return Ok(None);
    }
    Ok(Some((out.loss, model.backward(&cache, out.grad.view()))))
}

/// Token error rate of a model on a corpus under the given collapse mode.
pub fn token_error_rate(model: &FrameClassifier, samples: &[Sample], mode: CollapseMode) -> Result<f64> {
    let mut errors = 0;
    let mut tokens = 0;
    for s in samples {
        let lp = model.forward(s.frames.view())?;
        errors += edit_distance(&greedy_decode(lp.view(), mode), &s.full_label);
        tokens += s.full_label.len();
    }
    Ok(errors as f64 / tokens.max(1) as f64)
}
