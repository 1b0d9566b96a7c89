//! Desk-scale frame classifier: a context window over input frames, an
//! optional tanh hidden layer, an affine output, an optional letter-to-word
//! encoder, and a log-softmax per frame.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::LetterToWordEncoder;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Feature dimension of one input frame.
    pub input_dim: usize,
    /// Frames of context on each side; the affine map sees `2c + 1` frames.
    pub context: usize,
    /// Hidden tanh units, or `None` for a single affine map.
    pub hidden: Option<usize>,
    /// Output classes (blank + vocabulary). Ignored with a word encoder,
    /// whose output size wins.
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameClassifier {
    config: ClassifierConfig,
    encoder: Option<LetterToWordEncoder>,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    window: Array2<f64>,
    hidden: Option<Array2<f64>>,
    log_probs: Array2<f64>,
}

impl ForwardCache {
    pub fn log_probs(&self) -> &Array2<f64> {
        &self.log_probs
    }

    pub fn into_log_probs(self) -> Array2<f64> {
        self.log_probs
    }
}

struct Layout {
    window: usize,
    hidden: Option<usize>,
    affine_out: usize,
}

impl FrameClassifier {
    /// All parameters zero: every frame predicts the uniform distribution.
    pub fn zeros(config: ClassifierConfig, encoder: Option<LetterToWordEncoder>) -> Result<Self> {
        if config.input_dim == 0 {
            return Err(Error::Config("input_dim must be positive".into()));
        }
        if encoder.is_none() && config.classes < 2 {
            return Err(Error::Config("need at least 2 output classes".into()));
        }
        let mut model = FrameClassifier {
            config,
            encoder,
            params: Vec::new(),
        };
        model.params = vec![0.0; model.param_count()];
        Ok(model)
    }

    /// Uniform `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` weights, zero biases.
    pub fn random(
        config: ClassifierConfig,
        encoder: Option<LetterToWordEncoder>,
        seed: u64,
    ) -> Result<Self> {
        let mut model = Self::zeros(config, encoder)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = model.layout();
        let mut offset = 0;
        let mut fill = |rows: usize, cols: usize, params: &mut [f64], offset: &mut usize| {
            let bound = 1.0 / (cols as f64).sqrt();
            for p in &mut params[*offset..*offset + rows * cols] {
                *p = rng.random_range(-bound..bound);
            }
            *offset += rows * cols + rows;
        };
        match l.hidden {
            Some(h) => {
                fill(h, l.window, &mut model.params, &mut offset);
                fill(l.affine_out, h, &mut model.params, &mut offset);
            }
            None => fill(l.affine_out, l.window, &mut model.params, &mut offset),
        }
        Ok(model)
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.config
    }

    pub fn encoder(&self) -> Option<&LetterToWordEncoder> {
        self.encoder.as_ref()
    }

    /// Number of output classes (columns of the log-probabilities).
    pub fn classes(&self) -> usize {
        match &self.encoder {
            Some(e) => e.output_dim(),
            None => self.config.classes,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        let l = self.layout();
        match l.hidden {
            Some(h) => h * (l.window + 1) + l.affine_out * (h + 1),
            None => l.affine_out * (l.window + 1),
        }
    }

    fn layout(&self) -> Layout {
        Layout {
            window: self.config.input_dim * (2 * self.config.context + 1),
            hidden: self.config.hidden,
            affine_out: match &self.encoder {
                Some(e) => e.input_dim(),
                None => self.config.classes,
            },
        }
    }

    /// (weight, bias) views in parameter order.
    fn layers(&self) -> Vec<(ArrayView2<'_, f64>, ArrayView1<'_, f64>)> {
        let l = self.layout();
        let shapes: Vec<(usize, usize)> = match l.hidden {
            Some(h) => vec![(h, l.window), (l.affine_out, h)],
            None => vec![(l.affine_out, l.window)],
        };
        let mut offset = 0;
        shapes
            .into_iter()
            .map(|(rows, cols)| {
                let w = ArrayView2::from_shape((rows, cols), &self.params[offset..offset + rows * cols])
                    .expect("parameter layout");
                offset += rows * cols;
                let b = ArrayView1::from(&self.params[offset..offset + rows]);
                offset += rows;
                (w, b)
            })
            .collect()
    }

    fn window(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let (frames, d) = x.dim();
        let c = self.config.context;
        let mut out = Array2::zeros((frames, d * (2 * c + 1)));
        for t in 0..frames {
            for k in 0..=2 * c {
                let src = t as isize + k as isize - c as isize;
                if src >= 0 && (src as usize) < frames {
                    out.slice_mut(s![t, k * d..(k + 1) * d])
                        .assign(&x.row(src as usize));
                }
            }
        }
        out
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.forward_cached(x).map(ForwardCache::into_log_probs)
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if x.ncols() != self.config.input_dim {
            return Err(Error::shape(
                format!("{} input features", self.config.input_dim),
                x.ncols(),
            ));
        }
        if x.nrows() == 0 {
            return Err(Error::EmptyInput("input has zero frames".into()));
        }
        let window = self.window(x);
        let layers = self.layers();
        let (hidden, out) = match layers.as_slice() {
            [(w1, b1), (w2, b2)] => {
                let h = (window.dot(&w1.t()) + b1).mapv(f64::tanh);
                let z = h.dot(&w2.t()) + b2;
                (Some(h), z)
            }
            [(w, b)] => (None, window.dot(&w.t()) + b),
            _ => unreachable!(),
        };
        let scores = match &self.encoder {
            Some(e) => e.encode(out.view())?,
            None => out,
        };
        Ok(ForwardCache {
            window,
            hidden,
            log_probs: log_softmax(scores.view()),
        })
    }

    /// Parameter gradient given `d loss / d log_probs`.
    pub fn backward(&self, cache: &ForwardCache, grad_log_probs: ArrayView2<'_, f64>) -> Vec<f64> {
        let probs = cache.log_probs.mapv(f64::exp);
        let row_sums = grad_log_probs.sum_axis(Axis(1)).insert_axis(Axis(1));
        let grad_scores = &grad_log_probs - &(probs * &row_sums);
        let grad_out = match &self.encoder {
            Some(e) => e.backward(grad_scores.view()),
            None => grad_scores,
        };

        let mut grads = Vec::with_capacity(self.params.len());
        let layers = self.layers();
        match (layers.as_slice(), &cache.hidden) {
            ([_, (w2, _)], Some(h)) => {
                let grad_h = grad_out.dot(w2) * h.mapv(|v| 1.0 - v * v);
                push_affine(&mut grads, grad_h.view(), cache.window.view());
                push_affine(&mut grads, grad_out.view(), h.view());
            }
            ([_], None) => push_affine(&mut grads, grad_out.view(), cache.window.view()),
            _ => unreachable!(),
        }
        grads
    }
}

fn push_affine(grads: &mut Vec<f64>, grad_out: ArrayView2<'_, f64>, input: ArrayView2<'_, f64>) {
    let gw = grad_out.t().dot(&input);
    grads.extend(gw.iter());
    let gb: Array1<f64> = grad_out.sum_axis(Axis(0));
    grads.extend(gb.iter());
}

pub fn log_softmax(scores: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = scores.to_owned();
    for mut row in out.outer_iter_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        row.mapv_inplace(|v| v - lse);
    }
    out
}
