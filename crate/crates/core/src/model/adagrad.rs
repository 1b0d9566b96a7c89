use serde::{Deserialize, Serialize};

/// Adagrad over a flat parameter vector. The accumulator is updated before
/// the step: `acc += g^2; theta -= lr * g / sqrt(acc + eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adagrad {
    pub lr: f64,
    pub eps: f64,
    acc: Vec<f64>,
}

impl Adagrad {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Adagrad {
            lr,
            eps: 1e-10,
            acc: vec![0.0; num_params],
        }
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.acc
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.acc.len());
        assert_eq!(grads.len(), self.acc.len());
        for ((p, &g), acc) in params.iter_mut().zip(grads).zip(&mut self.acc) {
            if g == 0.0 {
                continue;
            }
            *acc += g * g;
            *p -= self.lr * g / (*acc + self.eps).sqrt();
        }
    }
}
