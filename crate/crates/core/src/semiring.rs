//! The log semiring: `plus` is log-sum-exp, `times` is addition.
//!
//! Zero is `-inf` and one is `0`. All helpers treat `-inf` as an exact
//! annihilator so forbidden transitions never produce `NaN`.

use std::fmt;
use std::ops::{Add, Mul};

/// A weight in the log semiring.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    #[inline]
    pub fn new(value: f64) -> Self {
        LogWeight(value)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn plus(self, other: Self) -> Self {
        LogWeight(log_add(self.0, other.0))
    }

    #[inline]
    pub fn times(self, other: Self) -> Self {
        LogWeight(log_mul(self.0, other.0))
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Negated score, i.e. a loss. `-inf` maps to `+inf`.
    #[inline]
    pub fn negate(self) -> f64 {
        negate(self.0)
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: Self) -> Self {
        self.plus(rhs)
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;
    fn mul(self, rhs: Self) -> Self {
        self.times(rhs)
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<f64> for LogWeight {
    fn from(v: f64) -> Self {
        LogWeight(v)
    }
}

/// `log(exp(a) + exp(b))`, shifted by the max for stability.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Semiring product; `-inf` annihilates even against `+inf`.
#[inline]
pub fn log_mul(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        a + b
    }
}

#[inline]
pub fn negate(score: f64) -> f64 {
    -score
}

/// Log-sum-exp of a slice. Empty input yields `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    log_sum_exp_iter(values.iter().copied())
}

pub fn log_sum_exp_iter<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64> + Clone,
{
    let max = values
        .clone()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_infinite() {
        return max;
    }
    let sum: f64 = values.into_iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Partial derivatives of `log_sum_exp(values)` scaled by `upstream`:
/// each input receives `upstream * softmax(values)_i`.
pub fn log_sum_exp_backward(values: &[f64], upstream: f64) -> Vec<f64> {
    let total = log_sum_exp(values);
    values
        .iter()
        .map(|&v| {
            if total == f64::NEG_INFINITY || v == f64::NEG_INFINITY {
                0.0
            } else {
                upstream * (v - total).exp()
            }
        })
        .collect()
}
