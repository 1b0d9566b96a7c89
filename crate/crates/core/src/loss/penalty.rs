//! Token insertion penalty schedule.
//!
//! `p_t = p_max + (p_0 - p_max) * exp(-t / tau)` and the penalty is
//! `ln(p_t)`. `p_t` moves monotonically from `p_0` toward `p_max` and is
//! halfway there after `tau * ln 2` steps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltySchedule {
    p0: f64,
    p_max: f64,
    tau: f64,
}

impl PenaltySchedule {
    pub fn new(p0: f64, p_max: f64, tau: f64) -> Result<Self> {
        for (name, p) in [("p0", p0), ("p_max", p_max)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Domain(format!("{name} must be in (0, 1], got {p}")));
            }
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        Ok(PenaltySchedule { p0, p_max, tau })
    }

    pub fn from_half_life(p0: f64, p_max: f64, half_life: f64) -> Result<Self> {
        Self::new(p0, p_max, half_life / std::f64::consts::LN_2)
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn half_life(&self) -> f64 {
        self.tau * std::f64::consts::LN_2
    }

    pub fn probability(&self, step: f64) -> f64 {
        self.p_max + (self.p0 - self.p_max) * (-step / self.tau).exp()
    }

    /// `lambda_t = ln(p_t)`, never positive.
    pub fn penalty(&self, step: f64) -> f64 {
        self.probability(step).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_p0() {
        let s = PenaltySchedule::from_half_life(0.5, 0.9, 10_000.0).unwrap();
        assert_eq!(s.probability(0.0), 0.5);
        assert_eq!(s.penalty(0.0), 0.5f64.ln());
    }

    #[test]
    fn halfway_at_half_life() {
        let s = PenaltySchedule::from_half_life(0.5, 0.9, 10_000.0).unwrap();
        assert!((s.probability(10_000.0) - 0.7).abs() < 1e-12);
        assert!((s.penalty(10_000.0) - 0.7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PenaltySchedule::new(0.0, 0.9, 1.0).is_err());
        assert!(PenaltySchedule::new(0.5, 1.1, 1.0).is_err());
        assert!(PenaltySchedule::new(0.5, 0.9, 0.0).is_err());
        assert!(PenaltySchedule::new(0.5, 0.9, -3.0).is_err());
    }

    #[test]
    fn monotone_toward_p_max() {
        let up = PenaltySchedule::new(0.1, 0.3, 50.0).unwrap();
        let down = PenaltySchedule::new(0.9, 0.4, 50.0).unwrap();
        let mut last_up = up.probability(0.0);
        let mut last_down = down.probability(0.0);
        for t in 1..2000 {
            let (u, d) = (up.probability(t as f64), down.probability(t as f64));
            assert!(u >= last_up && u <= 0.3);
            assert!(d <= last_down && d >= 0.4);
            assert!(up.penalty(t as f64) <= 0.0);
            last_up = u;
            last_down = d;
        }
    }
}
