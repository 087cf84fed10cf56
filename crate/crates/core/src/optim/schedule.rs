use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gain sequence `α_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepSchedule {
    /// `α_k = α / √K` for a budget of `K` iterations.
    FixedBudget { alpha: f64, budget: usize },
    /// `α_k = α / k^γ`, `γ ∈ (1/2, 1]`.
    Diminishing { alpha: f64, gamma: f64 },
    /// `α_k = α`.
    Constant { alpha: f64 },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha() > 0.0 && self.alpha().is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha = {} must be positive", self.alpha())));
        }
        match *self {
            StepSchedule::FixedBudget { budget, .. } => {
                if budget == 0 {
                    return Err(Error::InvalidArgument("budget must be at least 1".into()));
                }
            }
            StepSchedule::Diminishing { gamma, .. } => {
                if !(gamma > 0.5 && gamma <= 1.0) {
                    return Err(Error::InvalidArgument(format!("gamma = {gamma} must lie in (1/2, 1]")));
                }
            }
            StepSchedule::Constant { .. } => {}
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            StepSchedule::FixedBudget { alpha, .. }
            | StepSchedule::Diminishing { alpha, .. }
            | StepSchedule::Constant { alpha } => alpha,
        }
    }

    /// `α_k` for `k ≥ 1`.
    pub fn alpha_k(&self, k: usize) -> f64 {
        match *self {
            StepSchedule::FixedBudget { alpha, budget } => alpha / (budget as f64).sqrt(),
            StepSchedule::Diminishing { alpha, gamma } => alpha / (k.max(1) as f64).powf(gamma),
            StepSchedule::Constant { alpha } => alpha,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepSchedule::FixedBudget { .. } => "fixed_budget",
            StepSchedule::Diminishing { .. } => "diminishing",
            StepSchedule::Constant { .. } => "constant",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains() {
        let f = StepSchedule::FixedBudget { alpha: 0.3, budget: 100 };
        assert!((f.alpha_k(1) - 0.03).abs() < 1e-15);
        assert_eq!(f.alpha_k(1), f.alpha_k(50));
        let d = StepSchedule::Diminishing { alpha: 1.0, gamma: 1.0 };
        assert_eq!(d.alpha_k(1) / d.alpha_k(2), 2.0);
        let c = StepSchedule::Constant { alpha: 0.2 };
        assert_eq!(c.alpha_k(1), c.alpha_k(1000));
    }

    #[test]
    fn validation() {
        assert!(StepSchedule::Diminishing { alpha: 1.0, gamma: 0.5 }.validate().is_err());
        assert!(StepSchedule::Diminishing { alpha: 1.0, gamma: 1.0 }.validate().is_ok());
        assert!(StepSchedule::FixedBudget { alpha: 0.0, budget: 3 }.validate().is_err());
        assert!(StepSchedule::FixedBudget { alpha: 1.0, budget: 0 }.validate().is_err());
        assert!(StepSchedule::Constant { alpha: -1.0 }.validate().is_err());
    }
}
