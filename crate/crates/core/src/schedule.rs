//! Inverse-temperature schedules.

use crate::error::{Error, Result};

/// Ordered list of inverse temperatures, one per solver iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    betas: Vec<f64>,
}

impl AnnealSchedule {
    /// `betas[t] = start * (end / start)^(t / (steps - 1))`; a single step
    /// yields `[start]`. The last entry is exactly `end`.
    pub fn geometric(beta_start: f64, beta_end: f64, steps: usize) -> Result<Self> {
        if !(beta_start > 0.0 && beta_start.is_finite() && beta_end > 0.0 && beta_end.is_finite()) {
            return Err(Error::invalid(format!(
                "schedule endpoints must be positive and finite, got ({beta_start}, {beta_end})"
            )));
        }
        if steps == 0 {
            return Err(Error::invalid("geometric schedule needs at least one step"));
        }
        if steps == 1 {
            return Ok(AnnealSchedule {
                betas: vec![beta_start],
            });
        }
        let ratio = beta_end / beta_start;
        let last = (steps - 1) as f64;
        let mut betas: Vec<f64> = (0..steps)
            .map(|t| beta_start * ratio.powf(t as f64 / last))
            .collect();
        betas[steps - 1] = beta_end;
        Ok(AnnealSchedule { betas })
    }

    /// Explicit list; every entry must be positive and finite. May be empty.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!(
                "inverse temperature {b} is not positive"
            )));
        }
        Ok(AnnealSchedule { betas })
    }

    /// Constant `beta` repeated `steps` times.
    pub fn constant(beta: f64, steps: usize) -> Result<Self> {
        Self::from_betas(vec![beta; steps])
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Entry `t`, holding at the final value past the end.
    pub fn at(&self, t: usize) -> Option<f64> {
        self.betas
            .get(t.min(self.betas.len().checked_sub(1)?))
            .copied()
    }
}
