//! Computation-delay models and the evaluation schedule
//! `t_{k+1} = t_k + Delta(t_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulated computation time as a function of the training-set size.
/// Delays are simulated, never measured, so runs are hardware-independent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayModel {
    /// `Delta(t) = delta_bar`, independent of the data.
    Constant { delta_bar: f64 },
    /// `Delta(t) = c * N(t)`, the cost of a mean evaluation.
    LinearInN {
        c: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
    /// `Delta(t) = c * N(t)^2`, the cost of an update plus prediction.
    QuadraticInN {
        c: f64,
        #[serde(default)]
        cap: Option<f64>,
    },
}

/// Smallest simulated delay; keeps the schedule advancing when a size-based
/// model evaluates to zero on an empty data set.
pub const MIN_DELAY: f64 = 1e-6;

impl DelayModel {
    pub fn validate(&self) -> Result<()> {
        let coeff = match self {
            DelayModel::Constant { delta_bar } => *delta_bar,
            DelayModel::LinearInN { c, .. } | DelayModel::QuadraticInN { c, .. } => *c,
        };
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "delay coefficient must be positive and finite, got {coeff}"
            )));
        }
        if let DelayModel::LinearInN { cap: Some(c), .. }
        | DelayModel::QuadraticInN { cap: Some(c), .. } = self
        {
            if !(*c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "delay cap must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Delay charged for a cycle computed with `n` training samples.
    pub fn delay(&self, n: usize) -> f64 {
        let raw = match self {
            DelayModel::Constant { delta_bar } => *delta_bar,
            DelayModel::LinearInN { c, cap } => {
                let d = c * n as f64;
                cap.map_or(d, |m| d.min(m))
            }
            DelayModel::QuadraticInN { c, cap } => {
                let d = c * (n as f64) * (n as f64);
                cap.map_or(d, |m| d.min(m))
            }
        };
        raw.max(MIN_DELAY)
    }

    /// Upper bound on the delay given a maximum data-set size.
    pub fn bound(&self, n_max: usize) -> f64 {
        self.delay(n_max)
    }
}

/// Realized evaluation times `t_0 = 0, t_{k+1} = t_k + Delta(t_k)`.
#[derive(Debug, Clone, Default)]
pub struct DelaySchedule {
    times: Vec<f64>,
}

impl DelaySchedule {
    pub fn new() -> Self {
        Self { times: vec![0.0] }
    }

    /// Build the schedule for a constant data-set size up to `horizon`.
    pub fn with_constant_size(model: &DelayModel, n: usize, horizon: f64) -> Self {
        let mut s = Self::new();
        while *s.times.last().unwrap() <= horizon {
            s.push_next(model.delay(n));
        }
        s
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn last(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Record `t_{k+1} = t_k + delta`.
    pub fn push_next(&mut self, delta: f64) {
        let next = self.last() + delta;
        self.times.push(next);
    }

    /// `kappa(t)`: index of the latest computation finished strictly before
    /// `t`, i.e. the largest `k` with `t_{k+1} < t`. `None` until the first
    /// computation completes.
    pub fn kappa(&self, t: f64) -> Option<usize> {
        // partition_point gives the count of completed times < t over
        // times[1..], which is exactly kappa + 1.
        let completed = self.times[1..].partition_point(|&tk| tk < t);
        completed.checked_sub(1)
    }
}
