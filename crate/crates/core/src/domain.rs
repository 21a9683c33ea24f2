//! Axis-aligned box domains.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Compact box domain, one `[lo, hi]` interval per state coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    intervals: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        for (j, &(lo, hi)) in intervals.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "domain axis {j}: need finite lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// Symmetric box `[-half, half]^dim`.
    pub fn symmetric(half: f64, dim: usize) -> Result<Self> {
        Self::new(vec![(-half, half); dim])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(&self.intervals)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// First coordinate of `x` outside the box, if any.
    pub fn violation(&self, x: &DVector<f64>) -> Option<(usize, f64, f64, f64)> {
        x.iter()
            .zip(&self.intervals)
            .enumerate()
            .find(|(_, (&v, &(lo, hi)))| v < lo || v > hi)
            .map(|(j, (&v, &(lo, hi)))| (j, v, lo, hi))
    }

    pub fn check_contains(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "domain membership",
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self.violation(x) {
            None => Ok(()),
            Some((axis, value, lo, hi)) => Err(Error::DomainViolation {
                axis,
                value,
                lo,
                hi,
            }),
        }
    }

    /// Box scaled by `factor` about its center; used as the divergence guard.
    pub fn scaled(&self, factor: f64) -> Domain {
        let intervals = self
            .intervals
            .iter()
            .map(|&(lo, hi)| {
                let c = 0.5 * (lo + hi);
                let r = 0.5 * (hi - lo) * factor;
                (c - r, c + r)
            })
            .collect();
        Domain { intervals }
    }

    /// Norm of the farthest corner: `sup_{x in box} ||x||`.
    pub fn sup_norm(&self) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
