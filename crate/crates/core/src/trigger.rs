//! Event-triggered model updates: trigger threshold, minimal admissible
//! tracking bound, deletion strategies, and the offline-vs-online tradeoff
//! certificate.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::tracking::BoundConstants;

/// Which sample to evict when the training set reaches capacity.
#[derive(Clone)]
pub enum DeletionStrategy {
    /// Evict the earliest-added sample.
    OldestFirst,
    /// Never delete; the data set may grow past the capacity.
    None,
    /// Caller-supplied index selector.
    Custom(Arc<dyn Fn(&GpModel) -> usize + Send + Sync>),
}

impl std::fmt::Debug for DeletionStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeletionStrategy::OldestFirst => f.write_str("OldestFirst"),
            DeletionStrategy::None => f.write_str("None"),
            DeletionStrategy::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Event-trigger policy of the online learning loop.
#[derive(Debug, Clone)]
pub struct TriggerPolicy {
    /// Desired tracking bound; must be admissible per [`min_error_bound`].
    pub e_bar: f64,
    pub bc: BoundConstants,
    pub deletion: DeletionStrategy,
    /// Maximum data-set size.
    pub capacity: usize,
}

impl TriggerPolicy {
    pub fn new(
        e_bar: f64,
        bc: BoundConstants,
        deletion: DeletionStrategy,
        capacity: usize,
    ) -> Result<Self> {
        if capacity < 1 {
            return Err(Error::InvalidArgument(
                "trigger capacity must be at least 1".to_string(),
            ));
        }
        let minimal = min_error_bound(&bc)?;
        // Tiny slack absorbs round-off when callers pass exactly the minimum.
        if e_bar < minimal * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "desired bound {e_bar} below the minimal admissible bound {minimal}"
            )));
        }
        Ok(Self {
            e_bar,
            bc,
            deletion,
            capacity,
        })
    }

    /// Policy at the minimal admissible bound.
    pub fn minimal(bc: BoundConstants, deletion: DeletionStrategy, capacity: usize) -> Result<Self> {
        let e_bar = min_error_bound(&bc)?;
        Self::new(e_bar, bc, deletion, capacity)
    }
}

/// Trigger threshold
/// `upsilon = xi^{-1} max(||e||, chi^{-1} e_bar) - 2 (xi^{-1} (F + F_d) + L_f F) delta_bar`.
/// A nonpositive value means the trigger always fires.
pub fn threshold(e_norm: f64, policy: &TriggerPolicy) -> f64 {
    let bc = &policy.bc;
    e_norm.max(policy.e_bar / bc.chi) / bc.xi
        - 2.0 * ((bc.f_const + bc.f_d) / bc.xi + bc.l_f * bc.f_const) * bc.delta_bar
}

/// Minimal admissible tracking bound
/// `e_bar_2 = 2 chi (F + F_d + xi L_f F) delta_bar + chi xi eta_inf`.
pub fn min_error_bound(bc: &BoundConstants) -> Result<f64> {
    if bc.delta_bar >= 1.0 / (2.0 * bc.l_f) {
        return Err(Error::Precondition(format!(
            "delay bound {} violates delta_bar < 1/(2 L_f)",
            bc.delta_bar
        )));
    }
    Ok(2.0 * bc.chi * (bc.f_const + bc.f_d + bc.xi * bc.l_f * bc.f_const) * bc.delta_bar
        + bc.chi * bc.xi * bc.eta.eta_inf)
}

/// Fire iff the uncertainty norm reaches the threshold.
pub fn should_update(eta_norm: f64, upsilon: f64) -> bool {
    eta_norm >= upsilon
}

/// Make room for one incoming sample: while the set is at or above capacity,
/// evict per the strategy. `None` leaves the model untouched.
pub fn apply_deletion(model: &GpModel, policy: &TriggerPolicy) -> Result<GpModel> {
    let selector: &dyn Fn(&GpModel) -> usize = match &policy.deletion {
        DeletionStrategy::None => return Ok(model.clone()),
        DeletionStrategy::OldestFirst => &|_m| 0,
        DeletionStrategy::Custom(f) => f.as_ref(),
    };
    let mut current = model.clone();
    while current.len() >= policy.capacity {
        let index = selector(&current);
        current = current.delete_sample(index)?;
    }
    Ok(current)
}

/// Inputs of the offline-vs-online comparison.
#[derive(Debug, Clone)]
pub struct TradeoffInputs {
    /// Offline prediction-delay bound.
    pub delta_bar_1: f64,
    /// Online update-plus-prediction delay bound.
    pub delta_bar_2: f64,
    /// Offline model's uniform bound `eta_sup`.
    pub eta_sup: f64,
    /// Online noise-floor bound `eta_inf`.
    pub eta_inf: f64,
    pub bc: BoundConstants,
}

impl TradeoffInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_bar_1 <= self.delta_bar_2) {
            return Err(Error::Precondition(format!(
                "need delta_bar_1 <= delta_bar_2, got {} > {}",
                self.delta_bar_1, self.delta_bar_2
            )));
        }
        if !(self.delta_bar_2 < 1.0 / (2.0 * self.bc.l_f)) {
            return Err(Error::Precondition(format!(
                "delta_bar_2 = {} violates delta_bar_2 < 1/(2 L_f) = {}",
                self.delta_bar_2,
                1.0 / (2.0 * self.bc.l_f)
            )));
        }
        Ok(())
    }
}

/// Both sides of both disjuncts of the certificate, for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffReport {
    pub delta_bar_1: f64,
    pub delta_bar_2: f64,
    pub delta_tilde: f64,
    pub eta_tilde: f64,
    /// First disjunct: `delta_bar_2 >= xi eta_tilde / (2 (F + F_d))`.
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub first_holds: bool,
    /// Second disjunct:
    /// `delta_tilde >= (xi eta_tilde - 2 (F + F_d) delta_bar_1) / (2 (xi L_f F + F + F_d))`.
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub second_holds: bool,
    pub offline_certified: bool,
}

/// Evaluate the certificate: `true` means the offline tracking bound is
/// guaranteed no worse than the best online bound.
pub fn offline_beats_online(ti: &TradeoffInputs) -> Result<(bool, TradeoffReport)> {
    ti.validate()?;
    let bc = &ti.bc;
    let eta_tilde = ti.eta_sup - ti.eta_inf;
    let delta_tilde = ti.delta_bar_2 - ti.delta_bar_1;
    let f_fd = bc.f_const + bc.f_d;

    let first_rhs = bc.xi * eta_tilde / (2.0 * f_fd);
    let first_holds = ti.delta_bar_2 >= first_rhs;

    let second_rhs =
        (bc.xi * eta_tilde - 2.0 * f_fd * ti.delta_bar_1) / (2.0 * (bc.xi * bc.l_f * bc.f_const + f_fd));
    let second_holds = delta_tilde >= second_rhs;

    let certified = first_holds || second_holds;
    let report = TradeoffReport {
        delta_bar_1: ti.delta_bar_1,
        delta_bar_2: ti.delta_bar_2,
        delta_tilde,
        eta_tilde,
        first_lhs: ti.delta_bar_2,
        first_rhs,
        first_holds,
        second_lhs: delta_tilde,
        second_rhs,
        second_holds,
        offline_certified: certified,
    };
    Ok((certified, report))
}
