//! Fixed-step closed-loop integration with zero-order-hold delayed
//! compensation and optional event-triggered model updates.
//!
//! Computations start back-to-back at the schedule times `t_k`: the value
//! committed at `t_{k+1} = t_k + Delta(t_k)` is the prediction of the model
//! at the state read at `t_k` (after any update triggered there). Between
//! commits the compensation is held constant; the integrator sub-steps so
//! that commits land exactly on step boundaries.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::bound::eta_vector;
use crate::delay::DelayModel;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::plant::{control_input, ControllerGains, PlantSpec, Reference};
use crate::trigger::{apply_deletion, should_update, threshold, TriggerPolicy};

/// Closed-loop configuration shared by every run.
#[derive(Debug, Clone)]
pub struct LoopConfig {
    pub plant: PlantSpec,
    pub reference: Reference,
    pub gains: ControllerGains,
    pub horizon: f64,
    pub dt: f64,
    /// Initial tracking error `e(0)`; zero when absent.
    pub initial_error: Option<DVector<f64>>,
    /// Guard box scale relative to the domain; leaving it aborts the run.
    pub guard_factor: f64,
}

impl LoopConfig {
    pub fn new(plant: PlantSpec, reference: Reference, gains: ControllerGains) -> Self {
        Self {
            plant,
            reference,
            gains,
            horizon: 20.0,
            dt: 1e-3,
            initial_error: None,
            guard_factor: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be nonnegative, got {}",
                self.horizon
            )));
        }
        if self.guard_factor < 1.0 {
            return Err(Error::InvalidArgument(
                "guard_factor must be at least 1".to_string(),
            ));
        }
        if self.reference.order() != self.plant.order() || self.reference.dim() != self.plant.dim()
        {
            return Err(Error::InvalidArgument(
                "reference block structure must match the plant".to_string(),
            ));
        }
        if self.gains.order() != self.plant.order() || self.gains.dim() != self.plant.dim() {
            return Err(Error::InvalidArgument(
                "gain block structure must match the plant".to_string(),
            ));
        }
        if let Some(e0) = &self.initial_error {
            if e0.len() != self.plant.state_dim() {
                return Err(Error::DimensionMismatch {
                    context: "initial_error",
                    expected: self.plant.state_dim(),
                    got: e0.len(),
                });
            }
        }
        Ok(())
    }
}

/// One completed computation cycle.
#[derive(Debug, Clone)]
pub struct ScheduleEvent {
    pub index: usize,
    pub started_at: f64,
    pub delay: f64,
    pub commit_at: f64,
    pub state_read: DVector<f64>,
    pub committed: DVector<f64>,
    /// Data-set size the cycle was charged for.
    pub data_size: usize,
}

/// One trigger evaluation.
#[derive(Debug, Clone)]
pub struct TriggerEvent {
    pub at: f64,
    pub eta_norm: f64,
    pub upsilon: f64,
    pub fired: bool,
    /// False when the trigger fired but the state was outside the domain,
    /// so no sample could be added.
    pub applied: bool,
}

/// Time-indexed record of a run.
#[derive(Debug, Clone, Default)]
pub struct SimTrace {
    pub time: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub references: Vec<DVector<f64>>,
    pub error_norms: Vec<f64>,
    pub compensations: Vec<DVector<f64>>,
    pub data_sizes: Vec<usize>,
    pub schedule: Vec<ScheduleEvent>,
    pub triggers: Vec<TriggerEvent>,
}

impl SimTrace {
    pub fn max_error(&self) -> f64 {
        self.error_norms.iter().fold(0.0f64, |a, &b| a.max(b))
    }

    /// Number of trigger evaluations (equals the number of started cycles in
    /// trigger mode).
    pub fn evaluated_cycles(&self) -> u64 {
        self.triggers.len() as u64
    }

    /// Number of cycles whose update was actually applied.
    pub fn selected_updates(&self) -> u64 {
        self.triggers.iter().filter(|t| t.fired && t.applied).count() as u64
    }

    fn push_row(
        &mut self,
        t: f64,
        x: &DVector<f64>,
        xd: &DVector<f64>,
        f_hat: &DVector<f64>,
        data_size: usize,
    ) {
        self.time.push(t);
        self.states.push(x.clone());
        self.references.push(xd.clone());
        self.error_norms.push((x - xd).norm());
        self.compensations.push(f_hat.clone());
        self.data_sizes.push(data_size);
    }
}

/// One classical Runge-Kutta step of the closed loop with the compensation
/// supplied per stage.
fn rk4_step_with<F>(
    plant: &PlantSpec,
    reference: &Reference,
    gains: &ControllerGains,
    t: f64,
    dt: f64,
    x: &DVector<f64>,
    f_hat_of: F,
) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    let deriv = |tt: f64, xx: &DVector<f64>| {
        let u = control_input(tt, xx, reference, &f_hat_of(tt, xx), gains);
        plant.derivative(xx, &u)
    };
    let k1 = deriv(t, x);
    let k2 = deriv(t + 0.5 * dt, &(x + &k1 * (0.5 * dt)));
    let k3 = deriv(t + 0.5 * dt, &(x + &k2 * (0.5 * dt)));
    let k4 = deriv(t + dt, &(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// One guarded RK4 step holding `f_hat` constant (zero-order hold).
#[allow(clippy::too_many_arguments)]
pub fn step(
    plant: &PlantSpec,
    reference: &Reference,
    gains: &ControllerGains,
    t: f64,
    dt: f64,
    x: &DVector<f64>,
    f_hat: &DVector<f64>,
    guard: &Domain,
) -> Result<DVector<f64>> {
    debug_assert!(dt > 0.0);
    let next = rk4_step_with(plant, reference, gains, t, dt, x, |_, _| f_hat.clone());
    if !guard.contains(&next) {
        return Err(Error::Divergence {
            t: t + dt,
            norm: next.norm(),
        });
    }
    Ok(next)
}

/// Closed-loop step with the compensation re-evaluated at every RK4 stage;
/// test and oracle helper for the delay-free limit.
pub fn step_with_stage_compensation<F>(
    plant: &PlantSpec,
    reference: &Reference,
    gains: &ControllerGains,
    t: f64,
    dt: f64,
    x: &DVector<f64>,
    f_hat_of: F,
) -> DVector<f64>
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    rk4_step_with(plant, reference, gains, t, dt, x, f_hat_of)
}

struct PendingCycle {
    commit_at: f64,
    value: DVector<f64>,
    updated_model: Option<GpModel>,
}

/// Run the closed loop. Deterministic for a fixed `(config, model, delay,
/// trigger, seed)` tuple; the seed only drives measurement noise at trigger
/// times.
pub fn run(
    config: &LoopConfig,
    model: &GpModel,
    delay: &DelayModel,
    trigger: Option<&TriggerPolicy>,
    seed: u64,
) -> Result<SimTrace> {
    config.validate()?;
    delay.validate()?;
    let plant = &config.plant;
    let n = plant.dim();
    let guard = plant.domain().scaled(config.guard_factor);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = config.reference.state(0.0);
    if let Some(e0) = &config.initial_error {
        x += e0;
    }
    let mut current_model = model.clone();
    let mut f_hat = DVector::zeros(n);
    let mut trace = SimTrace::default();
    trace.push_row(0.0, &x, &config.reference.state(0.0), &f_hat, current_model.len());

    let start_cycle = |t_k: f64,
                           x_k: &DVector<f64>,
                           model_in: &GpModel,
                           trace: &mut SimTrace,
                           rng: &mut ChaCha8Rng|
     -> Result<PendingCycle> {
        let mut updated_model = None;
        if let Some(policy) = trigger {
            let eta = eta_vector(model_in, x_k, policy.bc.eta.beta, &policy.bc.eta.gamma_per_dim)?;
            let e_norm = (x_k - config.reference.state(t_k)).norm();
            let upsilon = threshold(e_norm, policy);
            let fired = should_update(eta.norm(), upsilon);
            let mut applied = false;
            if fired && plant.domain().contains(x_k) {
                let fx = plant.f(x_k);
                let y = DVector::from_fn(n, |i, _| {
                    let noise = Normal::new(0.0, model_in.noise_std()[i])
                        .expect("positive noise std")
                        .sample(rng);
                    fx[i] + noise
                });
                let room = apply_deletion(model_in, policy)?;
                updated_model = Some(room.add_sample(x_k, &y)?);
                applied = true;
            }
            trace.triggers.push(TriggerEvent {
                at: t_k,
                eta_norm: eta.norm(),
                upsilon,
                fired,
                applied,
            });
        }
        let active = updated_model.as_ref().unwrap_or(model_in);
        let value = active.posterior_mean(x_k);
        let data_size = active.len();
        let delta = delay.delay(data_size);
        let commit_at = t_k + delta;
        trace.schedule.push(ScheduleEvent {
            index: trace.schedule.len(),
            started_at: t_k,
            delay: delta,
            commit_at,
            state_read: x_k.clone(),
            committed: value.clone(),
            data_size,
        });
        Ok(PendingCycle {
            commit_at,
            value,
            updated_model,
        })
    };

    let mut t = 0.0;
    let mut pending = start_cycle(0.0, &x, &current_model, &mut trace, &mut rng)?;

    while t < config.horizon {
        let t_target = pending.commit_at.min(config.horizon);
        while t < t_target {
            // Sub-step so the segment ends exactly on the schedule time.
            let remaining = t_target - t;
            let land = remaining <= config.dt * (1.0 + 1e-9);
            let h = if land { remaining } else { config.dt };
            x = step(plant, &config.reference, &config.gains, t, h, &x, &f_hat, &guard)?;
            t = if land { t_target } else { t + h };
            trace.push_row(
                t,
                &x,
                &config.reference.state(t),
                &f_hat,
                current_model.len(),
            );
        }
        if pending.commit_at > config.horizon {
            break;
        }
        // Commit: the prediction (and update, if any) becomes visible for
        // every t strictly beyond the commit time.
        f_hat = pending.value.clone();
        if let Some(m) = pending.updated_model.take() {
            current_model = m;
        }
        let t_k = pending.commit_at;
        pending = start_cycle(t_k, &x, &current_model, &mut trace, &mut rng)?;
    }
    Ok(trace)
}
