//! Declarative experiment configuration.
//!
//! The structure mirrors the TOML config files accepted by the CLI; unknown
//! keys are rejected. `validate` builds every domain object up front so that
//! invariant violations surface before any run starts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bound::BoundParams;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::plant::{ControllerGains, PlantSpec, Reference};
use crate::sim::LoopConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DelaySweep,
    DatasetSweep,
    OnlineTrigger,
    TradeoffSweep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    /// Built-in nonlinearity: `sine-sigmoid` (benchmark system) or `zero`.
    pub nonlinearity: String,
    pub order: usize,
    pub dim: usize,
    /// Per-coordinate `[lo, hi]` intervals.
    pub domain: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Only `sinusoid` is built in.
    pub kind: String,
    pub amplitude: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    /// Scalar gain per block row (plants with dim = 1).
    pub lambdas: Vec<f64>,
    /// Row-major Q; identity when omitted.
    #[serde(default)]
    pub q_matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub signal_std: f64,
    pub lengthscale: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-output-dimension observation noise.
    pub sigma: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    pub delta: f64,
    pub tau: f64,
    /// Inflation applied to every grid Lipschitz estimate.
    pub lipschitz_safety: f64,
    /// Grid step for extrema and Lipschitz estimation; defaults to `tau`.
    #[serde(default)]
    pub grid_step: Option<f64>,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            tau: 0.1,
            lipschitz_safety: 1.1,
            grid_step: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// Initial training-set size.
    pub n0: usize,
    /// Online capacity before oldest-first deletion.
    pub capacity: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n0: 100,
            capacity: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySweepConfig {
    /// Constant computation-time bounds to sweep.
    pub delta_bars: Vec<f64>,
    /// Also run the `f_hat = 0` baseline.
    #[serde(default = "default_true")]
    pub include_baseline: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSweepConfig {
    /// Delay per training sample: `delta_bar = c * n0`.
    pub c: f64,
    /// Training-set sizes to sweep.
    pub n0_values: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OnlineConfig {
    /// Delay bounds `delta_bar = c * capacity^2` to sweep.
    pub delta_bars: Vec<f64>,
    /// Delay of the no-update offline comparison run.
    #[serde(default)]
    pub offline_comparison_delta: Option<f64>,
    /// Desired tracking bound; the minimal admissible bound when omitted.
    #[serde(default)]
    pub e_bar: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeoffConfig {
    pub delta_bar_1: f64,
    pub delta_bar_2: Vec<f64>,
}

fn default_true() -> bool {
    true
}

fn default_seed() -> u64 {
    1
}

fn default_reps() -> usize {
    10
}

fn default_horizon() -> f64 {
    20.0
}

fn default_dt() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub plant: PlantConfig,
    pub reference: ReferenceConfig,
    pub gains: GainsConfig,
    pub kernel: KernelConfig,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub delay_sweep: Option<DelaySweepConfig>,
    #[serde(default)]
    pub dataset_sweep: Option<DatasetSweepConfig>,
    #[serde(default)]
    pub online: Option<OnlineConfig>,
    #[serde(default)]
    pub tradeoff: Option<TradeoffConfig>,
}

impl ExperimentConfig {
    /// Benchmark configuration: second-order sine-sigmoid plant on
    /// `[-1.5, 1.5]^2`, unit sinusoid reference, gains -2/-2, unit Q,
    /// kernel (1, 0.2), noise 0.01.
    pub fn benchmark(kind: ExperimentKind) -> Self {
        let mut cfg = Self {
            kind,
            seed: 1,
            reps: 10,
            horizon: 20.0,
            dt: 1e-3,
            plant: PlantConfig {
                nonlinearity: "sine-sigmoid".to_string(),
                order: 2,
                dim: 1,
                domain: vec![[-1.5, 1.5], [-1.5, 1.5]],
            },
            reference: ReferenceConfig {
                kind: "sinusoid".to_string(),
                amplitude: 1.0,
                omega: 1.0,
            },
            gains: GainsConfig {
                lambdas: vec![-2.0, -2.0],
                q_matrix: None,
            },
            kernel: KernelConfig {
                signal_std: 1.0,
                lengthscale: 0.2,
            },
            noise: NoiseConfig { sigma: vec![0.01] },
            bound: BoundConfig::default(),
            data: DataConfig::default(),
            delay_sweep: None,
            dataset_sweep: None,
            online: None,
            tradeoff: None,
        };
        match kind {
            ExperimentKind::DelaySweep => {
                cfg.delay_sweep = Some(DelaySweepConfig {
                    delta_bars: vec![2.0, 0.5, 0.1, 0.01, 0.001],
                    include_baseline: true,
                });
            }
            ExperimentKind::DatasetSweep => {
                cfg.dataset_sweep = Some(DatasetSweepConfig {
                    c: 0.05,
                    n0_values: (1..=20).map(|k| k * 10).collect(),
                });
            }
            ExperimentKind::OnlineTrigger => {
                cfg.online = Some(OnlineConfig {
                    delta_bars: vec![0.01, 0.1, 0.45],
                    offline_comparison_delta: Some(0.01),
                    e_bar: None,
                });
            }
            ExperimentKind::TradeoffSweep => {
                cfg.tradeoff = Some(TradeoffConfig {
                    delta_bar_1: 0.01,
                    delta_bar_2: vec![0.01, 0.05, 0.1, 0.2],
                });
            }
        }
        cfg
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Build and validate every domain object referenced by this config.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".to_string()));
        }
        let domain = Domain::new(self.plant.domain.iter().map(|&[a, b]| (a, b)).collect())?;
        let plant = match self.plant.nonlinearity.as_str() {
            "sine-sigmoid" => {
                if self.plant.order != 2 || self.plant.dim != 1 {
                    return Err(Error::Config(
                        "sine-sigmoid plant requires order = 2, dim = 1".to_string(),
                    ));
                }
                PlantSpec::new(
                    2,
                    1,
                    PlantSpec::sine_sigmoid().f_field(),
                    domain.clone(),
                )?
            }
            "zero" => PlantSpec::integrator_chain(self.plant.order, self.plant.dim, domain.clone())?,
            other => {
                return Err(Error::Config(format!(
                    "unknown nonlinearity '{other}'; expected sine-sigmoid or zero"
                )));
            }
        };
        if self.reference.kind != "sinusoid" {
            return Err(Error::Config(format!(
                "unknown reference kind '{}'; expected sinusoid",
                self.reference.kind
            )));
        }
        let reference = Reference::sinusoid(
            self.plant.order,
            self.plant.dim,
            self.reference.amplitude,
            self.reference.omega,
        )?;
        if self.plant.dim != 1 {
            return Err(Error::Config(
                "config files support scalar gains only (dim = 1); use the library API for block gains"
                    .to_string(),
            ));
        }
        if self.gains.lambdas.len() != self.plant.order {
            return Err(Error::Config(format!(
                "need {} gains, got {}",
                self.plant.order,
                self.gains.lambdas.len()
            )));
        }
        let mn = self.plant.order * self.plant.dim;
        let q = match &self.gains.q_matrix {
            None => DMatrix::identity(mn, mn),
            Some(rows) => {
                if rows.len() != mn || rows.iter().any(|r| r.len() != mn) {
                    return Err(Error::Config(format!("q_matrix must be {mn}x{mn}")));
                }
                DMatrix::from_fn(mn, mn, |i, j| rows[i][j])
            }
        };
        let gains = ControllerGains::scalar(&self.gains.lambdas, q)?;
        let kernel = KernelParams::new(self.kernel.signal_std, self.kernel.lengthscale)?;
        if self.noise.sigma.len() != self.plant.dim {
            return Err(Error::Config(format!(
                "noise.sigma must have {} entries",
                self.plant.dim
            )));
        }
        let bound_params = BoundParams::new(self.bound.delta, self.bound.tau, domain.clone())?;
        if !(self.bound.lipschitz_safety >= 1.0) {
            return Err(Error::Config(
                "bound.lipschitz_safety must be at least 1".to_string(),
            ));
        }
        let grid_step = self.bound.grid_step.unwrap_or(self.bound.tau);
        if self.data.capacity < 1 {
            return Err(Error::Config("data.capacity must be at least 1".to_string()));
        }

        match self.kind {
            ExperimentKind::DelaySweep => {
                let ds = self
                    .delay_sweep
                    .as_ref()
                    .ok_or_else(|| Error::Config("delay-sweep needs [delay_sweep]".to_string()))?;
                if ds.delta_bars.is_empty() {
                    return Err(Error::Config("delay_sweep.delta_bars is empty".to_string()));
                }
                if ds.delta_bars.iter().any(|&d| !(d > 0.0)) {
                    return Err(Error::Config("delta_bars must be positive".to_string()));
                }
            }
            ExperimentKind::DatasetSweep => {
                let ds = self.dataset_sweep.as_ref().ok_or_else(|| {
                    Error::Config("dataset-sweep needs [dataset_sweep]".to_string())
                })?;
                if !(ds.c >= 0.0) {
                    return Err(Error::Config("dataset_sweep.c must be nonnegative".to_string()));
                }
                if ds.n0_values.is_empty() || ds.n0_values.contains(&0) {
                    return Err(Error::Config(
                        "dataset_sweep.n0_values must be nonempty positive sizes".to_string(),
                    ));
                }
            }
            ExperimentKind::OnlineTrigger => {
                let oc = self
                    .online
                    .as_ref()
                    .ok_or_else(|| Error::Config("online-trigger needs [online]".to_string()))?;
                if oc.delta_bars.is_empty() {
                    return Err(Error::Config("online.delta_bars is empty".to_string()));
                }
            }
            ExperimentKind::TradeoffSweep => {
                let tc = self
                    .tradeoff
                    .as_ref()
                    .ok_or_else(|| Error::Config("tradeoff needs [tradeoff]".to_string()))?;
                if tc.delta_bar_2.is_empty() {
                    return Err(Error::Config("tradeoff.delta_bar_2 is empty".to_string()));
                }
            }
        }

        let mut loop_config = LoopConfig::new(plant, reference, gains);
        loop_config.horizon = self.horizon;
        loop_config.dt = self.dt;
        loop_config.validate()?;

        Ok(Resolved {
            config: self.clone(),
            loop_config,
            kernel,
            noise_std: self.noise.sigma.clone(),
            bound_params,
            lipschitz_safety: self.bound.lipschitz_safety,
            grid_step,
        })
    }
}

/// Validated configuration with every domain object constructed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub loop_config: LoopConfig,
    pub kernel: KernelParams,
    pub noise_std: Vec<f64>,
    pub bound_params: BoundParams,
    pub lipschitz_safety: f64,
    pub grid_step: f64,
}
