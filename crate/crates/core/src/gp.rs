//! Exact Gaussian process regression, one GP per output dimension.
//!
//! All output dimensions share the training inputs, so a single Gram
//! factorization is shared whenever the per-dimension noise levels are equal;
//! otherwise one factor is kept per dimension. Sample addition extends the
//! factor by one row, deletion downdates it, and the model refactorizes from
//! scratch whenever drift is detected.

use nalgebra::DVector;

use crate::chol::CholFactor;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::kernel::{gram_matrix, kernel_vector, KernelParams};

/// Mutations between automatic reconstruction checks of the factor.
const VERIFY_INTERVAL: u32 = 64;
/// Relative Frobenius drift that triggers a full refactorization.
const DRIFT_TOL: f64 = 1e-8;

/// Training inputs and noisy targets.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub inputs: Vec<DVector<f64>>,
    pub targets: Vec<DVector<f64>>,
    pub noise_std: Vec<f64>,
}

impl TrainingSet {
    pub fn empty(noise_std: Vec<f64>) -> Self {
        Self {
            inputs: Vec::new(),
            targets: Vec::new(),
            noise_std,
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Targets of a single output dimension as one vector.
    fn targets_of_dim(&self, dim: usize) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.targets.iter().map(|y| y[dim]))
    }
}

/// Per-output-dimension exact GP sharing one set of training inputs.
#[derive(Debug, Clone)]
pub struct GpModel {
    params: KernelParams,
    domain: Domain,
    data: TrainingSet,
    /// One factor if all noise levels coincide, else one per dimension.
    factors: Vec<CholFactor>,
    shared_factor: bool,
    /// Per-dimension solves `(K + sigma_i^2 I)^{-1} y_i`.
    target_weights: Vec<DVector<f64>>,
    mutations_since_verify: u32,
}

impl GpModel {
    /// Empty prior model.
    pub fn new(params: KernelParams, domain: Domain, noise_std: Vec<f64>) -> Result<Self> {
        if noise_std.is_empty() {
            return Err(Error::InvalidArgument(
                "need at least one output dimension".to_string(),
            ));
        }
        for (i, &s) in noise_std.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "noise_std[{i}] must be positive, got {s}"
                )));
            }
        }
        let shared_factor = noise_std.windows(2).all(|w| w[0] == w[1]);
        let n_factors = if shared_factor { 1 } else { noise_std.len() };
        let out_dim = noise_std.len();
        Ok(Self {
            params,
            domain,
            data: TrainingSet::empty(noise_std),
            factors: vec![CholFactor::empty(); n_factors],
            shared_factor,
            target_weights: vec![DVector::zeros(0); out_dim],
            mutations_since_verify: 0,
        })
    }

    /// Batch fit on a full data set.
    pub fn fit(
        params: KernelParams,
        domain: Domain,
        inputs: Vec<DVector<f64>>,
        targets: Vec<DVector<f64>>,
        noise_std: Vec<f64>,
    ) -> Result<Self> {
        let mut model = Self::new(params, domain, noise_std)?;
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                context: "training set",
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        for (x, y) in inputs.iter().zip(&targets) {
            model.check_sample(x, y)?;
        }
        model.data.inputs = inputs;
        model.data.targets = targets;
        model.refactor()?;
        Ok(model)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn output_dim(&self) -> usize {
        self.data.noise_std.len()
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn data(&self) -> &TrainingSet {
        &self.data
    }

    pub fn noise_std(&self) -> &[f64] {
        &self.data.noise_std
    }

    fn check_sample(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        self.domain.check_contains(x)?;
        if y.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "training target",
                expected: self.output_dim(),
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Diagonal ridge per factor: one shared value or one per dimension.
    fn ridges(&self) -> Vec<f64> {
        if self.shared_factor {
            vec![self.data.noise_std[0] * self.data.noise_std[0]]
        } else {
            self.data.noise_std.iter().map(|s| s * s).collect()
        }
    }

    fn refactor(&mut self) -> Result<()> {
        for (i, ridge) in self.ridges().into_iter().enumerate() {
            let gram = gram_matrix(&self.data.inputs, &self.params, ridge);
            self.factors[i] = CholFactor::factor(&gram)?;
        }
        self.recompute_weights();
        self.mutations_since_verify = 0;
        Ok(())
    }

    fn recompute_weights(&mut self) {
        for dim in 0..self.output_dim() {
            let y = self.data.targets_of_dim(dim);
            let factor = if self.shared_factor {
                &self.factors[0]
            } else {
                &self.factors[dim]
            };
            self.target_weights[dim] = factor.solve(&y);
        }
    }

    /// Periodic drift check; refactors when `L L^T` no longer reconstructs
    /// the Gram matrix to within `DRIFT_TOL`.
    fn maybe_verify(&mut self) -> Result<()> {
        self.mutations_since_verify += 1;
        if self.mutations_since_verify < VERIFY_INTERVAL {
            return Ok(());
        }
        self.mutations_since_verify = 0;
        let drifted = {
            let noise = &self.data.noise_std;
            let drift_of = |f: &CholFactor, ridge: f64| {
                let gram = gram_matrix(&self.data.inputs, &self.params, ridge);
                f.reconstruction_error(&gram)
            };
            if self.shared_factor {
                drift_of(&self.factors[0], noise[0] * noise[0]) > DRIFT_TOL
            } else {
                self.factors
                    .iter()
                    .zip(noise)
                    .any(|(f, s)| drift_of(f, s * s) > DRIFT_TOL)
            }
        };
        if drifted {
            self.refactor()?;
        }
        Ok(())
    }

    /// Posterior mean and standard deviation, one entry per output dimension.
    /// Round-off negatives in the variance are clamped to zero.
    pub fn posterior(&self, x: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let out = self.output_dim();
        if self.is_empty() {
            return Ok((
                DVector::zeros(out),
                DVector::from_element(out, self.params.signal_std),
            ));
        }
        let k_x = kernel_vector(&self.data.inputs, x, &self.params);
        let prior = self.params.prior_variance();
        let mut mean = DVector::zeros(out);
        let mut std = DVector::zeros(out);
        if self.shared_factor {
            let v = self.factors[0].solve_lower(&k_x);
            let var = (prior - v.norm_squared()).max(0.0);
            let s = var.sqrt();
            for dim in 0..out {
                mean[dim] = k_x.dot(&self.target_weights[dim]);
                std[dim] = s;
            }
        } else {
            for dim in 0..out {
                let v = self.factors[dim].solve_lower(&k_x);
                mean[dim] = k_x.dot(&self.target_weights[dim]);
                std[dim] = (prior - v.norm_squared()).max(0.0).sqrt();
            }
        }
        Ok((mean, std))
    }

    /// Posterior mean only; skips the variance solve.
    pub fn posterior_mean(&self, x: &DVector<f64>) -> DVector<f64> {
        let out = self.output_dim();
        if self.is_empty() {
            return DVector::zeros(out);
        }
        let k_x = kernel_vector(&self.data.inputs, x, &self.params);
        DVector::from_fn(out, |dim, _| k_x.dot(&self.target_weights[dim]))
    }

    /// New model with `(x, y)` appended to the training set.
    pub fn add_sample(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<GpModel> {
        self.check_sample(x, y)?;
        let mut next = self.clone();
        let k_x = kernel_vector(&next.data.inputs, x, &next.params);
        let prior = next.params.prior_variance();
        let mut incremental_ok = true;
        for (i, ridge) in next.ridges().into_iter().enumerate() {
            if next.factors[i].append(&k_x, prior + ridge).is_err() {
                incremental_ok = false;
                break;
            }
        }
        next.data.inputs.push(x.clone());
        next.data.targets.push(y.clone());
        if incremental_ok {
            next.recompute_weights();
            next.maybe_verify()?;
        } else {
            next.refactor()?;
        }
        Ok(next)
    }

    /// New model with training sample `index` removed.
    pub fn delete_sample(&self, index: usize) -> Result<GpModel> {
        if index >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "delete index {index} out of range for {} samples",
                self.len()
            )));
        }
        let mut next = self.clone();
        for f in &mut next.factors {
            f.remove(index)?;
        }
        next.data.inputs.remove(index);
        next.data.targets.remove(index);
        next.recompute_weights();
        next.maybe_verify()?;
        Ok(next)
    }

    /// Fresh batch fit on this model's current data.
    pub fn refit(&self) -> Result<GpModel> {
        GpModel::fit(
            self.params,
            self.domain.clone(),
            self.data.inputs.clone(),
            self.data.targets.clone(),
            self.data.noise_std.clone(),
        )
    }
}
