//! Uniform high-probability GP prediction-error bound and its constants.
//!
//! The pointwise bound is `eta(x) = sqrt(beta) * sigma(x) + gamma`, held per
//! output dimension and concatenated into a vector whose Euclidean norm is
//! compared against thresholds downstream. `beta` comes from a covering
//! argument over the box domain with grid factor `tau`; `gamma` collects the
//! Lipschitz constants of the posterior and of the latent function.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::grid::TensorGrid;
use crate::par;

/// Confidence and covering parameters of the uniform bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundParams {
    /// Failure probability, in (0, 1).
    pub delta: f64,
    /// Grid factor of the covering argument.
    pub tau: f64,
    pub domain: Domain,
}

impl BoundParams {
    pub fn new(delta: f64, tau: f64, domain: Domain) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {tau}"
            )));
        }
        Ok(Self { delta, tau, domain })
    }
}

/// Lipschitz constants entering `gamma`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LipschitzConstants {
    pub l_f: f64,
    pub l_mu: f64,
    pub l_sigma: f64,
}

impl LipschitzConstants {
    pub fn new(l_f: f64, l_mu: f64, l_sigma: f64) -> Result<Self> {
        for (name, v) in [("l_f", l_f), ("l_mu", l_mu), ("l_sigma", l_sigma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        Ok(Self { l_f, l_mu, l_sigma })
    }
}

/// Scaling and offset of the pointwise bound, plus its extrema over the domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EtaBound {
    pub beta: f64,
    /// One offset per output dimension.
    pub gamma_per_dim: Vec<f64>,
    /// `sup_x ||eta(x)||` over the evaluation grid.
    pub eta_sup: f64,
    /// Closed-form floor `|| [sqrt(beta) sigma_{o,i} + gamma_i] ||`.
    pub eta_inf: f64,
}

impl EtaBound {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.eta_inf > self.eta_sup {
            return Err(Error::InvalidArgument(format!(
                "eta_inf {} exceeds eta_sup {}",
                self.eta_inf, self.eta_sup
            )));
        }
        Ok(())
    }
}

/// `beta = 2 sum_j log(sqrt(d)/(2 tau) * (hi_j - lo_j) + 1) - 2 log(delta)`,
/// natural logarithms, `d` the state dimension.
pub fn compute_beta(bp: &BoundParams) -> f64 {
    let d = bp.domain.dim() as f64;
    let sum: f64 = bp
        .domain
        .intervals()
        .iter()
        .map(|&(lo, hi)| (d.sqrt() / (2.0 * bp.tau) * (hi - lo) + 1.0).ln())
        .sum();
    2.0 * sum - 2.0 * bp.delta.ln()
}

/// `gamma = (sqrt(beta) L_sigma + L_f + L_mu) tau`.
pub fn compute_gamma(beta: f64, lip: &LipschitzConstants, tau: f64) -> f64 {
    (beta.sqrt() * lip.l_sigma + lip.l_f + lip.l_mu) * tau
}

/// Per-dimension bound values `eta_i(x) = sqrt(beta) sigma_i(x) + gamma_i`.
pub fn eta_vector(model: &GpModel, x: &DVector<f64>, beta: f64, gammas: &[f64]) -> Result<DVector<f64>> {
    let (_, std) = model.posterior(x)?;
    debug_assert_eq!(std.len(), gammas.len());
    Ok(DVector::from_fn(std.len(), |i, _| {
        beta.sqrt() * std[i] + gammas[i]
    }))
}

/// `||eta(x)||` for the concatenated per-dimension bounds.
pub fn eta_at(model: &GpModel, x: &DVector<f64>, eb: &EtaBound) -> Result<f64> {
    Ok(eta_vector(model, x, eb.beta, &eb.gamma_per_dim)?.norm())
}

/// Max finite-difference Jacobian norm of `field` over a grid, inflated by
/// `safety_factor`. Errors when the step leaves a single point on some axis.
pub fn estimate_lipschitz<F>(
    field: F,
    domain: &Domain,
    grid_step: f64,
    safety_factor: f64,
) -> Result<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Sync,
{
    let grid = TensorGrid::from_step(domain, grid_step)?;
    let values = par::map(grid.len(), |i| field(&grid.point(i)));
    Ok(grid.max_jacobian_norm(&values) * safety_factor)
}

/// Grid extrema of the bound: `eta_sup` by grid search, `eta_inf` in closed
/// form from the observation-noise floor.
pub fn eta_extrema(
    model: &GpModel,
    beta: f64,
    gammas: &[f64],
    domain: &Domain,
    grid_step: f64,
) -> Result<(f64, f64)> {
    let grid = TensorGrid::from_step(domain, grid_step)?;
    let norms = par::map(grid.len(), |i| {
        eta_vector(model, &grid.point(i), beta, gammas)
            .map(|v| v.norm())
            .unwrap_or(f64::NAN)
    });
    let sup = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    let inf = eta_floor(model.noise_std(), beta, gammas);
    Ok((sup, inf))
}

/// `|| [sqrt(beta) sigma_{o,i} + gamma_i] ||`.
pub fn eta_floor(noise_std: &[f64], beta: f64, gammas: &[f64]) -> f64 {
    noise_std
        .iter()
        .zip(gammas)
        .map(|(&s, &g)| {
            let v = beta.sqrt() * s + g;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Per-dimension Lipschitz estimates of a fitted model's posterior mean and
/// standard deviation over one shared grid.
#[derive(Debug, Clone)]
pub struct ModelLipschitz {
    pub l_mu: Vec<f64>,
    pub l_sigma: Vec<f64>,
}

pub fn estimate_model_lipschitz(
    model: &GpModel,
    domain: &Domain,
    grid_step: f64,
    safety_factor: f64,
) -> Result<ModelLipschitz> {
    let grid = TensorGrid::from_step(domain, grid_step)?;
    let evals = par::map(grid.len(), |i| {
        model
            .posterior(&grid.point(i))
            .expect("grid point has the model's input dimension")
    });
    let out = model.output_dim();
    let mut l_mu = Vec::with_capacity(out);
    let mut l_sigma = Vec::with_capacity(out);
    for dim in 0..out {
        let means: Vec<f64> = evals.iter().map(|(m, _)| m[dim]).collect();
        let stds: Vec<f64> = evals.iter().map(|(_, s)| s[dim]).collect();
        l_mu.push(grid.max_gradient_norm(&means) * safety_factor);
        l_sigma.push(grid.max_gradient_norm(&stds) * safety_factor);
    }
    Ok(ModelLipschitz { l_mu, l_sigma })
}

/// Assemble the full bound for a fitted model: per-dimension `gamma`, grid
/// `eta_sup`, closed-form `eta_inf`. `l_f_per_dim` holds one Lipschitz
/// constant of the latent function per output dimension.
pub fn compute_eta_bound(
    model: &GpModel,
    bp: &BoundParams,
    l_f_per_dim: &[f64],
    grid_step: f64,
    safety_factor: f64,
) -> Result<EtaBound> {
    if l_f_per_dim.len() != model.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "l_f_per_dim",
            expected: model.output_dim(),
            got: l_f_per_dim.len(),
        });
    }
    let beta = compute_beta(bp);
    let ml = estimate_model_lipschitz(model, &bp.domain, grid_step, safety_factor)?;
    let gammas: Vec<f64> = (0..model.output_dim())
        .map(|i| {
            let lip = LipschitzConstants::new(l_f_per_dim[i], ml.l_mu[i], ml.l_sigma[i])
                .expect("grid estimates are nonnegative");
            compute_gamma(beta, &lip, bp.tau)
        })
        .collect();
    let (eta_sup, eta_inf) = eta_extrema(model, beta, &gammas, &bp.domain, grid_step)?;
    let eb = EtaBound {
        beta,
        gamma_per_dim: gammas,
        eta_sup,
        eta_inf,
    };
    eb.validate()?;
    Ok(eb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelParams;

    fn box2() -> Domain {
        Domain::symmetric(1.5, 2).unwrap()
    }

    #[test]
    fn beta_matches_hand_evaluation() {
        // 2 * 2 * ln(sqrt(2)/0.2 * 3 + 1) + 2 * ln(100)
        let bp = BoundParams::new(0.01, 0.1, box2()).unwrap();
        let beta = compute_beta(&bp);
        let expected = 4.0 * (2.0f64.sqrt() / 0.2 * 3.0 + 1.0).ln() - 2.0 * 0.01f64.ln();
        assert!((beta - expected).abs() < 1e-12);
        assert!((beta - 21.614).abs() < 1e-3);
    }

    #[test]
    fn beta_vanishes_for_degenerate_domain_and_full_confidence() {
        // delta -> 1 and hi == lo make both terms log(1) = 0. The Domain type
        // rejects hi == lo, so evaluate the formula terms directly.
        let d = 1.0f64;
        let term = (d.sqrt() / (2.0 * 0.1) * 0.0 + 1.0).ln();
        assert_eq!(2.0 * term - 2.0 * 1.0f64.ln(), 0.0);
    }

    #[test]
    fn beta_monotone_in_tau_and_delta() {
        let d = box2();
        let b1 = compute_beta(&BoundParams::new(0.01, 0.1, d.clone()).unwrap());
        let b2 = compute_beta(&BoundParams::new(0.01, 0.05, d.clone()).unwrap());
        assert!(b2 > b1, "halving tau must increase beta");
        let b3 = compute_beta(&BoundParams::new(0.001, 0.1, d).unwrap());
        assert!(b3 > b1, "decreasing delta must increase beta");
    }

    #[test]
    fn gamma_linear_in_tau() {
        let lip = LipschitzConstants::new(1.0, 1.0, 1.0).unwrap();
        let g = compute_gamma(4.0, &lip, 0.1);
        assert!((g - 0.4).abs() < 1e-15);
        assert_eq!(compute_gamma(4.0, &lip, 0.2), 2.0 * g);
        let zero = LipschitzConstants::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(compute_gamma(4.0, &zero, 0.1), 0.0);
    }

    #[test]
    fn eta_on_empty_model_is_prior_level() {
        let model = GpModel::new(KernelParams::new(1.0, 0.2).unwrap(), box2(), vec![0.01]).unwrap();
        let eb = EtaBound {
            beta: 4.0,
            gamma_per_dim: vec![0.3],
            eta_sup: 0.0,
            eta_inf: 0.0,
        };
        let x = DVector::from_column_slice(&[0.2, -0.4]);
        let eta = eta_at(&model, &x, &eb).unwrap();
        // prior std is sigma_f = 1
        assert!((eta - (2.0 * 1.0 + 0.3)).abs() < 1e-12);
    }

    #[test]
    fn eta_extrema_constant_on_empty_model() {
        let model = GpModel::new(KernelParams::new(1.0, 0.2).unwrap(), box2(), vec![0.01]).unwrap();
        let (sup, inf) = eta_extrema(&model, 4.0, &[0.0], &box2(), 0.25).unwrap();
        assert!((sup - 2.0).abs() < 1e-12);
        assert!((inf - 2.0 * 0.01).abs() < 1e-12);
    }

    #[test]
    fn eta_floor_matches_hand_value() {
        // sqrt(21.614) * 0.01 with gamma = 0
        let inf = eta_floor(&[0.01], 21.614, &[0.0]);
        assert!((inf - 0.0465).abs() < 1e-4);
    }

    #[test]
    fn lipschitz_of_constant_and_linear_fields() {
        let domain = box2();
        let zero = estimate_lipschitz(|_: &DVector<f64>| DVector::from_element(1, 3.0), &domain, 0.1, 1.0)
            .unwrap();
        assert_eq!(zero, 0.0);
        let linear =
            estimate_lipschitz(|x: &DVector<f64>| DVector::from_element(1, 2.0 * x[0]), &domain, 0.1, 1.0)
                .unwrap();
        assert!((linear - 2.0).abs() < 1e-6);
        assert!(
            (estimate_lipschitz(|x: &DVector<f64>| DVector::from_element(1, 2.0 * x[0]), &domain, 0.1, 1.1)
                .unwrap()
                - 2.2)
                .abs()
                < 1e-6
        );
    }

    #[test]
    fn lipschitz_of_sine_sigmoid_field() {
        // Gradient norm sqrt(cos^2 x1 + (0.05 e^{x2/10} / (1 + e^{x2/10})^2)^2),
        // maximum just above 1 on the box.
        let domain = box2();
        let field = |x: &DVector<f64>| {
            DVector::from_element(1, x[0].sin() + 0.5 / (1.0 + (x[1] / 10.0).exp()))
        };
        let l = estimate_lipschitz(field, &domain, 0.01, 1.0).unwrap();
        assert!((l - 1.0001).abs() < 1e-3, "got {l}");
    }

    #[test]
    fn coarse_grid_rejected() {
        let domain = box2();
        assert!(estimate_lipschitz(
            |_: &DVector<f64>| DVector::zeros(1),
            &domain,
            10.0,
            1.0
        )
        .is_err());
    }
}
