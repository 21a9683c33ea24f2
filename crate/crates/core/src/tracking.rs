//! Constants of the delay-aware tracking bounds and the offline bound itself.

use nalgebra::DMatrix;

use crate::bound::EtaBound;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, symmetric_eig_range};
use crate::lyapunov::is_hurwitz;
use crate::plant::{ControllerGains, Reference};

/// Everything entering the tracking bounds: Lyapunov-derived gains
/// `xi`, `chi`, the excursion constant `F`, reference bounds, the latent
/// function's Lipschitz constant, the GP bound extrema, and the delay bound.
#[derive(Debug, Clone)]
pub struct BoundConstants {
    pub p_matrix: DMatrix<f64>,
    /// `2 ||P|| ||Q^{-1}||`.
    pub xi: f64,
    /// `sqrt(||P^{-1}|| ||P||)`, at least 1.
    pub chi: f64,
    /// Excursion constant of the delayed error dynamics.
    pub f_const: f64,
    /// Bound on the reference velocity `||xdot_d||`.
    pub f_d: f64,
    /// Lipschitz constant of the latent vector field.
    pub l_f: f64,
    pub eta: EtaBound,
    /// Computation-time bound.
    pub delta_bar: f64,
}

impl BoundConstants {
    pub fn eta_sup(&self) -> f64 {
        self.eta.eta_sup
    }

    pub fn eta_inf(&self) -> f64 {
        self.eta.eta_inf
    }
}

/// Assemble the bound constants for a closed loop.
///
/// `delta_bar` must satisfy the small-delay hypothesis
/// `delta_bar < 1 / (2 L_f)`; `F` is undefined otherwise.
#[allow(clippy::too_many_arguments)]
pub fn bound_constants(
    a: &DMatrix<f64>,
    _b: &DMatrix<f64>,
    p: &DMatrix<f64>,
    q: &DMatrix<f64>,
    gains: &ControllerGains,
    l_f: f64,
    eta: EtaBound,
    reference: &Reference,
    domain: &Domain,
    delta_bar: f64,
) -> Result<BoundConstants> {
    is_hurwitz(a)?;
    eta.validate()?;
    if !(delta_bar >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "delta_bar must be nonnegative, got {delta_bar}"
        )));
    }
    if delta_bar >= 1.0 / (2.0 * l_f) {
        return Err(Error::Precondition(format!(
            "delay bound {delta_bar} violates delta_bar < 1/(2 L_f) = {}",
            1.0 / (2.0 * l_f)
        )));
    }
    let (p_min, p_max) = symmetric_eig_range(p);
    let (q_min, _) = symmetric_eig_range(q);
    if p_min <= 0.0 || q_min <= 0.0 {
        return Err(Error::NotPositiveDefinite(
            "P and Q must be positive definite".to_string(),
        ));
    }
    let xi = 2.0 * p_max / q_min;
    let chi = (p_max / p_min).sqrt();

    let sup_x = domain.sup_norm();
    let f_const = (spectral_norm(a) * sup_x
        + spectral_norm(&gains.stacked()) * reference.sup_state
        + reference.sup_feedforward
        + eta.eta_sup)
        / (1.0 - 2.0 * l_f * delta_bar);

    Ok(BoundConstants {
        p_matrix: p.clone(),
        xi,
        chi,
        f_const,
        f_d: reference.f_d,
        l_f,
        eta,
        delta_bar,
    })
}

/// Offline tracking bound `e_bar = chi xi (2 L_f F delta_bar + eta_sup)`.
pub fn tracking_bound_offline(bc: &BoundConstants) -> f64 {
    bc.chi * bc.xi * (2.0 * bc.l_f * bc.f_const * bc.delta_bar + bc.eta.eta_sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lyapunov::solve_lyapunov;
    use crate::plant::build_companion;

    fn benchmark() -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, ControllerGains, Reference) {
        let gains = ControllerGains::scalar(&[-2.0, -2.0], DMatrix::identity(2, 2)).unwrap();
        let (a, b) = build_companion(&gains);
        let q = DMatrix::identity(2, 2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let r = Reference::sinusoid(2, 1, 1.0, 1.0).unwrap();
        (a, b, p, q, gains, r)
    }

    fn eta(sup: f64, inf: f64) -> EtaBound {
        EtaBound {
            beta: 4.0,
            gamma_per_dim: vec![0.0],
            eta_sup: sup,
            eta_inf: inf,
        }
    }

    #[test]
    fn xi_chi_match_benchmark_eigenvalues() {
        // Eigenvalues of P are (1.625 +/- sqrt(1.015625)) / 2.
        let (a, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let bc = bound_constants(&a, &b, &p, &q, &gains, 1.0, eta(0.5, 0.1), &r, &domain, 0.1)
            .unwrap();
        assert!((bc.xi - 2.6328).abs() < 1e-4, "xi = {}", bc.xi);
        assert!((bc.chi - 2.0654).abs() < 1e-3, "chi = {}", bc.chi);
        assert!(bc.chi >= 1.0);
    }

    #[test]
    fn f_const_assembles_known_pieces() {
        let (a, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let l_f = 1.0;
        let delta_bar = 0.1;
        let bc = bound_constants(&a, &b, &p, &q, &gains, l_f, eta(0.5, 0.1), &r, &domain, delta_bar)
            .unwrap();
        let norm_a = spectral_norm(&a);
        assert!((norm_a - 2.9208).abs() < 1e-4);
        let sup_x = domain.sup_norm();
        assert!((sup_x - 2.1213).abs() < 1e-4);
        let stacked = spectral_norm(&gains.stacked());
        assert!((stacked - 8.0f64.sqrt()).abs() < 1e-12);
        let hand = (norm_a * sup_x + stacked * 1.0 + 1.0 + 0.5) / (1.0 - 2.0 * l_f * delta_bar);
        assert!((bc.f_const - hand).abs() < 1e-10);
    }

    #[test]
    fn offline_bound_zero_without_delay_and_model_error() {
        let (a, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let bc = bound_constants(&a, &b, &p, &q, &gains, 1.0, eta(0.0, 0.0), &r, &domain, 0.0)
            .unwrap();
        assert_eq!(tracking_bound_offline(&bc), 0.0);
    }

    #[test]
    fn offline_bound_affine_in_delay_for_fixed_f() {
        let (a, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let bc = bound_constants(&a, &b, &p, &q, &gains, 1.0, eta(0.5, 0.1), &r, &domain, 0.05)
            .unwrap();
        // Vary delta_bar holding F fixed: exact affine with slope 2 chi xi L_f F.
        let slope = 2.0 * bc.chi * bc.xi * bc.l_f * bc.f_const;
        let at = |d: f64| {
            let mut c = bc.clone();
            c.delta_bar = d;
            tracking_bound_offline(&c)
        };
        let d0 = at(0.0);
        for k in 1..=5 {
            let d = 0.02 * k as f64;
            assert!((at(d) - (d0 + slope * d)).abs() < 1e-10);
        }
    }

    #[test]
    fn delay_hypothesis_gate() {
        let (a, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let res = bound_constants(&a, &b, &p, &q, &gains, 1.0, eta(0.5, 0.1), &r, &domain, 0.5);
        assert!(matches!(res, Err(Error::Precondition(_))));
    }

    #[test]
    fn non_hurwitz_refused() {
        let (_, b, p, q, gains, r) = benchmark();
        let domain = Domain::symmetric(1.5, 2).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 1.0]);
        assert!(matches!(
            bound_constants(&bad, &b, &p, &q, &gains, 1.0, eta(0.5, 0.1), &r, &domain, 0.1),
            Err(Error::NotHurwitz { .. })
        ));
    }
}
