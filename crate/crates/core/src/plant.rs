//! Controllable-canonical plant, reference trajectories, and the tracking
//! control law.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::check_spd;

pub type VectorField = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type TimeMap = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Chained-integrator plant of order `m` with `n`-dimensional blocks:
/// only the highest derivative is actuated, `qdot_m = f(x) + u`.
#[derive(Clone)]
pub struct PlantSpec {
    order: usize,
    dim: usize,
    f: VectorField,
    domain: Domain,
}

impl std::fmt::Debug for PlantSpec {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("PlantSpec")
            .field("order", &self.order)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .finish()
    }
}

impl PlantSpec {
    pub fn new(order: usize, dim: usize, f: VectorField, domain: Domain) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(Error::InvalidArgument(
                "plant order and dimension must be at least 1".to_string(),
            ));
        }
        if domain.dim() != order * dim {
            return Err(Error::DimensionMismatch {
                context: "plant domain",
                expected: order * dim,
                got: domain.dim(),
            });
        }
        Ok(Self {
            order,
            dim,
            f,
            domain,
        })
    }

    /// Second-order scalar benchmark plant:
    /// `f(x) = sin(x1) + 0.5 / (1 + exp(x2 / 10))` on `[-1.5, 1.5]^2`.
    pub fn sine_sigmoid() -> Self {
        let f: VectorField = Arc::new(|x: &DVector<f64>| {
            DVector::from_element(1, x[0].sin() + 0.5 / (1.0 + (x[1] / 10.0).exp()))
        });
        Self::new(2, 1, f, Domain::symmetric(1.5, 2).unwrap()).unwrap()
    }

    /// Plant with `f = 0` (pure integrator chain).
    pub fn integrator_chain(order: usize, dim: usize, domain: Domain) -> Result<Self> {
        let f: VectorField = Arc::new(move |_x: &DVector<f64>| DVector::zeros(dim));
        Self::new(order, dim, f, domain)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn state_dim(&self) -> usize {
        self.order * self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }

    pub fn f_field(&self) -> VectorField {
        Arc::clone(&self.f)
    }

    /// State derivative under input `u`: the integrator chain with `f + u`
    /// driving the last block.
    pub fn derivative(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mn = self.state_dim();
        let mut dx = DVector::zeros(mn);
        for i in 0..mn - n {
            dx[i] = x[i + n];
        }
        let fx = self.f(x);
        for j in 0..n {
            dx[mn - n + j] = fx[j] + u[j];
        }
        dx
    }
}

/// Reference trajectory: the state reference `x_d` stacked with the
/// feed-forward derivative of its last block, plus declared bounds.
#[derive(Clone)]
pub struct Reference {
    order: usize,
    dim: usize,
    map: TimeMap,
    /// Upper bound on `||xdot_d||`.
    pub f_d: f64,
    /// Upper bound on `||x_d||`.
    pub sup_state: f64,
    /// Upper bound on `||qdot_{d,m}||`.
    pub sup_feedforward: f64,
}

impl std::fmt::Debug for Reference {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("Reference")
            .field("order", &self.order)
            .field("dim", &self.dim)
            .field("f_d", &self.f_d)
            .field("sup_state", &self.sup_state)
            .field("sup_feedforward", &self.sup_feedforward)
            .finish()
    }
}

/// Step used in the construction-time derivative-chain check.
const CHAIN_CHECK_STEP: f64 = 1e-2;

impl Reference {
    /// Wrap a closed-form reference. `map(t)` must return `m*n + n` values:
    /// the `m` reference blocks followed by the derivative of the last block.
    /// The block chain `qdot_{d,i} = q_{d,i+1}` is validated by fourth-order
    /// finite differences at sampled times.
    pub fn new(
        order: usize,
        dim: usize,
        map: TimeMap,
        f_d: f64,
        sup_state: f64,
        sup_feedforward: f64,
    ) -> Result<Self> {
        let r = Self {
            order,
            dim,
            map,
            f_d,
            sup_state,
            sup_feedforward,
        };
        r.validate_chain()?;
        Ok(r)
    }

    /// Sinusoidal reference `q_{d,1} = a sin(omega t)` with the derivative
    /// chain filled in analytically; every scalar block repeats across `dim`.
    pub fn sinusoid(order: usize, dim: usize, amplitude: f64, omega: f64) -> Result<Self> {
        let m = order;
        let n = dim;
        let map: TimeMap = Arc::new(move |t: f64| {
            DVector::from_fn(m * n + n, |idx, _| {
                let block = idx / n;
                // d^block/dt^block of a sin(omega t)
                let phase = omega * t + block as f64 * std::f64::consts::FRAC_PI_2;
                amplitude * omega.powi(block as i32) * phase.sin()
            })
        });
        // Bounds from dense sampling over one period (exact for pure
        // sinusoids up to sampler resolution; max attained at samples for
        // the common amplitude/omega = 1 case).
        let period = 2.0 * std::f64::consts::PI / omega;
        let samples = 65_536;
        let mut sup_state: f64 = 0.0;
        let mut sup_dot: f64 = 0.0;
        let mut sup_ff: f64 = 0.0;
        for i in 0..samples {
            let t = period * i as f64 / samples as f64;
            let v = map(t);
            let state = v.rows(0, m * n).norm();
            let ff = v.rows(m * n, n).norm();
            // xdot_d stacks blocks 2..=m+1
            let mut dot2 = 0.0;
            for idx in n..(m * n + n) {
                dot2 += v[idx] * v[idx];
            }
            sup_state = sup_state.max(state);
            sup_ff = sup_ff.max(ff);
            sup_dot = sup_dot.max(dot2.sqrt());
        }
        Self::new(order, dim, map, sup_dot, sup_state, sup_ff)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reference state `x_d(t)` (length `m*n`).
    pub fn state(&self, t: f64) -> DVector<f64> {
        let v = (self.map)(t);
        v.rows(0, self.order * self.dim).into_owned()
    }

    /// Feed-forward derivative `qdot_{d,m}(t)` (length `n`).
    pub fn feedforward(&self, t: f64) -> DVector<f64> {
        let v = (self.map)(t);
        v.rows(self.order * self.dim, self.dim).into_owned()
    }

    fn validate_chain(&self) -> Result<()> {
        let h = CHAIN_CHECK_STEP;
        let tol = 1e-6 * h;
        let n = self.dim;
        for k in 0..20 {
            let t = 0.05 + 0.487 * k as f64;
            let stencil: Vec<DVector<f64>> = (-2..=2)
                .map(|s| (self.map)(t + s as f64 * h))
                .collect();
            let at_t = &stencil[2];
            for block in 0..self.order {
                for j in 0..n {
                    let idx = block * n + j;
                    let deriv = (-stencil[4][idx] + 8.0 * stencil[3][idx] - 8.0 * stencil[1][idx]
                        + stencil[0][idx])
                        / (12.0 * h);
                    let next = at_t[(block + 1) * n + j];
                    if (deriv - next).abs() > tol {
                        return Err(Error::InvalidArgument(format!(
                            "reference chain broken at block {block}, t = {t}: \
                             d/dt component {idx} = {deriv} but next block gives {next}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Feedback gains and the Lyapunov right-hand side.
#[derive(Debug, Clone)]
pub struct ControllerGains {
    pub lambdas: Vec<DMatrix<f64>>,
    pub q_matrix: DMatrix<f64>,
}

impl ControllerGains {
    pub fn new(lambdas: Vec<DMatrix<f64>>, q_matrix: DMatrix<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("need at least one gain".to_string()));
        }
        let n = lambdas[0].nrows();
        for (i, l) in lambdas.iter().enumerate() {
            if l.nrows() != n || l.ncols() != n {
                return Err(Error::InvalidArgument(format!(
                    "gain {i} must be {n}x{n}, got {}x{}",
                    l.nrows(),
                    l.ncols()
                )));
            }
        }
        let mn = lambdas.len() * n;
        if q_matrix.nrows() != mn || q_matrix.ncols() != mn {
            return Err(Error::DimensionMismatch {
                context: "q_matrix",
                expected: mn,
                got: q_matrix.nrows(),
            });
        }
        check_spd(&q_matrix, "Q")?;
        Ok(Self { lambdas, q_matrix })
    }

    /// Scalar gains for an `m`-th order plant with `n = 1`.
    pub fn scalar(gains: &[f64], q_matrix: DMatrix<f64>) -> Result<Self> {
        let lambdas = gains
            .iter()
            .map(|&g| DMatrix::from_element(1, 1, g))
            .collect();
        Self::new(lambdas, q_matrix)
    }

    pub fn order(&self) -> usize {
        self.lambdas.len()
    }

    pub fn dim(&self) -> usize {
        self.lambdas[0].nrows()
    }

    /// Row block `[Lambda_1, ..., Lambda_m]`.
    pub fn stacked(&self) -> DMatrix<f64> {
        let n = self.dim();
        let m = self.order();
        let mut s = DMatrix::zeros(n, m * n);
        for (i, l) in self.lambdas.iter().enumerate() {
            s.view_mut((0, i * n), (n, n)).copy_from(l);
        }
        s
    }
}

/// Companion matrices of the closed-loop error dynamics:
/// identity super-diagonal blocks, gain blocks in the last row,
/// `B = [0; I_n]`.
pub fn build_companion(gains: &ControllerGains) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = gains.order();
    let n = gains.dim();
    let mn = m * n;
    let mut a = DMatrix::zeros(mn, mn);
    if m > 1 {
        a.view_mut((0, n), (mn - n, mn - n))
            .copy_from(&DMatrix::identity(mn - n, mn - n));
    }
    a.view_mut((mn - n, 0), (n, mn)).copy_from(&gains.stacked());
    let mut b = DMatrix::zeros(mn, n);
    b.view_mut((mn - n, 0), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    (a, b)
}

/// Control law `u = qdot_{d,m} - f_hat + sum_i Lambda_i e_i` with the
/// supplied (possibly stale) compensation `f_hat`.
pub fn control_input(
    t: f64,
    x: &DVector<f64>,
    reference: &Reference,
    f_hat: &DVector<f64>,
    gains: &ControllerGains,
) -> DVector<f64> {
    let n = gains.dim();
    let xd = reference.state(t);
    let mut u = reference.feedforward(t) - f_hat;
    for (i, l) in gains.lambdas.iter().enumerate() {
        let e_i = x.rows(i * n, n) - xd.rows(i * n, n);
        u += l * e_i;
    }
    u
}
