//! Squared-exponential kernel.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters of the squared-exponential kernel
/// `k(x, x') = signal_std^2 * exp(-||x - x'||^2 / (2 * lengthscale^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_std: f64,
    pub lengthscale: f64,
}

impl KernelParams {
    pub fn new(signal_std: f64, lengthscale: f64) -> Result<Self> {
        if !(signal_std > 0.0) || !signal_std.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "signal_std must be positive, got {signal_std}"
            )));
        }
        if !(lengthscale > 0.0) || !lengthscale.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lengthscale must be positive, got {lengthscale}"
            )));
        }
        Ok(Self {
            signal_std,
            lengthscale,
        })
    }

    /// Prior variance `k(x, x) = signal_std^2`.
    pub fn prior_variance(&self) -> f64 {
        self.signal_std * self.signal_std
    }
}

/// Evaluate the kernel at a pair of points.
pub fn kernel_eval(x: &DVector<f64>, y: &DVector<f64>, params: &KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "kernel_eval",
            expected: x.len(),
            got: y.len(),
        });
    }
    let d2 = (x - y).norm_squared();
    Ok(params.prior_variance() * (-0.5 * d2 / (params.lengthscale * params.lengthscale)).exp())
}

/// Kernel vector `[k(x_1, x), ..., k(x_N, x)]`.
pub fn kernel_vector(inputs: &[DVector<f64>], x: &DVector<f64>, params: &KernelParams) -> DVector<f64> {
    DVector::from_iterator(
        inputs.len(),
        inputs
            .iter()
            .map(|xi| kernel_eval(xi, x, params).expect("stored inputs share dimension")),
    )
}

/// Gram matrix `K[i][j] = k(x_i, x_j)` plus `ridge` on the diagonal.
pub fn gram_matrix(inputs: &[DVector<f64>], params: &KernelParams, ridge: f64) -> DMatrix<f64> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel_eval(&inputs[i], &inputs[j], params).expect("shared dimension");
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] += ridge;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> KernelParams {
        KernelParams::new(1.0, 0.2).unwrap()
    }

    #[test]
    fn zero_distance_gives_signal_variance() {
        let x = DVector::from_column_slice(&[0.0, 0.0]);
        assert_eq!(kernel_eval(&x, &x, &p()).unwrap(), 1.0);
        let p2 = KernelParams::new(2.5, 0.3).unwrap();
        let y = DVector::from_column_slice(&[0.7, -0.1]);
        assert!((kernel_eval(&y, &y, &p2).unwrap() - 6.25).abs() < 1e-15);
    }

    #[test]
    fn one_lengthscale_apart() {
        // exp(-0.5 * 0.2^2 / 0.2^2) = exp(-0.5)
        let x = DVector::from_column_slice(&[0.0, 0.0]);
        let y = DVector::from_column_slice(&[0.2, 0.0]);
        let v = kernel_eval(&x, &y, &p()).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn symmetric_and_bounded() {
        let x = DVector::from_column_slice(&[0.3, -1.2]);
        let y = DVector::from_column_slice(&[-0.9, 0.4]);
        let a = kernel_eval(&x, &y, &p()).unwrap();
        let b = kernel_eval(&y, &x, &p()).unwrap();
        assert_eq!(a, b);
        assert!(a <= p().prior_variance());
        assert!(a >= 0.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = DVector::from_column_slice(&[0.0, 0.0]);
        let y = DVector::from_column_slice(&[0.0]);
        assert!(kernel_eval(&x, &y, &p()).is_err());
    }
}
