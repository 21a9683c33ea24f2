//! Tensor grids over box domains, used for extrema search and
//! finite-difference Lipschitz estimation.

use nalgebra::{DMatrix, DVector};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;

#[derive(Debug, Clone)]
pub struct TensorGrid {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
    len: usize,
}

impl TensorGrid {
    /// Grid with spacing at most `step` per axis, endpoints included.
    /// At least two points per axis are required.
    pub fn from_step(domain: &Domain, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive, got {step}"
            )));
        }
        let mut axes = Vec::with_capacity(domain.dim());
        for &(lo, hi) in domain.intervals() {
            let cells = ((hi - lo) / step + 1e-9).floor() as usize;
            if cells < 1 {
                return Err(Error::InvalidArgument(format!(
                    "grid step {step} too coarse for interval [{lo}, {hi}]: a single point per axis"
                )));
            }
            let n = cells + 1;
            let h = (hi - lo) / cells as f64;
            axes.push((0..n).map(|i| lo + h * i as f64).collect());
        }
        Ok(Self::from_axes(axes))
    }

    /// Grid with a fixed number of points per axis.
    pub fn with_points_per_axis(domain: &Domain, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(
                "need at least two grid points per axis".to_string(),
            ));
        }
        let axes = domain
            .intervals()
            .iter()
            .map(|&(lo, hi)| {
                let h = (hi - lo) / (n - 1) as f64;
                (0..n).map(|i| lo + h * i as f64).collect()
            })
            .collect();
        Ok(Self::from_axes(axes))
    }

    fn from_axes(axes: Vec<Vec<f64>>) -> Self {
        let mut strides = vec![0; axes.len()];
        let mut acc = 1;
        for (j, axis) in axes.iter().enumerate().rev() {
            strides[j] = acc;
            acc *= axis.len();
        }
        Self {
            axes,
            strides,
            len: acc,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis_spacing(&self, axis: usize) -> f64 {
        self.axes[axis][1] - self.axes[axis][0]
    }

    /// Largest spacing over all axes.
    pub fn max_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|j| self.axis_spacing(j))
            .fold(0.0, f64::max)
    }

    pub fn point(&self, flat: usize) -> DVector<f64> {
        DVector::from_fn(self.dim(), |j, _| {
            self.axes[j][(flat / self.strides[j]) % self.axes[j].len()]
        })
    }

    pub fn points(&self) -> Vec<DVector<f64>> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// Index of the next point along `axis`, if not at the upper edge.
    pub fn forward_neighbor(&self, flat: usize, axis: usize) -> Option<usize> {
        let pos = (flat / self.strides[axis]) % self.axes[axis].len();
        (pos + 1 < self.axes[axis].len()).then(|| flat + self.strides[axis])
    }

    /// Max over grid cells of the spectral norm of the forward-difference
    /// Jacobian of `values` (one output vector per grid point).
    pub fn max_jacobian_norm(&self, values: &[DVector<f64>]) -> f64 {
        assert_eq!(values.len(), self.len);
        if self.len == 0 {
            return 0.0;
        }
        let out_dim = values[0].len();
        let mut worst: f64 = 0.0;
        let mut jac = DMatrix::zeros(out_dim, self.dim());
        for flat in 0..self.len {
            let mut any = false;
            for axis in 0..self.dim() {
                if let Some(nb) = self.forward_neighbor(flat, axis) {
                    let h = self.axis_spacing(axis);
                    for r in 0..out_dim {
                        jac[(r, axis)] = (values[nb][r] - values[flat][r]) / h;
                    }
                    any = true;
                } else {
                    for r in 0..out_dim {
                        jac[(r, axis)] = 0.0;
                    }
                }
            }
            if any {
                let norm = if out_dim == 1 {
                    jac.row(0).norm()
                } else {
                    spectral_norm(&jac)
                };
                worst = worst.max(norm);
            }
        }
        worst
    }

    /// Scalar-series version of [`max_jacobian_norm`](Self::max_jacobian_norm).
    pub fn max_gradient_norm(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len);
        let mut worst: f64 = 0.0;
        for flat in 0..self.len {
            let mut g2 = 0.0;
            for axis in 0..self.dim() {
                if let Some(nb) = self.forward_neighbor(flat, axis) {
                    let h = self.axis_spacing(axis);
                    let d = (values[nb] - values[flat]) / h;
                    g2 += d * d;
                }
            }
            worst = worst.max(g2.sqrt());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_box_with_endpoints() {
        let d = Domain::symmetric(1.5, 2).unwrap();
        let g = TensorGrid::from_step(&d, 0.1).unwrap();
        assert_eq!(g.len(), 31 * 31);
        assert_eq!(g.point(0), DVector::from_column_slice(&[-1.5, -1.5]));
        assert_eq!(
            g.point(g.len() - 1),
            DVector::from_column_slice(&[1.5, 1.5])
        );
        assert!((g.axis_spacing(0) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn coarse_step_rejected() {
        let d = Domain::symmetric(1.0, 1).unwrap();
        assert!(TensorGrid::from_step(&d, 3.0).is_err());
    }

    #[test]
    fn gradient_of_linear_function_is_exact() {
        let d = Domain::symmetric(1.5, 2).unwrap();
        let g = TensorGrid::from_step(&d, 0.25).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|i| 2.0 * g.point(i)[0]).collect();
        assert!((g.max_gradient_norm(&values) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn neighbors_walk_each_axis() {
        let d = Domain::symmetric(1.0, 2).unwrap();
        let g = TensorGrid::with_points_per_axis(&d, 3).unwrap();
        let p = g.point(0);
        let n0 = g.forward_neighbor(0, 0).unwrap();
        let n1 = g.forward_neighbor(0, 1).unwrap();
        assert_eq!(g.point(n0)[0], p[0] + 1.0);
        assert_eq!(g.point(n1)[1], p[1] + 1.0);
        assert!(g.forward_neighbor(g.len() - 1, 0).is_none());
    }
}
