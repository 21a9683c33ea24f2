//! Lower-triangular Cholesky factors with incremental row insertion and removal.
//!
//! The factor `L` satisfies `L * L^T = K + ridge * I` for the kernel Gram
//! matrix of the current training inputs. Appending a sample extends the
//! factor by one row; deleting a sample removes its row and re-triangularizes
//! the trailing block with a rank-one update.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// How small the appended diagonal pivot may get before we refuse the
/// incremental path and ask for a full refactorization.
const MIN_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CholFactor {
    /// Lower-triangular factor; entries above the diagonal are zero.
    l: DMatrix<f64>,
}

impl CholFactor {
    pub fn empty() -> Self {
        Self {
            l: DMatrix::zeros(0, 0),
        }
    }

    /// Factor a symmetric positive-definite matrix from scratch.
    pub fn factor(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Ok(Self::empty());
        }
        let chol = m.clone().cholesky().ok_or_else(|| {
            Error::NotPositiveDefinite("Cholesky factorization failed".to_string())
        })?;
        Ok(Self { l: chol.unpack() })
    }

    pub fn size(&self) -> usize {
        self.l.nrows()
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.size())
            .map(|i| self.l[(i, i)])
            .fold(f64::INFINITY, f64::min)
    }

    /// Solve `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.size();
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.l[(i, j)] * y[j];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solve `L^T x = b` by back substitution.
    pub fn solve_lower_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.size();
        let mut x = b.clone();
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.l[(j, i)] * x[j];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solve `(L L^T) x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.solve_lower_transpose(&self.solve_lower(b))
    }

    /// Extend the factor by one row so that it factors
    /// `[[K, k], [k^T, kappa]]`. Fails if the new pivot is numerically lost,
    /// in which case the caller should refactor from scratch.
    pub fn append(&mut self, k: &DVector<f64>, kappa: f64) -> Result<()> {
        let n = self.size();
        debug_assert_eq!(k.len(), n);
        let c = self.solve_lower(k);
        let d2 = kappa - c.norm_squared();
        if !(d2 > MIN_PIVOT) {
            return Err(Error::NotPositiveDefinite(format!(
                "appended pivot {d2:.3e} too small for incremental update"
            )));
        }
        let mut grown = DMatrix::zeros(n + 1, n + 1);
        grown.view_mut((0, 0), (n, n)).copy_from(&self.l);
        for j in 0..n {
            grown[(n, j)] = c[j];
        }
        grown[(n, n)] = d2.sqrt();
        self.l = grown;
        Ok(())
    }

    /// Remove row/column `index` from the factored matrix.
    ///
    /// Rows above the removed one are untouched; the trailing block absorbs
    /// the removed column through a rank-one update.
    pub fn remove(&mut self, index: usize) -> Result<()> {
        let n = self.size();
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "delete index {index} out of range for factor of size {n}"
            )));
        }
        let m = n - 1;
        let mut reduced = DMatrix::zeros(m, m);
        // Leading block and the sub-diagonal columns left of `index`.
        for i in 0..index {
            for j in 0..=i {
                reduced[(i, j)] = self.l[(i, j)];
            }
        }
        for i in index + 1..n {
            for j in 0..index {
                reduced[(i - 1, j)] = self.l[(i, j)];
            }
            for j in index + 1..=i {
                reduced[(i - 1, j - 1)] = self.l[(i, j)];
            }
        }
        // Trailing block gains the removed column as a rank-one term.
        let t = n - index - 1;
        if t > 0 {
            let v = DVector::from_fn(t, |i, _| self.l[(index + 1 + i, index)]);
            let mut block = reduced.view_mut((index, index), (t, t));
            rank_one_update(&mut block, v);
        }
        self.l = reduced;
        Ok(())
    }

    /// Relative Frobenius error of `L L^T` against `m`.
    pub fn reconstruction_error(&self, m: &DMatrix<f64>) -> f64 {
        if self.size() == 0 && m.nrows() == 0 {
            return 0.0;
        }
        let rec = &self.l * self.l.transpose();
        let denom = m.norm().max(f64::MIN_POSITIVE);
        (rec - m).norm() / denom
    }
}

/// In-place update `L <- chol(L L^T + v v^T)` for a lower-triangular view.
fn rank_one_update(l: &mut nalgebra::DMatrixViewMut<f64>, mut v: DVector<f64>) {
    let n = v.len();
    for j in 0..n {
        let ljj = l[(j, j)];
        let r = (ljj * ljj + v[j] * v[j]).sqrt();
        let c = r / ljj;
        let s = v[j] / ljj;
        l[(j, j)] = r;
        for i in j + 1..n {
            l[(i, j)] = (l[(i, j)] + s * v[i]) / c;
            v[i] = c * v[i] - s * l[(i, j)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn append_matches_fresh_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_spd(6, &mut rng);
        let mut f = CholFactor::factor(&m.view((0, 0), (5, 5)).into_owned()).unwrap();
        let k = DVector::from_fn(5, |i, _| m[(i, 5)]);
        f.append(&k, m[(5, 5)]).unwrap();
        assert!(f.reconstruction_error(&m) < 1e-12);
    }

    #[test]
    fn remove_matches_fresh_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for index in 0..6 {
            let m = random_spd(6, &mut rng);
            let mut f = CholFactor::factor(&m).unwrap();
            f.remove(index).unwrap();
            let reduced = m.clone().remove_row(index).remove_column(index);
            assert!(
                f.reconstruction_error(&reduced) < 1e-12,
                "index {index}: err {}",
                f.reconstruction_error(&reduced)
            );
        }
    }

    #[test]
    fn solve_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_spd(8, &mut rng);
        let f = CholFactor::factor(&m).unwrap();
        let b = DVector::from_fn(8, |_, _| rng.random::<f64>());
        let x = f.solve(&b);
        assert!((&m * &x - &b).norm() < 1e-10);
    }

    #[test]
    fn remove_then_append_sequence_stays_accurate() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random_spd(10, &mut rng);
        let mut f = CholFactor::factor(&m).unwrap();
        let mut current = m.clone();
        for _ in 0..4 {
            let idx = rng.random_range(0..current.nrows());
            f.remove(idx).unwrap();
            current = current.remove_row(idx).remove_column(idx);
        }
        assert!(f.reconstruction_error(&current) < 1e-11);
    }

    #[test]
    fn remove_out_of_range_rejected() {
        let mut f = CholFactor::empty();
        assert!(f.remove(0).is_err());
    }
}
