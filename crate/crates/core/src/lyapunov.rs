//! Continuous Lyapunov equation `A^T P + P A = -Q`.
//!
//! Solved as the Kronecker-vectorized linear system
//! `(I (x) A^T + A^T (x) I) vec(P) = -vec(Q)` with one step of iterative
//! refinement; state dimensions here are small, so the dense solve is exact
//! to near machine precision.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{check_spd, hurwitz_margin};

/// Residual tolerance required of every solved `P`.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-10;

pub fn is_hurwitz(a: &DMatrix<f64>) -> Result<()> {
    let (ok, real_parts) = hurwitz_margin(a);
    if ok {
        Ok(())
    } else {
        Err(Error::NotHurwitz { real_parts })
    }
}

/// Solve `A^T P + P A = -Q` for symmetric positive-definite `P`.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidArgument("A must be square".to_string()));
    }
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "solve_lyapunov Q",
            expected: n,
            got: q.nrows(),
        });
    }
    is_hurwitz(a)?;
    check_spd(q, "Q")?;

    let at = a.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    // vec(A^T P) = (I (x) A^T) vec(P), vec(P A) = (A^T (x) I) vec(P)
    let system = eye.kronecker(&at) + at.kronecker(&eye);
    let lu = system.clone().lu();
    let rhs = -DVector::from_column_slice(q.as_slice());
    let mut vec_p = lu
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular Lyapunov system".to_string()))?;
    // One refinement step keeps the residual at the required tolerance.
    let correction = lu.solve(&(&rhs - &system * &vec_p));
    if let Some(c) = correction {
        vec_p += c;
    }
    let p_raw = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    let p = (&p_raw + p_raw.transpose()) * 0.5;

    let residual = (&at * &p + &p * a + q).norm();
    if residual > LYAPUNOV_RESIDUAL_TOL {
        return Err(Error::NotPositiveDefinite(format!(
            "Lyapunov residual {residual:.3e} above tolerance"
        )));
    }
    check_spd(&p, "P")?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn benchmark_system_hand_solution() {
        // Hand solve of the 3-unknown linear system for the benchmark gains.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let q = DMatrix::identity(2, 2);
        let p = solve_lyapunov(&a, &q).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.25, 0.25, 0.25, 0.375]);
        assert!((&p - &expected).norm() < 1e-12, "P = {p}");
    }

    #[test]
    fn scalar_balance() {
        let a = DMatrix::from_element(1, 1, -1.0);
        let q = DMatrix::identity(1, 1);
        let p = solve_lyapunov(&a, &q).unwrap();
        assert!((p[(0, 0)] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn random_stable_systems_have_tiny_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let n = rng.random_range(2..6);
            let r = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            // Shift the spectrum left of the imaginary axis.
            let max_re = r
                .complex_eigenvalues()
                .iter()
                .map(|c| c.re)
                .fold(f64::NEG_INFINITY, f64::max);
            let a = &r - DMatrix::identity(n, n) * (max_re + 0.5);
            let q = {
                let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                &g * g.transpose() + DMatrix::identity(n, n)
            };
            let p = solve_lyapunov(&a, &q).unwrap();
            let residual = (a.transpose() * &p + &p * &a + &q).norm();
            assert!(residual <= LYAPUNOV_RESIDUAL_TOL, "residual {residual:.3e}");
        }
    }

    #[test]
    fn non_hurwitz_rejected_with_eigenvalues() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 1.0]);
        match solve_lyapunov(&a, &DMatrix::identity(2, 2)) {
            Err(Error::NotHurwitz { real_parts }) => {
                assert!(real_parts.iter().any(|&r| r > 0.0));
            }
            other => panic!("expected NotHurwitz, got {other:?}"),
        }
    }

    #[test]
    fn indefinite_q_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(solve_lyapunov(&a, &q).is_err());
    }
}
