//! Small dense linear-algebra helpers shared across modules.
//! All matrix norms in the tracking bounds are spectral (operator-2) norms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().max()
}

/// Eigenvalue range of a symmetric matrix.
pub fn symmetric_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Check symmetry up to `tol` and positive definiteness.
pub fn check_spd(m: &DMatrix<f64>, what: &str) -> Result<(f64, f64)> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotPositiveDefinite(format!("{what} is not square")));
    }
    let asym = (m - m.transpose()).norm();
    if asym > 1e-10 * m.norm().max(1.0) {
        return Err(Error::NotPositiveDefinite(format!(
            "{what} is not symmetric (asymmetry {asym:.3e})"
        )));
    }
    let (lo, hi) = symmetric_eig_range(m);
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "{what} has non-positive eigenvalue {lo:.3e}"
        )));
    }
    Ok((lo, hi))
}

/// All eigenvalues strictly in the open left half-plane?
pub fn hurwitz_margin(m: &DMatrix<f64>) -> (bool, Vec<f64>) {
    let real_parts: Vec<f64> = m.complex_eigenvalues().iter().map(|c| c.re).collect();
    let ok = real_parts.iter().all(|&r| r < 0.0);
    (ok, real_parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_known_matrix() {
        // A^T A = [[4, 4], [4, 5]], largest eigenvalue (9 + sqrt(65)) / 2.
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let expected = ((9.0 + 65.0f64.sqrt()) / 2.0).sqrt();
        assert!((spectral_norm(&a) - expected).abs() < 1e-12);
        assert!((spectral_norm(&a) - 2.9208).abs() < 1e-4);
    }

    #[test]
    fn spd_check_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(check_spd(&m, "test").is_err());
        let id = DMatrix::<f64>::identity(2, 2);
        let (lo, hi) = check_spd(&id, "test").unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn hurwitz_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -2.0]);
        let (ok, re) = hurwitz_margin(&a);
        assert!(ok);
        // Characteristic polynomial s^2 + 2s + 2: roots -1 +/- i.
        assert!(re.iter().all(|&r| (r + 1.0).abs() < 1e-12));
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 1.0]);
        assert!(!hurwitz_margin(&b).0);
    }
}
