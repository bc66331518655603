//! Small dense linear-algebra helpers shared by the modules.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Maximum eigenvalue modulus, from a dense Schur decomposition.
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// `sqrt(lambda_min(M M'))`: the smallest singular value over the row space.
///
/// Zero when `M` has fewer columns than rows.
pub fn min_row_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.ncols() < m.nrows() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Matrix with i.i.d. standard normal entries, drawn column-major.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
pub(crate) fn symmetric_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_of_rotation_is_its_scale() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn row_singular_value_of_wide_identity_pair() {
        let m = DMatrix::from_fn(2, 4, |i, j| if j % 2 == i { 1.0 } else { 0.0 });
        assert!((min_row_singular_value(&m) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(min_row_singular_value(&DMatrix::zeros(3, 2)), 0.0);
    }
}
