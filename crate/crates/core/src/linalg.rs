//! Dense complex SVD, delegated to `faer`.

use faer::Mat;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values in descending order.
pub(crate) fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv = match to_faer(m).singular_values() {
        Ok(sv) => sv,
        // Fall back to the square roots of the eigenvalues of M^H M.
        Err(_) => SymmetricEigen::new(m.adjoint() * m)
            .eigenvalues
            .iter()
            .map(|x| x.max(0.0).sqrt())
            .collect(),
    };
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Thin SVD `M = U diag(s) V^H`, or `None` if it does not converge.
pub(crate) fn svd(m: &DMatrix<Complex64>) -> Option<(DMatrix<Complex64>, Vec<f64>, DMatrix<Complex64>)> {
    let svd = to_faer(m).thin_svd().ok()?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = s.dim();
    let s: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let u = DMatrix::from_fn(u.nrows(), k, |i, j| u[(i, j)]);
    let v = DMatrix::from_fn(v.nrows(), k, |i, j| v[(i, j)]);
    Some((u, s, v))
}
