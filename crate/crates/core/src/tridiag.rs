//! Symmetric tridiagonal eigen-solves backing the Golub-Welsch construction
//! of Gaussian quadrature rules.

use nalgebra::DMatrix;

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each (normalized) eigenvector, sorted by ascending eigenvalue.
///
/// For a Jacobi matrix of an orthogonal polynomial family the eigenvalues are
/// the quadrature nodes and `mu0 * first_component^2` are the weights.
pub(crate) fn eigen_with_first_components(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n - 1");

    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
    }
    for i in 0..n - 1 {
        m[(i, i + 1)] = off[i];
        m[(i + 1, i)] = off[i];
    }

    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let values = pairs.iter().map(|p| p.0).collect();
    let firsts = pairs.iter().map(|p| p.1).collect();
    (values, firsts)
}
