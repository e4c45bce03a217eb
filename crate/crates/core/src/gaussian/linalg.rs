//! Small dense helpers shared by the state engine and the metrics.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{QssError, Result};

/// Variance of each vacuum quadrature.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Slack below 1/4 tolerated on symplectic eigenvalues.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

/// Tolerance on covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Standard symplectic form for `n` modes in (x1, p1, ..., xn, pn) order.
pub fn omega(n_modes: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        w[(2 * k, 2 * k + 1)] = 1.0;
        w[(2 * k + 1, 2 * k)] = -1.0;
    }
    w
}

/// Real 2x2 block for multiplication by a complex number acting on a = x + ip.
pub fn complex_block(c: Complex64) -> Matrix2<f64> {
    Matrix2::new(c.re, -c.im, c.im, c.re)
}

/// Real 2x2 block for `c * conj(a)`.
pub fn conjugate_block(c: Complex64) -> Matrix2<f64> {
    Matrix2::new(c.re, c.im, c.im, -c.re)
}

pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Principal square root of a symmetric positive-definite matrix.
fn sqrt_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetrize(m).symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
        return Err(QssError::NotPositiveDefinite);
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// Symplectic spectrum of a covariance matrix, ascending, one value per mode.
///
/// The squared eigenvalues are read off the symmetric matrix
/// `V^{1/2} Ω^T V Ω V^{1/2}`, which is similar to `(iΩV)^2`.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n2 = cov.nrows();
    if n2 == 0 || !n2.is_multiple_of(2) || cov.ncols() != n2 {
        return Err(QssError::Dimension {
            expected: n2 + n2 % 2,
            got: cov.ncols(),
        });
    }
    let w = omega(n2 / 2);
    let root = sqrt_spd(cov)?;
    let inner = &root * w.transpose() * cov * &w * &root;
    let mut sq: Vec<f64> = symmetrize(&inner)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sq.chunks(2).map(|p| (0.5 * (p[0] + p[1])).max(0.0).sqrt()).collect())
}
