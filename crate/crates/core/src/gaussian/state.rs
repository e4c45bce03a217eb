use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::channel::{check_modes, GaussianChannel, SymplecticOp};
use super::linalg::{
    max_asymmetry, symmetrize, symplectic_eigenvalues, ADMISSIBILITY_TOL, SYMMETRY_TOL, VACUUM_VARIANCE,
};
use crate::error::{check_non_negative, QssError, Result};

/// An `n`-mode bosonic Gaussian state.
///
/// Quadratures are ordered `(x1, p1, ..., xn, pn)`; the vacuum has variance
/// 1/4 per quadrature and a coherent state `|α⟩` has mean `(Re α, Im α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(QssError::NoModes);
        }
        Ok(GaussianState {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        })
    }

    pub fn coherent(alpha: Complex64) -> Self {
        GaussianState {
            mean: DVector::from_vec(vec![alpha.re, alpha.im]),
            cov: DMatrix::identity(2, 2) * VACUUM_VARIANCE,
        }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        check_non_negative("thermal occupation", nbar)?;
        Ok(GaussianState {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * ((2.0 * nbar + 1.0) * VACUUM_VARIANCE),
        })
    }

    /// Validates symmetry and the uncertainty principle before accepting
    /// `cov`. Asymmetry below tolerance is averaged away.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(QssError::NoModes);
        }
        if !dim.is_multiple_of(2) {
            return Err(QssError::Dimension {
                expected: dim + 1,
                got: dim,
            });
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(QssError::Dimension {
                expected: dim,
                got: cov.nrows(),
            });
        }
        let asym = max_asymmetry(&cov);
        if asym > SYMMETRY_TOL {
            return Err(QssError::NotSymmetric(asym));
        }
        let state = GaussianState {
            mean,
            cov: symmetrize(&cov),
        };
        let nu = state.smallest_symplectic_eigenvalue()?;
        if nu < VACUUM_VARIANCE - ADMISSIBILITY_TOL {
            return Err(QssError::Inadmissible(nu));
        }
        Ok(state)
    }

    /// Single-mode state with mean `alpha` and covariance `variance * I`.
    pub fn symmetric(alpha: Complex64, variance: f64) -> Result<Self> {
        Self::from_parts(
            DVector::from_vec(vec![alpha.re, alpha.im]),
            DMatrix::identity(2, 2) * variance,
        )
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Mean of `mode` as a complex amplitude.
    pub fn amplitude(&self, mode: usize) -> Complex64 {
        Complex64::new(self.mean[2 * mode], self.mean[2 * mode + 1])
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.cov)
    }

    pub fn smallest_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.symplectic_eigenvalues()?[0])
    }

    pub fn is_admissible(&self) -> bool {
        max_asymmetry(&self.cov) <= SYMMETRY_TOL
            && matches!(self.smallest_symplectic_eigenvalue(),
                        Ok(nu) if nu >= VACUUM_VARIANCE - ADMISSIBILITY_TOL)
    }

    pub fn det(&self) -> f64 {
        self.cov.determinant()
    }

    /// Joint state with `self` on the first modes.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(a + b);
        mean.rows_mut(0, a).copy_from(&self.mean);
        mean.rows_mut(a, b).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    pub fn apply_symplectic(&self, op: &SymplecticOp) -> Result<Self> {
        self.check_dim(op.n_modes())?;
        Ok(GaussianState {
            mean: &op.matrix * &self.mean + &op.displacement,
            cov: symmetrize(&(&op.matrix * &self.cov * op.matrix.transpose())),
        })
    }

    pub fn apply_channel(&self, ch: &GaussianChannel) -> Result<Self> {
        self.check_dim(ch.n_modes())?;
        Ok(GaussianState {
            mean: &ch.x * &self.mean + &ch.d,
            cov: symmetrize(&(&ch.x * &self.cov * ch.x.transpose() + &ch.y)),
        })
    }

    pub fn squeeze(&self, mode: usize, r: f64, theta: f64) -> Result<Self> {
        self.apply_symplectic(&SymplecticOp::squeeze(self.n_modes(), mode, r, theta)?)
    }

    pub fn two_mode_squeeze(&self, i: usize, j: usize, r: f64) -> Result<Self> {
        self.apply_symplectic(&SymplecticOp::two_mode_squeeze(self.n_modes(), i, j, r)?)
    }

    /// See [`SymplecticOp::beam_splitter`] for the convention.
    pub fn beam_splitter(&self, i: usize, j: usize, tau: f64, phi: f64) -> Result<Self> {
        self.apply_symplectic(&SymplecticOp::beam_splitter(self.n_modes(), i, j, tau, phi)?)
    }

    pub fn phase_shift(&self, mode: usize, angle: f64) -> Result<Self> {
        self.apply_symplectic(&SymplecticOp::phase_shift(self.n_modes(), mode, angle)?)
    }

    pub fn displace(&self, mode: usize, beta: Complex64) -> Result<Self> {
        check_modes(self.n_modes(), &[mode])?;
        let mut out = self.clone();
        out.mean[2 * mode] += beta.re;
        out.mean[2 * mode + 1] += beta.im;
        Ok(out)
    }

    pub fn loss_channel(&self, mode: usize, efficiency: f64, nbar_env: f64) -> Result<Self> {
        self.apply_channel(&GaussianChannel::loss(self.n_modes(), mode, efficiency, nbar_env)?)
    }

    pub fn add_classical_noise(&self, mode: usize, variance: f64) -> Result<Self> {
        self.add_anisotropic_noise(mode, variance, variance)
    }

    /// Adds `var_x` to the x variance and `var_p` to the p variance of `mode`.
    pub fn add_anisotropic_noise(&self, mode: usize, var_x: f64, var_p: f64) -> Result<Self> {
        check_modes(self.n_modes(), &[mode])?;
        check_non_negative("noise variance", var_x)?;
        check_non_negative("noise variance", var_p)?;
        let mut out = self.clone();
        out.cov[(2 * mode, 2 * mode)] += var_x;
        out.cov[(2 * mode + 1, 2 * mode + 1)] += var_p;
        Ok(out)
    }

    /// Reduced state of `keep` (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QssError::EmptySelection);
        }
        check_modes(self.n_modes(), keep)?;
        let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]);
        Ok(GaussianState { mean, cov })
    }

    pub fn mode(&self, mode: usize) -> Result<Self> {
        self.partial_trace(&[mode])
    }

    /// Draws `n_samples` quadrature vectors (one per row) from the state's
    /// Wigner distribution.
    pub fn sample_quadratures(&self, n_samples: usize, seed: u64) -> Result<DMatrix<f64>> {
        if n_samples == 0 {
            return Err(QssError::NoSamples);
        }
        let dim = self.mean.len();
        let chol = self.cov.clone().cholesky().ok_or(QssError::NotPositiveDefinite)?;
        let l = chol.l();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = DMatrix::zeros(n_samples, dim);
        let mut z = DVector::zeros(dim);
        for row in 0..n_samples {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            let x = &l * &z + &self.mean;
            out.row_mut(row).copy_from(&x.transpose());
        }
        Ok(out)
    }

    fn check_dim(&self, n_modes: usize) -> Result<()> {
        if n_modes != self.n_modes() {
            return Err(QssError::ModeCount {
                expected: self.n_modes(),
                got: n_modes,
            });
        }
        Ok(())
    }
}
