//! Affine symplectic maps and general Gaussian channels on `n` modes.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::linalg::{complex_block, conjugate_block, omega, rotation, VACUUM_VARIANCE};
use crate::error::{check_non_negative, check_range, QssError, Result};

/// Tolerance on `S Ω S^T = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Unitary Gaussian operation: `mean -> S mean + d`, `cov -> S cov S^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    pub matrix: DMatrix<f64>,
    pub displacement: DVector<f64>,
}

impl SymplecticOp {
    pub fn identity(n_modes: usize) -> Self {
        SymplecticOp {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
            displacement: DVector::zeros(2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Largest entry of `S Ω S^T - Ω`.
    pub fn symplectic_defect(&self) -> f64 {
        let w = omega(self.n_modes());
        (&self.matrix * &w * self.matrix.transpose() - w).amax()
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic_defect() <= SYMPLECTIC_TOL
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &SymplecticOp) -> SymplecticOp {
        SymplecticOp {
            matrix: &next.matrix * &self.matrix,
            displacement: &next.matrix * &self.displacement + &next.displacement,
        }
    }

    /// Builds the operation from its action on annihilation operators,
    /// `a'_i = sum_j A_ij a_j + B_ij a_j^dagger`, restricted to `modes`.
    pub fn from_mode_action(
        n_modes: usize,
        modes: &[usize],
        a: &[Vec<Complex64>],
        b: &[Vec<Complex64>],
    ) -> Result<Self> {
        check_modes(n_modes, modes)?;
        let mut op = SymplecticOp::identity(n_modes);
        for (ii, &mi) in modes.iter().enumerate() {
            for (jj, &mj) in modes.iter().enumerate() {
                let block = complex_block(a[ii][jj]) + conjugate_block(b[ii][jj]);
                set_block(&mut op.matrix, mi, mj, &block);
            }
        }
        Ok(op)
    }

    /// Single-mode squeezer with the squeezed axis at angle `theta` from x.
    pub fn squeeze(n_modes: usize, mode: usize, r: f64, theta: f64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        let rot = rotation(theta);
        let local = rot * Matrix2::new((-r).exp(), 0.0, 0.0, r.exp()) * rot.transpose();
        let mut op = SymplecticOp::identity(n_modes);
        set_block(&mut op.matrix, mode, mode, &local);
        Ok(op)
    }

    /// `a_i -> cosh r a_i + sinh r a_j^dagger` and symmetrically for `a_j`.
    pub fn two_mode_squeeze(n_modes: usize, i: usize, j: usize, r: f64) -> Result<Self> {
        let c = Complex64::new(r.cosh(), 0.0);
        let s = Complex64::new(r.sinh(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::from_mode_action(n_modes, &[i, j], &[vec![c, z], vec![z, c]], &[vec![z, s], vec![s, z]])
    }

    /// Beam splitter (hybrid ring) with transmissivity `tau` and phase `phi`:
    ///
    /// ```text
    /// a_i' = sqrt(tau) a_i + e^{i phi} sqrt(1 - tau) a_j
    /// a_j' = e^{-i phi} sqrt(1 - tau) a_i - sqrt(tau) a_j
    /// ```
    ///
    /// At `tau = 1/2, phi = 0` this gives `(a_i ± a_j)/√2`, and the operation
    /// is its own inverse for every `tau` and `phi`. At `tau = 1` it leaves
    /// `a_i` alone and flips the sign of `a_j`.
    pub fn beam_splitter(n_modes: usize, i: usize, j: usize, tau: f64, phi: f64) -> Result<Self> {
        check_range("transmissivity", tau, 0.0, 1.0)?;
        let t = Complex64::new(tau.sqrt(), 0.0);
        let s = (1.0 - tau).sqrt();
        let e = Complex64::from_polar(1.0, phi);
        let z = Complex64::new(0.0, 0.0);
        Self::from_mode_action(
            n_modes,
            &[i, j],
            &[vec![t, e * s], vec![e.conj() * s, -t]],
            &[vec![z, z], vec![z, z]],
        )
    }

    pub fn phase_shift(n_modes: usize, mode: usize, angle: f64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        let mut op = SymplecticOp::identity(n_modes);
        set_block(&mut op.matrix, mode, mode, &rotation(angle));
        Ok(op)
    }

    pub fn displacement(n_modes: usize, mode: usize, beta: Complex64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        let mut op = SymplecticOp::identity(n_modes);
        op.displacement[2 * mode] = beta.re;
        op.displacement[2 * mode + 1] = beta.im;
        Ok(op)
    }
}

/// General Gaussian channel: `mean -> X mean + d`, `cov -> X cov X^T + Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannel {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl From<SymplecticOp> for GaussianChannel {
    fn from(op: SymplecticOp) -> Self {
        let n2 = op.matrix.nrows();
        GaussianChannel {
            x: op.matrix,
            y: DMatrix::zeros(n2, n2),
            d: op.displacement,
        }
    }
}

impl GaussianChannel {
    pub fn identity(n_modes: usize) -> Self {
        SymplecticOp::identity(n_modes).into()
    }

    pub fn n_modes(&self) -> usize {
        self.x.nrows() / 2
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &GaussianChannel) -> GaussianChannel {
        GaussianChannel {
            x: &next.x * &self.x,
            y: &next.x * &self.y * next.x.transpose() + &next.y,
            d: &next.x * &self.d + &next.d,
        }
    }

    /// Mixes `mode` with a thermal environment of occupation `nbar_env` on a
    /// beam splitter of transmissivity `efficiency`, then discards the
    /// environment.
    pub fn loss(n_modes: usize, mode: usize, efficiency: f64, nbar_env: f64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        check_range("loss efficiency", efficiency, 0.0, 1.0)?;
        check_non_negative("environment occupation", nbar_env)?;
        let mut ch = GaussianChannel::identity(n_modes);
        let amp = efficiency.sqrt();
        let env = (1.0 - efficiency) * (2.0 * nbar_env + 1.0) * VACUUM_VARIANCE;
        for k in 0..2 {
            ch.x[(2 * mode + k, 2 * mode + k)] = amp;
            ch.y[(2 * mode + k, 2 * mode + k)] = env;
        }
        Ok(ch)
    }

    /// Classical Gaussian noise of `variance` added to each quadrature of `mode`.
    pub fn classical_noise(n_modes: usize, mode: usize, variance: f64) -> Result<Self> {
        Self::anisotropic_noise(n_modes, mode, variance, variance)
    }

    pub fn anisotropic_noise(n_modes: usize, mode: usize, var_x: f64, var_p: f64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        check_non_negative("noise variance", var_x)?;
        check_non_negative("noise variance", var_p)?;
        let mut ch = GaussianChannel::identity(n_modes);
        ch.y[(2 * mode, 2 * mode)] = var_x;
        ch.y[(2 * mode + 1, 2 * mode + 1)] = var_p;
        Ok(ch)
    }

    /// Phase-insensitive rescaling of one mode by amplitude factor `g`:
    /// pure loss for `g <= 1`, quantum-limited amplification for `g > 1`.
    pub fn rescale(n_modes: usize, mode: usize, g: f64) -> Result<Self> {
        check_modes(n_modes, &[mode])?;
        check_non_negative("rescale factor", g)?;
        let mut ch = GaussianChannel::identity(n_modes);
        let added = (g * g - 1.0).abs() * VACUUM_VARIANCE;
        for k in 0..2 {
            ch.x[(2 * mode + k, 2 * mode + k)] = g;
            ch.y[(2 * mode + k, 2 * mode + k)] = added;
        }
        Ok(ch)
    }
}

pub(crate) fn check_modes(n_modes: usize, modes: &[usize]) -> Result<()> {
    for (k, &m) in modes.iter().enumerate() {
        if m >= n_modes {
            return Err(QssError::InvalidMode { index: m, n_modes });
        }
        if modes[..k].contains(&m) {
            return Err(QssError::RepeatedMode(m));
        }
    }
    Ok(())
}

fn set_block(m: &mut DMatrix<f64>, row_mode: usize, col_mode: usize, block: &Matrix2<f64>) {
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * row_mode + r, 2 * col_mode + c)] = block[(r, c)];
        }
    }
}
