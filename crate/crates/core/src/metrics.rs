//! Figures of merit: fidelity, purity, negativity, mutual information and
//! effective added noise.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;

use crate::error::{QssError, Result};
use crate::gaussian::{symplectic_eigenvalues, GaussianState, VACUUM_VARIANCE};

/// Rounding slack tolerated outside `[0, 1]` before a fidelity is an error.
pub const FIDELITY_SLACK: f64 = 1e-9;

/// Slack on `det V >= 1/16` for single-mode admissibility.
const DET_SLACK: f64 = 1e-12;

/// Summary of one reconstruction, as reported by sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub fidelity: f64,
    pub purity: f64,
    pub negativity: f64,
    pub mi_nats: f64,
    pub n_eff: f64,
}

impl MetricReport {
    /// Negative added noise can only come from estimation error or from a
    /// gain that overshoots; it is reported but marked.
    pub fn n_eff_flagged(&self) -> bool {
        self.n_eff < 0.0
    }
}

/// Uhlmann fidelity between two single-mode Gaussian states.
pub fn fidelity(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    let (ma, va) = single_mode(a)?;
    let (mb, vb) = single_mode(b)?;
    fidelity_parts(&ma, &va, &mb, &vb)
}

/// Fidelity from raw single-mode moments.
pub fn fidelity_parts(m1: &Vector2<f64>, v1: &Matrix2<f64>, m2: &Vector2<f64>, v2: &Matrix2<f64>) -> Result<f64> {
    for v in [v1, v2] {
        if v.determinant() < VACUUM_VARIANCE.powi(2) - DET_SLACK || v[(0, 0)] <= 0.0 {
            return Err(QssError::Inadmissible(v.determinant().max(0.0).sqrt()));
        }
    }
    let sum = v1 + v2;
    let lambda = sum.determinant();
    let delta = (16.0 * (v1.determinant() - 1.0 / 16.0) * (v2.determinant() - 1.0 / 16.0)).max(0.0);
    let d = m1 - m2;
    let inv = sum.try_inverse().ok_or(QssError::NotPositiveDefinite)?;
    let quad = (d.transpose() * inv * d)[(0, 0)];
    let f = 0.5 * (-0.5 * quad).exp() / ((lambda + delta).sqrt() - delta.sqrt());
    clamp_fidelity(f)
}

/// Closed-form fidelity between `|α⟩` and a phase-insensitive Gaussian state
/// with mean `√k α` and covariance `v_out I`.
pub fn fidelity_symmetric(alpha: Complex64, k: f64, v_out: f64) -> f64 {
    let w = 1.0 + 4.0 * v_out;
    2.0 / w * (-2.0 * (k.sqrt() - 1.0).powi(2) * alpha.norm_sqr() / w).exp()
}

pub(crate) fn clamp_fidelity(f: f64) -> Result<f64> {
    if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&f) || f.is_nan() {
        return Err(QssError::FidelityRange(f));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `1 / (4^n sqrt(det V))`.
pub fn purity(state: &GaussianState) -> f64 {
    let n = state.n_modes() as i32;
    1.0 / (4f64.powi(n) * state.det().sqrt())
}

/// Smallest symplectic eigenvalue of the partial transpose (p of mode 2
/// reversed) of a two-mode state.
pub fn partial_transpose_min_eigenvalue(state: &GaussianState) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(QssError::ModeCount {
            expected: 2,
            got: state.n_modes(),
        });
    }
    let flip = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
    let pt = &flip * state.cov() * &flip;
    Ok(symplectic_eigenvalues(&pt)?[0])
}

/// Trace-norm negativity `max(0, (1 - 4ν)/(8ν))` of a two-mode state.
pub fn negativity(state: &GaussianState) -> Result<f64> {
    let nu = partial_transpose_min_eigenvalue(state)?;
    Ok(((1.0 - 4.0 * nu) / (8.0 * nu)).max(0.0))
}

/// `ln(1 + 4σ²/(1 + n_eff))` in nats.
///
/// Negative `n_eff` is accepted; at or below `-1` the channel would be
/// better than noiseless and the result is infinite.
pub fn mutual_information(sigma_sq: f64, n_eff: f64) -> f64 {
    if sigma_sq == 0.0 {
        return 0.0;
    }
    let denom = 1.0 + n_eff;
    if denom <= 0.0 {
        return f64::INFINITY;
    }
    (4.0 * sigma_sq / denom).ln_1p()
}

/// Added noise referred back to the input: `4 (v_out - v_in) |α_in/α_out|²`.
pub fn effective_noise(alpha_in: Complex64, v_in: f64, alpha_out: Complex64, v_out: f64) -> Result<f64> {
    let out = alpha_out.norm_sqr();
    if out == 0.0 {
        return Err(QssError::ZeroDisplacement);
    }
    Ok(4.0 * (v_out - v_in) * alpha_in.norm_sqr() / out)
}

fn single_mode(s: &GaussianState) -> Result<(Vector2<f64>, Matrix2<f64>)> {
    if s.n_modes() != 1 {
        return Err(QssError::ModeCount {
            expected: 1,
            got: s.n_modes(),
        });
    }
    let m = Vector2::new(s.mean()[0], s.mean()[1]);
    let c = s.cov();
    Ok((m, Matrix2::new(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)])))
}
