//! Security criteria: mutual-information ordering and no-cloning
//! thresholds for Gaussian codebooks.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_non_negative, check_range, Result};
use crate::gaussian::VACUUM_VARIANCE;
use crate::numerics::{bisect, golden_max, integrate};
use crate::protocol::{reconstruct, share_secret, DeviceModel, ReconstructionResult, Scheme};

/// Tolerance on window endpoints and on the location of the best excess.
pub const WINDOW_TOL: f64 = 1e-6;
pub const DEFAULT_SEARCH_RANGE: (f64, f64) = (0.1, 20.0);
const WINDOW_SAMPLES: usize = 400;
/// The radial integral is cut at this many codebook variances.
const RADIAL_CUTOFF: f64 = 50.0;

/// Isotropic complex Gaussian codebook with `E|α|² = sigma_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookSpec {
    pub sigma_sq: f64,
    /// Trapezoid points over the phase of α (1 for phase-insensitive maps).
    pub n_phase: usize,
    /// Absolute tolerance of the radial integral.
    pub tol: f64,
}

impl CodebookSpec {
    pub fn new(sigma_sq: f64) -> Self {
        CodebookSpec {
            sigma_sq,
            n_phase: 16,
            tol: 1e-12,
        }
    }

    pub fn phase_insensitive(sigma_sq: f64) -> Self {
        CodebookSpec {
            n_phase: 1,
            ..Self::new(sigma_sq)
        }
    }

    /// `E_α[f(α)]` over the codebook.
    pub fn average<F: Fn(Complex64) -> f64>(&self, f: F) -> Result<f64> {
        check_non_negative("codebook variance", self.sigma_sq)?;
        if self.sigma_sq == 0.0 {
            return Ok(f(Complex64::new(0.0, 0.0)));
        }
        let n = self.n_phase.max(1);
        let ring = |t: f64| -> f64 {
            let amp = t.sqrt();
            (0..n)
                .map(|j| f(Complex64::from_polar(amp, std::f64::consts::TAU * j as f64 / n as f64)))
                .sum::<f64>()
                / n as f64
        };
        let sigma_sq = self.sigma_sq;
        Ok(integrate(
            |u| (-u).exp() * ring(sigma_sq * u),
            0.0,
            RADIAL_CUTOFF,
            self.tol,
        ))
    }
}

pub fn nc_threshold_asymptotic() -> f64 {
    2.0 / 3.0
}

/// Branch point of the Gaussian-codebook threshold, `1/2 + 1/√2`.
pub fn nc_branch_point() -> f64 {
    0.5 + std::f64::consts::FRAC_1_SQRT_2
}

/// No-cloning fidelity threshold for a Gaussian codebook of variance `sigma_sq`.
pub fn nc_threshold_gaussian(sigma_sq: f64) -> Result<f64> {
    check_non_negative("codebook variance", sigma_sq)?;
    Ok(if sigma_sq >= nc_branch_point() {
        (4.0 * sigma_sq + 2.0) / (6.0 * sigma_sq + 1.0)
    } else {
        1.0 / ((3.0 - 2.0 * std::f64::consts::SQRT_2) * sigma_sq + 1.0)
    })
}

/// Closed-form codebook average of the phase-insensitive fidelity:
/// `A / (1 + B σ²)` with `A = 2/(1+4v)` and `B = 2(√k-1)²/(1+4v)`.
pub fn codebook_average_closed_form(k: f64, v_out: f64, sigma_sq: f64) -> f64 {
    let w = 1.0 + 4.0 * v_out;
    let b = 2.0 * (k.sqrt() - 1.0).powi(2) / w;
    2.0 / w / (1.0 + b * sigma_sq)
}

/// Codebook average of the phase-insensitive fidelity by quadrature.
pub fn codebook_average_fidelity(k: f64, v_out: f64, sigma_sq: f64) -> Result<f64> {
    check_non_negative("k", k)?;
    check_range("v_out", v_out, VACUUM_VARIANCE - 1e-9, f64::INFINITY)?;
    CodebookSpec::phase_insensitive(sigma_sq).average(|a| crate::metrics::fidelity_symmetric(a, k, v_out))
}

/// Codebook average of a reconstruction's fidelity, using its full
/// (possibly phase-dependent) linear response.
pub fn result_average_fidelity(result: &ReconstructionResult, sigma_sq: f64) -> Result<f64> {
    CodebookSpec::new(sigma_sq).average(|a| result.fidelity_for(a).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecurityWindow {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub sigma_star: f64,
    pub delta_star: f64,
    /// The excess is still positive at the lower end of the search range.
    pub open_below: bool,
    /// The excess is still positive at the upper end of the search range.
    pub open_above: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowOutcome {
    Secure(SecurityWindow),
    /// The average fidelity never exceeds the threshold in the range.
    NoSecurity {
        best_excess: f64,
        at_sigma_sq: f64,
    },
}

impl WindowOutcome {
    pub fn window(&self) -> Option<&SecurityWindow> {
        match self {
            WindowOutcome::Secure(w) => Some(w),
            WindowOutcome::NoSecurity { .. } => None,
        }
    }
}

/// Locates the codebook variances where `curve(σ²) > F_nc(σ²)`. The
/// window is the connected region around the best excess.
pub fn security_window<F: Fn(f64) -> f64>(curve: F, range: (f64, f64)) -> Result<WindowOutcome> {
    let (lo, hi) = range;
    check_non_negative("search range start", lo)?;
    check_range("search range end", hi, lo, f64::INFINITY)?;
    let excess = |s: f64| curve(s) - nc_threshold_gaussian(s).unwrap_or(f64::NAN);
    let n = WINDOW_SAMPLES;
    let xs: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let es: Vec<f64> = xs.iter().map(|&x| excess(x)).collect();
    let best = (0..n).max_by(|&a, &b| es[a].total_cmp(&es[b])).unwrap_or(0);
    if es[best] <= 0.0 {
        return Ok(WindowOutcome::NoSecurity {
            best_excess: es[best],
            at_sigma_sq: xs[best],
        });
    }
    let mut left = best;
    while left > 0 && es[left - 1] > 0.0 {
        left -= 1;
    }
    let mut right = best;
    while right + 1 < n && es[right + 1] > 0.0 {
        right += 1;
    }
    let open_below = left == 0;
    let open_above = right == n - 1;
    let sigma_min = if open_below {
        lo
    } else {
        bisect(excess, xs[left - 1], xs[left], WINDOW_TOL)
    };
    let sigma_max = if open_above {
        hi
    } else {
        bisect(excess, xs[right], xs[right + 1], WINDOW_TOL)
    };
    let a = xs[best.saturating_sub(1)].max(sigma_min);
    let b = xs[(best + 1).min(n - 1)].min(sigma_max);
    let (mut sigma_star, mut delta_star) = golden_max(excess, a, b, WINDOW_TOL);
    if es[best] > delta_star {
        sigma_star = xs[best];
        delta_star = es[best];
    }
    Ok(WindowOutcome::Secure(SecurityWindow {
        sigma_min,
        sigma_max,
        sigma_star,
        delta_star,
        open_below,
        open_above,
    }))
}

/// Security window of one reconstruction scheme at squeezing `squeezing_db`
/// and gain `gain_db`, averaging its fidelity over Gaussian codebooks.
pub fn scheme_window(
    scheme: Scheme,
    squeezing_db: f64,
    gain_db: f64,
    device: &DeviceModel,
    range: (f64, f64),
) -> Result<WindowOutcome> {
    let shares = share_secret(Complex64::new(0.0, 0.0), squeezing_db, device)?;
    let result = reconstruct(&shares, scheme, gain_db, device)?;
    security_window(|s| result_average_fidelity(&result, s).unwrap_or(f64::NAN), range)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiCheck {
    pub secure: bool,
    pub margin: f64,
}

/// The collaborators must hold strictly more information than the adversary.
pub fn mi_security_check(mi_collab: f64, mi_adv: f64) -> MiCheck {
    MiCheck {
        secure: mi_collab > mi_adv,
        margin: mi_collab - mi_adv,
    }
}
