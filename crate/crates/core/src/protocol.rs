//! The ((2,3)) threshold sharing protocol: resource generation, the Dealer,
//! the three reconstruction schemes and the adversary's view.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_range, Result};
use crate::gaussian::{db_to_linear, db_to_r, GaussianChannel, GaussianState, SymplecticOp, VACUUM_VARIANCE};
use crate::metrics::{self, MetricReport};
use crate::numerics::scan_max;

/// Largest amplitude factor the adversary may try when rescaling.
pub const MAX_RESCALE: f64 = 4.0;

/// Which two players collaborate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "12")]
    P12,
    #[serde(rename = "13")]
    P13,
    #[serde(rename = "23")]
    P23,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::P12, Scheme::P13, Scheme::P23];

    /// Zero-based index of the player left out.
    pub fn adversary(self) -> usize {
        match self {
            Scheme::P12 => 2,
            Scheme::P13 => 1,
            Scheme::P23 => 0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::P12 => "12",
            Scheme::P13 => "13",
            Scheme::P23 => "23",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        match s.trim_matches(|c| c == '{' || c == '}').replace(',', "").as_str() {
            "12" => Some(Scheme::P12),
            "13" => Some(Scheme::P13),
            "23" => Some(Scheme::P23),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.label().as_bytes();
        write!(f, "{{{},{}}}", s[0] as char, s[1] as char)
    }
}

/// Hardware imperfections. All fields default to the ideal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceModel {
    /// Thermal occupation added to the secret before the Dealer.
    pub input_nbar: f64,
    /// Fraction of the secret's power that reaches the Dealer.
    pub input_efficiency: f64,
    /// Isotropic excess noise of the resource squeezers:
    /// `c (10^{S/10} - 1) / 4` per quadrature.
    pub jpa_noise_coeff: f64,
    /// Same law, added only to the anti-squeezed quadrature of each
    /// resource squeezer.
    pub jpa_antisqueeze_noise_coeff: f64,
    /// Isotropic excess noise of the reconstruction amplifiers:
    /// `c (G_lin - 1) / 4` per quadrature.
    pub recon_noise_coeff: f64,
    /// Phase error (rad) of the {1,2} recombining hybrid ring.
    pub hybrid_phase_mismatch: f64,
    /// Power transmission of each player's path.
    pub path_efficiency: [f64; 3],
    /// Relative amplitude imbalance ε of the two interferometer arms.
    pub interferometer_imbalance: f64,
}

impl Default for DeviceModel {
    fn default() -> Self {
        DeviceModel::ideal()
    }
}

/// Bose–Einstein occupation at frequency `freq_hz` and temperature `temp_k`.
pub fn bose_einstein_nbar(freq_hz: f64, temp_k: f64) -> f64 {
    const H: f64 = 6.626_070_15e-34;
    const KB: f64 = 1.380_649e-23;
    1.0 / ((H * freq_hz / (KB * temp_k)).exp() - 1.0)
}

impl DeviceModel {
    pub fn ideal() -> Self {
        DeviceModel {
            input_nbar: 0.0,
            input_efficiency: 1.0,
            jpa_noise_coeff: 0.0,
            jpa_antisqueeze_noise_coeff: 0.0,
            recon_noise_coeff: 0.0,
            hybrid_phase_mismatch: 0.0,
            path_efficiency: [1.0; 3],
            interferometer_imbalance: 0.0,
        }
    }

    /// Fitted so that the {2,3} scheme at S = 6 dB, G = 7 dB has
    /// `√k ≈ 0.781`, `v_out ≈ 0.351`, with a 50 mK / 5.4 GHz input. These
    /// are fitted values, not measured hardware parameters.
    pub fn calibrated() -> Self {
        DeviceModel {
            input_nbar: bose_einstein_nbar(5.4e9, 0.05),
            input_efficiency: 0.67676,
            jpa_noise_coeff: 0.0,
            jpa_antisqueeze_noise_coeff: 0.7,
            recon_noise_coeff: 0.01364,
            hybrid_phase_mismatch: 0.15,
            path_efficiency: [1.0; 3],
            interferometer_imbalance: 0.0,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ideal" => Some(Self::ideal()),
            "calibrated" => Some(Self::calibrated()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("input_nbar", self.input_nbar)?;
        check_range("input_efficiency", self.input_efficiency, 0.0, 1.0)?;
        check_non_negative("jpa_noise_coeff", self.jpa_noise_coeff)?;
        check_non_negative("jpa_antisqueeze_noise_coeff", self.jpa_antisqueeze_noise_coeff)?;
        check_non_negative("recon_noise_coeff", self.recon_noise_coeff)?;
        check_range(
            "hybrid_phase_mismatch",
            self.hybrid_phase_mismatch,
            -std::f64::consts::PI,
            std::f64::consts::PI,
        )?;
        for &e in &self.path_efficiency {
            check_range("path_efficiency", e, 0.0, 1.0)?;
        }
        check_range("interferometer_imbalance", self.interferometer_imbalance, -1.0, 1.0)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub squeezing_db: f64,
    pub gain_db: f64,
    pub alpha: Complex64,
    pub scheme: Scheme,
}

/// The three players' joint state plus the linear response of every
/// quadrature mean to `(Re α, Im α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Shares {
    pub state: GaussianState,
    /// 6×2 Jacobian of the mean vector with respect to the secret.
    pub response: DMatrix<f64>,
    pub r: f64,
}

impl Shares {
    pub fn apply_channel(&self, ch: &GaussianChannel) -> Result<Shares> {
        Ok(Shares {
            state: self.state.apply_channel(ch)?,
            response: &ch.x * &self.response,
            r: self.r,
        })
    }

    /// Replaces `player`'s share by a thermal state of occupation `nbar_env`.
    pub fn erase(&self, player: usize, nbar_env: f64) -> Result<Shares> {
        self.apply_channel(&GaussianChannel::loss(3, player, 0.0, nbar_env)?)
    }

    /// Reduced state of one player together with its amplitude response.
    pub fn player(&self, player: usize) -> Result<(GaussianState, DMatrix<f64>)> {
        Ok((self.state.mode(player)?, self.response.rows(2 * player, 2).into_owned()))
    }
}

/// Output of a reconstruction scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub output: GaussianState,
    /// 2×2 Jacobian of the output mean with respect to `(Re α, Im α)`.
    pub response: Matrix2<f64>,
    /// RMS amplitude gain of the output mean relative to the secret.
    pub amplitude_gain_sqrt_k: f64,
    /// Output variance per quadrature (average of the two).
    pub v_out: f64,
}

impl ReconstructionResult {
    fn new(output: GaussianState, response: DMatrix<f64>) -> Self {
        let v_out = 0.5 * output.cov().trace();
        let response = Matrix2::from_fn(|r, c| response[(r, c)]);
        let sqrt_k = (0.5 * (response.transpose() * response).trace()).sqrt();
        ReconstructionResult {
            output,
            response,
            amplitude_gain_sqrt_k: sqrt_k,
            v_out,
        }
    }

    pub fn k(&self) -> f64 {
        self.amplitude_gain_sqrt_k.powi(2)
    }

    /// Fidelity of the actual output with `|α⟩`.
    pub fn fidelity(&self, alpha: Complex64) -> Result<f64> {
        metrics::fidelity(&GaussianState::coherent(alpha), &self.output)
    }

    /// Output moments had the secret been `alpha` instead.
    pub fn moments_for(&self, alpha: Complex64) -> (Vector2<f64>, Matrix2<f64>) {
        let c = self.output.cov();
        (
            self.response * Vector2::new(alpha.re, alpha.im),
            Matrix2::new(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]),
        )
    }

    /// Fidelity with `|α⟩` had the secret been `alpha`; the pipeline is
    /// linear in the secret, so no rerun is needed.
    pub fn fidelity_for(&self, alpha: Complex64) -> Result<f64> {
        let (m, v) = self.moments_for(alpha);
        metrics::fidelity_parts(&Vector2::new(alpha.re, alpha.im), &vacuum_block(), &m, &v)
    }

    /// Best single-mode rescaled fidelity had the secret been `alpha`.
    pub fn rescaled_fidelity_for(&self, alpha: Complex64) -> Result<f64> {
        let (m, v) = self.moments_for(alpha);
        best_rescaled_fidelity(&m, &v, alpha)
    }

    /// Phase-insensitive closed form with this result's `(k, v_out)`.
    pub fn fidelity_model(&self, alpha: Complex64) -> f64 {
        metrics::fidelity_symmetric(alpha, self.k(), self.v_out)
    }

    /// Added noise referred to the input; infinite when no signal survives.
    pub fn n_eff(&self) -> f64 {
        let k = self.k();
        if k < 1e-24 {
            return f64::INFINITY;
        }
        4.0 * (self.v_out - VACUUM_VARIANCE) / k
    }

    pub fn mutual_information(&self, sigma_sq: f64) -> f64 {
        let n = self.n_eff();
        if n.is_infinite() {
            return 0.0;
        }
        metrics::mutual_information(sigma_sq, n)
    }
}

/// Two orthogonally squeezed vacua combined on a balanced splitter.
pub fn make_tms_resource(squeezing_db: f64, device: &DeviceModel) -> Result<GaussianState> {
    check_non_negative("squeezing level", squeezing_db)?;
    let r = db_to_r(squeezing_db);
    let drive = (db_to_linear(squeezing_db) - 1.0) * VACUUM_VARIANCE;
    let iso = device.jpa_noise_coeff * drive;
    let anti = device.jpa_antisqueeze_noise_coeff * drive;
    GaussianState::vacuum(2)?
        .squeeze(0, r, FRAC_PI_2)?
        .squeeze(1, r, 0.0)?
        .add_anisotropic_noise(0, iso + anti, iso)?
        .add_anisotropic_noise(1, iso, iso + anti)?
        .beam_splitter(0, 1, 0.5, 0.0)
}

/// Mixes the secret with the first resource mode; the second resource mode
/// becomes P3.
pub fn dealer(alpha: Complex64, resource: &GaussianState, r: f64, device: &DeviceModel) -> Result<Shares> {
    device.validate()?;
    let amp = device.input_efficiency.sqrt();
    let input = GaussianState::coherent(alpha * amp).add_classical_noise(0, device.input_nbar / 2.0)?;
    let mut response = DMatrix::zeros(6, 2);
    response[(0, 0)] = amp;
    response[(1, 1)] = amp;
    let mut ch: GaussianChannel = SymplecticOp::beam_splitter(3, 0, 1, 0.5, 0.0)?.into();
    for (p, &eta) in device.path_efficiency.iter().enumerate() {
        ch = ch.then(&GaussianChannel::loss(3, p, eta, 0.0)?);
    }
    Shares {
        state: input.tensor(resource),
        response,
        r,
    }
    .apply_channel(&ch)
}

/// Resource generation followed by the Dealer.
pub fn share_secret(alpha: Complex64, squeezing_db: f64, device: &DeviceModel) -> Result<Shares> {
    let resource = make_tms_resource(squeezing_db, device)?;
    dealer(alpha, &resource, db_to_r(squeezing_db), device)
}

/// Undoes the Dealer's splitter with a second hybrid ring.
pub fn reconstruct_12(shares: &Shares, device: &DeviceModel) -> Result<ReconstructionResult> {
    let ch: GaussianChannel = SymplecticOp::beam_splitter(3, 0, 1, 0.5, device.hybrid_phase_mismatch)?.into();
    finish(shares, &ch, 0)
}

/// Josephson-interferometer two-mode squeezer on P2 and P3 at degenerate
/// gain `G_lin = 10^{G/10} = e^{2r'}`, realizing
/// `a_out = cosh r' a_2 + sinh r' a_3^dagger = η(√2 a_2 + γ a_3^dagger)` with
/// `γ = √2 tanh r'` and `η = cosh r' / √2 = 1/√(2 - γ²)`.
pub fn reconstruct_23(shares: &Shares, gain_db: f64, device: &DeviceModel) -> Result<ReconstructionResult> {
    interferometer(shares, 1, 2, FRAC_PI_2, 0.0, gain_db, device)
}

/// The {1,3} counterpart of [`reconstruct_23`]; P1 carries the opposite
/// resource sign, so the two squeezer axes are swapped.
pub fn reconstruct_13(shares: &Shares, gain_db: f64, device: &DeviceModel) -> Result<ReconstructionResult> {
    interferometer(shares, 0, 2, 0.0, FRAC_PI_2, gain_db, device)
}

pub fn reconstruct(
    shares: &Shares,
    scheme: Scheme,
    gain_db: f64,
    device: &DeviceModel,
) -> Result<ReconstructionResult> {
    match scheme {
        Scheme::P12 => reconstruct_12(shares, device),
        Scheme::P13 => reconstruct_13(shares, gain_db, device),
        Scheme::P23 => reconstruct_23(shares, gain_db, device),
    }
}

/// `γ` and `η` of the interferometer for a degenerate gain in dB.
pub fn gamma_eta(gain_db: f64) -> (f64, f64) {
    let r = db_to_r(gain_db);
    (std::f64::consts::SQRT_2 * r.tanh(), r.cosh() / std::f64::consts::SQRT_2)
}

fn interferometer(
    shares: &Shares,
    i: usize,
    j: usize,
    theta_i: f64,
    theta_j: f64,
    gain_db: f64,
    device: &DeviceModel,
) -> Result<ReconstructionResult> {
    check_non_negative("reconstruction gain (dB)", gain_db)?;
    let r = db_to_r(gain_db);
    let added = device.recon_noise_coeff * (db_to_linear(gain_db) - 1.0) * VACUUM_VARIANCE;
    let eps = device.interferometer_imbalance;
    let tau = (1.0 + eps).powi(2) / (2.0 * (1.0 + eps * eps));
    let ch: GaussianChannel = SymplecticOp::beam_splitter(3, i, j, 0.5, 0.0)?
        .then(&SymplecticOp::squeeze(3, i, r, theta_i)?)
        .then(&SymplecticOp::squeeze(3, j, r, theta_j)?)
        .into();
    let ch = ch
        .then(&GaussianChannel::classical_noise(3, i, added)?)
        .then(&GaussianChannel::classical_noise(3, j, added)?)
        .then(&SymplecticOp::beam_splitter(3, i, j, tau, 0.0)?.into());
    finish(shares, &ch, i)
}

fn finish(shares: &Shares, ch: &GaussianChannel, out: usize) -> Result<ReconstructionResult> {
    let after = shares.apply_channel(ch)?;
    let (state, response) = after.player(out)?;
    Ok(ReconstructionResult::new(state, response))
}

/// Reduced state of the player excluded by `scheme`.
pub fn adversary_view(shares: &Shares, scheme: Scheme) -> Result<ReconstructionResult> {
    let (state, response) = shares.player(scheme.adversary())?;
    Ok(ReconstructionResult::new(state, response))
}

/// Fidelity the holder of a single mode can reach against `|α⟩`.
///
/// With `optimize_rescale` the holder may apply a phase-insensitive
/// amplitude rescaling `g`: pure loss for `g < 1`, a quantum-limited
/// amplifier for `g > 1`. The best `g` in `[0, MAX_RESCALE]` is used.
pub fn adversary_best_fidelity(state: &GaussianState, alpha: Complex64, optimize_rescale: bool) -> Result<f64> {
    let target = GaussianState::coherent(alpha);
    let direct = metrics::fidelity(&target, state)?;
    if !optimize_rescale {
        return Ok(direct);
    }
    let c = state.cov();
    let m = Vector2::new(state.mean()[0], state.mean()[1]);
    best_rescaled_fidelity(&m, &Matrix2::new(c[(0, 0)], c[(0, 1)], c[(1, 0)], c[(1, 1)]), alpha)
}

fn vacuum_block() -> Matrix2<f64> {
    Matrix2::identity() * VACUUM_VARIANCE
}

fn best_rescaled_fidelity(m: &Vector2<f64>, v: &Matrix2<f64>, alpha: Complex64) -> Result<f64> {
    let a = Vector2::new(alpha.re, alpha.im);
    let vac = vacuum_block();
    let at = |g: f64| -> Result<f64> {
        let added = (g * g - 1.0).abs() * VACUUM_VARIANCE;
        metrics::fidelity_parts(&a, &vac, &(m * g), &(v * (g * g) + Matrix2::identity() * added))
    };
    let direct = at(1.0)?;
    let (_, best) = scan_max(|g| at(g).unwrap_or(0.0), 0.0, MAX_RESCALE, 81, 1e-9);
    Ok(best.max(direct))
}

/// Everything one protocol run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub resource: GaussianState,
    pub shares: Shares,
    pub result: ReconstructionResult,
    pub adversary: ReconstructionResult,
    pub adversary_fidelity: f64,
    pub adversary_mi: f64,
    pub report: MetricReport,
}

/// Resource, Dealer, reconstruction and adversary for one parameter point.
/// MI values are for a Gaussian codebook of variance `sigma_sq`.
pub fn run_protocol(
    params: &ProtocolParams,
    sigma_sq: f64,
    optimize_rescale: bool,
    device: &DeviceModel,
) -> Result<Transcript> {
    let resource = make_tms_resource(params.squeezing_db, device)?;
    let shares = dealer(params.alpha, &resource, db_to_r(params.squeezing_db), device)?;
    let result = reconstruct(&shares, params.scheme, params.gain_db, device)?;
    let adversary = adversary_view(&shares, params.scheme)?;
    let adversary_fidelity = adversary_best_fidelity(&adversary.output, params.alpha, optimize_rescale)?;
    let report = MetricReport {
        fidelity: result.fidelity(params.alpha)?,
        purity: metrics::purity(&resource),
        negativity: metrics::negativity(&resource)?,
        mi_nats: result.mutual_information(sigma_sq),
        n_eff: result.n_eff(),
    };
    Ok(Transcript {
        adversary_mi: adversary.mutual_information(sigma_sq),
        resource,
        shares,
        result,
        adversary,
        adversary_fidelity,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_resource() {
        let dev = DeviceModel::ideal();
        let vac = make_tms_resource(0.0, &dev).unwrap();
        assert!((vac.cov() - GaussianState::vacuum(2).unwrap().cov()).amax() < 1e-15);
        let six = make_tms_resource(6.0, &dev).unwrap();
        assert_abs_diff_eq!(metrics::negativity(&six).unwrap(), 1.491, epsilon = 1e-3);
    }

    #[test]
    fn jpa_noise_reduces_purity_with_drive() {
        let dev = DeviceModel {
            jpa_noise_coeff: 0.05,
            ..DeviceModel::ideal()
        };
        let p: Vec<f64> = [2.0, 4.0, 6.0, 8.0]
            .iter()
            .map(|&s| metrics::purity(&make_tms_resource(s, &dev).unwrap()))
            .collect();
        assert!(p[0] < 1.0);
        assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
    }

    #[test]
    fn dealer_shares_at_zero_squeezing() {
        let a = c(1.0, -0.4);
        let s = share_secret(a, 0.0, &DeviceModel::ideal()).unwrap();
        let want = a * FRAC_1_SQRT_2;
        for p in 0..2 {
            assert_abs_diff_eq!(s.state.amplitude(p).re, want.re, epsilon = 1e-12);
            assert_abs_diff_eq!(s.state.amplitude(p).im, want.im, epsilon = 1e-12);
        }
        assert_eq!(s.state.amplitude(2), c(0.0, 0.0));
    }

    #[test]
    fn p1_is_obscured_by_the_resource() {
        let dev = DeviceModel::ideal();
        for &db in &[0.0, 3.0, 6.0, 9.0] {
            let s = share_secret(c(0.5, 0.5), db, &dev).unwrap();
            let r = db_to_r(db);
            let want = 0.5 * (0.25 + (2.0 * r).cosh() / 4.0);
            assert_abs_diff_eq!(s.state.cov()[(0, 0)], want, epsilon = 1e-12);
        }
    }

    #[test]
    fn ideal_12_is_exact() {
        let dev = DeviceModel::ideal();
        let a = c(0.9, 0.7);
        let s = share_secret(a, 8.0, &dev).unwrap();
        let res = reconstruct_12(&s, &dev).unwrap();
        assert_abs_diff_eq!(res.fidelity(a).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.amplitude_gain_sqrt_k, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn phase_mismatch_degrades_12_with_squeezing() {
        let dev = DeviceModel {
            hybrid_phase_mismatch: 0.1,
            ..DeviceModel::ideal()
        };
        let a = c(1.1, 0.0);
        let f: Vec<f64> = (0..6)
            .map(|k| {
                let s = share_secret(a, 2.0 * k as f64, &dev).unwrap();
                reconstruct_12(&s, &dev).unwrap().fidelity(a).unwrap()
            })
            .collect();
        assert!(f.windows(2).all(|w| w[1] < w[0]), "{f:?}");
    }

    #[test]
    fn input_admixture_limits_12() {
        let dev = DeviceModel {
            input_nbar: 0.01,
            ..DeviceModel::ideal()
        };
        let s = share_secret(c(1.0, 0.0), 5.0, &dev).unwrap();
        assert!(reconstruct_12(&s, &dev).unwrap().fidelity(c(1.0, 0.0)).unwrap() < 1.0);
    }

    #[test]
    fn gamma_eta_identity() {
        for &g in &[0.0, 1.0, 3.0, 7.66, 12.0] {
            let (gamma, eta) = gamma_eta(g);
            assert_abs_diff_eq!(eta, 1.0 / (2.0 - gamma * gamma).sqrt(), epsilon = 1e-12);
        }
        let opt = (SQRT_2 + 1.0) / (SQRT_2 - 1.0);
        let (gamma, _) = gamma_eta(10.0 * opt.log10());
        assert_abs_diff_eq!(gamma, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn interferometer_realizes_the_two_mode_squeezer() {
        // Against the direct map a_out = cosh r' a_2 + sinh r' a_3^dagger.
        let dev = DeviceModel::ideal();
        let (s_db, g_db) = (5.0, 6.0);
        let a = c(0.3, -1.2);
        let shares = share_secret(a, s_db, &dev).unwrap();
        let res = reconstruct_23(&shares, g_db, &dev).unwrap();
        let rp = db_to_r(g_db);
        let direct = shares.state.two_mode_squeeze(1, 2, rp).unwrap().mode(1).unwrap();
        assert!((direct.cov() - res.output.cov()).amax() < 1e-12);
        assert!((direct.mean() - res.output.mean()).amax() < 1e-12);
    }

    #[test]
    fn zero_squeezing_zero_gain() {
        let dev = DeviceModel::ideal();
        let a = c(1.0, 0.2);
        let s = share_secret(a, 0.0, &dev).unwrap();
        let res = reconstruct_23(&s, 0.0, &dev).unwrap();
        assert_abs_diff_eq!(res.amplitude_gain_sqrt_k, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(res.v_out >= 0.25 - 1e-12);
        assert_abs_diff_eq!(res.fidelity(a).unwrap(), res.fidelity_model(a), epsilon = 1e-12);
    }

    #[test]
    fn schemes_13_and_23_agree() {
        let dev = DeviceModel::ideal();
        let a = c(0.7, 0.9);
        let s = share_secret(a, 7.0, &dev).unwrap();
        let r13 = reconstruct_13(&s, 7.5, &dev).unwrap();
        let r23 = reconstruct_23(&s, 7.5, &dev).unwrap();
        assert!((r13.output.cov() - r23.output.cov()).amax() < 1e-10);
        assert_abs_diff_eq!(r13.fidelity(a).unwrap(), r23.fidelity(a).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn adversary_views() {
        let dev = DeviceModel::ideal();
        let a = c(1.3f64.sqrt(), 0.0);
        let s = share_secret(a, 6.0, &dev).unwrap();
        let adv12 = adversary_view(&s, Scheme::P12).unwrap();
        assert_eq!(adv12.amplitude_gain_sqrt_k, 0.0);
        assert_eq!(adv12.mutual_information(3.0), 0.0);
        let want = metrics::fidelity_symmetric(a, 0.0, adv12.v_out);
        assert_abs_diff_eq!(
            adversary_best_fidelity(&adv12.output, a, false).unwrap(),
            want,
            epsilon = 1e-12
        );
        let adv23 = adversary_view(&s, Scheme::P23).unwrap();
        assert_abs_diff_eq!(adv23.amplitude_gain_sqrt_k, FRAC_1_SQRT_2, epsilon = 1e-12);
        let v: Vec<f64> = [2.0, 4.0, 6.0]
            .iter()
            .map(|&db| {
                adversary_view(&share_secret(a, db, &dev).unwrap(), Scheme::P23)
                    .unwrap()
                    .v_out
            })
            .collect();
        assert!(v[0] < v[1] && v[1] < v[2]);
    }

    #[test]
    fn rescale_never_hurts_and_zero_secret_is_vacuum_like() {
        let dev = DeviceModel::ideal();
        let a = c(1.0, 0.0);
        let s = share_secret(a, 4.0, &dev).unwrap();
        let adv = adversary_view(&s, Scheme::P23).unwrap();
        let plain = adversary_best_fidelity(&adv.output, a, false).unwrap();
        let best = adversary_best_fidelity(&adv.output, a, true).unwrap();
        assert!(best >= plain);
        let zero = share_secret(c(0.0, 0.0), 4.0, &dev).unwrap();
        let adv0 = adversary_view(&zero, Scheme::P12).unwrap();
        assert!(adversary_best_fidelity(&adv0.output, c(0.0, 0.0), true).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn transcript_smoke() {
        let dev = DeviceModel::calibrated();
        for scheme in Scheme::ALL {
            let p = ProtocolParams {
                squeezing_db: 6.0,
                gain_db: 7.0,
                alpha: c(1.0, 0.5),
                scheme,
            };
            let t = run_protocol(&p, 3.0, true, &dev).unwrap();
            assert!(t.report.fidelity > t.adversary_fidelity, "{scheme}");
            assert!(t.report.purity < 1.0 && t.report.negativity > 0.0);
        }
    }

    #[test]
    fn calibrated_preset_hits_its_fit_targets() {
        let dev = DeviceModel::calibrated();
        dev.validate().unwrap();
        let s = share_secret(c(1.0, 0.0), 6.0, &dev).unwrap();
        let res = reconstruct_23(&s, 7.0, &dev).unwrap();
        assert_abs_diff_eq!(res.amplitude_gain_sqrt_k, 0.781053, epsilon = 2e-4);
        assert_abs_diff_eq!(res.v_out, 0.350674, epsilon = 2e-4);
    }

    #[test]
    fn linear_response_predicts_other_secrets() {
        let dev = DeviceModel {
            interferometer_imbalance: 0.1,
            ..DeviceModel::calibrated()
        };
        let base = reconstruct_23(&share_secret(c(0.2, 0.1), 6.0, &dev).unwrap(), 7.0, &dev).unwrap();
        let b = c(-1.4, 0.8);
        let rerun = reconstruct_23(&share_secret(b, 6.0, &dev).unwrap(), 7.0, &dev).unwrap();
        assert_abs_diff_eq!(
            base.fidelity_for(b).unwrap(),
            rerun.fidelity(b).unwrap(),
            epsilon = 1e-13
        );
        let adv = adversary_view(&share_secret(b, 6.0, &dev).unwrap(), Scheme::P23).unwrap();
        assert_abs_diff_eq!(
            adv.rescaled_fidelity_for(b).unwrap(),
            adversary_best_fidelity(&adv.output, b, true).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn scheme_labels() {
        assert_eq!(Scheme::P23.to_string(), "{2,3}");
        assert_eq!(Scheme::parse("{1,3}"), Some(Scheme::P13));
        assert_eq!(Scheme::parse("12"), Some(Scheme::P12));
        assert_eq!(Scheme::parse("33"), None);
    }
}
