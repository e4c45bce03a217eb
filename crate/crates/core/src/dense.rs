//! The {2,3} pipeline read as continuous-variable dense coding under a fixed
//! ensemble-variance budget.

use num_complex::Complex64;

use crate::error::{check_non_negative, QssError, Result};
use crate::gaussian::{db_to_r, VACUUM_VARIANCE};
use crate::numerics::{bisect, scan_max};
use crate::protocol::{reconstruct_23, share_secret, DeviceModel};

/// Upper end of the decoder gain search, in dB.
pub const MAX_DECODER_GAIN_DB: f64 = 30.0;

/// Split of a fixed ensemble variance between codebook modulation and the
/// noise of the transmitted state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseCodingBudget {
    pub sigma_ens_sq: f64,
    pub sigma_cb_sq: f64,
    pub sigma_st_sq: f64,
    pub r: f64,
}

impl DenseCodingBudget {
    pub fn new(sigma_ens_sq: f64, sigma_st_sq: f64, r: f64) -> Result<Self> {
        check_non_negative("ensemble variance", sigma_ens_sq)?;
        check_non_negative("state variance", sigma_st_sq)?;
        if sigma_st_sq > sigma_ens_sq {
            return Err(QssError::BudgetExhausted {
                ensemble: sigma_ens_sq,
                state: sigma_st_sq,
            });
        }
        Ok(DenseCodingBudget {
            sigma_ens_sq,
            sigma_cb_sq: sigma_ens_sq - sigma_st_sq,
            sigma_st_sq,
            r,
        })
    }
}

/// With `ideal`, the transmitted state costs `sinh(2r)`; otherwise it costs
/// the simulated variance of the transmitted share (P2) with no signal.
pub fn budget_from_squeezing(
    sigma_ens_sq: f64,
    squeezing_db: f64,
    ideal: bool,
    device: &DeviceModel,
) -> Result<DenseCodingBudget> {
    check_non_negative("squeezing level", squeezing_db)?;
    let r = db_to_r(squeezing_db);
    let st = if ideal {
        (2.0 * r).sinh()
    } else {
        transmitted_variance(squeezing_db, device)?
    };
    DenseCodingBudget::new(sigma_ens_sq, st, r)
}

fn transmitted_variance(squeezing_db: f64, device: &DeviceModel) -> Result<f64> {
    let shares = share_secret(Complex64::new(0.0, 0.0), squeezing_db, device)?;
    Ok(0.5 * shares.state.mode(1)?.cov().trace())
}

/// `ln(1 + σ_cb² e^{2r})`.
pub fn mi_dense_ideal(budget: &DenseCodingBudget) -> f64 {
    (budget.sigma_cb_sq * (2.0 * budget.r).exp()).ln_1p()
}

/// Coherent states of variance 1/4 with the rest of the budget spent on
/// modulation: `ln(1 + s_conv (σ_ens² - 1/4))`.
pub fn mi_coherent_baseline(sigma_ens_sq: f64, s_conv: f64) -> Result<f64> {
    if sigma_ens_sq < VACUUM_VARIANCE {
        return Err(QssError::BudgetExhausted {
            ensemble: sigma_ens_sq,
            state: VACUUM_VARIANCE,
        });
    }
    Ok((s_conv * (sigma_ens_sq - VACUUM_VARIANCE)).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSimulation {
    pub mi_nats: f64,
    pub gain_db: f64,
    /// Signal-to-noise gain of the decoder relative to a bare coherent state.
    pub snr_gain: f64,
    pub budget: DenseCodingBudget,
}

/// Decoder SNR gain `k_P2 / (4 v_out)` at gain `gain_db`, where `k_P2` is
/// the power gain relative to the displacement carried by P2.
pub fn decoder_snr_gain(squeezing_db: f64, gain_db: f64, device: &DeviceModel) -> Result<f64> {
    let shares = share_secret(Complex64::new(0.0, 0.0), squeezing_db, device)?;
    let res = reconstruct_23(&shares, gain_db, device)?;
    let carried = shares.response.rows(2, 2).into_owned();
    let carried_k = 0.5 * (carried.transpose() * &carried).trace();
    Ok(res.k() / carried_k / (4.0 * res.v_out))
}

/// Encode by the Dealer's splitter, decode with the {2,3} interferometer.
/// `gain_db = None` picks the gain maximizing the decoder SNR gain.
pub fn mi_dense_simulated(
    sigma_ens_sq: f64,
    squeezing_db: f64,
    gain_db: Option<f64>,
    device: &DeviceModel,
    s_conv: f64,
) -> Result<DenseSimulation> {
    let budget = budget_from_squeezing(sigma_ens_sq, squeezing_db, false, device)?;
    let (gain_db, snr_gain) = match gain_db {
        Some(g) => (g, decoder_snr_gain(squeezing_db, g, device)?),
        None => scan_max(
            |g| decoder_snr_gain(squeezing_db, g, device).unwrap_or(f64::NEG_INFINITY),
            0.0,
            MAX_DECODER_GAIN_DB,
            61,
            1e-7,
        ),
    };
    Ok(DenseSimulation {
        mi_nats: (s_conv * budget.sigma_cb_sq * snr_gain).ln_1p(),
        gain_db,
        snr_gain,
        budget,
    })
}

/// Squeezing (dB) at which `sinh(2r)` uses the whole ensemble budget.
pub fn budget_limit_db(sigma_ens_sq: f64) -> f64 {
    20.0 * (sigma_ens_sq.asinh() / 2.0) / std::f64::consts::LN_10
}

/// Squeezing levels in `(0, budget limit)` where the ideal dense-coding MI
/// crosses the coherent baseline.
pub fn ideal_baseline_crossings(sigma_ens_sq: f64, s_conv: f64) -> Result<Vec<f64>> {
    let base = mi_coherent_baseline(sigma_ens_sq, s_conv)?;
    let limit = budget_limit_db(sigma_ens_sq);
    let diff = |db: f64| {
        budget_from_squeezing(sigma_ens_sq, db, true, &DeviceModel::ideal())
            .map(|b| mi_dense_ideal(&b) - base)
            .unwrap_or(f64::NAN)
    };
    let n = 400;
    let xs: Vec<f64> = (0..=n).map(|i| limit * i as f64 / n as f64).collect();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (a, b) = (diff(w[0]), diff(w[1]));
        if a.is_finite() && b.is_finite() && (a > 0.0) != (b > 0.0) {
            out.push(bisect(diff, w[0], w[1], 1e-9));
        }
    }
    Ok(out)
}

/// Squeezing level maximizing the ideal dense-coding MI at fixed budget.
pub fn ideal_optimum_db(sigma_ens_sq: f64) -> (f64, f64) {
    let f = |db: f64| {
        budget_from_squeezing(sigma_ens_sq, db, true, &DeviceModel::ideal())
            .map(|b| mi_dense_ideal(&b))
            .unwrap_or(f64::NEG_INFINITY)
    };
    scan_max(f, 0.0, budget_limit_db(sigma_ens_sq), 200, 1e-8)
}
