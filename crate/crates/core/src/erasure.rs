//! The sharing protocol used as an erasure code over three independent
//! channels.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_range, Result};
use crate::exec::Exec;
use crate::gaussian::GaussianState;
use crate::metrics;
use crate::numerics::nelder_mead_max;
use crate::protocol::{adversary_view, reconstruct, share_secret, DeviceModel, ReconstructionResult, Scheme, Shares};

/// Trials per independently seeded Monte-Carlo chunk.
const MC_CHUNK: usize = 4096;

/// Recovery chosen once some channels are erased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recovery {
    Collaborate(Scheme),
    /// Only this (zero-based) player's share is left.
    Survivor(usize),
    Vacuum,
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Recovery::Collaborate(s) => write!(f, "{s} collaborators"),
            Recovery::Survivor(p) => write!(f, "P{} alone", p + 1),
            Recovery::Vacuum => write!(f, "vacuum"),
        }
    }
}

/// Bit `p` of `erased` is set when player `p` (zero-based) lost their share.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureScenario {
    pub erased: u8,
    pub probability: f64,
    pub best: Recovery,
}

impl ErasureScenario {
    pub fn n_erased(&self) -> u32 {
        self.erased.count_ones()
    }

    pub fn label(&self) -> String {
        if self.erased == 0 {
            return "none".into();
        }
        (0..3)
            .filter(|p| self.erased & (1 << p) != 0)
            .map(|p| format!("P{}", p + 1))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Scenario order: none, P1, P2, P3, P1P2, P1P3, P2P3, all.
pub const SCENARIO_MASKS: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

pub fn best_recovery(erased: u8) -> Recovery {
    match erased & 0b111 {
        0b000 | 0b100 => Recovery::Collaborate(Scheme::P12),
        0b001 => Recovery::Collaborate(Scheme::P23),
        0b010 => Recovery::Collaborate(Scheme::P13),
        0b011 => Recovery::Survivor(2),
        0b101 => Recovery::Survivor(1),
        0b110 => Recovery::Survivor(0),
        _ => Recovery::Vacuum,
    }
}

/// Every recovery the survivors of `erased` could attempt.
pub fn available_recoveries(erased: u8) -> Vec<Recovery> {
    let alive = |p: usize| erased & (1 << p) == 0;
    let mut out = vec![Recovery::Vacuum];
    for s in Scheme::ALL {
        let pair = match s {
            Scheme::P12 => (0, 1),
            Scheme::P13 => (0, 2),
            Scheme::P23 => (1, 2),
        };
        if alive(pair.0) && alive(pair.1) {
            out.push(Recovery::Collaborate(s));
        }
    }
    out.extend((0..3).filter(|&p| alive(p)).map(Recovery::Survivor));
    out
}

pub fn scenario_probability(erased: u8, lambda: f64) -> f64 {
    let k = erased.count_ones() as i32;
    lambda.powi(k) * (1.0 - lambda).powi(3 - k)
}

pub fn scenario_table(lambda: f64) -> Result<[ErasureScenario; 8]> {
    check_range("erasure probability", lambda, 0.0, 1.0)?;
    Ok(SCENARIO_MASKS.map(|m| ErasureScenario {
        erased: m,
        probability: scenario_probability(m, lambda),
        best: best_recovery(m),
    }))
}

/// Single-channel transmission of `|α⟩` through an erasure channel:
/// `1 - λ (1 - e^{-|α|²})`.
pub fn coherent_baseline(alpha: Complex64, lambda: f64) -> Result<f64> {
    check_range("erasure probability", lambda, 0.0, 1.0)?;
    Ok(1.0 - lambda * (1.0 - (-alpha.norm_sqr()).exp()))
}

/// How the survivors pick their recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// The fixed choice of [`best_recovery`].
    #[default]
    Table,
    /// Whichever available recovery gives the highest fidelity for the
    /// given secret. Differs from `Table` only for very weak secrets, where
    /// guessing the vacuum beats the noisy interferometer.
    Best,
}

/// Protocol settings for the erasure experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureConfig {
    pub squeezing_db: f64,
    pub gain_db: f64,
    pub device: DeviceModel,
    /// Occupation of the state replacing an erased share (0 = vacuum).
    pub env_nbar: f64,
    pub selection: Selection,
}

impl ErasureConfig {
    pub fn new(squeezing_db: f64, gain_db: f64, device: DeviceModel) -> Self {
        ErasureConfig {
            squeezing_db,
            gain_db,
            device,
            env_nbar: 0.0,
            selection: Selection::Table,
        }
    }
}

/// Pre-computed recoveries for every scenario. The pipeline is linear in
/// the secret, so the per-secret cost is a handful of fidelity evaluations.
#[derive(Debug, Clone)]
pub struct ErasureModel {
    shares: Shares,
    config: ErasureConfig,
    outcomes: Vec<(u8, Recovery, Outcome)>,
}

#[derive(Debug, Clone)]
enum Outcome {
    Output(ReconstructionResult),
    Survivor(ReconstructionResult),
    Vacuum(GaussianState),
}

impl ErasureModel {
    pub fn new(config: ErasureConfig) -> Result<Self> {
        let shares = share_secret(Complex64::new(0.0, 0.0), config.squeezing_db, &config.device)?;
        let mut model = ErasureModel {
            shares,
            config,
            outcomes: Vec::new(),
        };
        for m in SCENARIO_MASKS {
            for rec in available_recoveries(m) {
                let out = model.outcome(m, rec)?;
                model.outcomes.push((m, rec, out));
            }
        }
        Ok(model)
    }

    pub fn config(&self) -> &ErasureConfig {
        &self.config
    }

    fn outcome(&self, erased: u8, rec: Recovery) -> Result<Outcome> {
        let mut shares = self.shares.clone();
        for p in 0..3 {
            if erased & (1 << p) != 0 {
                shares = shares.erase(p, self.config.env_nbar)?;
            }
        }
        Ok(match rec {
            Recovery::Collaborate(s) => {
                Outcome::Output(reconstruct(&shares, s, self.config.gain_db, &self.config.device)?)
            }
            Recovery::Survivor(p) => {
                let scheme = match p {
                    0 => Scheme::P23,
                    1 => Scheme::P13,
                    _ => Scheme::P12,
                };
                Outcome::Survivor(adversary_view(&shares, scheme)?)
            }
            Recovery::Vacuum => Outcome::Vacuum(GaussianState::thermal(self.config.env_nbar)?),
        })
    }

    /// Fidelity of `rec` in scenario `erased` for secret `alpha`.
    pub fn fidelity(&self, erased: u8, rec: Recovery, alpha: Complex64) -> Result<f64> {
        let (_, _, out) = self
            .outcomes
            .iter()
            .find(|(m, r, _)| *m == erased && *r == rec)
            .ok_or(crate::QssError::EmptySelection)?;
        match out {
            Outcome::Output(r) => r.fidelity_for(alpha),
            Outcome::Survivor(r) => r.rescaled_fidelity_for(alpha),
            Outcome::Vacuum(s) => metrics::fidelity(&GaussianState::coherent(alpha), s),
        }
    }

    /// Fidelity of the selected recovery for each scenario, in
    /// [`SCENARIO_MASKS`] order.
    pub fn scenario_fidelities(&self, alpha: Complex64) -> Result<[f64; 8]> {
        let mut out = [0.0; 8];
        for (i, &m) in SCENARIO_MASKS.iter().enumerate() {
            out[i] = match self.config.selection {
                Selection::Table => self.fidelity(m, best_recovery(m), alpha)?,
                Selection::Best => self.best_available(m, alpha)?.1,
            };
        }
        Ok(out)
    }

    /// Highest-fidelity recovery open to the survivors of `erased`.
    pub fn best_available(&self, erased: u8, alpha: Complex64) -> Result<(Recovery, f64)> {
        let mut best = (Recovery::Vacuum, f64::NEG_INFINITY);
        for rec in available_recoveries(erased) {
            let f = self.fidelity(erased, rec, alpha)?;
            if f > best.1 {
                best = (rec, f);
            }
        }
        Ok(best)
    }

    pub fn average_fidelity(&self, alpha: Complex64, lambda: f64) -> Result<f64> {
        Ok(average_from(&self.scenario_fidelities(alpha)?, lambda))
    }

    /// Seeded Monte-Carlo estimate of the average fidelity: every trial
    /// erases each channel independently with probability `lambda`.
    /// Returns `(mean, standard error)`. Chunks are seeded by index, so the
    /// result does not depend on `exec`.
    pub fn monte_carlo(
        &self,
        alpha: Complex64,
        lambda: f64,
        trials: usize,
        seed: u64,
        exec: Exec,
    ) -> Result<(f64, f64)> {
        check_range("erasure probability", lambda, 0.0, 1.0)?;
        if trials == 0 {
            return Err(crate::QssError::NoSamples);
        }
        let f = self.scenario_fidelities(alpha)?;
        let mut by_mask = [0.0; 8];
        for (i, &m) in SCENARIO_MASKS.iter().enumerate() {
            by_mask[m as usize] = f[i];
        }
        let n_chunks = trials.div_ceil(MC_CHUNK);
        let sums = exec.map_range(n_chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = MC_CHUNK.min(trials - c * MC_CHUNK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let mut mask = 0usize;
                for p in 0..3 {
                    if rng.random::<f64>() < lambda {
                        mask |= 1 << p;
                    }
                }
                let v = by_mask[mask];
                s += v;
                s2 += v * v;
            }
            (s, s2)
        });
        let (s, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let n = trials as f64;
        let mean = s / n;
        let var = ((s2 - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
        Ok((mean, (var / n).sqrt()))
    }
}

/// Probability-weighted sum over the scenarios (in [`SCENARIO_MASKS`] order).
pub fn average_from(fidelities: &[f64; 8], lambda: f64) -> f64 {
    SCENARIO_MASKS
        .iter()
        .zip(fidelities)
        .map(|(&m, f)| scenario_probability(m, lambda) * f)
        .sum()
}

/// One-off scenario fidelity; builds the model internally.
pub fn scenario_fidelity(scenario: &ErasureScenario, alpha: Complex64, config: &ErasureConfig) -> Result<f64> {
    ErasureModel::new(config.clone())?.fidelity(scenario.erased, scenario.best, alpha)
}

pub fn average_fidelity(alpha: Complex64, lambda: f64, config: &ErasureConfig) -> Result<f64> {
    ErasureModel::new(config.clone())?.average_fidelity(alpha, lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageGrid {
    pub alpha_sq: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl AdvantageGrid {
    pub fn linspace(alpha_max: f64, n_alpha: usize, n_lambda: usize) -> Self {
        let lin = |hi: f64, n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![0.0];
            }
            (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
        };
        AdvantageGrid {
            alpha_sq: lin(alpha_max, n_alpha),
            lambda: lin(1.0, n_lambda),
        }
    }
}

impl Default for AdvantageGrid {
    fn default() -> Self {
        Self::linspace(10.0, 101, 101)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantagePeak {
    pub alpha_sq: f64,
    pub lambda: f64,
    pub delta_f: f64,
}

/// `ΔF = F̄ - F_coh` over `(|α|², λ)`; `delta[i][j]` is at
/// `(alpha_sq[i], lambda[j])`. Secrets are taken on the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageMap {
    pub grid: AdvantageGrid,
    pub f_bar: Vec<Vec<f64>>,
    pub f_coh: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    pub grid_max: AdvantagePeak,
    pub max: AdvantagePeak,
    /// Linear-interpolation crossings of `ΔF = 0` on grid edges.
    pub zero_contour: Vec<(f64, f64)>,
}

fn real_alpha(alpha_sq: f64) -> Complex64 {
    Complex64::new(alpha_sq.max(0.0).sqrt(), 0.0)
}

/// `ΔF` at one point.
pub fn advantage(model: &ErasureModel, alpha_sq: f64, lambda: f64) -> Result<f64> {
    let a = real_alpha(alpha_sq);
    Ok(model.average_fidelity(a, lambda)? - coherent_baseline(a, lambda)?)
}

pub fn advantage_map(model: &ErasureModel, grid: &AdvantageGrid, exec: Exec) -> Result<AdvantageMap> {
    for &l in &grid.lambda {
        check_range("erasure probability", l, 0.0, 1.0)?;
    }
    let rows = exec.map(&grid.alpha_sq, |&a2| -> Result<(Vec<f64>, Vec<f64>)> {
        let a = real_alpha(a2);
        let f = model.scenario_fidelities(a)?;
        let mut fb = Vec::with_capacity(grid.lambda.len());
        let mut fc = Vec::with_capacity(grid.lambda.len());
        for &l in &grid.lambda {
            fb.push(average_from(&f, l));
            fc.push(coherent_baseline(a, l)?);
        }
        Ok((fb, fc))
    });
    let mut f_bar = Vec::with_capacity(rows.len());
    let mut f_coh = Vec::with_capacity(rows.len());
    for r in rows {
        let (fb, fc) = r?;
        f_bar.push(fb);
        f_coh.push(fc);
    }
    let delta: Vec<Vec<f64>> = f_bar
        .iter()
        .zip(&f_coh)
        .map(|(b, c)| b.iter().zip(c).map(|(x, y)| x - y).collect())
        .collect();

    let mut grid_max = AdvantagePeak {
        alpha_sq: f64::NAN,
        lambda: f64::NAN,
        delta_f: f64::NEG_INFINITY,
    };
    for (i, row) in delta.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d > grid_max.delta_f {
                grid_max = AdvantagePeak {
                    alpha_sq: grid.alpha_sq[i],
                    lambda: grid.lambda[j],
                    delta_f: d,
                };
            }
        }
    }
    let max = polish(model, grid, grid_max);
    Ok(AdvantageMap {
        zero_contour: zero_crossings(grid, &delta),
        grid: grid.clone(),
        f_bar,
        f_coh,
        delta,
        grid_max,
        max,
    })
}

fn polish(model: &ErasureModel, grid: &AdvantageGrid, start: AdvantagePeak) -> AdvantagePeak {
    let step = |v: &[f64]| if v.len() > 1 { (v[1] - v[0]).abs() } else { 0.1 };
    let (a_lo, a_hi) = bounds(&grid.alpha_sq);
    let (l_lo, l_hi) = bounds(&grid.lambda);
    let f = |p: [f64; 2]| {
        if p[0] < a_lo || p[0] > a_hi || p[1] < l_lo || p[1] > l_hi {
            return f64::NEG_INFINITY;
        }
        advantage(model, p[0], p[1]).unwrap_or(f64::NEG_INFINITY)
    };
    let (p, v) = nelder_mead_max(
        f,
        [start.alpha_sq, start.lambda],
        [step(&grid.alpha_sq) * 0.5, step(&grid.lambda) * 0.5],
        1e-5,
        2000,
    );
    if v >= start.delta_f {
        AdvantagePeak {
            alpha_sq: p[0],
            lambda: p[1],
            delta_f: v,
        }
    } else {
        start
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn zero_crossings(grid: &AdvantageGrid, delta: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let cross = |x0: f64, x1: f64, d0: f64, d1: f64| x0 + (x1 - x0) * d0 / (d0 - d1);
    for i in 0..delta.len() {
        for j in 0..delta[i].len() {
            let d = delta[i][j];
            if j + 1 < delta[i].len() {
                let e = delta[i][j + 1];
                if (d > 0.0) != (e > 0.0) {
                    out.push((grid.alpha_sq[i], cross(grid.lambda[j], grid.lambda[j + 1], d, e)));
                }
            }
            if i + 1 < delta.len() {
                let e = delta[i + 1][j];
                if (d > 0.0) != (e > 0.0) {
                    out.push((cross(grid.alpha_sq[i], grid.alpha_sq[i + 1], d, e), grid.lambda[j]));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ideal_model() -> ErasureModel {
        ErasureModel::new(ErasureConfig::new(6.0, 7.0, DeviceModel::ideal())).unwrap()
    }

    #[test]
    fn table_probabilities() {
        let t0 = scenario_table(0.0).unwrap();
        assert_eq!(t0[0].probability, 1.0);
        assert!(t0[1..].iter().all(|s| s.probability == 0.0));
        for s in scenario_table(0.5).unwrap() {
            assert_abs_diff_eq!(s.probability, 0.125, epsilon = 1e-15);
        }
        let total: f64 = scenario_table(0.474).unwrap().iter().map(|s| s.probability).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-15);
        assert!(scenario_table(1.2).is_err());
    }

    #[test]
    fn table_recoveries() {
        let t = scenario_table(0.3).unwrap();
        let labels: Vec<String> = t.iter().map(|s| format!("{}: {}", s.label(), s.best)).collect();
        assert_eq!(
            labels,
            [
                "none: {1,2} collaborators",
                "P1: {2,3} collaborators",
                "P2: {1,3} collaborators",
                "P3: {1,2} collaborators",
                "P1,P2: P3 alone",
                "P1,P3: P2 alone",
                "P2,P3: P1 alone",
                "P1,P2,P3: vacuum",
            ]
        );
    }

    #[test]
    fn baseline_values() {
        let a = Complex64::new(2.41f64.sqrt(), 0.0);
        assert_abs_diff_eq!(coherent_baseline(a, 0.474).unwrap(), 0.5686, epsilon = 1e-4);
        assert_eq!(coherent_baseline(a, 0.0).unwrap(), 1.0);
        assert_eq!(coherent_baseline(Complex64::new(0.0, 0.0), 0.7).unwrap(), 1.0);
    }

    #[test]
    fn ideal_scenarios() {
        let m = ideal_model();
        let a = Complex64::new(1.2, -0.3);
        let f = m.scenario_fidelities(a).unwrap();
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f[7], (-a.norm_sqr()).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.average_fidelity(a, 0.0).unwrap(), f[0], epsilon = 1e-15);
        assert_abs_diff_eq!(m.average_fidelity(a, 1.0).unwrap(), f[7], epsilon = 1e-15);
    }

    #[test]
    fn monte_carlo_agrees_and_ignores_exec() {
        let m = ideal_model();
        let a = Complex64::new(1.5, 0.0);
        let exact = m.average_fidelity(a, 0.4).unwrap();
        let (mean, se) = m.monte_carlo(a, 0.4, 100_000, 11, Exec::Parallel).unwrap();
        assert!((mean - exact).abs() < 3.0 * se, "{mean} vs {exact} ± {se}");
        assert_eq!(
            m.monte_carlo(a, 0.4, 20_000, 3, Exec::Sequential).unwrap(),
            m.monte_carlo(a, 0.4, 20_000, 3, Exec::Parallel).unwrap()
        );
    }

    #[test]
    fn best_selection_dominates_table() {
        let mut cfg = ErasureConfig::new(6.0, 7.0, DeviceModel::calibrated());
        let table = ErasureModel::new(cfg.clone()).unwrap();
        cfg.selection = Selection::Best;
        let best = ErasureModel::new(cfg).unwrap();
        for a2 in [0.1, 0.5, 2.4, 7.0] {
            let a = Complex64::new(f64::sqrt(a2), 0.0);
            let (t, b) = (
                table.scenario_fidelities(a).unwrap(),
                best.scenario_fidelities(a).unwrap(),
            );
            assert!(t.iter().zip(&b).all(|(x, y)| y >= x));
        }
        // A weak secret is better guessed as vacuum than run through the
        // interferometer when P1 is lost.
        let weak = Complex64::new(0.1f64.sqrt(), 0.0);
        let (rec, _) = table.best_available(0b001, weak).unwrap();
        assert_ne!(rec, Recovery::Collaborate(Scheme::P23));
    }

    #[test]
    fn ideal_map_has_an_advantage_region() {
        let m = ideal_model();
        let map = advantage_map(&m, &AdvantageGrid::linspace(10.0, 21, 21), Exec::default()).unwrap();
        assert!(map.max.delta_f > 0.0);
        assert!(map.max.alpha_sq > 0.0 && map.max.alpha_sq < 10.0);
        assert!(map.max.lambda > 0.0 && map.max.lambda < 1.0);
        assert!(map.max.delta_f >= map.grid_max.delta_f);
        assert!(!map.zero_contour.is_empty());
    }
}
