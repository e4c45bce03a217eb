//! Runners that turn a resolved [`Experiment`] into a result table.
//!
//! Rows are ordered lexicographically by the grid columns, in column order,
//! whatever the execution strategy.

use num_complex::Complex64;
use qss::dense::{budget_from_squeezing, mi_coherent_baseline, mi_dense_ideal, mi_dense_simulated};
use qss::erasure::{advantage_map, AdvantageGrid, AdvantagePeak, ErasureConfig, ErasureModel, Selection};
use qss::protocol::{reconstruct, run_protocol, share_secret, DeviceModel, ProtocolParams, Scheme};
use qss::security::{nc_threshold_gaussian, result_average_fidelity, security_window, WindowOutcome};
use qss::{Exec, QssError, Result};
use serde_json::{json, Value};

use crate::config::{Experiment, ExperimentConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(&'static str),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// A result table plus an optional experiment-level summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Option<Value>,
}

fn real_alpha(alpha_sq: f64) -> Complex64 {
    Complex64::new(alpha_sq.sqrt(), 0.0)
}

/// Cartesian product of two grids, first index slowest.
fn product(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn collect(columns: Vec<&'static str>, rows: Vec<Result<Vec<Cell>>>) -> Result<Table> {
    Ok(Table {
        columns,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

fn peak_json(p: &AdvantagePeak) -> Value {
    json!({ "alpha_sq": p.alpha_sq, "lambda": p.lambda, "delta_F": p.delta_f })
}

fn window_json(w: &WindowOutcome) -> Value {
    match w {
        WindowOutcome::Secure(w) => json!({ "outcome": "secure", "window": w }),
        WindowOutcome::NoSecurity {
            best_excess,
            at_sigma_sq,
        } => {
            json!({ "outcome": "no_security", "best_excess": best_excess, "at_sigma_sq": at_sigma_sq })
        }
    }
}

fn erasure_model(device: &DeviceModel, s: f64, g: f64, env_nbar: f64, selection: Selection) -> Result<ErasureModel> {
    let mut cfg = ErasureConfig::new(s, g, device.clone());
    cfg.env_nbar = env_nbar;
    cfg.selection = selection;
    ErasureModel::new(cfg)
}

/// Seed for Monte-Carlo cell `index` of a run seeded with `seed`.
pub fn cell_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

pub fn execute(cfg: &ExperimentConfig, exec: Exec) -> Result<Outcome> {
    let dev = &cfg.device;
    dev.validate()?;
    match &cfg.experiment {
        Experiment::Fig2Sweep {
            squeezing_db,
            gain_db,
            alpha_sq,
            sigma_sq,
            schemes,
            optimize_rescale,
        } => {
            let points: Vec<(Scheme, f64)> = schemes
                .iter()
                .flat_map(|&sc| squeezing_db.iter().map(move |&s| (sc, s)))
                .collect();
            let rows = exec.map(&points, |&(scheme, s)| {
                let params = ProtocolParams {
                    squeezing_db: s,
                    gain_db: *gain_db,
                    alpha: real_alpha(*alpha_sq),
                    scheme,
                };
                let t = run_protocol(&params, *sigma_sq, *optimize_rescale, dev)?;
                Ok(vec![
                    Cell::Text(scheme.label()),
                    s.into(),
                    t.report.fidelity.into(),
                    t.adversary_fidelity.into(),
                    t.report.mi_nats.into(),
                    t.adversary_mi.into(),
                    t.report.negativity.into(),
                    t.report.purity.into(),
                ])
            });
            let cols = vec![
                "scheme",
                "S_db",
                "F_collab",
                "F_adv",
                "MI_collab",
                "MI_adv",
                "negativity",
                "purity",
            ];
            Ok(Outcome {
                table: collect(cols, rows)?,
                summary: None,
            })
        }

        Experiment::Fig3Fidelity {
            alpha_sq,
            gain_db,
            squeezing_db,
        } => {
            let shares = share_secret(Complex64::new(0.0, 0.0), *squeezing_db, dev)?;
            let results = exec.map(gain_db, |&g| reconstruct(&shares, Scheme::P23, g, dev));
            let results: Vec<_> = results.into_iter().collect::<Result<_>>()?;
            let mut rows = Vec::with_capacity(alpha_sq.len() * gain_db.len());
            for &a2 in alpha_sq {
                for (&g, res) in gain_db.iter().zip(&results) {
                    rows.push(Ok(vec![
                        a2.into(),
                        g.into(),
                        res.fidelity_for(real_alpha(a2))?.into(),
                        res.k().into(),
                        res.v_out.into(),
                    ]));
                }
            }
            Ok(Outcome {
                table: collect(vec!["alpha_sq", "G_db", "F", "k", "v_out"], rows)?,
                summary: None,
            })
        }

        Experiment::Fig3Security {
            sigma_sq,
            squeezing_db,
            gain_db,
            search_range,
        } => {
            let shares = share_secret(Complex64::new(0.0, 0.0), *squeezing_db, dev)?;
            let res = reconstruct(&shares, Scheme::P23, *gain_db, dev)?;
            let rows = exec.map(sigma_sq, |&s2| {
                let f = result_average_fidelity(&res, s2)?;
                let nc = nc_threshold_gaussian(s2)?;
                Ok(vec![s2.into(), f.into(), nc.into(), (f - nc).into()])
            });
            let window = security_window(|s| result_average_fidelity(&res, s).unwrap_or(f64::NAN), *search_range)?;
            Ok(Outcome {
                table: collect(vec!["sigma_sq", "F_avg", "F_nc", "delta"], rows)?,
                summary: Some(window_json(&window)),
            })
        }

        Experiment::Fig4Dense {
            squeezing_db,
            sigma_ens_sq,
            gain_db,
            s_conv,
        } => {
            let baseline = mi_coherent_baseline(*sigma_ens_sq, *s_conv)?;
            let rows = exec.map(squeezing_db, |&s| {
                let (cb, ideal) = match budget_from_squeezing(*sigma_ens_sq, s, true, dev) {
                    Ok(b) => (b.sigma_cb_sq, mi_dense_ideal(&b)),
                    Err(QssError::BudgetExhausted { .. }) => (f64::NAN, f64::NAN),
                    Err(e) => return Err(e),
                };
                let (cb_sim, g_sim, mi_sim) = match mi_dense_simulated(*sigma_ens_sq, s, *gain_db, dev, *s_conv) {
                    Ok(sim) => (sim.budget.sigma_cb_sq, sim.gain_db, sim.mi_nats),
                    Err(QssError::BudgetExhausted { .. }) => (f64::NAN, f64::NAN, f64::NAN),
                    Err(e) => return Err(e),
                };
                Ok(vec![
                    s.into(),
                    cb.into(),
                    ideal.into(),
                    cb_sim.into(),
                    g_sim.into(),
                    mi_sim.into(),
                    baseline.into(),
                ])
            });
            let cols = vec![
                "S_db",
                "sigma_cb_sq",
                "MI_dense_ideal",
                "sigma_cb_sq_sim",
                "G_db_sim",
                "MI_dense_sim",
                "MI_baseline",
            ];
            Ok(Outcome {
                table: collect(cols, rows)?,
                summary: None,
            })
        }

        Experiment::Fig5Erasure {
            alpha_sq,
            lambda,
            squeezing_db,
            gain_db,
            env_nbar,
            selection,
        } => {
            let model = erasure_model(dev, *squeezing_db, *gain_db, *env_nbar, *selection)?;
            let grid = AdvantageGrid {
                alpha_sq: alpha_sq.clone(),
                lambda: lambda.clone(),
            };
            let map = advantage_map(&model, &grid, exec)?;
            let mut rows = Vec::with_capacity(alpha_sq.len() * lambda.len());
            for (i, &a2) in alpha_sq.iter().enumerate() {
                for (j, &l) in lambda.iter().enumerate() {
                    rows.push(vec![
                        a2.into(),
                        l.into(),
                        map.f_bar[i][j].into(),
                        map.f_coh[i][j].into(),
                        map.delta[i][j].into(),
                    ]);
                }
            }
            let summary = json!({
                "grid_max": peak_json(&map.grid_max),
                "max": peak_json(&map.max),
                "zero_contour_points": map.zero_contour.len(),
            });
            Ok(Outcome {
                table: Table {
                    columns: vec!["alpha_sq", "lambda", "F_bar", "F_coh", "delta_F"],
                    rows,
                },
                summary: Some(summary),
            })
        }

        Experiment::Fig5ErasureMc {
            alpha_sq,
            lambda,
            squeezing_db,
            gain_db,
            env_nbar,
            selection,
            trials,
        } => {
            let model = erasure_model(dev, *squeezing_db, *gain_db, *env_nbar, *selection)?;
            let rows = product(alpha_sq, lambda)
                .into_iter()
                .enumerate()
                .map(|(idx, (a2, l))| {
                    let a = real_alpha(a2);
                    let exact = model.average_fidelity(a, l)?;
                    let (mean, se) = model.monte_carlo(a, l, *trials, cell_seed(cfg.seed, idx), exec)?;
                    Ok(vec![a2.into(), l.into(), exact.into(), mean.into(), se.into()])
                })
                .collect();
            Ok(Outcome {
                table: collect(vec!["alpha_sq", "lambda", "F_bar", "F_mc", "stderr"], rows)?,
                summary: None,
            })
        }
    }
}
