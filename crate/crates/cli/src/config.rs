//! Experiment configuration documents.
//!
//! A config is a JSON object with optional `device`, `experiment`, `output`
//! and `seed` sections. Parsing and validation share one pass over the
//! document, so `validate` reports exactly what `run` would reject.

use std::fmt;
use std::path::PathBuf;

use qss::erasure::Selection;
use qss::protocol::{DeviceModel, Scheme};
use qss::security::DEFAULT_SEARCH_RANGE;
use serde_json::{Map, Value};

/// One schema or range problem, keyed by a dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Defaults that were filled in.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn violation(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violations.len() {
            0 => writeln!(f, "ok")?,
            1 => writeln!(f, "1 violation")?,
            n => writeln!(f, "{n} violations")?,
        }
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            path: PathBuf::from("results"),
            format: OutputFormat::Csv,
        }
    }
}

/// A named experiment with its fully resolved parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Fig2Sweep {
        squeezing_db: Vec<f64>,
        gain_db: f64,
        alpha_sq: f64,
        sigma_sq: f64,
        schemes: Vec<Scheme>,
        optimize_rescale: bool,
    },
    Fig3Fidelity {
        alpha_sq: Vec<f64>,
        gain_db: Vec<f64>,
        squeezing_db: f64,
    },
    Fig3Security {
        sigma_sq: Vec<f64>,
        squeezing_db: f64,
        gain_db: f64,
        search_range: (f64, f64),
    },
    Fig4Dense {
        squeezing_db: Vec<f64>,
        sigma_ens_sq: f64,
        /// `None` optimizes the decoder gain at every point.
        gain_db: Option<f64>,
        s_conv: f64,
    },
    Fig5Erasure {
        alpha_sq: Vec<f64>,
        lambda: Vec<f64>,
        squeezing_db: f64,
        gain_db: f64,
        env_nbar: f64,
        selection: Selection,
    },
    Fig5ErasureMc {
        alpha_sq: Vec<f64>,
        lambda: Vec<f64>,
        squeezing_db: f64,
        gain_db: f64,
        env_nbar: f64,
        selection: Selection,
        trials: usize,
    },
}

pub const EXPERIMENTS: [(&str, &str); 6] = [
    (
        "fig2-sweep",
        "collaborator and adversary fidelity/MI, resource negativity and purity versus squeezing",
    ),
    (
        "fig3-fidelity",
        "{2,3} reconstruction fidelity versus secret amplitude for several gains",
    ),
    (
        "fig3-security",
        "codebook-averaged {2,3} fidelity against the no-cloning threshold, with the security window",
    ),
    (
        "fig4-dense",
        "dense-coding mutual information: ideal limit, device simulation and coherent baseline",
    ),
    (
        "fig5-erasure",
        "erasure-channel average fidelity and advantage over a single coherent channel",
    ),
    (
        "fig5-erasure-mc",
        "Monte-Carlo check of the erasure-channel average fidelity",
    ),
];

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Fig2Sweep { .. } => "fig2-sweep",
            Experiment::Fig3Fidelity { .. } => "fig3-fidelity",
            Experiment::Fig3Security { .. } => "fig3-security",
            Experiment::Fig4Dense { .. } => "fig4-dense",
            Experiment::Fig5Erasure { .. } => "fig5-erasure",
            Experiment::Fig5ErasureMc { .. } => "fig5-erasure-mc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub device: DeviceModel,
    pub experiment: Experiment,
    pub output: OutputSpec,
    pub seed: u64,
}

/// Parses a config document. The config is `Some` only when the report has
/// no violations.
pub fn parse(text: &str) -> (Option<ExperimentConfig>, ValidationReport) {
    let mut report = ValidationReport::default();
    let doc: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => {
            report.violation("<document>", format!("not valid JSON: {e}"));
            return (None, report);
        }
    };
    let Some(top) = doc.as_object() else {
        report.violation("<document>", "expected an object");
        return (None, report);
    };
    for key in top.keys() {
        if !["device", "experiment", "output", "seed"].contains(&key.as_str()) {
            report.violation(key.clone(), "unknown section");
        }
    }

    let device = parse_device(top.get("device"), &mut report);
    let experiment = match top.get("experiment") {
        None => {
            report.violation("experiment", "missing section");
            None
        }
        Some(v) => parse_experiment(v, &mut report),
    };
    let output = parse_output(top.get("output"), &mut report);
    let seed = match top.get("seed") {
        None => 0,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            report.violation("seed", "expected a non-negative integer");
            0
        }),
    };

    let config = match (report.is_valid(), experiment) {
        (true, Some(experiment)) => Some(ExperimentConfig {
            device,
            experiment,
            output,
            seed,
        }),
        _ => None,
    };
    (config, report)
}

/// Schema and range checks without running anything.
pub fn validate(text: &str) -> ValidationReport {
    parse(text).1
}

const DEVICE_SCALARS: [(&str, f64, f64); 7] = [
    ("input_nbar", 0.0, f64::INFINITY),
    ("input_efficiency", 0.0, 1.0),
    ("jpa_noise_coeff", 0.0, f64::INFINITY),
    ("jpa_antisqueeze_noise_coeff", 0.0, f64::INFINITY),
    ("recon_noise_coeff", 0.0, f64::INFINITY),
    ("hybrid_phase_mismatch", -std::f64::consts::PI, std::f64::consts::PI),
    ("interferometer_imbalance", -1.0, 1.0),
];

fn parse_device(section: Option<&Value>, report: &mut ValidationReport) -> DeviceModel {
    let Some(section) = section else {
        report
            .notes
            .push("device section missing; ideal device model applied".into());
        return DeviceModel::ideal();
    };
    let Some(obj) = section.as_object() else {
        report.violation("device", "expected an object");
        return DeviceModel::ideal();
    };
    let mut dev = match obj.get("preset") {
        None => DeviceModel::ideal(),
        Some(Value::String(name)) => DeviceModel::preset(name).unwrap_or_else(|| {
            report.violation(
                "device.preset",
                format!("unknown preset {name:?} (expected \"ideal\" or \"calibrated\")"),
            );
            DeviceModel::ideal()
        }),
        Some(_) => {
            report.violation("device.preset", "expected a string");
            DeviceModel::ideal()
        }
    };
    for (key, value) in obj {
        let field = format!("device.{key}");
        if key == "preset" {
            continue;
        }
        if key == "path_efficiency" {
            match value.as_array() {
                Some(a) if a.len() == 3 => {
                    for (i, e) in a.iter().enumerate() {
                        if let Some(x) = number(e, &format!("{field}[{i}]"), 0.0, 1.0, report) {
                            dev.path_efficiency[i] = x;
                        }
                    }
                }
                _ => report.violation(field, "expected an array of 3 numbers"),
            }
            continue;
        }
        let Some(&(_, lo, hi)) = DEVICE_SCALARS.iter().find(|(n, _, _)| n == key) else {
            report.violation(field, "unknown field");
            continue;
        };
        if let Some(x) = number(value, &field, lo, hi, report) {
            match key.as_str() {
                "input_nbar" => dev.input_nbar = x,
                "input_efficiency" => dev.input_efficiency = x,
                "jpa_noise_coeff" => dev.jpa_noise_coeff = x,
                "jpa_antisqueeze_noise_coeff" => dev.jpa_antisqueeze_noise_coeff = x,
                "recon_noise_coeff" => dev.recon_noise_coeff = x,
                "hybrid_phase_mismatch" => dev.hybrid_phase_mismatch = x,
                _ => dev.interferometer_imbalance = x,
            }
        }
    }
    dev
}

fn parse_output(section: Option<&Value>, report: &mut ValidationReport) -> OutputSpec {
    let mut out = OutputSpec::default();
    let Some(section) = section else { return out };
    let Some(obj) = section.as_object() else {
        report.violation("output", "expected an object");
        return out;
    };
    for (key, value) in obj {
        let field = format!("output.{key}");
        match (key.as_str(), value) {
            ("path", Value::String(p)) if !p.is_empty() => out.path = PathBuf::from(p),
            ("path", _) => report.violation(field, "expected a non-empty string"),
            ("format", Value::String(f)) if f == "csv" => out.format = OutputFormat::Csv,
            ("format", Value::String(f)) if f == "jsonl" => out.format = OutputFormat::Jsonl,
            ("format", _) => report.violation(field, "expected \"csv\" or \"jsonl\""),
            _ => report.violation(field, "unknown field"),
        }
    }
    out
}

fn number(v: &Value, field: &str, lo: f64, hi: f64, report: &mut ValidationReport) -> Option<f64> {
    let Some(x) = v.as_f64() else {
        report.violation(field, "expected a number");
        return None;
    };
    if !(lo..=hi).contains(&x) {
        report.violation(field, format!("{x} is outside [{lo}, {hi}]"));
        return None;
    }
    Some(x)
}

/// Reads the keys of one experiment section, remembering which were used.
struct Section<'a> {
    obj: &'a Map<String, Value>,
    used: Vec<&'static str>,
    report: &'a mut ValidationReport,
}

impl<'a> Section<'a> {
    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.push(key);
        self.obj.get(key)
    }

    fn scalar(&mut self, key: &'static str, default: f64, lo: f64, hi: f64) -> f64 {
        match self.get(key) {
            None => default,
            Some(v) => number(v, &format!("experiment.{key}"), lo, hi, self.report).unwrap_or(default),
        }
    }

    fn optional(&mut self, key: &'static str, lo: f64, hi: f64) -> Option<f64> {
        match self.get(key) {
            None | Some(Value::Null) => None,
            Some(v) => number(v, &format!("experiment.{key}"), lo, hi, self.report),
        }
    }

    fn flag(&mut self, key: &'static str, default: bool) -> bool {
        match self.get(key) {
            None => default,
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.report
                    .violation(format!("experiment.{key}"), "expected true or false");
                default
            }
        }
    }

    /// A grid is a number, a non-empty list of numbers, or
    /// `{"start", "stop", "num"}` for evenly spaced points.
    fn grid(&mut self, key: &'static str, default: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
        let field = format!("experiment.{key}");
        let Some(v) = self.get(key) else { return default };
        let report = &mut *self.report;
        match v {
            Value::Number(_) => number(v, &field, lo, hi, report).into_iter().collect(),
            Value::Array(a) if a.is_empty() => {
                report.violation(field, "grid is empty");
                Vec::new()
            }
            Value::Array(a) => a
                .iter()
                .enumerate()
                .filter_map(|(i, e)| number(e, &format!("{field}[{i}]"), lo, hi, report))
                .collect(),
            Value::Object(o) => {
                for k in o.keys() {
                    if !["start", "stop", "num"].contains(&k.as_str()) {
                        report.violation(format!("{field}.{k}"), "unknown field");
                    }
                }
                let mut end = |k: &str| match o.get(k) {
                    None => {
                        report.violation(format!("{field}.{k}"), "missing");
                        None
                    }
                    Some(x) => number(x, &format!("{field}.{k}"), lo, hi, report),
                };
                let (start, stop) = (end("start"), end("stop"));
                let num = match o.get("num").map(Value::as_u64) {
                    Some(Some(n)) if n >= 1 => Some(n as usize),
                    Some(_) => {
                        report.violation(format!("{field}.num"), "expected a positive integer");
                        None
                    }
                    None => {
                        report.violation(format!("{field}.num"), "missing");
                        None
                    }
                };
                match (start, stop, num) {
                    (Some(a), Some(b), Some(n)) => linspace(a, b, n),
                    _ => Vec::new(),
                }
            }
            _ => {
                report.violation(field, "expected a number, a list of numbers or {start, stop, num}");
                Vec::new()
            }
        }
    }

    fn schemes(&mut self, default: Vec<Scheme>) -> Vec<Scheme> {
        let Some(v) = self.get("schemes") else { return default };
        let Some(a) = v.as_array().filter(|a| !a.is_empty()) else {
            self.report.violation(
                "experiment.schemes",
                "expected a non-empty list of \"12\", \"13\" or \"23\"",
            );
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, e) in a.iter().enumerate() {
            match e.as_str().and_then(Scheme::parse) {
                Some(s) => out.push(s),
                None => self
                    .report
                    .violation(format!("experiment.schemes[{i}]"), "expected \"12\", \"13\" or \"23\""),
            }
        }
        out
    }

    fn selection(&mut self) -> Selection {
        match self.get("selection") {
            None => Selection::Table,
            Some(Value::String(s)) if s == "table" => Selection::Table,
            Some(Value::String(s)) if s == "best" => Selection::Best,
            Some(_) => {
                self.report
                    .violation("experiment.selection", "expected \"table\" or \"best\"");
                Selection::Table
            }
        }
    }

    fn search_range(&mut self) -> (f64, f64) {
        let Some(v) = self.get("search_range") else {
            return DEFAULT_SEARCH_RANGE;
        };
        let pair = v
            .as_array()
            .filter(|a| a.len() == 2)
            .map(|a| (a[0].as_f64(), a[1].as_f64()));
        match pair {
            Some((Some(lo), Some(hi))) if lo >= 0.0 && hi > lo && hi.is_finite() => (lo, hi),
            _ => {
                self.report
                    .violation("experiment.search_range", "expected [lo, hi] with 0 <= lo < hi");
                DEFAULT_SEARCH_RANGE
            }
        }
    }

    fn trials(&mut self, default: usize) -> usize {
        match self.get("trials") {
            None => default,
            Some(v) => match v.as_u64() {
                Some(n) if (1..=1_000_000_000).contains(&n) => n as usize,
                _ => {
                    self.report
                        .violation("experiment.trials", "expected an integer in [1, 1e9]");
                    default
                }
            },
        }
    }

    fn finish(self) {
        for key in self.obj.keys() {
            if key != "name" && !self.used.contains(&key.as_str()) {
                self.report
                    .violation(format!("experiment.{key}"), "unknown field for this experiment");
            }
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

const MAX_DB: f64 = 40.0;
const INF: f64 = f64::INFINITY;

fn parse_experiment(section: &Value, report: &mut ValidationReport) -> Option<Experiment> {
    let Some(obj) = section.as_object() else {
        report.violation("experiment", "expected an object");
        return None;
    };
    let name = match obj.get("name") {
        Some(Value::String(n)) => n.as_str(),
        Some(_) => {
            report.violation("experiment.name", "expected a string");
            return None;
        }
        None => {
            report.violation("experiment.name", "missing");
            return None;
        }
    };
    let mut s = Section {
        obj,
        used: Vec::new(),
        report,
    };
    let exp = match name {
        "fig2-sweep" => Experiment::Fig2Sweep {
            squeezing_db: s.grid("S_db", linspace(0.0, 10.0, 21), 0.0, MAX_DB),
            gain_db: s.scalar("G_db", 8.0, 0.0, MAX_DB),
            alpha_sq: s.scalar("alpha_sq", 1.3, 0.0, INF),
            sigma_sq: s.scalar("sigma_sq", 3.0, 0.0, INF),
            schemes: s.schemes(vec![Scheme::P12, Scheme::P23]),
            optimize_rescale: s.flag("optimize_rescale", true),
        },
        "fig3-fidelity" => Experiment::Fig3Fidelity {
            alpha_sq: s.grid("alpha_sq", linspace(0.0, 10.0, 41), 0.0, INF),
            gain_db: s.grid("G_db", vec![5.0, 6.0, 7.0, 8.0, 9.0], 0.0, MAX_DB),
            squeezing_db: s.scalar("S_db", 6.0, 0.0, MAX_DB),
        },
        "fig3-security" => Experiment::Fig3Security {
            sigma_sq: s.grid("sigma_sq", linspace(0.1, 20.0, 200), f64::MIN_POSITIVE, INF),
            squeezing_db: s.scalar("S_db", 6.0, 0.0, MAX_DB),
            gain_db: s.scalar("G_db", 7.0, 0.0, MAX_DB),
            search_range: s.search_range(),
        },
        "fig4-dense" => Experiment::Fig4Dense {
            squeezing_db: s.grid("S_db", linspace(0.0, 8.0, 33), 0.0, MAX_DB),
            sigma_ens_sq: s.scalar("sigma_ens_sq", 3.0, 0.25, INF),
            gain_db: s.optional("G_db", 0.0, MAX_DB),
            s_conv: s.scalar("s_conv", 1.0, 0.0, 1.0),
        },
        "fig5-erasure" => Experiment::Fig5Erasure {
            alpha_sq: s.grid("alpha_sq", linspace(0.0, 10.0, 101), 0.0, INF),
            lambda: s.grid("lambda", linspace(0.0, 1.0, 101), 0.0, 1.0),
            squeezing_db: s.scalar("S_db", 6.0, 0.0, MAX_DB),
            gain_db: s.scalar("G_db", 7.0, 0.0, MAX_DB),
            env_nbar: s.scalar("env_nbar", 0.0, 0.0, INF),
            selection: s.selection(),
        },
        "fig5-erasure-mc" => Experiment::Fig5ErasureMc {
            alpha_sq: s.grid("alpha_sq", vec![0.5, 2.41, 6.0], 0.0, INF),
            lambda: s.grid("lambda", vec![0.2, 0.474, 0.8], 0.0, 1.0),
            squeezing_db: s.scalar("S_db", 6.0, 0.0, MAX_DB),
            gain_db: s.scalar("G_db", 7.0, 0.0, MAX_DB),
            env_nbar: s.scalar("env_nbar", 0.0, 0.0, INF),
            selection: s.selection(),
            trials: s.trials(100_000),
        },
        other => {
            let known: Vec<&str> = EXPERIMENTS.iter().map(|(n, _)| *n).collect();
            s.report.violation(
                "experiment.name",
                format!("unknown experiment {other:?} (known: {})", known.join(", ")),
            );
            return None;
        }
    };
    s.finish();
    Some(exp)
}
