#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

/// Configs with exactly one seeded schema violation, and the field that
/// `validate` must name.
pub const INVALID_CORPUS: [(&str, &str); 20] = [
    (
        r#"{"experiment": {"name": "fig5-erasure", "lambda": [1.2]}}"#,
        "experiment.lambda[0]",
    ),
    (r#"{"experiment": {"name": "fig6-teleport"}}"#, "experiment.name"),
    (r#"{"device": {"preset": "ideal"}}"#, "experiment"),
    (
        r#"{"experiment": {"name": "fig2-sweep", "S_db": []}}"#,
        "experiment.S_db",
    ),
    (
        r#"{"experiment": {"name": "fig2-sweep", "S_db": -1}}"#,
        "experiment.S_db",
    ),
    (
        r#"{"device": {"preset": "cryogenic"}, "experiment": {"name": "fig2-sweep"}}"#,
        "device.preset",
    ),
    (
        r#"{"device": {"input_efficiency": 1.5}, "experiment": {"name": "fig2-sweep"}}"#,
        "device.input_efficiency",
    ),
    (
        r#"{"device": {"path_efficiency": [1, 1]}, "experiment": {"name": "fig2-sweep"}}"#,
        "device.path_efficiency",
    ),
    (
        r#"{"device": {"path_efficiency": [1, 1, -0.1]}, "experiment": {"name": "fig2-sweep"}}"#,
        "device.path_efficiency[2]",
    ),
    (
        r#"{"device": {"jpa_gain": 3}, "experiment": {"name": "fig2-sweep"}}"#,
        "device.jpa_gain",
    ),
    (
        r#"{"experiment": {"name": "fig2-sweep"}, "output": {"format": "xml"}}"#,
        "output.format",
    ),
    (
        r#"{"experiment": {"name": "fig2-sweep"}, "output": {"path": 5}}"#,
        "output.path",
    ),
    (r#"{"experiment": {"name": "fig2-sweep"}, "seed": -3}"#, "seed"),
    (r#"{"experiment": {"name": "fig2-sweep"}, "plots": true}"#, "plots"),
    (
        r#"{"experiment": {"name": "fig5-erasure", "alpha_sq": {"start": 0, "stop": 5, "num": 0}}}"#,
        "experiment.alpha_sq.num",
    ),
    (
        r#"{"experiment": {"name": "fig4-dense", "sigma_ens_sq": 0.1}}"#,
        "experiment.sigma_ens_sq",
    ),
    (
        r#"{"experiment": {"name": "fig2-sweep", "schemes": ["12", "14"]}}"#,
        "experiment.schemes[1]",
    ),
    (
        r#"{"experiment": {"name": "fig5-erasure-mc", "trials": 0}}"#,
        "experiment.trials",
    ),
    (
        r#"{"experiment": {"name": "fig3-security", "search_range": [5, 1]}}"#,
        "experiment.search_range",
    ),
    (
        r#"{"experiment": {"name": "fig4-dense", "lambda": [0.5]}}"#,
        "experiment.lambda",
    ),
];

pub fn qss(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("qss binary runs")
}
