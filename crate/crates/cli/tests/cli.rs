mod common;

use std::fs;
use std::path::Path;

use common::{qss, INVALID_CORPUS};
use num_complex::Complex64;
use qss::erasure::{coherent_baseline, ErasureConfig, ErasureModel};
use qss::protocol::{run_protocol, DeviceModel, ProtocolParams, Scheme};
use qss::security::{nc_threshold_gaussian, result_average_fidelity};
use qss_cli::{list_experiments, load, parse, run, validate, RunOptions};
use tempfile::TempDir;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_cli(config: &str, extra: &[&str]) -> (Vec<u8>, String) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), config);
    let out = dir.path().join("out");
    let mut args = vec!["run", &cfg, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let res = qss(&args, dir.path());
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let name = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv" || e == "jsonl"))
        .unwrap();
    (fs::read(name).unwrap(), String::from_utf8(res.stdout).unwrap())
}

fn parse_csv(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

const MC: &str = r#"{"device": {"preset": "calibrated"},
    "experiment": {"name": "fig5-erasure-mc", "alpha_sq": [1, 2.41], "lambda": [0.2, 0.474], "trials": 20000},
    "seed": 17}"#;

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    for cfg in [MC, r#"{"experiment": {"name": "fig2-sweep", "S_db": [0, 3, 6]}}"#] {
        let (a, _) = run_cli(cfg, &[]);
        let (b, _) = run_cli(cfg, &[]);
        assert!(!a.is_empty());
        assert_eq!(a, b);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let (a, _) = run_cli(MC, &["--threads", "1"]);
    let (b, _) = run_cli(MC, &["--threads", "3"]);
    assert_eq!(a, b);
}

#[test]
fn seed_flag_overrides_config() {
    let (a, _) = run_cli(MC, &[]);
    let (b, _) = run_cli(MC, &["--seed", "17"]);
    let (c, _) = run_cli(MC, &["--seed", "18"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn validate_flags_every_seeded_violation() {
    for (text, field) in INVALID_CORPUS {
        let report = validate(text);
        let fields: Vec<&str> = report.violations.iter().map(|v| v.field.as_str()).collect();
        assert_eq!(fields, [field], "{text}");
    }
}

#[test]
fn validate_accepts_a_full_config() {
    let text = r#"{"device": {"preset": "calibrated", "path_efficiency": [1, 0.9, 0.9], "interferometer_imbalance": 0.02},
        "experiment": {"name": "fig5-erasure", "alpha_sq": {"start": 0, "stop": 4, "num": 9}, "lambda": [0.1, 0.5],
                       "S_db": 6, "G_db": 7, "env_nbar": 0.01, "selection": "best"},
        "output": {"path": "maps", "format": "jsonl"}, "seed": 3}"#;
    let report = validate(text);
    assert!(report.violations.is_empty() && report.notes.is_empty(), "{report}");
}

#[test]
fn validate_command_exit_status() {
    let dir = TempDir::new().unwrap();
    let good = write_config(dir.path(), r#"{"experiment": {"name": "fig3-fidelity"}}"#);
    let res = qss(&["validate", &good], dir.path());
    assert!(res.status.success());
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(
        stdout.contains("ok") && stdout.contains("note: device section missing"),
        "{stdout}"
    );

    let bad = write_config(dir.path(), INVALID_CORPUS[0].0);
    let res = qss(&["validate", &bad], dir.path());
    assert!(!res.status.success());
    assert!(String::from_utf8(res.stdout).unwrap().contains("experiment.lambda[0]"));
}

#[test]
fn list_names_every_experiment() {
    let names: Vec<&str> = list_experiments().iter().map(|(n, _)| *n).collect();
    for n in [
        "fig2-sweep",
        "fig3-fidelity",
        "fig3-security",
        "fig4-dense",
        "fig5-erasure",
        "fig5-erasure-mc",
    ] {
        assert!(names.contains(&n));
    }
    let res = qss(&["list"], Path::new("."));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert_eq!(stdout.lines().count(), names.len());
    assert!(stdout.starts_with("fig2-sweep"));
}

#[test]
fn run_errors_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": {"name": "fig9"}}"#);
    let res = qss(&["run", &cfg], dir.path());
    assert!(!res.status.success());
    assert!(String::from_utf8(res.stderr).unwrap().contains("unknown experiment"));

    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": {"name": "fig3-fidelity", "alpha_sq": 1}}"#,
    );
    let res = qss(&["run", &cfg, "--out", blocker.to_str().unwrap()], dir.path());
    assert!(!res.status.success());
    assert!(String::from_utf8(res.stderr).unwrap().contains("cannot write"));

    let res = qss(&["run", "missing.json"], dir.path());
    assert!(!res.status.success());
}

#[test]
fn schemas() {
    let cases = [
        (
            r#"{"experiment": {"name": "fig2-sweep", "S_db": [6]}}"#,
            "scheme,S_db,F_collab,F_adv,MI_collab,MI_adv,negativity,purity",
            false,
        ),
        (
            r#"{"experiment": {"name": "fig3-fidelity", "alpha_sq": [1], "G_db": [7]}}"#,
            "alpha_sq,G_db,F,k,v_out",
            false,
        ),
        (
            r#"{"experiment": {"name": "fig3-security", "sigma_sq": [3]}}"#,
            "sigma_sq,F_avg,F_nc,delta",
            true,
        ),
        (
            r#"{"experiment": {"name": "fig4-dense", "S_db": [6]}}"#,
            "S_db,sigma_cb_sq,MI_dense_ideal,sigma_cb_sq_sim,G_db_sim,MI_dense_sim,MI_baseline",
            false,
        ),
        (
            r#"{"experiment": {"name": "fig5-erasure", "alpha_sq": [1, 2], "lambda": [0.5]}}"#,
            "alpha_sq,lambda,F_bar,F_coh,delta_F",
            true,
        ),
        (
            r#"{"experiment": {"name": "fig5-erasure-mc", "alpha_sq": 1, "lambda": 0.5, "trials": 100}}"#,
            "alpha_sq,lambda,F_bar,F_mc,stderr",
            false,
        ),
    ];
    for (cfg, header, has_summary) in cases {
        let (bytes, stdout) = run_cli(cfg, &[]);
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().next().unwrap(), header);
        assert_eq!(stdout.contains("summary: {"), has_summary, "{stdout}");
    }
}

#[test]
fn jsonl_has_one_record_per_grid_point() {
    let cfg = r#"{"experiment": {"name": "fig5-erasure", "alpha_sq": [1, 2, 3], "lambda": [0.2, 0.4]},
                  "output": {"format": "jsonl"}}"#;
    let (bytes, _) = run_cli(cfg, &[]);
    let text = String::from_utf8(bytes).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 6);
    assert_eq!(records[1]["alpha_sq"], 1.0);
    assert_eq!(records[1]["lambda"], 0.4);
}

#[test]
fn summary_file_is_written() {
    let dir = TempDir::new().unwrap();
    let cfg =
        parse(r#"{"device": {"preset": "calibrated"}, "experiment": {"name": "fig3-security", "sigma_sq": [2, 3]}}"#)
            .0
            .unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().into()),
        ..Default::default()
    };
    let report = run(&cfg, &opts).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report.summary_path.unwrap()).unwrap()).unwrap();
    assert_eq!(summary["outcome"], "secure");
    let w = &summary["window"];
    for key in [
        "sigma_min",
        "sigma_max",
        "sigma_star",
        "delta_star",
        "open_below",
        "open_above",
    ] {
        assert!(!w[key].is_null(), "{key}");
    }
}

// Every row can be recomputed from the library with the row's inputs, bit
// for bit, because numbers are written in round-trip form.
#[test]
fn rows_round_trip_through_the_library() {
    let (bytes, _) = run_cli(
        r#"{"device": {"preset": "calibrated"}, "experiment": {"name": "fig5-erasure", "alpha_sq": [0.5, 2.41, 7], "lambda": [0, 0.474, 1]}}"#,
        &[],
    );
    let model = ErasureModel::new(ErasureConfig::new(6.0, 7.0, DeviceModel::calibrated())).unwrap();
    for row in parse_csv(&bytes).1 {
        let (a2, l) = (num(&row[0]), num(&row[1]));
        let a = Complex64::new(a2.sqrt(), 0.0);
        let f_bar = model.average_fidelity(a, l).unwrap();
        let f_coh = coherent_baseline(a, l).unwrap();
        assert_eq!(num(&row[2]), f_bar);
        assert_eq!(num(&row[3]), f_coh);
        assert_eq!(num(&row[4]), f_bar - f_coh);
    }

    let (bytes, _) = run_cli(r#"{"experiment": {"name": "fig2-sweep", "S_db": [2, 8]}}"#, &[]);
    for row in parse_csv(&bytes).1 {
        let scheme = Scheme::parse(&row[0]).unwrap();
        let params = ProtocolParams {
            squeezing_db: num(&row[1]),
            gain_db: 8.0,
            alpha: Complex64::new(1.3f64.sqrt(), 0.0),
            scheme,
        };
        let t = run_protocol(&params, 3.0, true, &DeviceModel::ideal()).unwrap();
        assert_eq!(num(&row[2]), t.report.fidelity);
        assert_eq!(num(&row[3]), t.adversary_fidelity);
        assert_eq!(num(&row[4]), t.report.mi_nats);
        assert_eq!(num(&row[5]), t.adversary_mi);
    }

    let dir = TempDir::new().unwrap();
    let path = write_config(
        dir.path(),
        r#"{"experiment": {"name": "fig3-security", "sigma_sq": [0.5, 3, 12]}}"#,
    );
    let cfg = load(Path::new(&path)).unwrap();
    let report = run(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.path().into()),
            ..Default::default()
        },
    )
    .unwrap();
    let shares = qss::protocol::share_secret(Complex64::new(0.0, 0.0), 6.0, &DeviceModel::ideal()).unwrap();
    let res = qss::protocol::reconstruct(&shares, Scheme::P23, 7.0, &DeviceModel::ideal()).unwrap();
    for row in parse_csv(&fs::read(report.table_path).unwrap()).1 {
        let s2 = num(&row[0]);
        assert_eq!(num(&row[1]), result_average_fidelity(&res, s2).unwrap());
        assert_eq!(num(&row[2]), nc_threshold_gaussian(s2).unwrap());
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let report = validate(&fs::read_to_string(&path).unwrap());
        assert!(report.is_valid(), "{}: {report}", path.display());
        n += 1;
    }
    assert!(n >= 5);
}
