use std::process::Command;

use renewal_ks::harness::{run_experiment, Check, ExperimentConfig, ExperimentReport};
use renewal_ks::kac_stroock::{evaluate_x_quadrature, KacProcessParams};
use renewal_ks::renewal::simulate_path;
use renewal_ks::{Error, InterArrivalLaw};

fn small_config(law: InterArrivalLaw) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_for(law);
    cfg.n_values = vec![50, 400];
    cfg.replicates = 60;
    cfg.grid = 64;
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_renewal-ks"))
}

#[test]
fn point_mass_sawtooth_in_report() {
    let mut cfg = ExperimentConfig::default_for(InterArrivalLaw::point_mass(1.0).unwrap());
    cfg.n_values = vec![4];
    cfg.replicates = 1;
    cfg.grid = 4;
    cfg.kac_constant = Some(1.0);
    cfg.emit_paths = true;
    cfg.checks = vec![Check::Remainder, Check::TimeChange];
    cfg.marginal_times = vec![0.5];
    cfg.covariance_times = vec![0.5];
    cfg.increments = [0.0, 0.25, 0.5, 1.0];
    cfg.moment_p = None;
    let report = run_experiment(&cfg).unwrap();
    let eval = &report.results[0].paths.as_ref().unwrap()[0];
    assert_eq!(eval.grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    assert_eq!(eval.x_values, vec![0.0, 0.5, 0.0, 0.5, 0.0]);

    // same path through the quadrature oracle
    let law = InterArrivalLaw::point_mass(1.0).unwrap();
    let path = simulate_path(&law, 4.0, &mut renewal_ks::RngStream::new(0)).unwrap();
    let params = KacProcessParams::new(4, 1.0).unwrap();
    for (t, x) in eval.grid.iter().zip(&eval.x_values) {
        assert!((evaluate_x_quadrature(&path, &params, *t).unwrap() - x).abs() < 1e-12);
    }
    let tc = report.results[0].time_change.as_ref().unwrap();
    assert_eq!(tc.exceed_count, 0);
}

#[test]
fn degenerate_law_without_override_fails() {
    let cfg = small_config(InterArrivalLaw::point_mass(1.0).unwrap());
    assert_eq!(run_experiment(&cfg).unwrap_err(), Error::DegenerateLaw);
}

#[test]
fn runaway_paths_propagate() {
    let mut cfg = small_config(InterArrivalLaw::exponential(1.0).unwrap());
    cfg.max_events = 10;
    assert!(matches!(run_experiment(&cfg), Err(Error::RunawayPath { .. })));
}

#[test]
fn heavy_tail_flagged_outside_hypotheses() {
    let mut cfg = small_config(InterArrivalLaw::pareto(2.2, 1.0).unwrap());
    cfg.moment_p = Some(3.0);
    let report = run_experiment(&cfg).unwrap();
    let flag = report.hypotheses.as_ref().unwrap();
    assert!(!flag.within_hypotheses);
    assert!(flag.note.contains("outside theorem hypotheses"));
    assert!(!report.all_assertions_pass());
    assert!(report.results[0].maximal_bound.as_ref().unwrap().bound.is_none());
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cfg = small_config(InterArrivalLaw::gamma(2.0, 0.5).unwrap());
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(
        a.without_wall_clock().to_json().unwrap(),
        b.without_wall_clock().to_json().unwrap()
    );
    let parsed = ExperimentReport::from_json(&a.to_json().unwrap()).unwrap();
    assert_eq!(parsed, a);
    let table = a.render_table();
    assert!(table.contains("== n = 400"));
}

#[test]
fn replicate_results_do_not_depend_on_m() {
    // replicate r is reproducible in isolation: its path is the same
    // whether the run has 10 or 60 replicates
    let mut cfg = small_config(InterArrivalLaw::uniform(0.0, 2.0).unwrap());
    cfg.emit_paths = true;
    cfg.checks = vec![Check::Remainder];
    let big = run_experiment(&cfg).unwrap();
    cfg.replicates = 10;
    let small = run_experiment(&cfg).unwrap();
    let big_paths = big.results[1].paths.as_ref().unwrap();
    let small_paths = small.results[1].paths.as_ref().unwrap();
    assert_eq!(&big_paths[..10], &small_paths[..]);
}

#[test]
fn shipped_configs_parse() {
    for name in ["default.json", "uniform.json", "pareto_heavy_tail.json"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn cli_simulate_is_deterministic() {
    let run = || {
        let out = bin()
            .args(["simulate", "--law", r#"{"kind":"exponential","rate":1}"#, "--n", "100", "--seed", "7"])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let lines: Vec<_> = a.lines().collect();
    assert_eq!(lines[0], "t,x,w,r");
    assert_eq!(lines.len(), 1 + 1025);
    // x = w + r on every row
    for line in &lines[1..] {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!((v[1] - (v[2] + v[3])).abs() <= 1e-12 * (1.0 + v[1].abs()));
    }
}

#[test]
fn cli_simulate_json_and_arrivals() {
    let dir = tempfile::tempdir().unwrap();
    let arrivals = dir.path().join("arrivals.csv");
    let status = bin()
        .args(["simulate", "--n", "20", "--grid", "8", "--seed", "3", "--format", "json", "--out"])
        .arg(dir.path())
        .arg("--arrivals")
        .arg(&arrivals)
        .status()
        .unwrap();
    assert!(status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("path.json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 3);
    assert_eq!(json["params"]["n"], 20);
    assert_eq!(json["evaluation"]["grid"].as_array().unwrap().len(), 9);
    let dump = std::fs::read_to_string(arrivals).unwrap();
    assert!(dump.starts_with("k,U_k,S_k\n1,"));
}

#[test]
fn cli_poisson_check() {
    let out = bin().args(["poisson-check", "--n", "200", "--replicates", "200"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("kac_constant(exponential(rate=1)) = 1.0"), "{text}");
    assert!(text.contains("C=1.000000 (override)"));
    assert_eq!(out.status.code(), Some(0), "{text}");
}

#[test]
fn cli_converge_default_config_asserts_clean() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let status = bin()
        .args(["converge", "--assert", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report_path = dir.path().join("report.json");
    let report = ExperimentReport::from_json(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report.all_assertions_pass());

    let rendered = bin().arg("report").arg(&report_path).output().unwrap();
    assert!(rendered.status.success());
    assert!(String::from_utf8(rendered.stdout).unwrap().contains("[PASS] ks n=10000 t=1"));
}

#[test]
fn cli_assertion_failure_exits_one() {
    let out = bin()
        .args(["converge", "--assert", "--law", r#"{"kind":"pareto","shape":2.2,"scale":1.0}"#, "--n", "100", "--replicates", "50"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"law":{"kind":"exponential","rate":1},"n_values":[0],"replicates":1,"seed":1}"#).unwrap();
    let cases: Vec<Vec<std::ffi::OsString>> = vec![
        vec!["converge".into(), "--config".into(), bad.clone().into()],
        vec!["converge".into(), "--config".into(), dir.path().join("missing.json").into()],
        vec!["simulate".into(), "--law".into(), "{not json".into()],
        vec!["simulate".into(), "--law".into(), r#"{"kind":"uniform","lo":2,"hi":1}"#.into()],
        vec!["converge".into(), "--grid".into(), "1".into()],
        vec!["frobnicate".into()],
    ];
    for args in cases {
        let code = bin().args(&args).output().unwrap().status.code();
        assert_eq!(code, Some(2), "{args:?}");
    }
}
