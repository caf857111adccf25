use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cryochain::output::verify_manifest;

fn run(args: &[&str], out: &Path, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cryochain"));
    cmd.args(args).current_dir(out).env_remove("CRYOCHAIN_OUT");
    if let Some(e) = env_out {
        cmd.env("CRYOCHAIN_OUT", e);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn latency_prints_budget_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["latency", "--out", "out"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l == "total_delay_ns = 23 ± 3"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("out/latency/budget.csv")).unwrap();
    assert!(csv.starts_with("label,delay_ns,uncertainty_ns\ncabling,"));
    assert!(verify_manifest(&dir.path().join("out/latency")).unwrap().is_empty());
}

#[test]
fn heat_prints_total() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["heat", "--out", "out"], dir.path(), None);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l == "total_mw = 23"), "{}", stdout(&o));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fit", "--out", "out"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let last = stderr(&o).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&last).unwrap();
    assert_eq!(v["error"], "usage");
}

#[test]
fn config_errors_exit_2_with_json_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[trigger.upper]\nthreshold = 0.001\n").unwrap();
    let o = run(&["heat", "--scenario", "bad.toml", "--out", "out"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "validation");
    let m = v["message"].as_str().unwrap();
    assert!(m.contains("trigger.lower.threshold") && m.contains("trigger.upper.threshold"));
    assert!(!dir.path().join("out").exists());

    fs::write(dir.path().join("syntax.toml"), "seed = 1\n[detector\n").unwrap();
    let o = run(&["heat", "--scenario", "syntax.toml", "--out", "out"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "parse");
    assert_eq!(v["line"], 2);

    let o = run(&["heat", "--scenario", "missing.toml"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = run(&["heat", "--out", "blocker"], dir.path(), None);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "io");
}

#[test]
fn unknown_keys_strict_or_lax() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("typo.toml"), "[heat]\nswitching_rat = 1.0\n").unwrap();
    let o = run(&["heat", "--scenario", "typo.toml", "--out", "out"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "unknown_key");
    assert_eq!(v["line"], 2);
    let o = run(&["heat", "--scenario", "typo.toml", "--out", "out", "--lax"], dir.path(), None);
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: line 2: unknown key 'heat.switching_rat'"));
}

#[test]
fn env_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let o = run(&["latency"], dir.path(), Some(&env_dir));
    assert!(o.status.success());
    assert!(env_dir.join("latency/metrics.csv").exists());
    let o = run(&["latency", "--out", "flag"], dir.path(), Some(&env_dir));
    assert!(o.status.success());
    assert!(dir.path().join("flag/latency/metrics.csv").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(&["simulate", "--seed", "5", "--out", out, "--svg"], dir.path(), None);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let manifest = |d: &str| fs::read_to_string(dir.path().join(d).join("simulate/manifest.sha256")).unwrap();
    assert_eq!(manifest("a"), manifest("b"));
    assert!(manifest("a").contains("svg/trace.svg"));
    assert!(manifest("a").contains("trace.csv"));
    let o = run(&["simulate", "--seed", "6", "--out", "c"], dir.path(), None);
    assert!(o.status.success());
    let trace = |d: &str| fs::read(dir.path().join(d).join("simulate/trace.csv")).unwrap();
    assert_ne!(trace("a"), trace("c"));
}

#[test]
fn simulate_without_photons_is_noise_only() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("dark.toml"), "[simulate]\npixel_count = 0\n").unwrap();
    let o = run(&["simulate", "--scenario", "dark.toml", "--out", "out"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(dir.path().join("out/simulate/trace.csv")).unwrap();
    let h = r.headers().unwrap().clone();
    let cols: Vec<usize> = ["lower", "upper", "driver_in"].iter().map(|c| h.iter().position(|x| x == *c).unwrap()).collect();
    let noise = h.iter().position(|x| x == "chain_v").unwrap();
    let mut any_noise = false;
    for rec in r.records() {
        let rec = rec.unwrap();
        for &c in &cols {
            assert_eq!(rec[c].parse::<f64>().unwrap(), 0.0);
        }
        any_noise |= rec[noise].parse::<f64>().unwrap() != 0.0;
    }
    assert!(any_noise);
}

#[test]
fn shipped_sweep_scenario_runs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/paper_fig13.toml");
    let o = run(&["sweep", "--scenario", scenario, "--out", "out", "--svg"], dir.path(), None);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("lower_plateaus = 4 count") && s.contains("upper_plateaus = 4 count"), "{s}");
    let sweep = dir.path().join("out/sweep");
    for f in ["monitors.csv", "driver_map.csv", "metrics.csv", "svg/driver_map.svg"] {
        assert!(sweep.join(f).exists(), "{f}");
    }
    assert!(verify_manifest(&sweep).unwrap().is_empty());
}

#[test]
fn oversized_seed_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["heat", "--seed", "9223372036854775808", "--out", "out"], dir.path(), None);
    assert_eq!(o.status.code(), Some(2));
}
