//! Runs one experiment of a scenario and writes its report.

use std::path::{Path, PathBuf};

use cryochain_core::experiments::{
    run_bias_scan, run_heat_budget, run_laser_readout, run_latency_budget, run_pnr_experiment, run_simulation,
    run_threshold_sweep, ExperimentReport,
};

use crate::error::CliError;
use crate::output::{write_report, WrittenReport};
use crate::scenario::{to_toml, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    BiasScan,
    Pnr,
    Sweep,
    Laser,
    Latency,
    Heat,
    Simulate,
}

/// Report plus the summary lines printed on success.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub report: ExperimentReport,
    pub summary: Vec<String>,
}

fn metric_line(r: &ExperimentReport, name: &str) -> Option<String> {
    let m = r.scalar_metrics.iter().find(|m| m.name == name)?;
    Some(if m.unit.is_empty() {
        format!("{} = {}", m.name, m.value)
    } else {
        format!("{} = {} {}", m.name, m.value, m.unit)
    })
}

fn summarize(r: &ExperimentReport, names: &[&str]) -> Vec<String> {
    names.iter().filter_map(|n| metric_line(r, n)).collect()
}

fn all_metrics(r: &ExperimentReport) -> Vec<String> {
    r.scalar_metrics.iter().filter_map(|m| metric_line(r, &m.name)).collect()
}

/// Runs `exp` with the scenario's seed.
pub fn run_experiment(exp: Experiment, s: &Scenario) -> Result<RunResult, CliError> {
    let seed = s.seed;
    Ok(match exp {
        Experiment::BiasScan => {
            let (_, report) = run_bias_scan(&s.bias_scan_config(), seed)?;
            let summary = all_metrics(&report);
            RunResult { report, summary }
        }
        Experiment::Pnr => {
            let (_, report) = run_pnr_experiment(&s.pnr_config(), seed)?;
            let summary = all_metrics(&report);
            RunResult { report, summary }
        }
        Experiment::Sweep => {
            let (_, report) = run_threshold_sweep(&s.sweep_config(), seed)?;
            let summary = all_metrics(&report);
            RunResult { report, summary }
        }
        Experiment::Laser => {
            let (_, report) = run_laser_readout(&s.laser_config(), seed)?;
            let summary = all_metrics(&report);
            RunResult { report, summary }
        }
        Experiment::Latency => {
            let (budget, report) = run_latency_budget(&s.latency_config())?;
            let mut summary = vec![format!("total_delay_ns = {}", budget.display_ns())];
            summary.extend(summarize(&report, &["room_temperature_cable_delay"]));
            RunResult { report, summary }
        }
        Experiment::Heat => {
            let (budget, report) = run_heat_budget(&s.heat_config())?;
            let mut summary = vec![format!("total_mw = {:.0}", budget.total() * 1e3)];
            summary.extend(summarize(&report, &["first_stage", "first_stage_fits_1k", "stages_over_budget"]));
            RunResult { report, summary }
        }
        Experiment::Simulate => {
            let (_, report) = run_simulation(&s.simulate_config(), seed)?;
            let summary = all_metrics(&report);
            RunResult { report, summary }
        }
    })
}

/// Output directory: explicit flag, then the environment, then the
/// scenario, then `cryochain-out`.
pub fn resolve_out(flag: Option<&Path>, env: Option<&str>, s: &Scenario) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|e| !e.is_empty()).map(PathBuf::from))
        .or_else(|| s.output.as_deref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("cryochain-out"))
}

/// Runs `exp` and writes its report under `out`.
pub fn dispatch(exp: Experiment, s: &Scenario, out: &Path, svg: bool) -> Result<(RunResult, WrittenReport), CliError> {
    let run = run_experiment(exp, s)?;
    let written = write_report(out, &run.report, &to_toml(s)?, svg)?;
    Ok((run, written))
}
