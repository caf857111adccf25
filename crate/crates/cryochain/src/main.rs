use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cryochain::dispatch::{dispatch, resolve_out, Experiment};
use cryochain::{parse_scenario, CliError, Strictness};

/// Simulates the cryogenic SNSPD readout and feed-forward experiments.
#[derive(Debug, Parser)]
#[command(name = "cryochain", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// Scenario TOML file; defaults are used when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Master seed; overrides the scenario's `seed`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=cryochain::scenario::MAX_SEED))]
    seed: Option<u64>,
    /// Output directory; falls back to $CRYOCHAIN_OUT, the scenario's
    /// `output`, then ./cryochain-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render SVG plots from the CSVs.
    #[arg(long)]
    svg: bool,
    /// Warn about unknown scenario keys instead of failing.
    #[arg(long)]
    lax: bool,
}

fn run(args: Args) -> Result<(), CliError> {
    let text = match &args.scenario {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mode = if args.lax { Strictness::Lax } else { Strictness::Strict };
    let parsed = parse_scenario(&text, mode)?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    let mut scenario = parsed.scenario;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let env = std::env::var("CRYOCHAIN_OUT").ok();
    let out = resolve_out(args.out.as_deref(), env.as_deref(), &scenario);
    let (result, written) = dispatch(args.experiment, &scenario, &out, args.svg)?;
    for line in &result.summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", written.files.len(), written.dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::Usage(e.kind().to_string());
            eprintln!("{}", err.json_line());
            return err.exit();
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit()
        }
    }
}
