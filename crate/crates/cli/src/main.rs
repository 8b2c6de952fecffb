//! `superint`: simulate, verify, scan and reduce-check from JSON configs.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 runtime or singularity
//! error, 3 usage or config error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Outcome;
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "superint", version, about = "Superintegrable oscillator simulation and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and export it as CSV.
    Simulate(RunArgs),
    /// Run the verification suites at one parameter point.
    Verify(RunArgs),
    /// Run the suites over a parameter grid.
    Scan(RunArgs),
    /// Compare the reduced flow with the projected full flow.
    ReduceCheck(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate(a) => commands::simulate(&a.load()?, &a.out),
        Command::Verify(a) => {
            let (outcome, report) = commands::verify_cmd(&a.load()?, &a.out)?;
            let failed: Vec<String> = report
                .drifts
                .iter()
                .filter(|d| !d.pass())
                .map(|d| format!("drift {}", d.id))
                .chain(report.brackets.iter().filter(|b| !b.pass).map(|b| format!("bracket {{{}, {}}}", b.pair[0], b.pair[1])))
                .chain(report.rank.iter().filter(|r| !r.pass).map(|r| format!("rank {} (expected {})", r.rank, r.expected)))
                .chain(report.period.iter().filter(|p| !p.pass).map(|_| "period".to_string()))
                .chain(report.reduce_check.iter().filter(|r| !r.pass).map(|r| format!("reduce-check {:e}", r.report.max_dev)))
                .collect();
            if failed.is_empty() {
                println!("verify: pass");
            } else {
                println!("verify: FAIL ({})", failed.join(", "));
            }
            Ok(outcome)
        }
        Command::Scan(a) => {
            let (outcome, entries) = commands::scan(&a.load()?, &a.out)?;
            print!("{}", commands::scan_summary(&entries));
            Ok(outcome)
        }
        Command::ReduceCheck(a) => {
            let (outcome, report) = commands::reduce_check(&a.load()?, &a.out)?;
            println!(
                "reduce-check: max deviation {:e} at t = {} (bound {:e}): {}",
                report.report.max_dev,
                report.report.t_of_max,
                report.bound,
                if report.pass { "pass" } else { "FAIL" }
            );
            Ok(outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
