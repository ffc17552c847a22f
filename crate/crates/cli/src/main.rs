use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use manprasim::app::{run, RunOptions};
use manprasim::manifest::verify;
use manprasim::scenario::builtin_department;
use manprasim::{to_toml, CliError};

#[derive(Parser)]
#[command(name = "manprasim", version, about = "Retail department simulation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// exp1, exp2, all, or a scenario TOML file
    #[arg(long, default_value = "all")]
    scenario: String,
    /// Department config file; repeat for several departments
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario set and write CSVs, charts and a manifest
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        replications: Option<u32>,
        #[arg(long)]
        weeks: Option<f64>,
        /// Master seed; MANPRASIM_SEED is used when neither this nor the
        /// scenario file gives one
        #[arg(long)]
        seed: Option<u64>,
        /// Short desk-check run (2 weeks, 5 replications unless overridden)
        #[arg(long)]
        fast: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write every customer state transition
        #[arg(long)]
        emit_visit_log: bool,
    },
    /// Load and check configs and scenarios without running
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Recheck output files against their manifest
    Verify { dir: PathBuf },
    /// Print a built-in department config (atv or ww) as TOML
    Defaults { department: String },
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var("MANPRASIM_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("MANPRASIM_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            replications,
            weeks,
            seed,
            fast,
            out,
            emit_visit_log,
        } => {
            let opts = RunOptions {
                scenario: common.scenario,
                configs: common.configs,
                replications,
                weeks,
                seed,
                fallback_seed: env_seed()?,
                fast,
                out,
                emit_visit_log,
            };
            let outcome = run(&opts)?;
            let passed = outcome.checks.iter().filter(|c| c.passed).count();
            println!(
                "{} scenarios, {} replications each; {passed}/{} hypothesis checks passed; outputs in {}",
                outcome.results.len(),
                outcome.results.first().map_or(0, |r| r.records.len()),
                outcome.checks.len(),
                opts.out.display()
            );
            Ok(())
        }
        Command::Validate { common } => {
            let mut opts = RunOptions::new(&common.scenario, ".");
            opts.configs = common.configs;
            opts.fallback_seed = env_seed()?;
            let plan = opts.plan()?;
            println!(
                "ok: {} departments, {} scenarios",
                plan.departments.len(),
                plan.scenarios.len()
            );
            Ok(())
        }
        Command::Verify { dir } => {
            let bad = verify(&dir)?;
            if bad.is_empty() {
                println!("all checksums match");
                Ok(())
            } else {
                Err(CliError::io(
                    format!("checksum mismatch: {}", bad.join(", ")),
                    std::io::Error::other("outputs differ from manifest"),
                ))
            }
        }
        Command::Defaults { department } => {
            let d = builtin_department(&department)
                .ok_or_else(|| CliError::Usage(format!("unknown department {department:?}")))?;
            print!("{}", to_toml(&d));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
