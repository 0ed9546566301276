//! Command-line entry points: `run`, `calibrate` and `monte-carlo`.
//!
//! Exit codes: 0 on success, 1 for invalid arguments or input files, 2 when a
//! run, calibration or output write fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::calibration::{self, DEFAULT_BUDGET};
use crate::domain::{AdoptionSemantics, Mode, ScenarioParams};
use crate::engine::{run_monte_carlo, run_simulation};
use crate::error::{Error, Result};
use crate::io::config::{load_scenario, read_target, LoadedScenario};
use crate::io::output::{write_result, Format};

#[derive(Debug, Parser)]
#[command(
    name = "pv-adoption",
    version,
    about = "Simulate and calibrate PV adoption among dairy farmers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate every year of the scenario and print the per-year records.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        semantics: Option<AdoptionSemantics>,
        /// Override the logistic sensitivity, e.g. with a calibrated value.
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the logistic ceiling, e.g. with a calibrated value.
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Fit alpha and beta to observed cumulative adopters.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Summarize repeated stochastic runs with seeds seed, seed+1, ...
    MonteCarlo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        replications: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Parses `argv` (program name first), runs the subcommand and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(config: &Path) -> Result<LoadedScenario> {
    let scenario = load_scenario(config)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    Ok(scenario)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run {
            config,
            out,
            format,
            mode,
            seed,
            semantics,
            alpha,
            beta,
        } => {
            let s = load(&config)?;
            let params = ScenarioParams {
                mode: mode.unwrap_or(s.params.mode),
                seed: seed.unwrap_or(s.params.seed),
                adoption_semantics: semantics.unwrap_or(s.params.adoption_semantics),
                alpha: alpha.unwrap_or(s.params.alpha),
                beta: beta.unwrap_or(s.params.beta),
                ..s.params
            };
            params.validate()?;
            let result = run_simulation(&params, &s.prices, &s.subsidies)?;
            write_result(&result, format, out.as_deref())
        }
        Command::Calibrate {
            config,
            target,
            budget,
            out,
            format,
        } => {
            let s = load(&config)?;
            let target = read_target(&target, &s.params)?;
            let result =
                calibration::calibrate(&s.params, &s.prices, &s.subsidies, &target, budget)
                    .map_err(|e| match e {
                        Error::Validation(_) | Error::Calibration(_) => e,
                        other => Error::Calibration(other.to_string()),
                    })?;
            write_result(&result, format, out.as_deref())
        }
        Command::MonteCarlo {
            config,
            replications,
            seed,
            out,
            format,
        } => {
            let s = load(&config)?;
            let params = ScenarioParams {
                mode: Mode::Stochastic,
                ..s.params
            };
            params.validate()?;
            let summary = run_monte_carlo(&params, &s.prices, &s.subsidies, replications, seed)?;
            write_result(&summary, format, out.as_deref())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_run_flags() {
        let cli = Cli::try_parse_from([
            "pv-adoption",
            "run",
            "--config",
            "a.toml",
            "--format",
            "json",
            "--mode",
            "stochastic",
            "--seed",
            "9",
            "--semantics",
            "literal",
        ])
        .unwrap();
        match cli.command {
            Command::Run {
                format,
                mode,
                seed,
                semantics,
                ..
            } => {
                assert_eq!(format, Format::Json);
                assert_eq!(mode, Some(Mode::Stochastic));
                assert_eq!(seed, Some(9));
                assert_eq!(semantics, Some(AdoptionSemantics::Literal));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["pv-adoption", "frobnicate"]), 1);
        assert_eq!(
            cli_main(["pv-adoption", "run", "--config", "x", "--bogus"]),
            1
        );
        assert_eq!(cli_main(["pv-adoption", "monte-carlo", "--config", "x"]), 1);
        assert_eq!(
            cli_main(["pv-adoption", "run", "--config", "x", "--mode", "sometimes"]),
            1
        );
    }

    #[test]
    fn missing_config_exits_one() {
        assert_eq!(
            cli_main(["pv-adoption", "run", "--config", "/no/such/file.toml"]),
            1
        );
    }
}
