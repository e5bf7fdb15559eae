//! Command-line front end. Exit codes: 0 success, 1 property violation,
//! 2 invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::sim::{
    generate_scenario, run_scenario, run_scenario_checked, trial_seed, worked_example,
    GeneratorConfig, RunReport, Scenario,
};
use crate::verification::{run_property, Property, PropertyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "envelope-vote",
    version,
    about = "Deposit voting with pivotal transfers"
)]
struct Cli {
    /// Report encoding.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Settle one scenario file.
    Run {
        file: PathBuf,
        /// Also check surplus and, for all-equilibrium scenarios, efficiency.
        #[arg(long)]
        check: bool,
    },
    /// Emit random equilibrium scenarios, one per line.
    Generate {
        #[arg(long, default_value_t = 5)]
        players: usize,
        #[arg(long, default_value_t = 3)]
        alternatives: usize,
        #[arg(long, default_value_t = 100.0)]
        omega: f64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write one file per scenario into this directory instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run randomized property suites.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(Property::NAMES))]
        property: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Settle the built-in two-player example and print the full breakdown.
    PaperExample,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_INVALID
                }
            };
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Config(e.to_string())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Run { file, check } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| Error::Scenario(format!("{}: {e}", file.display())))?;
            let scenario = Scenario::from_json(&text)?;
            let report = if *check {
                run_scenario_checked(&scenario)?
            } else {
                run_scenario(&scenario)?
            };
            write_run(cli.format, &report, out)?;
            Ok(if report.violations() > 0 {
                EXIT_VIOLATION
            } else {
                EXIT_OK
            })
        }
        Command::PaperExample => {
            let report = run_scenario(&worked_example())?;
            write_run(cli.format, &report, out)?;
            Ok(EXIT_OK)
        }
        Command::Generate {
            players,
            alternatives,
            omega,
            count,
            seed,
            out: dir,
        } => {
            let cfg = GeneratorConfig {
                players: *players,
                alternatives: *alternatives,
                omega: *omega,
            };
            cfg.validate()?;
            let scenarios = (0..*count)
                .map(|i| generate_scenario(&cfg, trial_seed(*seed, 0, i)))
                .collect::<Result<Vec<_>>>()?;
            match dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(io_err)?;
                    for (i, s) in scenarios.iter().enumerate() {
                        let path = dir.join(format!("scenario-{i:04}.json"));
                        std::fs::write(&path, s.to_json()).map_err(io_err)?;
                        writeln!(out, "{}", path.display()).map_err(io_err)?;
                    }
                }
                None => write_scenarios(cli.format, &scenarios, out)?,
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            property,
            trials,
            seed,
        } => {
            let property: Property = property.parse()?;
            let reports = run_property(property, *trials, *seed);
            write_reports(cli.format, &reports, out)?;
            Ok(if reports.iter().all(PropertyReport::passed) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
    }
}

fn write_run(format: Format, report: &RunReport, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", report.to_json()),
        Format::Csv => write!(out, "{}", report.to_csv()),
    }
    .map_err(io_err)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn write_scenarios(format: Format, scenarios: &[Scenario], out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            for s in scenarios {
                writeln!(out, "{}", s.to_json()).map_err(io_err)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "scenario",
                "seed",
                "omega",
                "player",
                "valuations",
                "p0",
                "p",
            ])
            .map_err(|e| Error::Config(e.to_string()))?;
            for (i, s) in scenarios.iter().enumerate() {
                for (k, p) in s.players.iter().enumerate() {
                    w.write_record([
                        i.to_string(),
                        s.seed.to_string(),
                        s.omega.to_string(),
                        k.to_string(),
                        join(&p.valuations),
                        join(&p.belief.p0),
                        p.belief.p.to_string(),
                    ])
                    .map_err(|e| Error::Config(e.to_string()))?;
                }
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}

fn write_reports(format: Format, reports: &[PropertyReport], out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Json => {
            for r in reports {
                writeln!(out, "{}", r.to_json()).map_err(io_err)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "property",
                "trials",
                "violations",
                "worst_margin",
                "root_seed",
                "violation_seeds",
            ])
            .map_err(|e| Error::Config(e.to_string()))?;
            for r in reports {
                let seeds: Vec<String> = r.violation_seeds.iter().map(u64::to_string).collect();
                w.write_record([
                    r.property.clone(),
                    r.trials.to_string(),
                    r.violations.to_string(),
                    r.worst_margin.map(|m| m.to_string()).unwrap_or_default(),
                    r.root_seed.map(|s| s.to_string()).unwrap_or_default(),
                    seeds.join(";"),
                ])
                .map_err(|e| Error::Config(e.to_string()))?;
            }
            w.flush().map_err(io_err)?;
        }
    }
    Ok(())
}
