//! Argument parsing and subcommand dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pr_filtration::parallel::Execution;

use crate::error::{CliError, CliResult};
use crate::output::{self, REPORT_TXT};
use crate::pipeline::{self, Overrides, RunOptions};
use crate::scenario::Scenario;
use crate::selfcheck::{run_selfcheck, Fault};

const SIGN_CONVENTION: &str = "\
Source intensities J follow Q(v(x)) = sum_i J_i / (4 pi |x - a_i|) + Q(v_background).
J > 0 raises Q near the source, so the specific volume rises and the pressure drops.
J < 0 lowers the specific volume toward 1 (pressure build-up, i.e. injection).
Grid nodes where the superposed Q reaches the supremum of Q are written with
status out_of_range. All quantities are in reduced units.

Exit codes: 0 success, 2 invalid scenario, 3 solver or I/O failure, 4 self-check failure.
Errors are reported on stderr as one JSON object.";

#[derive(Debug, Parser)]
#[command(
    name = "prfilt",
    version,
    about = "Peng-Robinson phase structure and point-source filtration fields"
)]
#[command(long_about = None, after_long_help = SIGN_CONVENTION, after_help = SIGN_CONVENTION)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the critical point and the isentrope thresholds.
    Critical {
        /// Scenario whose gas sets the degrees of freedom.
        scenario: Option<PathBuf>,
        /// Degrees of freedom when no scenario is given.
        #[arg(long, default_value_t = 3)]
        dof: u32,
    },
    /// Trace the coexistence curve and write coexistence.csv.
    Coexistence(ScenarioArgs),
    /// Sample the filtration field on the scenario grid and write field.csv.
    Field(ScenarioArgs),
    /// Produce every output the scenario requests, plus report.txt.
    Run(ScenarioArgs),
    /// Run the built-in verification suite.
    Selfcheck {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
        /// Corrupt one check's input on purpose.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Grid nodes per axis: N or NX,NY,NZ.
    #[arg(long, value_parser = parse_resolution)]
    pub resolution: Option<[usize; 3]>,
    /// Lowest coexistence-curve temperature (reduced).
    #[arg(long)]
    pub tmin: Option<f64>,
    /// Sample the grid on one thread.
    #[arg(long)]
    pub sequential: bool,
}

fn parse_resolution(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [n] => Ok([n; 3]),
        [x, y, z] => Ok([x, y, z]),
        _ => Err("expected N or NX,NY,NZ".into()),
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

impl ScenarioArgs {
    fn load(&self) -> CliResult<(Scenario, RunOptions)> {
        let overrides = Overrides {
            resolution: self.resolution,
            t_min: self.tmin,
        };
        let scenario = overrides.apply(Scenario::load(&self.scenario)?)?;
        let opts = RunOptions {
            out_dir: self.out_dir.clone(),
            execution: execution(self.sequential),
        };
        Ok((scenario, opts))
    }
}

/// Runs one command and returns the text for stdout.
pub fn execute(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Critical { scenario, dof } => {
            let dof = match scenario {
                Some(p) => Scenario::load(&p)?.gas.dof,
                None => dof,
            };
            if dof < 3 {
                return Err(CliError::Validation(vec![crate::error::FieldIssue::new(
                    "dof",
                    format!("must be at least 3, got {dof}"),
                )]));
            }
            pipeline::critical_summary(dof)
        }
        Command::Coexistence(args) => {
            let (scenario, opts) = args.load()?;
            let curve = pipeline::build_curve(&scenario)?;
            let path = pipeline::write_coexistence(&scenario, &curve, &opts)?;
            Ok(format!(
                "{} coexistence points written to {}\n",
                curve.points().len(),
                path.display()
            ))
        }
        Command::Field(args) => {
            let (scenario, opts) = args.load()?;
            let curve = pipeline::build_curve(&scenario)?;
            let field = pipeline::build_field(&scenario, curve)?;
            let samples = pipeline::sample(&scenario, &field, opts.execution)?;
            let path = pipeline::write_field(&scenario, &field, &samples, &opts)?;
            Ok(format!(
                "{} grid nodes written to {}\n",
                samples.records.len(),
                path.display()
            ))
        }
        Command::Run(args) => {
            let (scenario, opts) = args.load()?;
            Ok(pipeline::run(&scenario, &opts)?.report)
        }
        Command::Selfcheck {
            out_dir,
            sequential,
            inject_fault,
        } => {
            let report = run_selfcheck(inject_fault, execution(sequential));
            let text = report.render();
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
                output::write_text(&dir.join(REPORT_TXT), "none", &text)?;
            }
            if report.all_passed() {
                Ok(text)
            } else {
                print!("{text}");
                Err(CliError::SelfCheck(report.failed()))
            }
        }
    }
}
