use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holmstedt_core::conditions::Check;
use holmstedt_core::sv::check_sv_envelope;
use holmstedt_core::{Grid, Sv};
use holmstedt_cli::{run_conditions, run_scenario, run_suite, Overrides, Scenario, Verdict};

#[derive(Parser)]
#[command(name = "holmstedt", version, about = "Check generalized Holmstedt estimates on a log grid")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true, env = "HOLMSTEDT_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    /// Grid points per decade.
    #[arg(long)]
    ppd: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario: conditions, both sides of every estimate, reports.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        /// Equivalence budget C_max.
        #[arg(long)]
        cmax: Option<f64>,
    },
    /// Run every *.json scenario in a directory.
    Suite {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
    /// Run selected condition checks only.
    Conditions {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated subset of C1,C2,C3,C4,SV_sufficient.
        #[arg(long, value_delimiter = ',', default_value = "C1,C2,C3,C4")]
        only: Vec<Check>,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        cmax: Option<f64>,
    },
    /// Envelope test of the slowly varying property for one descriptor.
    SvCheck {
        /// Descriptor as JSON, e.g. '{"kind":"BrokenLog","a0":1,"aInf":2}'.
        #[arg(long)]
        b: String,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        grid: GridArgs,
    },
}

fn invalid(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(Verdict::Invalid.exit_code() as u8)
}

fn print(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn load(path: &Path, grid: GridArgs, cmax: Option<f64>) -> Result<Scenario, ExitCode> {
    let mut s = Scenario::load(path).map_err(invalid)?;
    let o = Overrides { grid_min: grid.grid_min, grid_max: grid.grid_max, ppd: grid.ppd, cmax };
    s.apply(&o).map_err(invalid)?;
    Ok(s)
}

fn run(cmd: Cmd) -> ExitCode {
    match cmd {
        Cmd::Verify { scenario, out, grid, cmax } => {
            let s = match load(&scenario, grid, cmax) {
                Ok(s) => s,
                Err(code) => return code,
            };
            match run_scenario(&s, &out) {
                Ok(o) => {
                    print(&o.summary);
                    eprintln!("{}: {:?}, reports in {}", o.name, o.verdict, o.dir.display());
                    ExitCode::from(o.verdict.exit_code() as u8)
                }
                Err(e) => invalid(format!("{e:#}")),
            }
        }
        Cmd::Suite { dir, out } => match run_suite(&dir, &out) {
            Ok(sum) => {
                for e in &sum.scenarios {
                    let name = e.scenario.as_deref().unwrap_or("-");
                    match &e.error {
                        Some(err) => eprintln!("{:<24} {:<28} {:?}: {err}", e.file, name, e.verdict),
                        None => eprintln!("{:<24} {:<28} {:?}", e.file, name, e.verdict),
                    }
                }
                eprintln!("{} scenarios, suite verdict {:?}", sum.scenarios.len(), sum.verdict);
                ExitCode::from(sum.exit_code as u8)
            }
            Err(e) => invalid(format!("{e:#}")),
        },
        Cmd::Conditions { scenario, only, out, grid, cmax } => {
            let mut s = match load(&scenario, grid, cmax) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if only.contains(&Check::SvSufficient) && s.sv_eps.is_none() {
                return invalid("sv_eps: required when SV_sufficient is checked");
            }
            s.checks = only.clone();
            match run_conditions(&s, &only, &out) {
                Ok((verdict, summary)) => {
                    print(&summary);
                    ExitCode::from(verdict.exit_code() as u8)
                }
                Err(e) => invalid(format!("{e:#}")),
            }
        }
        Cmd::SvCheck { b, eps, grid } => {
            let b: Sv = match serde_json::from_str(&b) {
                Ok(b) => b,
                Err(e) => return invalid(format!("--b: {e}")),
            };
            let d = Grid::default();
            let g = match Grid::new(
                grid.grid_min.unwrap_or(d.t_min()),
                grid.grid_max.unwrap_or(d.t_max()),
                grid.ppd.unwrap_or(d.points_per_decade()),
            ) {
                Ok(g) => g,
                Err(e) => return invalid(e),
            };
            match check_sv_envelope(&b, eps, &g) {
                Ok(rep) => {
                    print(&serde_json::to_value(&rep).expect("reports serialize"));
                    ExitCode::from(if rep.passed { 0 } else { Verdict::ConditionsUnmet.exit_code() as u8 })
                }
                Err(e) => invalid(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Verdict::Invalid.exit_code() } else { 0 };
            e.print().ok();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = cli.workers.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    run(cli.cmd)
}
