use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use cascade_lcr::SimulationSettings;
use cascade_lcr_cli::{
    cmd_cdf, cmd_curve, cmd_figure, cmd_selftest, cmd_simulate, output, write_files,
    FigureOptions, GridSection, MethodChoice, Overrides, ScenarioFile,
};
use clap::{Args, Parser, Subcommand};

/// Level crossing rate and average fade duration of multihop
/// amplify-and-forward Rayleigh channels.
#[derive(Parser)]
#[command(name = "cascade-lcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Threshold grid `lo_db:hi_db:step_db`, overriding the scenario.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<GridSection>,
    /// Simulation seed, overriding the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// LCR/AFD curves of a scenario.
    Curve {
        #[command(flatten)]
        common: ScenarioArgs,
        /// exact, laplace, simulate or all; defaults to the scenario's list.
        #[arg(long)]
        method: Option<MethodChoice>,
    },
    /// Reproduce one of the multihop figure scenarios (2 to 7).
    Figure {
        id: u8,
        /// laplace, or simulate/all for Laplace plus simulation.
        #[arg(long, default_value = "all")]
        method: MethodChoice,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, allow_hyphen_values = true, default_value = "-30:10:0.5")]
        grid: GridSection,
        /// Maximum Doppler of the mobile nodes in Hz.
        #[arg(long, default_value_t = cascade_lcr::figures::DEFAULT_FM)]
        fm: f64,
        /// Simulated duration in periods of the slowest hop.
        #[arg(long, default_value_t = SimulationSettings::default().fade_cycles)]
        fade_cycles: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// CDF of the product envelope on the grid.
    Cdf {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// Simulated product envelope as a time series.
    Simulate {
        #[command(flatten)]
        common: ScenarioArgs,
    },
    /// Quick consistency checks.
    Selftest,
}

fn emit(out: Option<&Path>, name: &str, body: &str) -> Result<()> {
    match out {
        Some(dir) => {
            output::write_atomic(dir, name, body.as_bytes())?;
        }
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn load(common: &ScenarioArgs, method: Option<MethodChoice>) -> Result<(ScenarioFile, Overrides)> {
    let s = ScenarioFile::load(&common.scenario)
        .with_context(|| format!("reading scenario {}", common.scenario.display()))?;
    let o = Overrides {
        method,
        seed: common.seed,
        grid: common.grid,
    };
    Ok((s, o))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Curve { common, method } => {
            let (s, o) = load(&common, method)?;
            emit(common.out.as_deref(), "curve.csv", &cmd_curve(&s, &o)?)?;
        }
        Command::Cdf { common } => {
            let (s, o) = load(&common, None)?;
            emit(common.out.as_deref(), "cdf.csv", &cmd_cdf(&s, &o)?)?;
        }
        Command::Simulate { common } => {
            let (s, o) = load(&common, None)?;
            emit(common.out.as_deref(), "trace.csv", &cmd_simulate(&s, &o)?)?;
        }
        Command::Figure { id, method, seed, grid, fm, fade_cycles, out } => {
            let simulation = match method {
                MethodChoice::Laplace => None,
                MethodChoice::Simulate | MethodChoice::All => Some(SimulationSettings {
                    seed,
                    fade_cycles,
                    ..SimulationSettings::default()
                }),
                MethodChoice::Exact => {
                    anyhow::bail!("figure scenarios have 5 hops; the exact method is limited to N <= 4")
                }
            };
            let files = cmd_figure(id, &FigureOptions { fm, grid, simulation })?;
            write_files(&out, &files)?;
        }
        Command::Selftest => {
            let mut ok = true;
            for c in cmd_selftest()? {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.pass;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
