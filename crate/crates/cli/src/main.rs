use std::path::PathBuf;
use std::process::ExitCode;

use asmc_cli::commands::{cmd_compare, cmd_metrics, cmd_run, RunOptions};
use asmc_cli::CliError;
use asmc_core::sim::ControllerKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "asmc-sim", version, about = "Two-link arm adaptive-sliding mode tracking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Asmc,
    Pd,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Asmc => ControllerKind::AdaptiveSmc,
            ControllerArg::Pd => ControllerKind::PdBaseline,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trace.csv and summary.txt
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        controller: Option<ControllerArg>,
        #[arg(long)]
        decimation: Option<usize>,
        /// Also write tracking, error, torque and disturbance SVG plots
        #[arg(long)]
        plot: bool,
        /// Also write summary.kv (flat key=value)
        #[arg(long)]
        kv: bool,
    },
    /// Recompute the metrics summary from an existing trace.csv
    Metrics {
        trace: PathBuf,
        #[arg(long)]
        kv: bool,
    },
    /// Sweep seeds with both controllers and print mean ± std of each metric
    Compare {
        scenario: PathBuf,
        /// Seed range, N..M (half-open) or N..=M
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        decimation: Option<usize>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            seed,
            out,
            controller,
            decimation,
            plot,
            kv,
        } => {
            let summary = cmd_run(&RunOptions {
                scenario,
                seed,
                out: out.clone(),
                controller: controller.map(Into::into),
                decimation,
                plot,
                key_values: kv,
            })?;
            print!("{summary}");
            eprintln!("wrote {}", out.display());
        }
        Command::Metrics { trace, kv } => print!("{}", cmd_metrics(&trace, kv)?),
        Command::Compare {
            scenario,
            seeds,
            decimation,
        } => print!("{}", cmd_compare(&scenario, &seeds, decimation)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
