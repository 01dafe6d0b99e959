use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fedclip_cli::commands::{check_hetero, hyperparams, run_grid};
use fedclip_cli::compare::compare;
use fedclip_cli::plot::emit_plot;
use fedclip_cli::{run_experiment, threads_from_env, ExperimentConfig};
use fedclip_core::harness::Selection;

#[derive(Parser)]
#[command(name = "fedclip", version, about = "Federated training simulations with episodic gradient clipping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write trajectory.csv and summary.json.
    Run {
        config: PathBuf,
        /// Overrides the config's output_dir.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run several experiments on one objective family and chart them together.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "compare")]
        output_dir: PathBuf,
    },
    /// Sweep step size and clipping ratio, writing grid.json.
    Grid {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Render a trajectory CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Scan the bounded-heterogeneity inequality over a grid.
    CheckHetero { config: PathBuf },
    /// Print theorem-derived step size, clipping threshold and round count.
    Hyperparams { config: PathBuf },
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    let threads = threads_from_env()?;
    match command {
        Command::Run { config, output_dir } => {
            let (summary, dir) = run_experiment(&config, output_dir, threads)?;
            println!(
                "{} {} rounds={} final_loss={:.6e} stationarity={:.6e} violations={} -> {}",
                summary.algorithm,
                if summary.status == fedclip_core::RunStatus::Completed { "completed" } else { "diverged" },
                summary.rounds_executed,
                summary.final_loss,
                summary.stationarity.value,
                summary.violations,
                dir.display()
            );
        }
        Command::Compare { configs, output_dir } => {
            let comparison = compare(&configs, &output_dir, threads)?;
            for (label, e) in comparison.labels.iter().zip(&comparison.experiments) {
                println!("{label}: final_loss={:.6e} stationarity={:.6e}", e.summary.final_loss, e.summary.stationarity.value);
            }
            println!("-> {}", output_dir.display());
        }
        Command::Grid { config, output_dir } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
            let report = run_grid(&cfg, &dir, threads)?;
            match report.selection {
                Selection::Best { .. } => {
                    let best = report.best().context("selected cell missing")?;
                    println!("best: eta={} gamma/eta={} final_loss={:.6e}", best.eta, best.gamma_over_eta, best.final_loss);
                }
                Selection::NoViableConfiguration => println!("no viable configuration: every cell diverged"),
            }
        }
        Command::Plot { csv, output } => {
            let out = emit_plot(&csv, output)?;
            println!("{}", out.display());
        }
        Command::CheckHetero { config } => print_json(&check_hetero(&ExperimentConfig::load(&config)?)?)?,
        Command::Hyperparams { config } => print_json(&hyperparams(&ExperimentConfig::load(&config)?)?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
