//! Single-run execution and its output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fedclip_core::harness::{
    clipped_drift_monitor, discrepancy_monitor, stationarity_metric, MonitorReport, MonitorStatus, RoundTrace,
    Stationarity, TheoremHyperParams,
};
use fedclip_core::{run_training, Algorithm, RunStatus, Trajectory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRACE_DIR: &str = "trace";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedHyperParams {
    pub eta: f64,
    pub gamma: f64,
    pub gamma_over_eta: f64,
    pub local_steps: usize,
    pub rounds: usize,
    pub clients: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremHyperParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MonitorCounts {
    pub checked: usize,
    pub premise_unsatisfied: usize,
    pub premise_unknown: usize,
    pub not_applicable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub status: RunStatus,
    pub rounds_executed: usize,
    pub final_loss: f64,
    pub stationarity: Stationarity,
    pub final_iterate: Vec<f64>,
    pub hyperparameters: ResolvedHyperParams,
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monitor: Option<MonitorCounts>,
    /// SHA-256 of the trajectory CSV with the timing column zeroed.
    pub trajectory_hash: String,
    /// Config that reproduces this run with explicit step sizes.
    pub resolved_config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub trajectory: Trajectory,
    pub traces: Vec<RoundTrace>,
    pub reports: Vec<MonitorReport>,
    pub summary: Summary,
    pub record_timing: bool,
}

pub fn trajectory_hash(trajectory: &Trajectory) -> String {
    hex::encode(Sha256::digest(trajectory.to_csv(false).as_bytes()))
}

/// Validates, resolves and runs `config` entirely in memory.
pub fn execute(config: &ExperimentConfig, threads: usize) -> Result<Experiment, CliError> {
    let resolved = config.resolve(threads)?;
    let setup = &resolved.setup;
    let run = run_training(setup)?;

    let reports = run
        .traces
        .iter()
        .map(|trace| match &config.theorem {
            Some(pc) => discrepancy_monitor(trace, &setup.hp, pc),
            None => clipped_drift_monitor(trace, &setup.hp),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let monitor = config.monitor.then(|| {
        let mut counts = MonitorCounts::default();
        for r in &reports {
            match r.status {
                MonitorStatus::Checked => counts.checked += 1,
                MonitorStatus::PremiseUnsatisfied => counts.premise_unsatisfied += 1,
                MonitorStatus::PremiseUnknown => counts.premise_unknown += 1,
                MonitorStatus::NotApplicable => counts.not_applicable += 1,
            }
        }
        counts
    });

    let trajectory = run.trajectory;
    let hp = setup.hp;
    let summary = Summary {
        algorithm: config.algorithm,
        status: trajectory.status,
        rounds_executed: trajectory.records.len() - 1,
        final_loss: trajectory.final_loss().unwrap_or(f64::NAN),
        stationarity: stationarity_metric(&trajectory)?,
        final_iterate: trajectory.final_iterate.as_slice().to_vec(),
        hyperparameters: ResolvedHyperParams {
            eta: hp.eta,
            gamma: hp.gamma,
            gamma_over_eta: hp.gamma / hp.eta,
            local_steps: hp.local_steps,
            rounds: hp.rounds,
            clients: hp.clients,
            seed: config.seed,
            theorem: resolved.theorem,
        },
        violations: reports.iter().map(|r| r.violations.len()).sum(),
        monitor,
        trajectory_hash: trajectory_hash(&trajectory),
        resolved_config: config.with_explicit_steps(hp.eta, hp.gamma),
    };
    Ok(Experiment {
        trajectory,
        traces: run.traces,
        reports,
        summary,
        record_timing: config.record_timing,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::write(path, e))
}

fn trace_csv(traces: &[RoundTrace]) -> String {
    let dim = traces.first().map_or(0, |t| t.start.dim());
    let mut out = String::from("round,client,step");
    for j in 0..dim {
        let _ = write!(out, ",x{j}");
    }
    out.push('\n');
    for t in traces {
        for (client, iterates) in t.iterates.iter().enumerate() {
            for (step, x) in iterates.iter().enumerate() {
                let _ = write!(out, "{},{client},{step}", t.round);
                for v in x.as_slice() {
                    let _ = write!(out, ",{v:.16e}");
                }
                out.push('\n');
            }
        }
    }
    out
}

impl Experiment {
    /// Writes `trajectory.csv`, `summary.json` and, when monitoring, `trace/`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        write_file(&dir.join(TRAJECTORY_FILE), &self.trajectory.to_csv(self.record_timing))?;
        let summary = serde_json::to_string_pretty(&self.summary).map_err(|e| CliError::write(dir.join(SUMMARY_FILE), e))?;
        write_file(&dir.join(SUMMARY_FILE), &(summary + "\n"))?;
        if self.summary.monitor.is_some() {
            let trace_dir = dir.join(TRACE_DIR);
            fs::create_dir_all(&trace_dir).map_err(|e| CliError::write(&trace_dir, e))?;
            write_file(&trace_dir.join("iterates.csv"), &trace_csv(&self.traces))?;
            let flagged: Vec<&MonitorReport> = self.reports.iter().filter(|r| !r.violations.is_empty()).collect();
            let json = serde_json::to_string_pretty(&flagged).map_err(|e| CliError::write(&trace_dir, e))?;
            write_file(&trace_dir.join("violations.json"), &(json + "\n"))?;
        }
        Ok(())
    }
}

/// Loads, runs and writes one experiment. Nothing is written unless the
/// config is valid and the run completes (divergence counts as completion).
pub fn run_experiment(path: &Path, output_dir: Option<PathBuf>, threads: usize) -> Result<(Summary, PathBuf), CliError> {
    let config = ExperimentConfig::load(path)?;
    let experiment = execute(&config, threads)?;
    let dir = output_dir.unwrap_or_else(|| config.output_dir.clone());
    experiment.write(&dir)?;
    Ok((experiment.summary, dir))
}
