//! The outer training loop.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::harness::monitor::{RoundClip, RoundTrace};
use crate::harness::trajectory::{RoundRecord, RunStatus, Trajectory};
use crate::noise::NoiseModel;
use crate::objective::{common_dim, global_gradient, global_value, SharedObjective};
use crate::vector::ParameterVector;

use super::executor::Executor;
use super::rounds::{
    celgc_round, episode_round, fedavg_round, naive_parallel_round, scaffold_round, RoundContext, RoundOutcome,
};
use super::state::{Algorithm, ClientState, HyperParams};

/// Any averaged coordinate beyond this magnitude marks the run diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct TrainingSetup {
    pub algorithm: Algorithm,
    pub hp: HyperParams,
    pub objectives: Vec<SharedObjective>,
    pub noise: NoiseModel,
    pub seed: u64,
    pub x0: ParameterVector,
    /// Record every local iterate for the drift monitor (memory grows by N·I).
    pub monitor: bool,
    /// Worker threads for per-client work; `<= 1` runs inline.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub trajectory: Trajectory,
    /// One trace per executed round when monitoring.
    pub traces: Vec<RoundTrace>,
}

fn global_metrics(objectives: &[SharedObjective], x: &ParameterVector) -> Result<(f64, f64)> {
    let loss = global_value(objectives, x)?;
    let norm = global_gradient(objectives, x)?.norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite("global gradient norm"));
    }
    Ok((loss, norm))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs exactly `hp.rounds` rounds from `x0` and records one entry per
/// averaged iterate, including the starting point.
///
/// Numerical blow-up (non-finite values, or a coordinate above
/// [`DIVERGENCE_THRESHOLD`]) ends the run with [`RunStatus::Diverged`]
/// instead of an error.
pub fn run_training(setup: &TrainingSetup) -> Result<TrainingRun> {
    let hp = &setup.hp;
    hp.validate()?;
    setup.noise.validate()?;
    if hp.clients != setup.objectives.len() {
        return Err(Error::config(format!(
            "hyperparameters name {} clients but {} objectives were given",
            hp.clients,
            setup.objectives.len()
        )));
    }
    let dim = common_dim(&setup.objectives)?;
    setup.x0.check_dim(&ParameterVector::zeros(dim))?;
    if setup.x0.max_abs() > DIVERGENCE_THRESHOLD {
        return Err(Error::config("starting point exceeds the divergence threshold"));
    }
    let executor = Executor::with_threads(setup.threads)?;
    let start = Instant::now();

    let mut xbar = setup.x0.clone();
    let (loss, grad_norm) = global_metrics(&setup.objectives, &xbar)?;
    let mut records = vec![RoundRecord {
        round: 0,
        loss,
        grad_norm,
        clipped: false,
        max_discrepancy: 0.0,
        elapsed_ms: elapsed_ms(start),
    }];
    let mut traces = Vec::new();
    let mut clients = vec![ClientState::synchronized(&xbar); hp.clients];
    let mut server_control = ParameterVector::zeros(dim);
    let mut status = RunStatus::Completed;

    for round in 0..hp.rounds {
        let ctx = RoundContext {
            objectives: &setup.objectives,
            hp,
            noise: &setup.noise,
            seed: setup.seed,
            round,
            record_iterates: setup.monitor,
            executor: &executor,
        };
        let result: Result<RoundOutcome> = match setup.algorithm {
            Algorithm::Episode => episode_round(&ctx, &mut clients, &xbar, true),
            Algorithm::EpisodeUnclipped => episode_round(&ctx, &mut clients, &xbar, false),
            Algorithm::Celgc => celgc_round(&ctx, &mut clients, &xbar),
            Algorithm::FedAvg => fedavg_round(&ctx, &mut clients, &xbar),
            Algorithm::Scaffold => scaffold_round(&ctx, &mut clients, &mut server_control, &xbar, false),
            Algorithm::ScaffoldClipped => scaffold_round(&ctx, &mut clients, &mut server_control, &xbar, true),
            Algorithm::NaiveParallelClip => naive_parallel_round(&ctx, &mut clients, &xbar),
        };
        let outcome = match result {
            Ok(o) if o.xbar.max_abs() <= DIVERGENCE_THRESHOLD => o,
            Ok(_) => {
                status = RunStatus::Diverged { round: round + 1 };
                break;
            }
            Err(e) if e.is_numerical() => {
                status = RunStatus::Diverged { round: round + 1 };
                break;
            }
            Err(e) => return Err(e),
        };
        let (loss, grad_norm) = match global_metrics(&setup.objectives, &outcome.xbar) {
            Ok(m) => m,
            Err(e) if e.is_numerical() => {
                status = RunStatus::Diverged { round: round + 1 };
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(iterates) = outcome.iterates {
            traces.push(RoundTrace {
                round,
                clip: if setup.algorithm.is_episodic() {
                    RoundClip::Episodic(outcome.clipped)
                } else {
                    RoundClip::PerStep
                },
                start: xbar.clone(),
                iterates,
            });
        }
        records.push(RoundRecord {
            round: round + 1,
            loss,
            grad_norm,
            clipped: outcome.clipped,
            max_discrepancy: outcome.max_discrepancy,
            elapsed_ms: elapsed_ms(start),
        });
        xbar = outcome.xbar;
    }

    Ok(TrainingRun {
        trajectory: Trajectory {
            records,
            status,
            final_iterate: xbar,
        },
        traces,
    })
}
