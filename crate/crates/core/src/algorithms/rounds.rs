//! One communication round of each algorithm.
//!
//! Every round starts from the broadcast average `x̄_r`, runs `I` local
//! steps per client and returns the client average. Local draws use the
//! `Local` stream keyed by (client, round, step); EPISODE's start-of-round
//! controls use the separate `Control` stream.

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::objective::SharedObjective;
use crate::objectives::sample_stochastic_gradient;
use crate::rng::{Purpose, RngStream};
use crate::step::{clip_step, exceeds_threshold};
use crate::vector::ParameterVector;

use super::executor::Executor;
use super::state::{ClientState, HyperParams, RoundState};

/// Shared, read-only inputs of one round.
#[derive(Debug, Clone, Copy)]
pub struct RoundContext<'a> {
    pub objectives: &'a [SharedObjective],
    pub hp: &'a HyperParams,
    pub noise: &'a NoiseModel,
    pub seed: u64,
    pub round: usize,
    /// Keep every post-step iterate for the drift monitor.
    pub record_iterates: bool,
    pub executor: &'a Executor,
}

impl RoundContext<'_> {
    fn clients(&self) -> usize {
        self.objectives.len()
    }

    fn local_stream(&self, client: usize, step: usize) -> RngStream {
        RngStream::keyed(self.seed, Purpose::Local, client, self.round, step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub xbar: ParameterVector,
    /// EPISODE family: the round's clip decision. Others: whether any step clipped.
    pub clipped: bool,
    pub max_discrepancy: f64,
    pub round_state: Option<RoundState>,
    /// `[client][step]` post-step iterates when recording is on.
    pub iterates: Option<Vec<Vec<ParameterVector>>>,
}

struct LocalRun {
    end: ParameterVector,
    max_discrepancy: f64,
    any_clipped: bool,
    iterates: Vec<ParameterVector>,
}

fn run_local<F>(ctx: &RoundContext<'_>, client: usize, start: &ParameterVector, direction: F) -> Result<LocalRun>
where
    F: Fn(ParameterVector) -> Result<(ParameterVector, bool)>,
{
    let obj = ctx.objectives[client].as_ref();
    let mut x = start.clone();
    let mut max_discrepancy = 0.0_f64;
    let mut any_clipped = false;
    let mut iterates = Vec::new();
    for t in 0..ctx.hp.local_steps {
        let g = sample_stochastic_gradient(obj, &x, ctx.noise, &ctx.local_stream(client, t))?;
        let (d, clip) = direction(g)?;
        x = clip_step(&x, &d, ctx.hp.eta, ctx.hp.gamma, clip)?;
        any_clipped |= clip;
        max_discrepancy = max_discrepancy.max(x.distance(start)?);
        if ctx.record_iterates {
            iterates.push(x.clone());
        }
    }
    Ok(LocalRun {
        end: x,
        max_discrepancy,
        any_clipped,
        iterates,
    })
}

fn check_synchronized(clients: &[ClientState], xbar: &ParameterVector, expected: usize) -> Result<()> {
    if clients.len() != expected {
        return Err(Error::config(format!(
            "{} client states for {expected} objectives",
            clients.len()
        )));
    }
    if let Some(i) = clients.iter().position(|c| &c.iterate != xbar) {
        return Err(Error::config(format!("client {i} is not synchronized with the broadcast average")));
    }
    Ok(())
}

fn finish(
    ctx: &RoundContext<'_>,
    clients: &mut [ClientState],
    runs: Vec<LocalRun>,
    clipped: Option<bool>,
    round_state: Option<RoundState>,
) -> Result<RoundOutcome> {
    let ends: Vec<ParameterVector> = runs.iter().map(|r| r.end.clone()).collect();
    let xbar = ParameterVector::mean(&ends)?;
    for c in clients.iter_mut() {
        c.iterate = xbar.clone();
    }
    let max_discrepancy = runs.iter().map(|r| r.max_discrepancy).fold(0.0, f64::max);
    let clipped = clipped.unwrap_or_else(|| runs.iter().any(|r| r.any_clipped));
    let iterates = ctx
        .record_iterates
        .then(|| runs.into_iter().map(|r| r.iterates).collect());
    Ok(RoundOutcome {
        xbar,
        clipped,
        max_discrepancy,
        round_state,
        iterates,
    })
}

/// Fresh per-client stochastic gradients at `x̄_r`, their mean, and the
/// episodic clip decision `‖G_r‖ > γ/η`.
pub fn resample_controls(ctx: &RoundContext<'_>, xbar: &ParameterVector) -> Result<RoundState> {
    let controls = ctx.executor.map(ctx.clients(), |i| {
        let stream = RngStream::keyed(ctx.seed, Purpose::Control, i, ctx.round, 0);
        sample_stochastic_gradient(ctx.objectives[i].as_ref(), xbar, ctx.noise, &stream)
    })?;
    let global_control = ParameterVector::mean(&controls)?;
    let clip_round = exceeds_threshold(global_control.norm(), ctx.hp.eta, ctx.hp.gamma);
    Ok(RoundState {
        round: ctx.round,
        controls,
        global_control,
        clip_round,
    })
}

/// `local - G_i + G`, evaluated as `local - (G_i - G)` so that it returns
/// `local` exactly whenever `G_i == G`.
pub fn corrected_gradient(
    local: &ParameterVector,
    client_control: &ParameterVector,
    global_control: &ParameterVector,
) -> Result<ParameterVector> {
    local.check_dim(client_control)?;
    local.check_dim(global_control)?;
    ParameterVector::new(
        local
            .as_slice()
            .iter()
            .zip(client_control.as_slice())
            .zip(global_control.as_slice())
            .map(|((l, gi), g)| l - (gi - g))
            .collect(),
    )
}

/// EPISODE round. With `clipping == false` the clip decision is forced off
/// (the unclipped ablation); the controls are still resampled and used.
pub fn episode_round(
    ctx: &RoundContext<'_>,
    clients: &mut [ClientState],
    xbar: &ParameterVector,
    clipping: bool,
) -> Result<RoundOutcome> {
    check_synchronized(clients, xbar, ctx.clients())?;
    let state = resample_controls(ctx, xbar)?;
    let clip = clipping && state.clip_round;
    let runs = ctx.executor.map(ctx.clients(), |i| {
        run_local(ctx, i, xbar, |g| {
            Ok((corrected_gradient(&g, &state.controls[i], &state.global_control)?, clip))
        })
    })?;
    finish(ctx, clients, runs, Some(clip), Some(state))
}

/// CELGC: each client clips its own stochastic gradient at every step.
pub fn celgc_round(ctx: &RoundContext<'_>, clients: &mut [ClientState], xbar: &ParameterVector) -> Result<RoundOutcome> {
    check_synchronized(clients, xbar, ctx.clients())?;
    let (eta, gamma) = (ctx.hp.eta, ctx.hp.gamma);
    let runs = ctx.executor.map(ctx.clients(), |i| {
        run_local(ctx, i, xbar, |g| {
            let clip = exceeds_threshold(g.norm(), eta, gamma);
            Ok((g, clip))
        })
    })?;
    finish(ctx, clients, runs, None, None)
}

/// FedAvg: `I` plain SGD steps per client, then average.
pub fn fedavg_round(ctx: &RoundContext<'_>, clients: &mut [ClientState], xbar: &ParameterVector) -> Result<RoundOutcome> {
    check_synchronized(clients, xbar, ctx.clients())?;
    let runs = ctx
        .executor
        .map(ctx.clients(), |i| run_local(ctx, i, xbar, |g| Ok((g, false))))?;
    finish(ctx, clients, runs, None, None)
}

/// SCAFFOLD with the difference-quotient control update. Local direction is
/// `∇F_i(x; ξ) - c_i + c`; when `clipped` it is clipped per step at `γ/η`.
/// Updates every `c_i` and the server control `c` in place.
pub fn scaffold_round(
    ctx: &RoundContext<'_>,
    clients: &mut [ClientState],
    server_control: &mut ParameterVector,
    xbar: &ParameterVector,
    clipped: bool,
) -> Result<RoundOutcome> {
    check_synchronized(clients, xbar, ctx.clients())?;
    let (eta, gamma) = (ctx.hp.eta, ctx.hp.gamma);
    let c = server_control.clone();
    let old_controls: Vec<ParameterVector> = clients.iter().map(|s| s.control.clone()).collect();
    let runs = ctx.executor.map(ctx.clients(), |i| {
        run_local(ctx, i, xbar, |g| {
            let d = corrected_gradient(&g, &old_controls[i], &c)?;
            let clip = clipped && exceeds_threshold(d.norm(), eta, gamma);
            Ok((d, clip))
        })
    })?;
    let scale = ctx.hp.local_steps as f64 * eta;
    let mut deltas = Vec::with_capacity(runs.len());
    for (state, run) in clients.iter_mut().zip(&runs) {
        let drift = xbar.sub(&run.end)?;
        let new_control = state
            .control
            .zip_map(&c, |ci, cc| ci - cc)?
            .zip_map(&drift, |v, dv| v + dv / scale)?;
        deltas.push(new_control.sub(&state.control)?);
        state.control = new_control;
    }
    *server_control = server_control.add(&ParameterVector::mean(&deltas)?)?;
    finish(ctx, clients, runs, None, None)
}

/// One Naive Parallel Clip iteration: average fresh client gradients at
/// `x̄` and take a clipped step on the average.
pub fn naive_parallel_step(
    ctx: &RoundContext<'_>,
    xbar: &ParameterVector,
    iteration: usize,
) -> Result<(ParameterVector, bool)> {
    let grads = ctx.executor.map(ctx.clients(), |i| {
        sample_stochastic_gradient(ctx.objectives[i].as_ref(), xbar, ctx.noise, &ctx.local_stream(i, iteration))
    })?;
    let mean = ParameterVector::mean(&grads)?;
    let clip = exceeds_threshold(mean.norm(), ctx.hp.eta, ctx.hp.gamma);
    Ok((clip_step(xbar, &mean, ctx.hp.eta, ctx.hp.gamma, clip)?, clip))
}

/// `I` synchronized Naive Parallel Clip iterations, so one round spends the
/// same gradient budget as the local-update algorithms.
pub fn naive_parallel_round(
    ctx: &RoundContext<'_>,
    clients: &mut [ClientState],
    xbar: &ParameterVector,
) -> Result<RoundOutcome> {
    check_synchronized(clients, xbar, ctx.clients())?;
    let mut x = xbar.clone();
    let mut max_discrepancy = 0.0_f64;
    let mut any_clipped = false;
    let mut path = Vec::new();
    for t in 0..ctx.hp.local_steps {
        let (next, clip) = naive_parallel_step(ctx, &x, t)?;
        x = next;
        any_clipped |= clip;
        max_discrepancy = max_discrepancy.max(x.distance(xbar)?);
        if ctx.record_iterates {
            path.push(x.clone());
        }
    }
    for c in clients.iter_mut() {
        c.iterate = x.clone();
    }
    Ok(RoundOutcome {
        xbar: x,
        clipped: any_clipped,
        max_discrepancy,
        round_state: None,
        iterates: ctx.record_iterates.then(|| vec![path]),
    })
}
