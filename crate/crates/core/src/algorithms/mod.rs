//! EPISODE, its baselines and the round execution engine.

mod engine;
mod executor;
mod rounds;
mod state;

pub use engine::{run_training, TrainingRun, TrainingSetup, DIVERGENCE_THRESHOLD};
pub use executor::Executor;
pub use rounds::{
    celgc_round, corrected_gradient, episode_round, fedavg_round, naive_parallel_round, naive_parallel_step,
    resample_controls, scaffold_round, RoundContext, RoundOutcome,
};
pub use state::{Algorithm, ClientState, HyperParams, RoundState, ScaffoldVariant};
