//! Simulation engine for federated optimization with gradient clipping.
//!
//! The crate provides EPISODE (episodic clipping with resampled corrections)
//! and the baselines it is compared against, closed-form synthetic client
//! objectives, and the experiment harness: theorem-driven hyperparameters,
//! similarity partitioning, drift monitors, stationarity metrics and grid
//! search.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod noise;
pub mod objective;
pub mod objectives;
pub mod rng;
pub mod step;
pub mod vector;

pub use algorithms::{run_training, Algorithm, HyperParams, TrainingRun, TrainingSetup};
pub use error::{Error, Result};
pub use harness::{ProblemConstants, RunStatus, Trajectory};
pub use noise::{NoiseKind, NoiseModel};
pub use objective::{finite_diff_gradient, Objective, SharedObjective};
pub use rng::{Purpose, RngStream, StreamKey};
pub use step::clip_step;
pub use vector::ParameterVector;
