use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Episode,
    /// EPISODE with the clip decision forced off.
    EpisodeUnclipped,
    Celgc,
    #[serde(rename = "fedavg")]
    FedAvg,
    Scaffold,
    /// SCAFFOLD with per-iteration clipping of the corrected direction.
    ScaffoldClipped,
    NaiveParallelClip,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Episode,
        Algorithm::EpisodeUnclipped,
        Algorithm::Celgc,
        Algorithm::FedAvg,
        Algorithm::Scaffold,
        Algorithm::ScaffoldClipped,
        Algorithm::NaiveParallelClip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Episode => "episode",
            Algorithm::EpisodeUnclipped => "episode_unclipped",
            Algorithm::Celgc => "celgc",
            Algorithm::FedAvg => "fedavg",
            Algorithm::Scaffold => "scaffold",
            Algorithm::ScaffoldClipped => "scaffold_clipped",
            Algorithm::NaiveParallelClip => "naive_parallel_clip",
        }
    }

    pub fn is_episodic(self) -> bool {
        matches!(self, Algorithm::Episode | Algorithm::EpisodeUnclipped)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::config(format!("unknown algorithm `{s}`")))
    }
}

/// SCAFFOLD control-variate update rule. Only the difference-quotient form
/// `c_i <- c_i - c + (x̄ - y_i) / (Iη)` is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScaffoldVariant {
    #[default]
    OptionIi,
}

/// Step size η, clipping parameter γ, communication interval I, rounds R
/// (executed exactly) and client count N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub eta: f64,
    pub gamma: f64,
    pub local_steps: usize,
    pub rounds: usize,
    pub clients: usize,
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::config(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::config(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if self.local_steps == 0 {
            return Err(Error::config("local_steps (I) must be >= 1"));
        }
        if self.clients == 0 {
            return Err(Error::config("clients (N) must be >= 1"));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.gamma / self.eta
    }
}

/// Start-of-round controls `G_r^i`, their mean `G_r` and the episodic decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundState {
    pub round: usize,
    pub controls: Vec<ParameterVector>,
    pub global_control: ParameterVector,
    pub clip_round: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientState {
    pub iterate: ParameterVector,
    /// SCAFFOLD control variate `c_i`; zero and unused elsewhere.
    pub control: ParameterVector,
}

impl ClientState {
    pub fn synchronized(x: &ParameterVector) -> Self {
        Self {
            iterate: x.clone(),
            control: ParameterVector::zeros(x.dim()),
        }
    }
}
