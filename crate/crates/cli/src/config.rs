//! Experiment configuration files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use fedclip_core::algorithms::ScaffoldVariant;
use fedclip_core::harness::{
    partition_by_similarity, theorem1_hyperparams, PartitionSpec, TheoremConstants, TheoremHyperParams, TuningGrid,
};
use fedclip_core::objectives::{
    counterexample_clients, kappa_h, quartic_clients, LogisticClient, SyntheticClassification,
};
use fedclip_core::{Algorithm, HyperParams, NoiseModel, ParameterVector, ProblemConstants, SharedObjective, TrainingSetup};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_separation() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quartic {
        #[serde(rename = "H")]
        h: f64,
    },
    QuadraticCounterexample {
        gamma: f64,
    },
    Logistic {
        classes: usize,
        /// Percent of i.i.d. samples per client.
        similarity: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        features: Option<usize>,
        #[serde(default = "default_separation")]
        separation: f64,
        #[serde(default)]
        data_seed: u64,
        /// CSV with columns `f0..f{d-1},label`; replaces generation.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset_path: Option<PathBuf>,
    },
}

impl ObjectiveSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ObjectiveSpec::Quartic { .. } => "quartic",
            ObjectiveSpec::QuadraticCounterexample { .. } => "quadratic_counterexample",
            ObjectiveSpec::Logistic { .. } => "logistic",
        }
    }

    pub fn build(&self, clients: usize) -> Result<Vec<SharedObjective>, CliError> {
        let objectives = match self {
            ObjectiveSpec::Quartic { h } => quartic_clients(*h, clients)?,
            ObjectiveSpec::QuadraticCounterexample { gamma } => counterexample_clients(*gamma, clients)?,
            ObjectiveSpec::Logistic {
                classes,
                similarity,
                samples,
                features,
                separation,
                data_seed,
                dataset_path,
            } => {
                let data = match (dataset_path, samples, features) {
                    (Some(path), None, None) => SyntheticClassification::read_csv(path, Some(*classes))?,
                    (None, Some(n), Some(d)) => SyntheticClassification::generate(*n, *d, *classes, *separation, *data_seed)?,
                    _ => {
                        return Err(CliError::Invalid(
                            "logistic objective needs either dataset_path or both samples and features".into(),
                        ))
                    }
                };
                let spec = PartitionSpec {
                    similarity: *similarity,
                    clients,
                    seed: *data_seed,
                };
                let parts = partition_by_similarity(data.labels(), &spec)?;
                LogisticClient::all(Arc::new(data.with_clients(parts)?))?
            }
        };
        Ok(objectives)
    }

    /// Starting point used when the config gives none.
    pub fn default_start(&self, dim: usize) -> ParameterVector {
        match self {
            // From 0 the quartic pair flows into its spurious local minimum.
            ObjectiveSpec::Quartic { .. } => ParameterVector::scalar(1.0).expect("finite"),
            _ => ParameterVector::zeros(dim),
        }
    }

    /// Heterogeneity offset known in closed form for the family.
    pub fn known_kappa(&self) -> Option<f64> {
        match self {
            ObjectiveSpec::Quartic { h } => kappa_h(*h).ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeteroSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub objective: ObjectiveSpec,
    pub clients: usize,
    pub local_steps: usize,
    pub rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Problem constants; when present, η and γ come from the theorem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theorem: Option<ProblemConstants>,
    #[serde(default)]
    pub theorem_constants: TheoremConstants,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub monitor: bool,
    #[serde(default = "default_true")]
    pub record_timing: bool,
    #[serde(default)]
    pub scaffold_variant: ScaffoldVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<TuningGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hetero: Option<HeteroSpec>,
}

/// A validated config with its objectives built and step sizes fixed.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub setup: TrainingSetup,
    pub theorem: Option<TheoremHyperParams>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        config.check_step_mode()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Schema(message) => CliError::Config {
                path: path.to_owned(),
                message,
            },
            CliError::Invalid(message) => CliError::Config {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    fn check_step_mode(&self) -> Result<(), CliError> {
        match (self.eta, self.gamma, &self.theorem) {
            (Some(_), Some(_), None) | (None, None, Some(_)) => Ok(()),
            (None, None, None) => Err(CliError::Invalid("set either eta and gamma, or theorem".into())),
            (_, _, Some(_)) => Err(CliError::Invalid("eta/gamma and theorem are mutually exclusive".into())),
            _ => Err(CliError::Invalid("eta and gamma must be given together".into())),
        }
    }

    /// Theorem output when the config is in theorem mode.
    pub fn theorem_hyperparams(&self) -> Result<Option<TheoremHyperParams>, CliError> {
        self.theorem
            .as_ref()
            .map(|pc| theorem1_hyperparams(pc, self.clients, self.local_steps, self.theorem_constants))
            .transpose()
            .map_err(CliError::from)
    }

    pub fn resolve(&self, threads: usize) -> Result<Resolved, CliError> {
        self.check_step_mode()?;
        let theorem = self.theorem_hyperparams()?;
        let (eta, gamma) = match (&theorem, self.eta, self.gamma) {
            (Some(t), _, _) => (t.eta, t.gamma),
            (None, Some(eta), Some(gamma)) => (eta, gamma),
            _ => unreachable!("step mode checked above"),
        };
        let hp = HyperParams {
            eta,
            gamma,
            local_steps: self.local_steps,
            rounds: self.rounds,
            clients: self.clients,
        };
        hp.validate()?;
        self.noise.validate()?;
        let objectives = self.objective.build(self.clients)?;
        let dim = objectives[0].dim();
        let x0 = match &self.x0 {
            Some(v) => ParameterVector::new(v.clone())?,
            None => self.objective.default_start(dim),
        };
        if x0.dim() != dim {
            return Err(CliError::Invalid(format!("x0 has {} coordinates, objective has {dim}", x0.dim())));
        }
        Ok(Resolved {
            setup: TrainingSetup {
                algorithm: self.algorithm,
                hp,
                objectives,
                noise: self.noise,
                seed: self.seed,
                x0,
                monitor: self.monitor,
                threads,
            },
            theorem,
        })
    }

    /// The same experiment with explicit η and γ, as recorded in summaries.
    pub fn with_explicit_steps(&self, eta: f64, gamma: f64) -> Self {
        Self {
            eta: Some(eta),
            gamma: Some(gamma),
            theorem: None,
            ..self.clone()
        }
    }
}
