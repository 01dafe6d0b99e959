//! Hyperparameter sweep over clipping ratio `γ/η` and step size `η`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trajectory::{stationarity_metric, RunStatus};
use crate::algorithms::{run_training, Algorithm, TrainingSetup};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuningGrid {
    pub gamma_over_eta: Vec<f64>,
    pub eta: Vec<f64>,
}

impl TuningGrid {
    /// `γ/η ∈ {5, 10, 15}`, `η ∈ {0.1, 0.01, 0.001}`.
    pub fn synthetic_default() -> Self {
        Self {
            gamma_over_eta: vec![5.0, 10.0, 15.0],
            eta: vec![0.1, 0.01, 0.001],
        }
    }

    /// Cells in `η`-major order.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.eta
            .iter()
            .flat_map(|&eta| self.gamma_over_eta.iter().map(move |&ratio| (eta, ratio)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub eta: f64,
    pub gamma_over_eta: f64,
    pub gamma: f64,
    pub seed: u64,
    pub final_loss: f64,
    pub stationarity: f64,
    pub final_iterate: Vec<f64>,
    #[serde(flatten)]
    pub status: RunStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "selection", rename_all = "snake_case")]
pub enum Selection {
    Best { index: usize },
    NoViableConfiguration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub algorithm: Algorithm,
    pub cells: Vec<GridCell>,
    pub selection: Selection,
}

impl GridReport {
    pub fn best(&self) -> Option<&GridCell> {
        match self.selection {
            Selection::Best { index } => self.cells.get(index),
            Selection::NoViableConfiguration => None,
        }
    }
}

/// Runs every cell of `grid` on the objectives, rounds and noise of
/// `template`, each with a seed derived from `template.seed` and the cell
/// index. The best cell has the lowest final global loss among completed
/// runs; ties go to the smaller `η`.
pub fn grid_search(template: &TrainingSetup, grid: &TuningGrid) -> Result<GridReport> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Empty("tuning grid has no cells".into()));
    }
    if let Some(&(eta, ratio)) = cells.iter().find(|(e, r)| !(*e > 0.0 && *r > 0.0)) {
        return Err(Error::config(format!("grid values must be positive, got eta {eta}, ratio {ratio}")));
    }
    let results: Vec<GridCell> = cells
        .par_iter()
        .enumerate()
        .map(|(index, &(eta, ratio))| {
            let mut setup = template.clone();
            setup.hp.eta = eta;
            setup.hp.gamma = ratio * eta;
            setup.seed = derive_seed(template.seed, index as u64);
            setup.monitor = false;
            setup.threads = 1;
            let run = run_training(&setup)?;
            let traj = run.trajectory;
            Ok(GridCell {
                eta,
                gamma_over_eta: ratio,
                gamma: setup.hp.gamma,
                seed: setup.seed,
                final_loss: traj.final_loss().unwrap_or(f64::NAN),
                stationarity: stationarity_metric(&traj)?.value,
                final_iterate: traj.final_iterate.as_slice().to_vec(),
                status: traj.status,
            })
        })
        .collect::<Result<_>>()?;

    let selection = results
        .iter()
        .enumerate()
        .filter(|(_, c)| c.status == RunStatus::Completed)
        .min_by(|(_, a), (_, b)| a.final_loss.total_cmp(&b.final_loss).then(a.eta.total_cmp(&b.eta)))
        .map_or(Selection::NoViableConfiguration, |(index, _)| Selection::Best { index });
    Ok(GridReport {
        algorithm: template.algorithm,
        cells: results,
        selection,
    })
}
