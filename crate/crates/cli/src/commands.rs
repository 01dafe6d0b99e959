//! The `grid`, `check-hetero` and `hyperparams` verbs.

use std::fs;
use std::path::Path;

use fedclip_core::harness::{grid_search, heterogeneity_check, GridReport, HeteroReport, ScanGrid, TheoremHyperParams, TuningGrid};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const GRID_FILE: &str = "grid.json";

/// Sweeps the config's grid (or the default synthetic grid) and writes `grid.json`.
pub fn run_grid(config: &ExperimentConfig, output_dir: &Path, threads: usize) -> Result<GridReport, CliError> {
    let resolved = config.resolve(1)?;
    let grid = config.grid.clone().unwrap_or_else(TuningGrid::synthetic_default);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let report = pool.install(|| grid_search(&resolved.setup, &grid))?;
    fs::create_dir_all(output_dir).map_err(|e| CliError::write(output_dir, e))?;
    let path = output_dir.join(GRID_FILE);
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::write(&path, e))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::write(&path, e))?;
    Ok(report)
}

pub fn check_hetero(config: &ExperimentConfig) -> Result<HeteroReport, CliError> {
    let spec = config
        .hetero
        .ok_or_else(|| CliError::Invalid("check-hetero needs a hetero block".into()))?;
    let kappa = spec
        .kappa
        .or_else(|| config.objective.known_kappa())
        .ok_or_else(|| CliError::Invalid("hetero.kappa is required for this objective family".into()))?;
    let objectives = config.objective.build(config.clients)?;
    let grid = ScanGrid {
        lo: spec.lo,
        hi: spec.hi,
        step: spec.step,
    };
    Ok(heterogeneity_check(&objectives, &grid, spec.rho, kappa)?)
}

pub fn hyperparams(config: &ExperimentConfig) -> Result<TheoremHyperParams, CliError> {
    config
        .theorem_hyperparams()?
        .ok_or_else(|| CliError::Invalid("hyperparams needs a theorem block".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"algorithm": "episode", "objective": {{"family": "quartic", "H": 4}},
                "clients": 2, "local_steps": 8, "rounds": 20{extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn hetero_uses_closed_form_kappa() {
        let c = quartic(r#", "eta": 0.1, "gamma": 1, "hetero": {"lo": -10, "hi": 10, "step": 0.01, "rho": 2}"#);
        let report = check_hetero(&c).unwrap();
        assert!(report.holds);
        assert_eq!(report.points_checked, 2001);
        assert!(check_hetero(&quartic(r#", "eta": 0.1, "gamma": 1"#)).is_err());
    }

    #[test]
    fn hyperparams_requires_theorem_mode() {
        assert!(hyperparams(&quartic(r#", "eta": 0.1, "gamma": 1"#)).is_err());
        let c = quartic(r#", "theorem": {"L0": 1, "L1": 1, "kappa": 1, "rho": 2, "sigma": 1, "delta": 1, "epsilon": 0.1}"#);
        let t = hyperparams(&c).unwrap();
        assert!((t.gamma_over_eta - (11.0 + 1.0 / (std::f64::consts::E - 1.0))).abs() < 1e-12);
    }

    #[test]
    fn grid_writes_report() {
        let c = quartic(r#", "eta": 0.1, "gamma": 1, "grid": {"gamma_over_eta": [5, 10], "eta": [0.01]}"#);
        let dir = tempfile::tempdir().unwrap();
        let report = run_grid(&c, dir.path(), 2).unwrap();
        assert_eq!(report.cells.len(), 2);
        let text = fs::read_to_string(dir.path().join(GRID_FILE)).unwrap();
        let back: GridReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
