//! Side-by-side runs of several configs on one objective family.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::experiment::{execute, Experiment};
use crate::plot::{render, trajectory_panels};

pub const COMPARE_CSV: &str = "compare.csv";
pub const COMPARE_SVG: &str = "compare.svg";
const COMPARE_HEADER: &str = "run,algorithm,seed,round,loss,grad_norm,clipped,max_discrepancy";

#[derive(Debug, Clone)]
pub struct Comparison {
    pub labels: Vec<String>,
    pub experiments: Vec<Experiment>,
}

/// Series labels: the algorithm name, with the seed when names repeat.
fn labels(configs: &[ExperimentConfig]) -> Vec<String> {
    configs
        .iter()
        .map(|c| {
            let repeated = configs.iter().filter(|o| o.algorithm == c.algorithm).count() > 1;
            if repeated {
                format!("{} (seed {})", c.algorithm, c.seed)
            } else {
                c.algorithm.to_string()
            }
        })
        .collect()
}

pub fn check_families(configs: &[ExperimentConfig]) -> Result<(), CliError> {
    let first = configs
        .first()
        .ok_or_else(|| CliError::Invalid("compare needs at least one config".into()))?;
    if let Some(other) = configs.iter().find(|c| c.objective.family() != first.objective.family()) {
        return Err(CliError::MismatchedFamilies {
            first: first.objective.family().into(),
            other: other.objective.family().into(),
        });
    }
    Ok(())
}

/// Runs every config (in parallel on the given pool size, one thread each).
pub fn compare_configs(configs: &[ExperimentConfig], threads: usize) -> Result<Comparison, CliError> {
    check_families(configs)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    let experiments = pool.install(|| configs.par_iter().map(|c| execute(c, 1)).collect::<Result<Vec<_>, _>>())?;
    Ok(Comparison {
        labels: labels(configs),
        experiments,
    })
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARE_HEADER);
        out.push('\n');
        for (run, e) in self.experiments.iter().enumerate() {
            for r in &e.trajectory.records {
                let _ = writeln!(
                    out,
                    "{run},{},{},{},{:.16e},{:.16e},{},{:.16e}",
                    e.summary.algorithm,
                    e.summary.hyperparameters.seed,
                    r.round,
                    r.loss,
                    r.grad_norm,
                    u8::from(r.clipped),
                    r.max_discrepancy
                );
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let runs: Vec<_> = self
            .labels
            .iter()
            .zip(&self.experiments)
            .map(|(l, e)| (l.clone(), e.trajectory.records.as_slice()))
            .collect();
        render(&trajectory_panels(&runs))
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        for (name, body) in [(COMPARE_CSV, self.to_csv()), (COMPARE_SVG, self.to_svg())] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| CliError::write(&path, e))?;
        }
        Ok(())
    }
}

pub fn compare(paths: &[PathBuf], output_dir: &Path, threads: usize) -> Result<Comparison, CliError> {
    let configs = paths.iter().map(|p| ExperimentConfig::load(p)).collect::<Result<Vec<_>, _>>()?;
    let comparison = compare_configs(&configs, threads)?;
    comparison.write(output_dir)?;
    Ok(comparison)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(algorithm: &str, family: &str, seed: u64) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"algorithm": "{algorithm}", "objective": {family},
                "clients": 2, "local_steps": 2, "rounds": 5, "eta": 0.01, "gamma": 0.1,
                "noise": {{"sigma": 0.5}}, "seed": {seed}}}"#
        ))
        .unwrap()
    }

    const QUARTIC: &str = r#"{"family": "quartic", "H": 2}"#;

    #[test]
    fn mismatched_families() {
        let a = config("episode", QUARTIC, 0);
        let b = config("celgc", r#"{"family": "quadratic_counterexample", "gamma": 2}"#, 0);
        assert!(matches!(compare_configs(&[a, b], 1), Err(CliError::MismatchedFamilies { .. })));
        assert!(compare_configs(&[], 1).is_err());
    }

    #[test]
    fn merged_table_and_labels() {
        let runs = [config("episode", QUARTIC, 1), config("episode", QUARTIC, 2), config("celgc", QUARTIC, 1)];
        let c = compare_configs(&runs, 2).unwrap();
        assert_eq!(c.labels, ["episode (seed 1)", "episode (seed 2)", "celgc"]);
        let csv = c.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 * 6);
        assert!(csv.lines().nth(13).unwrap().starts_with("2,celgc,1,0,"));
        assert_eq!(c.to_svg().matches("<polyline").count(), 6);
        assert_eq!(compare_configs(&runs, 1).unwrap().to_csv(), csv);
    }
}
