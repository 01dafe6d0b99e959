//! Per-round run records and the stationarity metric.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::ParameterVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Global loss `f(x̄_r)`.
    pub loss: f64,
    /// Exact `‖∇f(x̄_r)‖`.
    pub grad_norm: f64,
    pub clipped: bool,
    /// Largest `‖x_t^i - x̄_{r-1}‖` seen while producing this iterate.
    pub max_discrepancy: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Diverged { round: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<RoundRecord>,
    pub status: RunStatus,
    /// Last finite averaged iterate.
    pub final_iterate: ParameterVector,
}

pub const CSV_HEADER: &str = "round,loss,grad_norm,clipped,max_discrepancy,elapsed_ms";

impl Trajectory {
    pub fn final_loss(&self) -> Option<f64> {
        self.records.last().map(|r| r.loss)
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self.status, RunStatus::Diverged { .. })
    }

    /// CSV with a header row and LF endings. Reals use 17 significant digits;
    /// with `timing == false` the `elapsed_ms` column is written as `0`.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{:.16e},{:.16e},{},{:.16e},",
                r.round,
                r.loss,
                r.grad_norm,
                u8::from(r.clipped),
                r.max_discrepancy
            );
            if timing {
                let _ = writeln!(out, "{:.3}", r.elapsed_ms);
            } else {
                out.push_str("0\n");
            }
        }
        out
    }

    /// Parses the trajectory CSV schema. Returns the records only.
    pub fn records_from_csv(text: &str) -> Result<Vec<RoundRecord>> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Empty("trajectory csv is empty".into()))?;
        if header.trim_end() != CSV_HEADER {
            return Err(Error::config(format!(
                "unexpected trajectory columns `{header}`, expected `{CSV_HEADER}`"
            )));
        }
        let mut records = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let lineno = n + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::config(format!(
                    "line {lineno}: expected 6 fields, got {}",
                    fields.len()
                )));
            }
            let real = |i: usize| {
                fields[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(format!("line {lineno}: bad number `{}`", fields[i])))
            };
            let round = fields[0]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("line {lineno}: bad round `{}`", fields[0])))?;
            let clipped = match fields[3].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::config(format!("line {lineno}: bad clipped flag `{other}`"))),
            };
            records.push(RoundRecord {
                round,
                loss: real(1)?,
                grad_norm: real(2)?,
                clipped,
                max_discrepancy: real(4)?,
                elapsed_ms: real(5)?,
            });
        }
        if records.is_empty() {
            return Err(Error::Empty("trajectory csv has no data rows".into()));
        }
        Ok(records)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stationarity {
    /// Mean of the recorded exact global gradient norms.
    pub value: f64,
    /// Set when the run diverged and the mean covers completed rounds only.
    pub partial: bool,
}

pub fn stationarity_metric(traj: &Trajectory) -> Result<Stationarity> {
    if traj.records.is_empty() {
        return Err(Error::Empty("trajectory has no records".into()));
    }
    let sum: f64 = traj.records.iter().map(|r| r.grad_norm).sum();
    Ok(Stationarity {
        value: sum / traj.records.len() as f64,
        partial: traj.is_diverged(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(norms: &[f64], status: RunStatus) -> Trajectory {
        Trajectory {
            records: norms
                .iter()
                .enumerate()
                .map(|(i, &g)| RoundRecord {
                    round: i,
                    loss: -0.125 * i as f64,
                    grad_norm: g,
                    clipped: i % 2 == 1,
                    max_discrepancy: 0.1 * i as f64,
                    elapsed_ms: 1.5 * i as f64,
                })
                .collect(),
            status,
            final_iterate: ParameterVector::zeros(1),
        }
    }

    #[test]
    fn mean_of_norms() {
        let s = stationarity_metric(&traj(&[1.0, 2.0, 3.0], RunStatus::Completed)).unwrap();
        assert_eq!(s, Stationarity { value: 2.0, partial: false });
        let s = stationarity_metric(&traj(&[0.0; 5], RunStatus::Completed)).unwrap();
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn diverged_runs_are_flagged() {
        let s = stationarity_metric(&traj(&[1.0, 3.0], RunStatus::Diverged { round: 2 })).unwrap();
        assert_eq!(s, Stationarity { value: 2.0, partial: true });
        assert!(stationarity_metric(&traj(&[], RunStatus::Completed)).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = traj(&[0.5, 1.0 / 3.0, 1e-300, 123456.789], RunStatus::Completed);
        let csv = t.to_csv(true);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(!csv.contains('\r'));
        assert_eq!(Trajectory::records_from_csv(&csv).unwrap(), t.records);
        let untimed = Trajectory::records_from_csv(&t.to_csv(false)).unwrap();
        assert!(untimed.iter().all(|r| r.elapsed_ms == 0.0));
    }

    #[test]
    fn csv_schema_errors() {
        assert!(Trajectory::records_from_csv("").is_err());
        assert!(Trajectory::records_from_csv(&format!("{CSV_HEADER}\n")).is_err());
        assert!(Trajectory::records_from_csv("round,loss,foo\n0,1,2\n").is_err());
        assert!(Trajectory::records_from_csv(&format!("{CSV_HEADER}\n0,1,2,7,0,0\n")).is_err());
    }
}
