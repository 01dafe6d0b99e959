//! Brute-force scan of the bounded-heterogeneity inequality
//! `‖∇f_i(x)‖ <= κ + ρ‖∇f(x)‖`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{common_dim, SharedObjective};
use crate::vector::ParameterVector;

const MAX_POINTS: usize = 10_000_000;

/// Axis grid `lo, lo + step, ..., hi`, applied to every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl ScanGrid {
    pub fn axis(&self) -> Result<Vec<f64>> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.step.is_finite()) || self.step <= 0.0 || self.hi < self.lo {
            return Err(Error::config(format!("invalid scan grid {self:?}")));
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| self.lo + k as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroReport {
    pub holds: bool,
    /// Minimum of `κ + ρ‖∇f(x)‖ - ‖∇f_i(x)‖` over grid points and clients.
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    pub worst_client: usize,
    pub points_checked: usize,
}

pub fn heterogeneity_check(objectives: &[SharedObjective], grid: &ScanGrid, rho: f64, kappa: f64) -> Result<HeteroReport> {
    let dim = common_dim(objectives)?;
    let axis = grid.axis()?;
    let total = axis
        .len()
        .checked_pow(dim as u32)
        .filter(|&t| t <= MAX_POINTS)
        .ok_or_else(|| Error::Unsupported(format!("scan of {} points per axis in {dim}-D is too large", axis.len())))?;

    let mut report = HeteroReport {
        holds: true,
        worst_margin: f64::INFINITY,
        worst_point: Vec::new(),
        worst_client: 0,
        points_checked: total,
    };
    let mut index = vec![0usize; dim];
    for _ in 0..total {
        let point: Vec<f64> = index.iter().map(|&k| axis[k]).collect();
        let x = ParameterVector::new(point)?;
        let grads = objectives.iter().map(|o| o.gradient(&x)).collect::<Result<Vec<_>>>()?;
        let global = ParameterVector::mean(&grads)?.norm();
        for (client, g) in grads.iter().enumerate() {
            let margin = kappa + rho * global - g.norm();
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_point = x.as_slice().to_vec();
                report.worst_client = client;
            }
        }
        // Odometer increment over the cartesian product.
        for slot in index.iter_mut() {
            *slot += 1;
            if *slot < axis.len() {
                break;
            }
            *slot = 0;
        }
    }
    report.holds = report.worst_margin >= 0.0;
    Ok(report)
}
