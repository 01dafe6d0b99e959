//! Runtime check of the per-round client drift bounds.
//!
//! In a non-clipped round every local iterate stays within
//! `2ηI(2σ + γ/η)` of the round's starting average, in a clipped round within
//! `γI`. The clipped bound follows from each step having length at most γ;
//! the non-clipped bound is only asserted when its premises hold:
//!
//! ```text
//! 2ηI (A L0 + B L1 κ + B L1 ρ (σ + γ/η)) <= 1
//! max{2ηI(2σ + γ/η), γI}                 <= C / L1
//! ```

use serde::{Deserialize, Serialize};

use super::constants::ProblemConstants;
use crate::algorithms::HyperParams;
use crate::error::Result;
use crate::vector::ParameterVector;

/// Relative slack absorbing floating rounding in the bound comparisons.
pub const BOUND_RTOL: f64 = 1e-12;

/// Rounding allowance for an iterate reached after `steps` updates: each
/// update and the final distance may each lose half an ulp of the magnitude.
fn rounding_slack(steps: usize, start: &ParameterVector, x: &ParameterVector) -> f64 {
    (steps + 2) as f64 * f64::EPSILON * start.norm().max(x.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundClip {
    /// One clip decision for the whole round (EPISODE family).
    Episodic(bool),
    /// Per-step decisions; the drift bounds do not apply.
    PerStep,
}

/// Every post-step local iterate of one round, indexed `[client][step]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: usize,
    pub clip: RoundClip,
    pub start: ParameterVector,
    pub iterates: Vec<Vec<ParameterVector>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaPremise {
    /// `2ηIΓ`; must be `<= 1`.
    pub smoothness_lhs: f64,
    /// `2ηI(2σ + γ/η)`, the non-clipped drift radius.
    pub drift_radius: f64,
    /// `γI`, the clipped drift radius.
    pub clipped_radius: f64,
    /// `C / L1`, infinite when `L1 = 0`.
    pub c_over_l1: f64,
    pub satisfied: bool,
}

pub fn lemma_premise(hp: &HyperParams, pc: &ProblemConstants) -> Result<LemmaPremise> {
    let i = hp.local_steps as f64;
    let ratio = hp.gamma / hp.eta;
    let smoothness_lhs = 2.0 * hp.eta * i * pc.big_gamma(ratio)?;
    let drift_radius = 2.0 * hp.eta * i * (2.0 * pc.sigma + ratio);
    let clipped_radius = hp.gamma * i;
    let c_over_l1 = if pc.l1 == 0.0 { f64::INFINITY } else { pc.c / pc.l1 };
    Ok(LemmaPremise {
        smoothness_lhs,
        drift_radius,
        clipped_radius,
        c_over_l1,
        satisfied: smoothness_lhs <= 1.0 && drift_radius.max(clipped_radius) <= c_over_l1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorStatus {
    Checked,
    /// Non-clipped round whose premises fail: bound not asserted.
    PremiseUnsatisfied,
    /// Non-clipped round checked without problem constants.
    PremiseUnknown,
    /// Trace from an algorithm without an episodic clip decision.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub round: usize,
    pub client: usize,
    pub step: usize,
    pub distance: f64,
    pub bound: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub round: usize,
    pub status: MonitorStatus,
    pub violations: Vec<Violation>,
}

fn report(round: usize, status: MonitorStatus) -> MonitorReport {
    MonitorReport {
        round,
        status,
        violations: Vec::new(),
    }
}

fn check_bound(trace: &RoundTrace, bound: f64, clipped: bool) -> Result<MonitorReport> {
    let mut violations = Vec::new();
    for (client, iterates) in trace.iterates.iter().enumerate() {
        for (step, x) in iterates.iter().enumerate() {
            let distance = x.distance(&trace.start)?;
            if distance > bound * (1.0 + BOUND_RTOL) + rounding_slack(step + 1, &trace.start, x) {
                violations.push(Violation {
                    round: trace.round,
                    client,
                    step,
                    distance,
                    bound,
                    clipped,
                });
            }
        }
    }
    Ok(MonitorReport {
        round: trace.round,
        status: MonitorStatus::Checked,
        violations,
    })
}

pub fn discrepancy_monitor(trace: &RoundTrace, hp: &HyperParams, pc: &ProblemConstants) -> Result<MonitorReport> {
    let RoundClip::Episodic(clipped) = trace.clip else {
        return Ok(report(trace.round, MonitorStatus::NotApplicable));
    };
    let premise = lemma_premise(hp, pc)?;
    if clipped {
        check_bound(trace, premise.clipped_radius, true)
    } else if premise.satisfied {
        check_bound(trace, premise.drift_radius, false)
    } else {
        Ok(report(trace.round, MonitorStatus::PremiseUnsatisfied))
    }
}

/// Checks only the clipped-round bound `γI`, which needs no problem constants.
pub fn clipped_drift_monitor(trace: &RoundTrace, hp: &HyperParams) -> Result<MonitorReport> {
    match trace.clip {
        RoundClip::PerStep => Ok(report(trace.round, MonitorStatus::NotApplicable)),
        RoundClip::Episodic(false) => Ok(report(trace.round, MonitorStatus::PremiseUnknown)),
        RoundClip::Episodic(true) => check_bound(trace, hp.gamma * hp.local_steps as f64, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(eta: f64, gamma: f64, steps: usize) -> HyperParams {
        HyperParams {
            eta,
            gamma,
            local_steps: steps,
            rounds: 1,
            clients: 1,
        }
    }

    fn pc() -> ProblemConstants {
        ProblemConstants {
            l0: 1.0,
            l1: 1.0,
            kappa: 0.0,
            rho: 1.0,
            sigma: 0.0,
            delta: 1.0,
            epsilon: 0.1,
            c: 1.0,
        }
    }

    fn trace(clip: RoundClip, points: &[f64]) -> RoundTrace {
        RoundTrace {
            round: 3,
            clip,
            start: ParameterVector::scalar(0.0).unwrap(),
            iterates: vec![points.iter().map(|&p| ParameterVector::scalar(p).unwrap()).collect()],
        }
    }

    #[test]
    fn clipped_round_within_gamma_i() {
        let t = trace(RoundClip::Episodic(true), &[0.1, 0.2, 0.3, 0.4]);
        let r = discrepancy_monitor(&t, &hp(1.0, 0.1, 4), &pc()).unwrap();
        assert_eq!(r.status, MonitorStatus::Checked);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn clipped_round_violation_detected() {
        let t = trace(RoundClip::Episodic(true), &[0.1, 0.5]);
        let r = discrepancy_monitor(&t, &hp(1.0, 0.1, 2), &pc()).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].step, 1);
    }

    #[test]
    fn unclipped_round_premise_guard() {
        // 2ηIΓ with η = 1 is far above 1.
        let t = trace(RoundClip::Episodic(false), &[100.0]);
        let r = discrepancy_monitor(&t, &hp(1.0, 0.5, 1), &pc()).unwrap();
        assert_eq!(r.status, MonitorStatus::PremiseUnsatisfied);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn unclipped_round_checked_when_premise_holds() {
        // η = 1e-3, γ/η = 2: Γ = 1 + (e-1)·2 ≈ 4.4, 2ηIΓ ≈ 0.018; radius 2ηI·2 = 0.008.
        let h = hp(1e-3, 2e-3, 2);
        assert!(lemma_premise(&h, &pc()).unwrap().satisfied);
        let ok = discrepancy_monitor(&trace(RoundClip::Episodic(false), &[0.004, 0.008]), &h, &pc()).unwrap();
        assert!(ok.violations.is_empty());
        let bad = discrepancy_monitor(&trace(RoundClip::Episodic(false), &[0.009]), &h, &pc()).unwrap();
        assert_eq!(bad.violations.len(), 1);
    }

    #[test]
    fn per_step_traces_not_applicable() {
        let r = discrepancy_monitor(&trace(RoundClip::PerStep, &[1e9]), &hp(1.0, 0.1, 1), &pc()).unwrap();
        assert_eq!(r.status, MonitorStatus::NotApplicable);
    }

    #[test]
    fn zero_l1_gives_infinite_radius_cap() {
        let pc = ProblemConstants { l1: 0.0, ..pc() };
        let p = lemma_premise(&hp(1e-3, 1e-3, 1), &pc).unwrap();
        assert!(p.c_over_l1.is_infinite());
        assert!(p.satisfied);
    }

    #[test]
    fn constants_free_monitor() {
        let h = hp(1.0, 0.1, 2);
        let clipped = clipped_drift_monitor(&trace(RoundClip::Episodic(true), &[0.1, 0.25]), &h).unwrap();
        assert_eq!(clipped.violations.len(), 1);
        let free = clipped_drift_monitor(&trace(RoundClip::Episodic(false), &[50.0]), &h).unwrap();
        assert_eq!(free.status, MonitorStatus::PremiseUnknown);
        let per_step = clipped_drift_monitor(&trace(RoundClip::PerStep, &[50.0]), &h).unwrap();
        assert_eq!(per_step.status, MonitorStatus::NotApplicable);
    }

    #[test]
    fn rounding_at_large_magnitude_is_tolerated() {
        // Eight clipped steps of length γ from 1.5, computed in floating point.
        let h = hp(1.0, 7.674163e-6, 8);
        let mut x = 1.5f64;
        let mut points = Vec::new();
        for _ in 0..8 {
            x -= h.gamma;
            points.push(x);
        }
        let mut t = trace(RoundClip::Episodic(true), &points);
        t.start = ParameterVector::scalar(1.5).unwrap();
        assert!(discrepancy_monitor(&t, &h, &pc()).unwrap().violations.is_empty());
        let far = trace(RoundClip::Episodic(true), &[8.0 * h.gamma * (1.0 + 1e-9)]);
        assert_eq!(discrepancy_monitor(&far, &h, &pc()).unwrap().violations.len(), 1);
    }
}
