//! Relaxed-smoothness constants and theorem-driven hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `A = 1 + e^C - (e^C - 1)/C` and `B = (e^C - 1)/C`, both at least 1 for `C >= 1`.
pub fn smoothness_constants_ab(c: f64) -> Result<(f64, f64)> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::config(format!("smoothness constant C must be >= 1, got {c}")));
    }
    let growth = c.exp_m1();
    let b = growth / c;
    let a = 1.0 + c.exp() - b;
    Ok((a, b))
}

fn default_c() -> f64 {
    1.0
}

/// Problem constants of the analysis: relaxed smoothness `(L0, L1)`,
/// heterogeneity `(kappa, rho)`, noise bound, initial gap, target accuracy
/// and the smoothness-expansion constant `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConstants {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    pub kappa: f64,
    pub rho: f64,
    pub sigma: f64,
    pub delta: f64,
    pub epsilon: f64,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        nonneg("L0", self.l0)?;
        nonneg("L1", self.l1)?;
        nonneg("kappa", self.kappa)?;
        nonneg("sigma", self.sigma)?;
        if !(self.rho.is_finite() && self.rho >= 1.0) {
            return Err(Error::config(format!("rho must be >= 1, got {}", self.rho)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        smoothness_constants_ab(self.c)?;
        Ok(())
    }

    pub fn ab(&self) -> Result<(f64, f64)> {
        smoothness_constants_ab(self.c)
    }

    /// `Γ = A L0 + B L1 κ + B L1 ρ (σ + γ/η)`.
    pub fn big_gamma(&self, gamma_over_eta: f64) -> Result<f64> {
        let (a, b) = self.ab()?;
        Ok(a * self.l0 + b * self.l1 * self.kappa + b * self.l1 * self.rho * (self.sigma + gamma_over_eta))
    }
}

/// Which published constant set bounds the step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TheoremConstants {
    /// `η <= min{1/(216ΓI), ε/(180ΓIσ), Nε²/(16AL0σ²)}`.
    Main,
    /// `η <= min{1/(856ΓI), ε/(180ΓIσ), Nε²/(8AL0σ²)}`.
    #[default]
    Appendix,
}

impl TheoremConstants {
    fn coefficients(self) -> (f64, f64, f64) {
        match self {
            TheoremConstants::Main => (216.0, 180.0, 16.0),
            TheoremConstants::Appendix => (856.0, 180.0, 8.0),
        }
    }
}

/// The three candidate upper bounds on η; `None` marks a vacuous bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaBounds {
    pub drift: f64,
    pub noise: Option<f64>,
    pub speedup: Option<f64>,
}

impl EtaBounds {
    pub fn min(&self) -> f64 {
        [Some(self.drift), self.noise, self.speedup]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremHyperParams {
    pub eta: f64,
    pub gamma: f64,
    pub gamma_over_eta: f64,
    pub big_gamma: f64,
    /// `⌈4Δ / (ε² η I)⌉`, saturating at `u64::MAX`.
    pub r_min: u64,
    pub bounds: EtaBounds,
    pub a: f64,
    pub b: f64,
    pub constants: TheoremConstants,
}

/// Largest admissible step size, clipping parameter and round count.
///
/// `γ/η = 11σ + A L0 / (B L1 ρ)` does not depend on η, so Γ is computed
/// first and η is the minimum of the candidate bounds.
pub fn theorem1_hyperparams(
    pc: &ProblemConstants,
    clients: usize,
    local_steps: usize,
    constants: TheoremConstants,
) -> Result<TheoremHyperParams> {
    pc.validate()?;
    if clients == 0 || local_steps == 0 {
        return Err(Error::config("clients and local_steps must be >= 1"));
    }
    if pc.l1 == 0.0 {
        return Err(Error::Unsupported(
            "L1 = 0: the clipping threshold divides by B·L1·ρ; set eta and gamma manually".into(),
        ));
    }
    let (a, b) = pc.ab()?;
    let eps_cap = 3.0 * a * pc.l0 / (5.0 * b * pc.l1 * pc.rho);
    if pc.epsilon > eps_cap {
        return Err(Error::config(format!(
            "epsilon {} exceeds the admissible tolerance 3AL0/(5BL1ρ) = {eps_cap}",
            pc.epsilon
        )));
    }
    let gamma_over_eta = 11.0 * pc.sigma + a * pc.l0 / (b * pc.l1 * pc.rho);
    if gamma_over_eta.is_nan() || gamma_over_eta <= 0.0 {
        return Err(Error::config("clipping threshold is zero: need L0 > 0 or sigma > 0"));
    }
    let big_gamma = pc.big_gamma(gamma_over_eta)?;
    let (k_drift, k_noise, k_speedup) = constants.coefficients();
    let i = local_steps as f64;
    let n = clients as f64;
    let positive = |v: f64| if v.is_finite() && v > 0.0 { Some(v) } else { None };
    let bounds = EtaBounds {
        drift: 1.0 / (k_drift * big_gamma * i),
        noise: if pc.sigma > 0.0 {
            positive(pc.epsilon / (k_noise * big_gamma * i * pc.sigma))
        } else {
            None
        },
        speedup: if pc.sigma > 0.0 {
            positive(n * pc.epsilon * pc.epsilon / (k_speedup * a * pc.l0 * pc.sigma * pc.sigma))
        } else {
            None
        },
    };
    let eta = bounds.min();
    let gamma = gamma_over_eta * eta;
    let r_min = (4.0 * pc.delta / (pc.epsilon * pc.epsilon * eta * i)).ceil();
    Ok(TheoremHyperParams {
        eta,
        gamma,
        gamma_over_eta,
        big_gamma,
        r_min: if r_min >= u64::MAX as f64 { u64::MAX } else { r_min as u64 },
        bounds,
        a,
        b,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn example() -> ProblemConstants {
        ProblemConstants {
            l0: 1.0,
            l1: 1.0,
            kappa: 1.0,
            rho: 2.0,
            sigma: 1.0,
            delta: 1.0,
            epsilon: 0.1,
            c: 1.0,
        }
    }

    #[test]
    fn ab_at_one_and_two() {
        let (a, b) = smoothness_constants_ab(1.0).unwrap();
        assert!((a - 2.0).abs() < 1e-15);
        assert!((b - (E - 1.0)).abs() < 1e-15);
        let (a, b) = smoothness_constants_ab(2.0).unwrap();
        assert!((a - 5.194528049465325).abs() < 1e-12);
        assert!((b - 3.194528049465325).abs() < 1e-12);
        assert!(smoothness_constants_ab(0.99).is_err());
    }

    #[test]
    fn ab_at_least_one() {
        for k in 0..200 {
            let (a, b) = smoothness_constants_ab(1.0 + k as f64 * 0.1).unwrap();
            assert!(a >= 1.0 && b >= 1.0);
        }
    }

    #[test]
    fn worked_example_by_substitution() {
        // Independent substitution: A = 2, B = e - 1.
        let b = E - 1.0;
        let ratio = 11.0 + 2.0 / (2.0 * b);
        let big_gamma = 2.0 + b + b * 2.0 * (1.0 + ratio);
        for (constants, kd, kn, ks) in [
            (TheoremConstants::Main, 216.0, 180.0, 16.0),
            (TheoremConstants::Appendix, 856.0, 180.0, 8.0),
        ] {
            let hp = theorem1_hyperparams(&example(), 8, 8, constants).unwrap();
            let t1 = 1.0 / (kd * big_gamma * 8.0);
            let t2 = 0.1 / (kn * big_gamma * 8.0);
            let t3 = 8.0 * 0.01 / (ks * 2.0);
            let eta = t1.min(t2).min(t3);
            assert!((hp.gamma_over_eta - ratio).abs() < 1e-12);
            assert!((hp.gamma_over_eta - 11.582).abs() < 1e-3);
            assert!((hp.big_gamma - big_gamma).abs() < 1e-12);
            assert!((hp.big_gamma - 46.96).abs() < 1e-2);
            assert!((hp.eta - eta).abs() <= 1e-15 * eta);
            assert!((hp.gamma - ratio * eta).abs() <= 1e-12 * hp.gamma);
            assert_eq!(hp.r_min, (4.0 / (0.01 * eta * 8.0)).ceil() as u64);
        }
    }

    #[test]
    fn noiseless_drops_noise_terms() {
        let pc = ProblemConstants { sigma: 0.0, ..example() };
        let hp = theorem1_hyperparams(&pc, 8, 8, TheoremConstants::Main).unwrap();
        assert_eq!(hp.bounds.noise, None);
        assert_eq!(hp.eta, hp.bounds.drift);
    }

    #[test]
    fn more_clients_never_shrink_eta() {
        let pc = ProblemConstants { sigma: 5.0, epsilon: 0.05, ..example() };
        let mut prev = 0.0;
        for n in [1, 2, 4, 8, 16, 32, 64, 128] {
            let hp = theorem1_hyperparams(&pc, n, 4, TheoremConstants::Appendix).unwrap();
            assert!(hp.eta >= prev);
            prev = hp.eta;
        }
    }

    #[test]
    fn premise_of_drift_lemma_holds() {
        for constants in [TheoremConstants::Main, TheoremConstants::Appendix] {
            for i in [1, 4, 16] {
                let hp = theorem1_hyperparams(&example(), 4, i, constants).unwrap();
                assert!(2.0 * hp.eta * i as f64 * hp.big_gamma <= 1.0);
            }
        }
    }

    #[test]
    fn errors() {
        let pc = ProblemConstants { l1: 0.0, ..example() };
        assert!(matches!(
            theorem1_hyperparams(&pc, 2, 2, TheoremConstants::Main),
            Err(Error::Unsupported(_))
        ));
        let pc = ProblemConstants { epsilon: 0.5, ..example() };
        assert!(matches!(
            theorem1_hyperparams(&pc, 2, 2, TheoremConstants::Main),
            Err(Error::Config(_))
        ));
        let pc = ProblemConstants { rho: 0.5, ..example() };
        assert!(theorem1_hyperparams(&pc, 2, 2, TheoremConstants::Main).is_err());
    }
}
