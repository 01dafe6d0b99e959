//! The one-dimensional quartic pair whose heterogeneity grows with `H`:
//!
//! ```text
//! f1(x) = x^4 - 3x^3 + H x^2 + x
//! f2(x) = x^4 - 3x^3 - 2H x^2 + x
//! ```
//!
//! Both are (L0, L1)-smooth without a global Lipschitz gradient.

use std::sync::Arc;

use super::{check_pair_clients, scalar_input, PairMember};
use crate::error::{Error, Result};
use crate::objective::{Objective, SharedObjective};
use crate::vector::ParameterVector;

fn check_h(h: f64) -> Result<()> {
    if !(h.is_finite() && h >= 1.0) {
        return Err(Error::config(format!("quartic heterogeneity H must be >= 1, got {h}")));
    }
    Ok(())
}

fn quadratic_coefficient(h: f64, member: PairMember) -> f64 {
    match member {
        PairMember::First => h,
        PairMember::Second => -2.0 * h,
    }
}

/// Value and derivative of one member of the pair at `x`.
pub fn quartic_eval(h: f64, member: PairMember, x: f64) -> Result<(f64, f64)> {
    check_h(h)?;
    if !x.is_finite() {
        return Err(Error::NonFinite("quartic input"));
    }
    let q = quadratic_coefficient(h, member);
    let x2 = x * x;
    let value = x2 * x2 - 3.0 * x2 * x + q * x2 + x;
    let grad = 4.0 * x2 * x - 9.0 * x2 + 2.0 * q * x + 1.0;
    if !(value.is_finite() && grad.is_finite()) {
        return Err(Error::NonFinite("quartic evaluation"));
    }
    Ok((value, grad))
}

/// Second derivative of one member of the pair.
pub fn quartic_curvature(h: f64, member: PairMember, x: f64) -> f64 {
    12.0 * x * x - 18.0 * x + 2.0 * quadratic_coefficient(h, member)
}

/// Closed-form heterogeneity constant `kappa(H)` for which
/// `|f_i'(x)| <= 2 |f'(x)| + kappa(H)` holds for every real `x`.
pub fn kappa_h(h: f64) -> Result<f64> {
    check_h(h)?;
    let root = (-18.0 + (18.0_f64 * 18.0 + 480.0 * h).sqrt()) / 24.0;
    Ok(9.0 * root * root + 10.0 * h * root + 25.0 * h * h / 3.0 + 45.0 * h + 100.0)
}

/// Smallest `L0` (padded by 5%) such that both members satisfy
/// `|f_i''(x)| <= L0 + l1 |f_i'(x)|` on a dense scan of [-100, 100].
///
/// Outside that range the cubic term of `|f_i'|` dominates the quadratic
/// growth of `|f_i''|` for any `l1 >= 0.1` and `H <= 1e3`.
pub fn relaxed_smoothness_l0(h: f64, l1: f64) -> Result<f64> {
    check_h(h)?;
    if !(l1.is_finite() && l1 >= 0.1) {
        return Err(Error::config(format!("l1 must be >= 0.1 for the scan, got {l1}")));
    }
    if h > 1e3 {
        return Err(Error::Unsupported(format!("smoothness scan validated for H <= 1e3, got {h}")));
    }
    let steps = 200_000;
    let mut worst = 0.0_f64;
    for k in 0..=steps {
        let x = -100.0 + 200.0 * k as f64 / steps as f64;
        for member in [PairMember::First, PairMember::Second] {
            let (_, g) = quartic_eval(h, member, x)?;
            let need = quartic_curvature(h, member, x).abs() - l1 * g.abs();
            worst = worst.max(need);
        }
    }
    Ok(1.05 * worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticClient {
    h: f64,
    member: PairMember,
}

impl QuarticClient {
    pub fn new(h: f64, member: PairMember) -> Result<Self> {
        check_h(h)?;
        Ok(Self { h, member })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn member(&self) -> PairMember {
        self.member
    }
}

impl Objective for QuarticClient {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &ParameterVector) -> Result<f64> {
        Ok(quartic_eval(self.h, self.member, scalar_input(x)?)?.0)
    }

    fn gradient(&self, x: &ParameterVector) -> Result<ParameterVector> {
        ParameterVector::scalar(quartic_eval(self.h, self.member, scalar_input(x)?)?.1)
    }
}

/// `clients` quartic objectives, alternating between the two members.
pub fn quartic_clients(h: f64, clients: usize) -> Result<Vec<SharedObjective>> {
    check_pair_clients(clients)?;
    (0..clients)
        .map(|i| Ok(Arc::new(QuarticClient::new(h, PairMember::for_index(i))?) as SharedObjective))
        .collect()
}
