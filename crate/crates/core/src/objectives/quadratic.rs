//! Two-client quadratic on which per-client clipping stalls:
//! `f_i(x) = x^2 / 2 + a_i x` with `a_1 = -gamma - 1`, `a_2 = gamma + 2`.
//! The averaged objective is minimized at `x = -1/2`.

use std::sync::Arc;

use super::{check_pair_clients, scalar_input, PairMember};
use crate::error::{Error, Result};
use crate::objective::{Objective, SharedObjective};
use crate::vector::ParameterVector;

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 1.0) {
        return Err(Error::config(format!(
            "quadratic counterexample requires gamma > 1, got {gamma}"
        )));
    }
    Ok(())
}

fn linear_coefficient(gamma: f64, member: PairMember) -> f64 {
    match member {
        PairMember::First => -gamma - 1.0,
        PairMember::Second => gamma + 2.0,
    }
}

pub fn quadratic_eval(gamma: f64, member: PairMember, x: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if !x.is_finite() {
        return Err(Error::NonFinite("quadratic input"));
    }
    let a = linear_coefficient(gamma, member);
    let value = 0.5 * x * x + a * x;
    let grad = x + a;
    if !(value.is_finite() && grad.is_finite()) {
        return Err(Error::NonFinite("quadratic evaluation"));
    }
    Ok((value, grad))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticClient {
    gamma: f64,
    member: PairMember,
}

impl QuadraticClient {
    pub fn new(gamma: f64, member: PairMember) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { gamma, member })
    }

    pub fn linear_coefficient(&self) -> f64 {
        linear_coefficient(self.gamma, self.member)
    }
}

impl Objective for QuadraticClient {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &ParameterVector) -> Result<f64> {
        Ok(quadratic_eval(self.gamma, self.member, scalar_input(x)?)?.0)
    }

    fn gradient(&self, x: &ParameterVector) -> Result<ParameterVector> {
        ParameterVector::scalar(quadratic_eval(self.gamma, self.member, scalar_input(x)?)?.1)
    }
}

pub fn counterexample_clients(gamma: f64, clients: usize) -> Result<Vec<SharedObjective>> {
    check_pair_clients(clients)?;
    (0..clients)
        .map(|i| Ok(Arc::new(QuadraticClient::new(gamma, PairMember::for_index(i))?) as SharedObjective))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::global_gradient;

    #[test]
    fn gradients_at_origin() {
        assert_eq!(quadratic_eval(2.0, PairMember::First, 0.0).unwrap(), (0.0, -3.0));
        assert_eq!(quadratic_eval(2.0, PairMember::Second, 0.0).unwrap(), (0.0, 4.0));
    }

    #[test]
    fn gamma_must_exceed_one() {
        assert!(matches!(quadratic_eval(1.0, PairMember::First, 0.0), Err(Error::Config(_))));
        assert!(QuadraticClient::new(0.5, PairMember::Second).is_err());
    }

    #[test]
    fn global_minimizer_is_minus_half() {
        for gamma in [1.5, 2.0, 7.0, 100.0] {
            let objs = counterexample_clients(gamma, 2).unwrap();
            let g = global_gradient(&objs, &ParameterVector::scalar(-0.5).unwrap()).unwrap();
            assert_eq!(g.as_slice(), &[0.0]);
        }
    }

    #[test]
    fn client_gradients_exceed_gamma_at_origin() {
        for gamma in [1.5, 2.0, 3.0, 10.0] {
            let (_, g1) = quadratic_eval(gamma, PairMember::First, 0.0).unwrap();
            let (_, g2) = quadratic_eval(gamma, PairMember::Second, 0.0).unwrap();
            assert_eq!(g1, -(gamma + 1.0));
            assert_eq!(g2, gamma + 2.0);
            assert!(g1.abs() > gamma && g2.abs() > gamma);
            assert_eq!((g1 + g2) / 2.0, 0.5);
        }
    }
}
