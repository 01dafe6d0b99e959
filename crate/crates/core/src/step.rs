//! The clipped-update primitive shared by every algorithm.

use crate::error::{Error, Result};
use crate::vector::ParameterVector;

/// Clipping decision at threshold `gamma / eta`.
///
/// Equality counts as non-clipped: a norm exactly at the threshold takes
/// the plain gradient step.
pub fn exceeds_threshold(norm: f64, eta: f64, gamma: f64) -> bool {
    norm > gamma / eta
}

/// One local update.
///
/// With `clip == false` returns `x - eta * g`. With `clip == true` returns
/// `x - gamma * g / ‖g‖`, a move of exactly `gamma`; a zero `g` leaves `x`
/// unchanged.
pub fn clip_step(
    x: &ParameterVector,
    g: &ParameterVector,
    eta: f64,
    gamma: f64,
    clip: bool,
) -> Result<ParameterVector> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::config(format!("eta must be > 0, got {eta}")));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::config(format!("gamma must be > 0, got {gamma}")));
    }
    x.check_dim(g)?;
    if !clip {
        return x.zip_map(g, |xi, gi| xi - eta * gi);
    }
    let norm = g.norm();
    if !norm.is_finite() {
        return Err(Error::NonFinite("gradient norm"));
    }
    if norm == 0.0 {
        return Ok(x.clone());
    }
    x.zip_map(g, |xi, gi| xi - gamma * (gi / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: f64) -> ParameterVector {
        ParameterVector::scalar(x).unwrap()
    }

    #[test]
    fn zero_gradient_in_clipped_branch_is_identity() {
        let x = ParameterVector::zeros(1);
        let g = ParameterVector::zeros(1);
        assert_eq!(clip_step(&x, &g, 1.0, 1.0, true).unwrap(), x);
    }

    #[test]
    fn counterexample_clients_land_at_plus_minus_gamma() {
        assert_eq!(clip_step(&s(0.0), &s(-3.0), 1.0, 2.0, true).unwrap(), s(2.0));
        assert_eq!(clip_step(&s(0.0), &s(4.0), 1.0, 2.0, true).unwrap(), s(-2.0));
    }

    #[test]
    fn plain_step() {
        assert_eq!(clip_step(&s(1.0), &s(0.5), 0.1, 1.0, false).unwrap(), s(0.95));
    }

    #[test]
    fn tie_is_not_clipped() {
        assert!(!exceeds_threshold(2.0, 1.0, 2.0));
        assert!(exceeds_threshold(2.0 + 1e-12, 1.0, 2.0));
    }

    #[test]
    fn errors() {
        let x = ParameterVector::zeros(2);
        let g = ParameterVector::zeros(3);
        assert!(matches!(
            clip_step(&x, &g, 1.0, 1.0, false),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(clip_step(&x, &x, 0.0, 1.0, false), Err(Error::Config(_))));
        assert!(matches!(clip_step(&x, &x, 1.0, -1.0, true), Err(Error::Config(_))));
        let big = ParameterVector::new(vec![f64::MAX, f64::MAX]).unwrap();
        assert!(matches!(clip_step(&x, &big, 10.0, 1.0, false), Err(Error::NonFinite(_))));
        assert!(matches!(clip_step(&x, &big, 1.0, 1.0, true), Err(Error::NonFinite(_))));
    }

    fn vec_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..6).prop_flat_map(|d| {
            (
                prop::collection::vec(-100.0..100.0f64, d),
                prop::collection::vec(-100.0..100.0f64, d),
            )
        })
    }

    proptest! {
        #[test]
        fn clipped_step_moves_exactly_gamma(
            (x, g) in vec_strategy(),
            eta in 1e-4..10.0f64,
            gamma in 1e-4..10.0f64,
        ) {
            let x = ParameterVector::new(x).unwrap();
            let g = ParameterVector::new(g).unwrap();
            let y = clip_step(&x, &g, eta, gamma, true).unwrap();
            let moved = y.distance(&x).unwrap();
            if g.is_zero() {
                prop_assert_eq!(moved, 0.0);
            } else {
                prop_assert!((moved - gamma).abs() <= 1e-9 * gamma.max(x.norm()));
            }
        }

        #[test]
        fn plain_step_moves_eta_times_norm(
            (x, g) in vec_strategy(),
            eta in 1e-4..10.0f64,
        ) {
            let x = ParameterVector::new(x).unwrap();
            let g = ParameterVector::new(g).unwrap();
            let y = clip_step(&x, &g, eta, 1.0, false).unwrap();
            let moved = y.distance(&x).unwrap();
            let expected = eta * g.norm();
            prop_assert!((moved - expected).abs() <= 1e-9 * expected.max(x.norm()).max(1.0));
        }
    }
}
