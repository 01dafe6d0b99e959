//! The client loss interface and a finite-difference gradient oracle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::vector::ParameterVector;

/// A client's loss `f_i` with its exact gradient.
pub trait Objective: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: &ParameterVector) -> Result<f64>;

    fn gradient(&self, x: &ParameterVector) -> Result<ParameterVector>;

    fn check_input(&self, x: &ParameterVector) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.dim(),
            });
        }
        Ok(())
    }
}

pub type SharedObjective = Arc<dyn Objective>;

pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central differences `(f(x + h e_j) - f(x - h e_j)) / 2h` per coordinate.
pub fn finite_diff_gradient(obj: &dyn Objective, x: &ParameterVector, h: f64) -> Result<ParameterVector> {
    obj.check_input(x)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::config(format!("finite-difference step must be > 0, got {h}")));
    }
    let base = x.as_slice();
    let mut grad = Vec::with_capacity(base.len());
    for j in 0..base.len() {
        let mut plus = base.to_vec();
        let mut minus = base.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = obj.value(&ParameterVector::new(plus)?)?;
        let fm = obj.value(&ParameterVector::new(minus)?)?;
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFinite("finite-difference evaluation"));
        }
        grad.push((fp - fm) / (2.0 * h));
    }
    ParameterVector::new(grad)
}

/// `‖a - b‖ / max(‖a‖, ‖b‖, 1)`: relative error with an absolute floor near zero.
pub fn relative_error(a: &ParameterVector, b: &ParameterVector) -> Result<f64> {
    let scale = a.norm().max(b.norm()).max(1.0);
    Ok(a.distance(b)? / scale)
}

/// The averaged objective `f = (1/N) Σ f_i`, evaluated in ascending client order.
pub fn global_value(objectives: &[SharedObjective], x: &ParameterVector) -> Result<f64> {
    if objectives.is_empty() {
        return Err(Error::Empty("no client objectives".into()));
    }
    let mut total = 0.0;
    for obj in objectives {
        total += obj.value(x)?;
    }
    let v = total / objectives.len() as f64;
    if !v.is_finite() {
        return Err(Error::NonFinite("global loss"));
    }
    Ok(v)
}

pub fn global_gradient(objectives: &[SharedObjective], x: &ParameterVector) -> Result<ParameterVector> {
    if objectives.is_empty() {
        return Err(Error::Empty("no client objectives".into()));
    }
    let grads = objectives
        .iter()
        .map(|o| o.gradient(x))
        .collect::<Result<Vec<_>>>()?;
    ParameterVector::mean(&grads)
}

/// Checks that every objective shares one dimension and returns it.
pub fn common_dim(objectives: &[SharedObjective]) -> Result<usize> {
    let first = objectives
        .first()
        .ok_or_else(|| Error::Empty("no client objectives".into()))?;
    let dim = first.dim();
    for o in objectives {
        if o.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: o.dim(),
            });
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Constant;

    impl Objective for Constant {
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, x: &ParameterVector) -> Result<f64> {
            self.check_input(x)?;
            Ok(4.25)
        }
        fn gradient(&self, x: &ParameterVector) -> Result<ParameterVector> {
            self.check_input(x)?;
            Ok(ParameterVector::zeros(3))
        }
    }

    #[derive(Debug)]
    struct Exploding;

    impl Objective for Exploding {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &ParameterVector) -> Result<f64> {
            Ok(if x.as_slice()[0] > 0.0 { f64::INFINITY } else { 0.0 })
        }
        fn gradient(&self, _x: &ParameterVector) -> Result<ParameterVector> {
            Ok(ParameterVector::zeros(1))
        }
    }

    #[test]
    fn constant_objective_has_zero_fd_gradient() {
        let x = ParameterVector::new(vec![0.3, -2.0, 9.0]).unwrap();
        let g = finite_diff_gradient(&Constant, &x, DEFAULT_FD_STEP).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let x = ParameterVector::scalar(0.0).unwrap();
        assert_eq!(
            finite_diff_gradient(&Exploding, &x, 1e-5),
            Err(Error::NonFinite("finite-difference evaluation"))
        );
    }

    #[test]
    fn bad_step_and_dimension() {
        let x = ParameterVector::zeros(3);
        assert!(matches!(finite_diff_gradient(&Constant, &x, 0.0), Err(Error::Config(_))));
        let y = ParameterVector::zeros(2);
        assert!(matches!(
            finite_diff_gradient(&Constant, &y, 1e-5),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
