//! Dense model state shared by every algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense, finite, non-empty vector of model coordinates.
///
/// Every constructor and arithmetic method validates its output, so a
/// `ParameterVector` never holds NaN or infinite coordinates. Arithmetic
/// returns new vectors and leaves its operands untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector {
    coords: Vec<f64>,
}

impl ParameterVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("parameter vector needs dim >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(Self { coords })
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    /// # Panics
    /// Panics if `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "parameter vector needs dim >= 1");
        Self { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(())
    }

    /// Applies `op` coordinate-wise over `self` and `other`.
    pub fn zip_map(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_dim(other)?;
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Self::new(coords)
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.coords.iter().map(|&c| op(c)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        self.map(|c| c * factor)
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Arithmetic mean, summing in slice order and dividing once by the count.
    ///
    /// Callers pass vectors in ascending client id, which fixes the
    /// floating-point summation order.
    pub fn mean(vectors: &[ParameterVector]) -> Result<Self> {
        let (first, rest) = vectors
            .split_first()
            .ok_or_else(|| Error::Empty("mean of zero vectors".into()))?;
        let mut acc = first.coords.clone();
        for v in rest {
            first.check_dim(v)?;
            for (a, b) in acc.iter_mut().zip(&v.coords) {
                *a += b;
            }
        }
        let n = vectors.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        Self::new(acc)
    }
}

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(v: ParameterVector) -> Self {
        v.coords
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(matches!(ParameterVector::new(vec![]), Err(Error::Empty(_))));
        assert!(matches!(
            ParameterVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            ParameterVector::scalar(f64::INFINITY),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn arithmetic_leaves_inputs_unchanged() {
        let a = ParameterVector::new(vec![1.0, 2.0]).unwrap();
        let b = ParameterVector::new(vec![0.5, -1.0]).unwrap();
        let c = a.sub(&b).unwrap();
        assert_eq!(c.as_slice(), &[0.5, 3.0]);
        assert_eq!(a.as_slice(), &[1.0, 2.0]);
        assert_eq!(b.as_slice(), &[0.5, -1.0]);
    }

    #[test]
    fn overflow_is_reported() {
        let a = ParameterVector::scalar(f64::MAX).unwrap();
        assert!(matches!(a.scale(10.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let a = ParameterVector::zeros(2);
        let b = ParameterVector::zeros(3);
        assert_eq!(
            a.add(&b),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn mean_of_single_vector_is_exact() {
        let v = ParameterVector::new(vec![0.1, -0.3, 7.0]).unwrap();
        assert_eq!(ParameterVector::mean(std::slice::from_ref(&v)).unwrap(), v);
    }

    #[test]
    fn mean_of_counterexample_controls() {
        let g1 = ParameterVector::scalar(-3.0).unwrap();
        let g2 = ParameterVector::scalar(4.0).unwrap();
        assert_eq!(ParameterVector::mean(&[g1, g2]).unwrap().as_slice(), &[0.5]);
    }
}
