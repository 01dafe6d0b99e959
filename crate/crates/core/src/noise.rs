//! Bounded, zero-mean gradient noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    None,
    /// Per-coordinate uniform on [-sigma, sigma], radially rescaled onto the
    /// sigma-ball when the draw lands outside it.
    #[default]
    UniformBall,
    /// Per-coordinate uniform on [-sigma/sqrt(d), sigma/sqrt(d)]. In one
    /// dimension this is uniform on [-sigma, sigma].
    UniformPerCoordinate,
}

/// Noise added to exact gradients. Every draw `n` satisfies `‖n‖ <= sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModel {
    pub sigma: f64,
    #[serde(default)]
    pub kind: NoiseKind,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::none()
    }
}

impl NoiseModel {
    pub fn new(sigma: f64, kind: NoiseKind) -> Result<Self> {
        let model = Self { sigma, kind };
        model.validate()?;
        Ok(model)
    }

    pub fn none() -> Self {
        Self {
            sigma: 0.0,
            kind: NoiseKind::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::config(format!(
                "noise sigma must be finite and >= 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// Effective almost-sure bound: zero when the model never perturbs.
    pub fn bound(&self) -> f64 {
        if self.is_silent() {
            0.0
        } else {
            self.sigma
        }
    }

    pub fn is_silent(&self) -> bool {
        self.sigma == 0.0 || self.kind == NoiseKind::None
    }

    /// Draws one noise vector, or `None` when the model never perturbs.
    pub fn draw<R: Rng + ?Sized>(&self, dim: usize, rng: &mut R) -> Option<Vec<f64>> {
        if self.is_silent() {
            return None;
        }
        let sigma = self.sigma;
        let noise = match self.kind {
            NoiseKind::None => unreachable!(),
            NoiseKind::UniformPerCoordinate => {
                let half_width = sigma / (dim as f64).sqrt();
                let mut v: Vec<f64> = (0..dim)
                    .map(|_| rng.random_range(-half_width..=half_width))
                    .collect();
                clamp_to_ball(&mut v, sigma);
                v
            }
            NoiseKind::UniformBall => {
                let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-sigma..=sigma)).collect();
                clamp_to_ball(&mut v, sigma);
                v
            }
        };
        Some(noise)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

// Radial rescale; the loop absorbs the last-ulp rounding of the division.
fn clamp_to_ball(v: &mut [f64], radius: f64) {
    let n = norm(v);
    if n <= radius {
        return;
    }
    let factor = radius / n;
    v.iter_mut().for_each(|c| *c *= factor);
    while norm(v) > radius {
        v.iter_mut().for_each(|c| *c *= 1.0 - f64::EPSILON);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Purpose, RngStream};

    #[test]
    fn silent_models_draw_nothing() {
        let mut rng = RngStream::keyed(1, Purpose::Local, 0, 0, 0).rng();
        assert!(NoiseModel::none().draw(3, &mut rng).is_none());
        let zero = NoiseModel::new(0.0, NoiseKind::UniformBall).unwrap();
        assert!(zero.draw(3, &mut rng).is_none());
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(NoiseModel::new(-1.0, NoiseKind::UniformBall).is_err());
        assert!(NoiseModel::new(f64::NAN, NoiseKind::UniformBall).is_err());
    }

    #[test]
    fn one_dimensional_per_coordinate_covers_the_interval() {
        let model = NoiseModel::new(1.0, NoiseKind::UniformPerCoordinate).unwrap();
        let mut rng = RngStream::keyed(3, Purpose::Local, 0, 0, 0).rng();
        let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
        for _ in 0..20_000 {
            let v = model.draw(1, &mut rng).unwrap()[0];
            assert!((-1.0..=1.0).contains(&v));
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert!(lo < -0.999 && hi > 0.999);
    }

    #[test]
    fn clamp_is_hard() {
        let mut v = vec![3.0, 4.0, 12.0];
        clamp_to_ball(&mut v, 0.1);
        assert!(norm(&v) <= 0.1);
    }
}
