//! Closed-form client objectives and the bounded-noise gradient oracle.

mod logistic;
mod quadratic;
mod quartic;
mod stochastic;

pub use logistic::{logistic_eval, LogisticClient, SyntheticClassification};
pub use quadratic::{counterexample_clients, quadratic_eval, QuadraticClient};
pub use quartic::{
    kappa_h, quartic_clients, quartic_curvature, quartic_eval, relaxed_smoothness_l0, QuarticClient,
};
pub use stochastic::sample_stochastic_gradient;

use crate::error::{Error, Result};

/// Which half of a two-client objective pair a client plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairMember {
    First,
    Second,
}

impl PairMember {
    /// Member for a 1-based client id in {1, 2}.
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(PairMember::First),
            2 => Ok(PairMember::Second),
            other => Err(Error::config(format!("pair client id must be 1 or 2, got {other}"))),
        }
    }

    /// Member for a 0-based client index when the pair is replicated over
    /// an even number of clients.
    pub fn for_index(index: usize) -> Self {
        if index.is_multiple_of(2) {
            PairMember::First
        } else {
            PairMember::Second
        }
    }
}

pub(crate) fn check_pair_clients(clients: usize) -> Result<()> {
    if clients == 0 || !clients.is_multiple_of(2) {
        return Err(Error::config(format!(
            "pair objectives need an even, positive client count, got {clients}"
        )));
    }
    Ok(())
}

pub(crate) fn scalar_input(x: &crate::vector::ParameterVector) -> Result<f64> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: x.dim(),
        });
    }
    Ok(x.as_slice()[0])
}
