//! Reference algorithms: DSA-C local search and an exhaustive optimum.

mod dsa;
mod oracle;

use thiserror::Error;

use crate::model::ModelError;
use crate::sim_net::NetError;

pub use dsa::{dsa_step, DsaParams, DsaRun};
pub use oracle::{brute_force_optimum, brute_force_optimum_capped, DEFAULT_SEARCH_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("search space of {size} assignments exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },
    #[error("activation probability {0} is outside (0, 1]")]
    BadProbability(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Net(#[from] NetError),
}
