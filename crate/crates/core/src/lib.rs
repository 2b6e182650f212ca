//! Anytime evolutionary optimization for distributed constraint
//! optimization problems, simulated over synchronous message rounds.
//!
//! The library is generic over the exact cost type ([`Cost`], any signed
//! primitive integer) and the floating type used for sampling weights
//! ([`Real`], `f32` or `f64`). The aliases below fix the common choice of
//! `i64` costs and `f64` weights.

pub mod aed;
pub mod baselines;
pub mod io;
pub mod model;
pub mod pseudo_tree;
pub mod scalar;
pub mod sim_net;

pub use model::{merge, merge_populations, AgentId, Assignment, Constraint, DcopInstance, Fitness, Individual, ModelError};
pub use pseudo_tree::{PseudoTree, RootRule, TreeError};
pub use scalar::{Cost, Real};
pub use sim_net::{run_synchronous, RunTrace, StopCondition, SyncProtocol, TraceRecord};

pub type Instance = DcopInstance<i64>;
pub type Ind = Individual<i64>;
pub type Params = aed::AedParams<f64>;
pub type Engine = aed::AedEngine<i64, f64>;
pub type Dsa = baselines::DsaRun<i64>;
pub type Trace = RunTrace<i64>;
