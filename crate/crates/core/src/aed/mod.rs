//! The anytime evolutionary DCOP algorithm.
//!
//! Every agent keeps a local population of complete individuals. Each
//! iteration, agents select individuals by rank, reproduce them together
//! with a neighbor, report new bests up the pseudo-tree, trim their
//! population back to size and periodically migrate individuals to their
//! neighbors. Variable assignments are only ever taken from a global-best
//! version that every agent is guaranteed to hold, which makes the joint
//! cost non-increasing.

mod engine;
mod gb_store;
mod init;
mod params;
pub mod reproduction;
pub mod selection;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AgentId, Fitness, Individual, ModelError};
use crate::pseudo_tree::TreeError;
use crate::scalar::Cost;
use crate::sim_net::{NetError, Payload};

pub use engine::{anytime_update_round, AedEngine, AgentReport, IterationReport};
pub use gb_store::GbStore;
pub use init::{init_phase, init_phase_with_draws, InitOutcome};
pub use params::{AedParams, AlphaStage};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AedError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("cannot sample {requested} individuals without replacement from {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("protocol violation at agent {agent}: {detail}")]
    Protocol { agent: AgentId, detail: String },
    #[error("initialization stalled waiting on agent {agent}")]
    InitDeadlock { agent: AgentId },
    #[error("expected iteration {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Version-stamped global best travelling down the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateRecord<C> {
    pub version: u64,
    pub individual: Individual<C>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message<C> {
    Population(Vec<Individual<C>>),
    Found(Individual<C>),
    Update(UpdateRecord<C>),
}

fn individual_bytes<C>(ind: &Individual<C>) -> usize {
    ind.assignment.len() * std::mem::size_of::<u32>() + std::mem::size_of::<C>()
}

impl<C> Payload for Message<C> {
    fn size_bytes(&self) -> usize {
        match self {
            Message::Population(v) => v.iter().map(individual_bytes).sum(),
            Message::Found(i) => individual_bytes(i),
            Message::Update(u) => individual_bytes(&u.individual) + std::mem::size_of::<u64>(),
        }
    }
}

/// Independent per-agent stream derived from the run seed.
pub fn agent_rng(seed: u64, agent: AgentId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(agent as u64);
    rng
}

/// Everything one agent owns.
#[derive(Debug, Clone)]
pub struct AgentState<C> {
    pub(crate) id: AgentId,
    pub(crate) value: usize,
    pub(crate) population: Vec<Individual<C>>,
    pub(crate) lb: Option<Individual<C>>,
    pub(crate) gb: GbStore<C>,
    pub(crate) found: Option<Individual<C>>,
    pub(crate) update: Option<UpdateRecord<C>>,
    pub(crate) itr: u64,
    pub(crate) itr_m: u64,
    pub(crate) rng: ChaCha8Rng,
}

impl<C: Cost> AgentState<C> {
    pub(crate) fn new(id: AgentId, rng: ChaCha8Rng) -> Self {
        AgentState {
            id,
            value: 0,
            population: Vec::new(),
            lb: None,
            gb: GbStore::new(),
            found: None,
            update: None,
            itr: 0,
            itr_m: 0,
            rng,
        }
    }

    pub fn id(&self) -> AgentId {
        self.id
    }

    /// Current value of the agent's variable.
    pub fn value(&self) -> usize {
        self.value
    }

    pub fn population(&self) -> &[Individual<C>] {
        &self.population
    }

    pub fn local_best(&self) -> Option<&Individual<C>> {
        self.lb.as_ref()
    }

    pub fn local_best_fitness(&self) -> Fitness<C> {
        Fitness::of(self.lb.as_ref())
    }

    pub fn global_best(&self) -> &GbStore<C> {
        &self.gb
    }

    pub fn iteration(&self) -> u64 {
        self.itr
    }

    pub fn last_migration(&self) -> u64 {
        self.itr_m
    }

    /// Pending Found record, if any.
    pub fn found_message(&self) -> Option<&Individual<C>> {
        self.found.as_ref()
    }

    /// Pending Update record, if any.
    pub fn update_message(&self) -> Option<&UpdateRecord<C>> {
        self.update.as_ref()
    }
}
