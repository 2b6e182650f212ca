//! Deterministic synchronous message substrate.
//!
//! Agents post envelopes during a send slot; the driver then calls
//! [`Network::deliver`] for that slot, which acts as the barrier: every
//! envelope posted for the slot becomes visible to its recipient, sorted by
//! `(src, seq)`.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::model::AgentId;
use crate::scalar::Cost;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    InitNeighborExchange,
    InitUpTree,
    InitDownTree,
    ReproductionRequest,
    ReproductionReply,
    Found,
    Update,
    Migration,
    /// Plain value broadcast used by local-search baselines.
    ValueExchange,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Slot::InitNeighborExchange => "init-neighbor-exchange",
            Slot::InitUpTree => "init-up-tree",
            Slot::InitDownTree => "init-down-tree",
            Slot::ReproductionRequest => "reproduction-request",
            Slot::ReproductionReply => "reproduction-reply",
            Slot::Found => "found",
            Slot::Update => "update",
            Slot::Migration => "migration",
            Slot::ValueExchange => "value-exchange",
        };
        f.write_str(s)
    }
}

/// Message contents know their approximate wire size.
pub trait Payload {
    fn size_bytes(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<P> {
    pub src: AgentId,
    pub dst: AgentId,
    pub iteration: u64,
    pub slot: Slot,
    pub seq: u64,
    pub payload: P,
}

impl<P> Envelope<P> {
    pub fn new(src: AgentId, dst: AgentId, iteration: u64, slot: Slot, payload: P) -> Self {
        Envelope { src, dst, iteration, slot, seq: 0, payload }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("agent {src} may not send to {dst}: not a neighbor")]
    IllegalRecipient { src: AgentId, dst: AgentId },
    #[error("agent {0} does not exist")]
    UnknownAgent(AgentId),
    #[error("envelope stamped for iteration {got} posted during iteration {current}")]
    WrongIteration { got: u64, current: u64 },
    #[error("agent {agent} sent {sent} messages in iteration {iteration}, budget is {budget}")]
    BudgetExceeded { agent: AgentId, iteration: u64, sent: usize, budget: usize },
}

/// Per-agent counters for the current iteration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageStats {
    sent: Vec<usize>,
    bytes: Vec<usize>,
}

impl MessageStats {
    fn new(agents: usize) -> Self {
        MessageStats { sent: vec![0; agents], bytes: vec![0; agents] }
    }

    fn reset(&mut self) {
        self.sent.iter_mut().for_each(|c| *c = 0);
        self.bytes.iter_mut().for_each(|c| *c = 0);
    }

    pub fn sent(&self, agent: AgentId) -> usize {
        self.sent[agent]
    }

    pub fn bytes(&self, agent: AgentId) -> usize {
        self.bytes[agent]
    }

    pub fn total_sent(&self) -> usize {
        self.sent.iter().sum()
    }

    pub fn total_bytes(&self) -> usize {
        self.bytes.iter().sum()
    }

    /// Every agent sent at most `factor * |N_i|` envelopes.
    pub fn check_budget(&self, neighbors: &[Vec<AgentId>], factor: usize, iteration: u64) -> Result<(), NetError> {
        for (agent, n) in neighbors.iter().enumerate() {
            let budget = factor * n.len();
            if self.sent[agent] > budget {
                return Err(NetError::BudgetExceeded { agent, iteration, sent: self.sent[agent], budget });
            }
        }
        Ok(())
    }
}

pub struct Network<P> {
    neighbors: Vec<Vec<AgentId>>,
    iteration: u64,
    pending: Vec<Envelope<P>>,
    next_seq: Vec<u64>,
    stats: MessageStats,
    log: Option<Vec<String>>,
}

impl<P: Payload> Network<P> {
    /// `neighbors[i]` must be sorted; only those agents may receive from `i`.
    pub fn new(neighbors: Vec<Vec<AgentId>>) -> Self {
        let n = neighbors.len();
        Network {
            neighbors,
            iteration: 0,
            pending: Vec::new(),
            next_seq: vec![0; n],
            stats: MessageStats::new(n),
            log: None,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self) -> &[Vec<AgentId>] {
        &self.neighbors
    }

    /// Records `iter slot src dst payload_size` for every posted envelope.
    pub fn enable_trace_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn trace_log(&self) -> &[String] {
        self.log.as_deref().unwrap_or(&[])
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Starts a new iteration and zeroes the per-iteration counters.
    pub fn begin_iteration(&mut self, iteration: u64) {
        self.iteration = iteration;
        self.stats.reset();
        self.next_seq.iter_mut().for_each(|s| *s = 0);
    }

    pub fn stats(&self) -> &MessageStats {
        &self.stats
    }

    pub fn post(&mut self, mut env: Envelope<P>) -> Result<(), NetError> {
        let n = self.neighbors.len();
        if env.src >= n {
            return Err(NetError::UnknownAgent(env.src));
        }
        if env.dst >= n {
            return Err(NetError::UnknownAgent(env.dst));
        }
        if self.neighbors[env.src].binary_search(&env.dst).is_err() {
            return Err(NetError::IllegalRecipient { src: env.src, dst: env.dst });
        }
        if env.iteration != self.iteration {
            return Err(NetError::WrongIteration { got: env.iteration, current: self.iteration });
        }
        env.seq = self.next_seq[env.src];
        self.next_seq[env.src] += 1;
        let size = env.payload.size_bytes();
        self.stats.sent[env.src] += 1;
        self.stats.bytes[env.src] += size;
        if let Some(log) = &mut self.log {
            log.push(format!("{} {} {} {} {}", env.iteration, env.slot, env.src, env.dst, size));
        }
        self.pending.push(env);
        Ok(())
    }

    /// Barrier for `slot`: hands every pending envelope of that slot to its
    /// recipient. `inbox[i]` is sorted by `(src, seq)`.
    pub fn deliver(&mut self, slot: Slot) -> Vec<Vec<Envelope<P>>> {
        let mut inbox: Vec<Vec<Envelope<P>>> = (0..self.neighbors.len()).map(|_| Vec::new()).collect();
        let (ready, rest): (Vec<_>, Vec<_>) = std::mem::take(&mut self.pending).into_iter().partition(|e| e.slot == slot);
        self.pending = rest;
        for env in ready {
            inbox[env.dst].push(env);
        }
        for list in &mut inbox {
            list.sort_by_key(|e| (e.src, e.seq));
        }
        inbox
    }

    /// Envelopes posted but not yet delivered.
    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}

/// Stop after `max_iter` optimization iterations and/or once `max_time` has elapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StopCondition {
    pub max_iter: Option<u64>,
    pub max_time: Option<Duration>,
}

impl StopCondition {
    pub fn iterations(n: u64) -> Self {
        StopCondition { max_iter: Some(n), max_time: None }
    }

    pub fn time(budget: Duration) -> Self {
        StopCondition { max_iter: None, max_time: Some(budget) }
    }

    fn reached(&self, done: u64, elapsed: Duration) -> bool {
        self.max_iter.is_some_and(|m| done >= m) || self.max_time.is_some_and(|t| elapsed >= t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<C> {
    pub iteration: u64,
    pub cost: C,
    pub elapsed_ms: f64,
    pub messages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<C> {
    pub records: Vec<TraceRecord<C>>,
}

impl<C: Cost> RunTrace<C> {
    pub fn best_cost(&self) -> Option<C> {
        self.records.iter().map(|r| r.cost).min()
    }

    pub fn final_cost(&self) -> Option<C> {
        self.records.last().map(|r| r.cost)
    }

    /// Optimization iterations executed (record 0 is the initialization record).
    pub fn iterations(&self) -> u64 {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn wall_ms(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed_ms)
    }
}

/// What one synchronous iteration reports back to the driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepOutcome<C> {
    /// Cost reported for this iteration (the anytime cost of the algorithm).
    pub cost: C,
    pub messages: usize,
}

/// A multi-agent algorithm that advances in synchronous iterations.
pub trait SyncProtocol {
    type Cost: Cost;
    type Error: std::error::Error;

    /// Cost recorded before the first iteration.
    fn initial_cost(&self) -> Self::Cost;

    /// Runs iteration `iteration` (1-based) for every agent.
    fn step(&mut self, iteration: u64) -> Result<StepOutcome<Self::Cost>, Self::Error>;
}

#[derive(Debug, Error)]
#[error("run aborted at iteration {iteration}: {source}")]
pub struct RunError<E: std::error::Error + 'static> {
    pub iteration: u64,
    pub partial: Vec<String>,
    #[source]
    pub source: E,
}

/// Drives `protocol` until `stop` fires. The first record is the
/// initialization record at iteration 0.
pub fn run_synchronous<P>(protocol: &mut P, stop: StopCondition) -> Result<RunTrace<P::Cost>, RunError<P::Error>>
where
    P: SyncProtocol,
    P::Error: 'static,
{
    let start = Instant::now();
    let mut records = vec![TraceRecord {
        iteration: 0,
        cost: protocol.initial_cost(),
        elapsed_ms: 0.0,
        messages: 0,
    }];
    let mut done = 0u64;
    while !stop.reached(done, start.elapsed()) {
        let iteration = done + 1;
        match protocol.step(iteration) {
            Ok(out) => records.push(TraceRecord {
                iteration,
                cost: out.cost,
                elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
                messages: out.messages,
            }),
            Err(source) => {
                let partial = records.iter().map(|r| format!("{} {}", r.iteration, r.cost)).collect();
                return Err(RunError { iteration, partial, source });
            }
        }
        done = iteration;
    }
    Ok(RunTrace { records })
}
