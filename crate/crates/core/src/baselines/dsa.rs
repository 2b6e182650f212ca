//! DSA variant C: move to the best alternative value with probability `p`
//! whenever it does not worsen the local cost.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::aed::agent_rng;
use crate::baselines::BaselineError;
use crate::model::{AgentId, Assignment, DcopInstance};
use crate::scalar::Cost;
use crate::sim_net::{Envelope, Network, Payload, Slot, StepOutcome, SyncProtocol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsaParams {
    /// Activation probability.
    pub p: f64,
}

impl Default for DsaParams {
    fn default() -> Self {
        DsaParams { p: 0.8 }
    }
}

impl DsaParams {
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.p > 0.0 && self.p <= 1.0 {
            Ok(())
        } else {
            Err(BaselineError::BadProbability(self.p))
        }
    }
}

/// New value for `agent` given its neighbors' values in `view`.
///
/// The candidate is the cheapest value other than the current one (smallest
/// index on ties); it is adopted with probability `p` if its local cost is
/// no higher than the current value's.
pub fn dsa_step<C: Cost, R: Rng + ?Sized>(
    instance: &DcopInstance<C>,
    view: &Assignment,
    agent: AgentId,
    p: f64,
    rng: &mut R,
) -> usize {
    let current = view.value_unchecked(agent);
    let current_cost = instance.local_cost_with(agent, current, view);
    let candidate = (0..instance.domain_size(agent))
        .filter(|&d| d != current)
        .map(|d| (instance.local_cost_with(agent, d, view), d))
        .min();
    match candidate {
        Some((cost, d)) if cost <= current_cost && rng.gen::<f64>() < p => d,
        _ => current,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValueMsg(pub usize);

impl Payload for ValueMsg {
    fn size_bytes(&self) -> usize {
        std::mem::size_of::<u32>()
    }
}

/// Synchronous DSA-C run recording the best joint cost seen so far.
pub struct DsaRun<C> {
    instance: Arc<DcopInstance<C>>,
    params: DsaParams,
    values: Vec<usize>,
    rngs: Vec<ChaCha8Rng>,
    net: Network<ValueMsg>,
    best: C,
}

impl<C: Cost> DsaRun<C> {
    pub fn new(instance: Arc<DcopInstance<C>>, params: DsaParams, seed: u64) -> Result<Self, BaselineError> {
        params.validate()?;
        let n = instance.agent_count();
        let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| agent_rng(seed, i)).collect();
        let values: Vec<usize> = (0..n).map(|i| rngs[i].gen_range(0..instance.domain_size(i))).collect();
        let best = instance.evaluate_fitness(&Assignment::from_values(&values))?;
        let net = Network::new(instance.neighbor_sets().to_vec());
        Ok(DsaRun { instance, params, values, rngs, net, best })
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn current_cost(&self) -> C {
        self.instance
            .evaluate_fitness(&Assignment::from_values(&self.values))
            .expect("complete assignment")
    }

    pub fn best_cost(&self) -> C {
        self.best
    }
}

impl<C: Cost> SyncProtocol for DsaRun<C> {
    type Cost = C;
    type Error = BaselineError;

    fn initial_cost(&self) -> C {
        self.best
    }

    fn step(&mut self, iteration: u64) -> Result<StepOutcome<C>, BaselineError> {
        let n = self.instance.agent_count();
        self.net.begin_iteration(iteration);
        for i in 0..n {
            for &j in self.instance.neighbors(i) {
                self.net.post(Envelope::new(i, j, iteration, Slot::ValueExchange, ValueMsg(self.values[i])))?;
            }
        }
        let inbox = self.net.deliver(Slot::ValueExchange);
        let mut view = Assignment::empty(n);
        let mut next = self.values.clone();
        for (i, msgs) in inbox.into_iter().enumerate() {
            for env in &msgs {
                view.set(env.src, env.payload.0);
            }
            view.set(i, self.values[i]);
            next[i] = dsa_step(&self.instance, &view, i, self.params.p, &mut self.rngs[i]);
        }
        self.values = next;
        let cost = self.current_cost();
        if cost < self.best {
            self.best = cost;
        }
        Ok(StepOutcome { cost: self.best, messages: self.net.stats().total_sent() })
    }
}
