//! Pairwise reproduction between an initiating agent and one neighbor.
//!
//! The initiator resamples its own value from the optimistic local benefit
//! of each candidate value: the cost against every other neighbor plus the
//! best achievable cost against the chosen partner. The partner then plays
//! its best response. Both add their local delta to the fitness.

use rand::Rng;

use crate::aed::selection::{power_normalize, Roulette};
use crate::model::{AgentId, DcopInstance, Individual};
use crate::scalar::{Cost, Real};

/// Optimistic local cost of every candidate value of `agent` when paired with `partner`.
pub fn optimistic_costs<C: Cost>(
    instance: &DcopInstance<C>,
    agent: AgentId,
    partner: AgentId,
    ind: &Individual<C>,
) -> Vec<C> {
    let size = instance.domain_size(agent);
    let mut costs = vec![C::zero(); size];
    for (k, inc) in instance.incidences(agent).iter().enumerate() {
        if inc.neighbor == partner {
            for (d, o) in costs.iter_mut().enumerate() {
                *o = *o + instance.best_incident_cost(agent, k, d);
            }
        } else {
            let col = instance.incident_column(agent, inc, ind.assignment.value_unchecked(inc.neighbor));
            for (o, &c) in costs.iter_mut().zip(col) {
                *o = *o + c;
            }
        }
    }
    costs
}

/// Linear weights in `(0, o_max]`, best candidate highest.
pub fn value_weights<C: Cost, F: Real>(costs: &[C], o_max: F) -> Vec<F> {
    let best = *costs.iter().min().expect("non-empty");
    let worst = *costs.iter().max().expect("non-empty");
    let denom: F = ((worst - best).abs() + C::one()).to_real();
    costs
        .iter()
        .map(|&o| {
            let num: F = ((worst - o).abs() + C::one()).to_real();
            o_max * num / denom
        })
        .collect()
}

/// Sampling distribution over `agent`'s domain.
pub fn value_distribution<C: Cost, F: Real>(
    instance: &DcopInstance<C>,
    agent: AgentId,
    partner: AgentId,
    ind: &Individual<C>,
    beta: F,
    o_max: F,
) -> Vec<F> {
    let costs = optimistic_costs(instance, agent, partner, ind);
    power_normalize(&value_weights(&costs, o_max), beta)
}

/// Initiator side: resample `agent`'s value and add the exact local delta.
pub fn reproduce_initiator<C: Cost, F: Real, R: Rng + ?Sized>(
    instance: &DcopInstance<C>,
    agent: AgentId,
    partner: AgentId,
    mut ind: Individual<C>,
    beta: F,
    o_max: F,
    rng: &mut R,
) -> Individual<C> {
    if instance.domain_size(agent) == 1 {
        return ind;
    }
    let probs = value_distribution(instance, agent, partner, &ind, beta, o_max);
    let new = Roulette::new(&probs).draw(rng);
    apply_move(instance, agent, &mut ind, new);
    ind
}

/// Partner side: best response for `agent` (smallest value index on ties).
pub fn reproduce_partner<C: Cost>(instance: &DcopInstance<C>, agent: AgentId, mut ind: Individual<C>) -> Individual<C> {
    let old = ind.assignment.value_unchecked(agent);
    let mut costs = Vec::new();
    instance.local_costs_all(agent, &ind.assignment, &mut costs);
    let best = argmin(&costs);
    if best != old {
        ind.assignment.set(agent, best);
        ind.fitness = ind.fitness + costs[best] - costs[old];
    }
    ind
}

fn argmin<C: Cost>(costs: &[C]) -> usize {
    let mut best = 0;
    for (d, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = d;
        }
    }
    best
}

fn apply_move<C: Cost>(instance: &DcopInstance<C>, agent: AgentId, ind: &mut Individual<C>, new: usize) {
    let old = ind.assignment.value_unchecked(agent);
    if old == new {
        return;
    }
    let delta = instance.incidences(agent).iter().fold(C::zero(), |acc, inc| {
        let other = ind.assignment.value_unchecked(inc.neighbor);
        acc + instance.incident_cost(inc, new, other) - instance.incident_cost(inc, old, other)
    });
    ind.assignment.set(agent, new);
    ind.fitness = ind.fitness + delta;
}
