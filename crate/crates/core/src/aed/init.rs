//! Distributed construction of the initial population.

use rand::Rng;

use crate::aed::{agent_rng, AedError, AedParams, AgentState, Message};
use crate::model::{merge_populations, AgentId, Assignment, DcopInstance, Individual};
use crate::pseudo_tree::PseudoTree;
use crate::scalar::{Cost, Real};
use crate::sim_net::{Envelope, Network, Slot};

#[derive(Debug, Clone)]
pub struct InitOutcome<C> {
    pub agents: Vec<AgentState<C>>,
    /// The root's population after the up-tree merge, before halving.
    pub root_pre_halving: Vec<Individual<C>>,
    pub messages: usize,
}

/// Builds IN complete individuals collaboratively and hands every agent a
/// copy of the root's population. Draws come from each agent's own stream.
pub fn init_phase<C: Cost, F: Real>(
    instance: &DcopInstance<C>,
    tree: &PseudoTree,
    params: &AedParams<F>,
    seed: u64,
) -> Result<InitOutcome<C>, AedError> {
    run_init(instance, tree, params, seed, None)
}

/// Same as [`init_phase`] with the population values forced:
/// `draws[agent][k]` is agent's value in individual `k`.
pub fn init_phase_with_draws<C: Cost, F: Real>(
    instance: &DcopInstance<C>,
    tree: &PseudoTree,
    params: &AedParams<F>,
    seed: u64,
    draws: &[Vec<usize>],
) -> Result<InitOutcome<C>, AedError> {
    run_init(instance, tree, params, seed, Some(draws))
}

fn run_init<C: Cost, F: Real>(
    instance: &DcopInstance<C>,
    tree: &PseudoTree,
    params: &AedParams<F>,
    seed: u64,
    draws: Option<&[Vec<usize>]>,
) -> Result<InitOutcome<C>, AedError> {
    params.validate()?;
    let n = instance.agent_count();
    let size = params.initial_population;
    let mut net: Network<Message<C>> = Network::new(instance.neighbor_sets().to_vec());
    net.begin_iteration(0);

    let mut agents: Vec<AgentState<C>> = (0..n).map(|i| AgentState::new(i, agent_rng(seed, i))).collect();
    for agent in &mut agents {
        let i = agent.id;
        let dom = instance.domain_size(i);
        agent.value = agent.rng.gen_range(0..dom);
        agent.population = (0..size)
            .map(|k| {
                let v = match draws {
                    Some(d) => d[i][k],
                    None => agent.rng.gen_range(0..dom),
                };
                let mut a = Assignment::empty(n);
                a.set(i, v);
                a.validate(instance)?;
                Ok(Individual::new(a, C::zero()))
            })
            .collect::<Result<_, AedError>>()?;
    }

    // neighbor exchange, then local costs
    for agent in &agents {
        for &j in instance.neighbors(agent.id) {
            net.post(Envelope::new(agent.id, j, 0, Slot::InitNeighborExchange, Message::Population(agent.population.clone())))?;
        }
    }
    let inbox = net.deliver(Slot::InitNeighborExchange);
    for (agent, msgs) in agents.iter_mut().zip(inbox) {
        for env in msgs {
            agent.population = merge_populations(&agent.population, &population_of(env, agent.id)?)?;
        }
        for ind in &mut agent.population {
            ind.fitness = instance.local_cost(agent.id, ind)?;
        }
    }

    // leaf-to-root merge; one tree level per round
    let mut missing: Vec<Vec<AgentId>> = (0..n).map(|i| tree.children(i).to_vec()).collect();
    let mut sent_up = vec![false; n];
    for _ in 0..=tree.height() {
        if missing[tree.root()].is_empty() {
            break;
        }
        for i in 0..n {
            if let Some(p) = tree.parent(i) {
                if missing[i].is_empty() && !sent_up[i] {
                    net.post(Envelope::new(i, p, 0, Slot::InitUpTree, Message::Population(agents[i].population.clone())))?;
                    sent_up[i] = true;
                }
            }
        }
        let inbox = net.deliver(Slot::InitUpTree);
        for (i, msgs) in inbox.into_iter().enumerate() {
            for env in msgs {
                let src = env.src;
                if !missing[i].contains(&src) {
                    return Err(AedError::Protocol { agent: i, detail: format!("unexpected subtree from {src}") });
                }
                missing[i].retain(|&c| c != src);
                agents[i].population = merge_populations(&agents[i].population, &population_of(env, i)?)?;
            }
        }
    }
    if !missing[tree.root()].is_empty() {
        let stuck = (0..n)
            .filter(|&i| !sent_up[i] && !tree.is_root(i))
            .max_by_key(|&i| tree.level(i))
            .unwrap_or(tree.root());
        return Err(AedError::InitDeadlock { agent: stuck });
    }

    // every constraint was counted by both endpoints
    let root = tree.root();
    let root_pre_halving = agents[root].population.clone();
    let two = C::one() + C::one();
    for ind in &mut agents[root].population {
        if ind.fitness % two != C::zero() {
            return Err(AedError::Protocol { agent: root, detail: format!("odd aggregate fitness {}", ind.fitness) });
        }
        ind.fitness = ind.fitness / two;
    }

    // root-to-leaf distribution
    let mut frontier = vec![root];
    let mut adopted = vec![false; n];
    adopted[root] = true;
    while !frontier.is_empty() {
        for &i in &frontier {
            for &c in tree.children(i) {
                net.post(Envelope::new(i, c, 0, Slot::InitDownTree, Message::Population(agents[i].population.clone())))?;
            }
        }
        let inbox = net.deliver(Slot::InitDownTree);
        frontier.clear();
        for (i, msgs) in inbox.into_iter().enumerate() {
            for env in msgs {
                agents[i].population = population_of(env, i)?;
                adopted[i] = true;
                frontier.push(i);
            }
        }
    }
    if let Some(agent) = adopted.iter().position(|a| !a) {
        return Err(AedError::InitDeadlock { agent });
    }

    Ok(InitOutcome { agents, root_pre_halving, messages: net.stats().total_sent() })
}

fn population_of<C>(env: Envelope<Message<C>>, at: AgentId) -> Result<Vec<Individual<C>>, AedError> {
    match env.payload {
        Message::Population(p) => Ok(p),
        _ => Err(AedError::Protocol { agent: at, detail: format!("expected a population from {}", env.src) }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{figure1, one_based};
    use crate::pseudo_tree::RootRule;

    #[test]
    fn forced_draws_reproduce_the_example_individual() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::Fixed(3)).unwrap();
        let params = AedParams::<f64> { initial_population: 1, ..AedParams::default() };
        let draws: Vec<Vec<usize>> = one_based(&[1, 2, 1, 2]).into_iter().map(|v| vec![v]).collect();
        let out = init_phase_with_draws(&inst, &tree, &params, 0, &draws).unwrap();
        for agent in &out.agents {
            assert_eq!(agent.population.len(), 1);
            assert_eq!(agent.population[0].fitness, 38);
            assert_eq!(agent.population[0].assignment.to_values().unwrap(), one_based(&[1, 2, 1, 2]));
        }
        assert_eq!(out.root_pre_halving[0].fitness, 76);
    }

    #[test]
    fn all_agents_hold_the_same_population() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::default()).unwrap();
        let params = AedParams::<f64> { initial_population: 7, ..AedParams::default() };
        let out = init_phase(&inst, &tree, &params, 42).unwrap();
        for agent in &out.agents {
            assert_eq!(agent.population, out.agents[0].population);
            assert!(agent.lb.is_none() && agent.gb.is_empty());
            assert!(agent.found.is_none() && agent.update.is_none());
        }
        for ind in &out.agents[0].population {
            assert_eq!(ind.fitness, inst.evaluate_fitness(&ind.assignment).unwrap());
        }
    }

    #[test]
    fn out_of_domain_draw_is_rejected() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::default()).unwrap();
        let params = AedParams::<f64> { initial_population: 1, ..AedParams::default() };
        let draws = vec![vec![0], vec![5], vec![0], vec![0]];
        assert!(matches!(
            init_phase_with_draws(&inst, &tree, &params, 0, &draws),
            Err(AedError::Model(_))
        ));
    }
}
