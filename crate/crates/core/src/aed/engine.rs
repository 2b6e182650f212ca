use std::sync::Arc;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::aed::reproduction::{reproduce_initiator, reproduce_partner};
use crate::aed::selection::{retain_wrp, select_rp, select_wrp};
use crate::aed::{init_phase, AedError, AedParams, AgentState, Message, UpdateRecord};
use crate::model::{AgentId, Assignment, DcopInstance, Fitness, Individual};
use crate::pseudo_tree::{PseudoTree, RootRule};
use crate::scalar::{Cost, Real};
use crate::sim_net::{Envelope, Network, Slot, StepOutcome, SyncProtocol};

/// Per-agent observations from one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReport<C> {
    pub messages: usize,
    /// Local population size right after reproduced individuals were added.
    pub peak_population: usize,
    pub after_reinsertion: usize,
    pub after_migration: Option<usize>,
    /// Best fitness in the local population when the anytime update ran.
    pub update_population_min: C,
    pub lb_after_update: Fitness<C>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IterationReport<C> {
    pub iteration: u64,
    pub migrated: bool,
    pub messages: usize,
    pub agents: Vec<AgentReport<C>>,
}

type Outgoing<C> = Vec<(AgentId, Slot, Message<C>)>;

fn map_agents<C, I, T, G>(agents: &mut [AgentState<C>], inputs: Vec<I>, parallel: bool, f: G) -> Result<Vec<T>, AedError>
where
    C: Cost,
    I: Send,
    T: Send,
    G: Fn(&mut AgentState<C>, I) -> Result<T, AedError> + Sync + Send,
{
    if parallel {
        agents.par_iter_mut().zip(inputs.into_par_iter()).map(|(a, i)| f(a, i)).collect()
    } else {
        agents.iter_mut().zip(inputs).map(|(a, i)| f(a, i)).collect()
    }
}

fn post_all<C: Cost>(net: &mut Network<Message<C>>, iteration: u64, outgoing: Vec<Outgoing<C>>) -> Result<(), AedError> {
    for (src, list) in outgoing.into_iter().enumerate() {
        for (dst, slot, msg) in list {
            net.post(Envelope::new(src, dst, iteration, slot, msg))?;
        }
    }
    Ok(())
}

fn protocol(agent: AgentId, detail: impl Into<String>) -> AedError {
    AedError::Protocol { agent, detail: detail.into() }
}

impl<C: Cost> AgentState<C> {
    /// Local half of the anytime update: refresh LB from `best`, stamp a new
    /// global best at the root or raise a Found record elsewhere, then emit
    /// whatever Found/Update records are pending.
    fn anytime_send(&mut self, best: Option<&Individual<C>>, tree: &PseudoTree, itr: u64) -> Outgoing<C> {
        if let Some(b) = best {
            if Fitness::Finite(b.fitness) < self.local_best_fitness() {
                self.lb = Some(b.clone());
            }
        }
        if self.local_best_fitness() < self.gb.fitness_at(itr) {
            let lb = self.lb.clone().expect("finite LB");
            if tree.is_root(self.id) {
                self.gb.insert(itr, lb.clone());
                self.update = Some(UpdateRecord { version: itr, individual: lb });
            } else {
                self.found = Some(lb);
            }
        }
        let mut out = Vec::new();
        if let Some(um) = self.update.take() {
            for &c in tree.children(self.id) {
                out.push((c, Slot::Update, Message::Update(um.clone())));
            }
        }
        if let Some(fm) = self.found.take() {
            if let Some(p) = tree.parent(self.id) {
                out.push((p, Slot::Found, Message::Found(fm)));
            }
        }
        out
    }

    /// Receiving half: install Update records, absorb better Found records,
    /// then take the agent's value from the version every agent holds.
    fn anytime_receive(
        &mut self,
        founds: Vec<Envelope<Message<C>>>,
        updates: Vec<Envelope<Message<C>>>,
        tree: &PseudoTree,
        itr: u64,
    ) -> Result<(), AedError> {
        let id = self.id;
        for env in updates {
            if tree.is_root(id) {
                return Err(protocol(id, format!("root received an Update from {}", env.src)));
            }
            if tree.parent(id) != Some(env.src) {
                return Err(protocol(id, format!("Update from non-parent {}", env.src)));
            }
            let Message::Update(um) = env.payload else {
                return Err(protocol(id, "malformed Update"));
            };
            self.gb.insert(um.version, um.individual.clone());
            if Fitness::Finite(um.individual.fitness) < self.local_best_fitness() {
                self.lb = Some(um.individual.clone());
            }
            self.update = Some(um);
        }
        for env in founds {
            if !tree.children(id).contains(&env.src) {
                return Err(protocol(id, format!("Found from non-child {}", env.src)));
            }
            let Message::Found(ind) = env.payload else {
                return Err(protocol(id, "malformed Found"));
            };
            if Fitness::Finite(ind.fitness) < self.local_best_fitness() {
                self.lb = Some(ind);
            }
        }
        let h = tree.height() as u64;
        if itr >= h {
            let settled = itr + 1 - h;
            if let Some(g) = self.gb.get(settled) {
                self.value = g.get(id).ok_or(AedError::Model(crate::model::ModelError::Unbound { agent: id }))?;
            }
            self.gb.evict_below(settled);
        }
        Ok(())
    }
}

/// One synchronized anytime-update round: every agent runs the local half
/// with its `bests` entry, messages cross the barrier, every agent runs the
/// receiving half. `net` must already be on iteration `itr`.
pub fn anytime_update_round<C: Cost>(
    agents: &mut [AgentState<C>],
    bests: &[Option<Individual<C>>],
    tree: &PseudoTree,
    net: &mut Network<Message<C>>,
    itr: u64,
) -> Result<(), AedError> {
    let outgoing: Vec<Outgoing<C>> = agents
        .iter_mut()
        .zip(bests)
        .map(|(a, b)| {
            a.itr = itr;
            a.anytime_send(b.as_ref(), tree, itr)
        })
        .collect();
    post_all(net, itr, outgoing)?;
    let founds = net.deliver(Slot::Found);
    let updates = net.deliver(Slot::Update);
    for ((agent, f), u) in agents.iter_mut().zip(founds).zip(updates) {
        agent.anytime_receive(f, u, tree, itr)?;
    }
    Ok(())
}

/// A full AED run over one instance.
pub struct AedEngine<C, F> {
    instance: Arc<DcopInstance<C>>,
    tree: PseudoTree,
    params: AedParams<F>,
    agents: Vec<AgentState<C>>,
    net: Network<Message<C>>,
    parallel: bool,
    iteration: u64,
    root_pre_halving: Vec<Individual<C>>,
    report: IterationReport<C>,
}

struct Ctx<'a, C, F> {
    instance: &'a DcopInstance<C>,
    params: &'a AedParams<F>,
    alpha: F,
}

impl<C: Cost, F: Real> AedEngine<C, F> {
    /// Builds the pseudo-tree and runs initialization.
    pub fn new(instance: Arc<DcopInstance<C>>, root: RootRule, params: AedParams<F>, seed: u64) -> Result<Self, AedError> {
        let tree = PseudoTree::build(&instance, root)?;
        Self::with_tree(instance, tree, params, seed)
    }

    pub fn with_tree(instance: Arc<DcopInstance<C>>, tree: PseudoTree, params: AedParams<F>, seed: u64) -> Result<Self, AedError> {
        params.validate()?;
        let init = init_phase(&instance, &tree, &params, seed)?;
        let net = Network::new(instance.neighbor_sets().to_vec());
        Ok(AedEngine {
            instance,
            tree,
            params,
            agents: init.agents,
            net,
            parallel: false,
            iteration: 0,
            root_pre_halving: init.root_pre_halving,
            report: IterationReport::default(),
        })
    }

    /// Runs agents on the rayon pool inside each slot. Results are identical
    /// to sequential execution.
    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    pub fn enable_trace_log(&mut self) {
        self.net.enable_trace_log();
    }

    pub fn trace_log(&self) -> &[String] {
        self.net.trace_log()
    }

    pub fn instance(&self) -> &DcopInstance<C> {
        &self.instance
    }

    pub fn tree(&self) -> &PseudoTree {
        &self.tree
    }

    pub fn params(&self) -> &AedParams<F> {
        &self.params
    }

    pub fn agents(&self) -> &[AgentState<C>] {
        &self.agents
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn root_pre_halving(&self) -> &[Individual<C>] {
        &self.root_pre_halving
    }

    pub fn last_report(&self) -> &IterationReport<C> {
        &self.report
    }

    pub fn joint_assignment(&self) -> Assignment {
        let values: Vec<usize> = self.agents.iter().map(|a| a.value).collect();
        Assignment::from_values(&values)
    }

    /// Cost of the values the agents currently hold, computed centrally.
    pub fn global_cost(&self) -> C {
        self.instance.evaluate_fitness(&self.joint_assignment()).expect("every agent holds a value")
    }

    /// Runs one optimization iteration; iterations are numbered from 1.
    pub fn step(&mut self, itr: u64) -> Result<&IterationReport<C>, AedError> {
        if itr != self.iteration + 1 {
            return Err(AedError::OutOfOrder { expected: self.iteration + 1, got: itr });
        }
        let n = self.instance.agent_count();
        let parallel = self.parallel;
        self.net.begin_iteration(itr);
        let ctx = Ctx {
            instance: &self.instance,
            params: &self.params,
            alpha: self.params.alpha_at(itr),
        };

        // selection and initiator-side reproduction
        let requests = map_agents(&mut self.agents, vec![(); n], parallel, |a, ()| {
            a.itr = itr;
            Ok(a.start_reproduction(&ctx))
        })?;
        post_all(&mut self.net, itr, requests)?;

        // partner-side best response
        let inbox = self.net.deliver(Slot::ReproductionRequest);
        let replies = map_agents(&mut self.agents, inbox, parallel, |a, msgs| a.answer_reproduction(&ctx, msgs))?;
        post_all(&mut self.net, itr, replies)?;

        // absorb reproduced individuals and pick B
        let inbox = self.net.deliver(Slot::ReproductionReply);
        let absorbed = map_agents(&mut self.agents, inbox, parallel, |a, msgs| {
            for env in msgs {
                match env.payload {
                    Message::Population(p) => a.population.extend(p),
                    _ => return Err(protocol(a.id, "malformed reproduction reply")),
                }
            }
            let best = a.population.iter().min_by_key(|i| i.fitness).cloned();
            Ok((a.population.len(), best))
        })?;
        let (peaks, bests): (Vec<usize>, Vec<Option<Individual<C>>>) = absorbed.into_iter().unzip();
        let update_mins: Vec<C> = bests.iter().map(|b| b.as_ref().map_or(C::max_value(), |b| b.fitness)).collect();

        anytime_update_round(&mut self.agents, &bests, &self.tree, &mut self.net, itr)?;
        let lbs: Vec<Fitness<C>> = self.agents.iter().map(AgentState::local_best_fitness).collect();

        // reinsertion
        let sizes = map_agents(&mut self.agents, vec![(); n], parallel, |a, ()| {
            let keep = ctx.instance.neighbors(a.id).len() * ctx.params.exchange_rate;
            retain_wrp(&mut a.population, keep, ctx.params.r_max, ctx.alpha, &mut a.rng)?;
            Ok(a.population.len())
        })?;

        // migration
        let migrate = self.agents.first().is_some_and(|a| itr == a.itr_m + ctx.params.migration_interval);
        let mut migrated_sizes = vec![None; n];
        if migrate {
            let sends = map_agents(&mut self.agents, vec![(); n], parallel, |a, ()| a.emigrate(&ctx))?;
            post_all(&mut self.net, itr, sends)?;
            let inbox = self.net.deliver(Slot::Migration);
            let after = map_agents(&mut self.agents, inbox, parallel, |a, msgs| {
                for env in msgs {
                    match env.payload {
                        Message::Population(p) => a.population.extend(p),
                        _ => return Err(protocol(a.id, "malformed migration")),
                    }
                }
                a.itr_m = itr;
                Ok(a.population.len())
            })?;
            migrated_sizes = after.into_iter().map(Some).collect();
        }

        let stats = self.net.stats();
        stats.check_budget(self.instance.neighbor_sets(), 4, itr)?;
        let agents = (0..n)
            .map(|i| AgentReport {
                messages: stats.sent(i),
                peak_population: peaks[i],
                after_reinsertion: sizes[i],
                after_migration: migrated_sizes[i],
                update_population_min: update_mins[i],
                lb_after_update: lbs[i],
            })
            .collect();
        self.report = IterationReport { iteration: itr, migrated: migrate, messages: stats.total_sent(), agents };
        self.iteration = itr;
        Ok(&self.report)
    }
}

impl<C: Cost> AgentState<C> {
    fn start_reproduction<F: Real>(&mut self, ctx: &Ctx<'_, C, F>) -> Outgoing<C> {
        let er = ctx.params.exchange_rate;
        let mut order = ctx.instance.neighbors(self.id).to_vec();
        let mut selected = select_rp(&self.population, order.len() * er, ctx.params.r_max, ctx.alpha, &mut self.rng);
        selected.shuffle(&mut self.rng);
        order.shuffle(&mut self.rng);
        let mut pool = selected.into_iter();
        order
            .into_iter()
            .map(|j| {
                let batch = pool
                    .by_ref()
                    .take(er)
                    .map(|ind| {
                        reproduce_initiator(ctx.instance, self.id, j, ind, ctx.params.beta, ctx.params.o_max, &mut self.rng)
                    })
                    .collect();
                (j, Slot::ReproductionRequest, Message::Population(batch))
            })
            .collect()
    }

    fn answer_reproduction<F: Real>(
        &mut self,
        ctx: &Ctx<'_, C, F>,
        requests: Vec<Envelope<Message<C>>>,
    ) -> Result<Outgoing<C>, AedError> {
        requests
            .into_iter()
            .map(|env| match env.payload {
                Message::Population(batch) => {
                    let done = batch.into_iter().map(|ind| reproduce_partner(ctx.instance, self.id, ind)).collect();
                    Ok((env.src, Slot::ReproductionReply, Message::Population(done)))
                }
                _ => Err(protocol(self.id, "malformed reproduction request")),
            })
            .collect()
    }

    fn emigrate<F: Real>(&mut self, ctx: &Ctx<'_, C, F>) -> Result<Outgoing<C>, AedError> {
        let er = ctx.params.exchange_rate;
        ctx.instance
            .neighbors(self.id)
            .iter()
            .map(|&j| {
                let batch = select_wrp(&self.population, er, ctx.params.r_max, ctx.alpha, &mut self.rng)?;
                Ok((j, Slot::Migration, Message::Population(batch)))
            })
            .collect()
    }
}

impl<C: Cost, F: Real> SyncProtocol for AedEngine<C, F> {
    type Cost = C;
    type Error = AedError;

    fn initial_cost(&self) -> C {
        self.global_cost()
    }

    fn step(&mut self, iteration: u64) -> Result<StepOutcome<C>, AedError> {
        let messages = AedEngine::step(self, iteration)?.messages;
        Ok(StepOutcome { cost: self.global_cost(), messages })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aed::agent_rng;
    use crate::model::fixtures::{figure1, ind};

    fn agents(n: usize) -> Vec<AgentState<i64>> {
        (0..n).map(|i| AgentState::new(i, agent_rng(0, i))).collect()
    }

    /// Drives the anytime update with hand-picked bests on the example tree
    /// rooted at x4 (agent 3), with x1 (agent 0) finding a better individual
    /// at iteration 3.
    #[test]
    fn found_update_timeline_of_the_worked_example() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::Fixed(3)).unwrap();
        let mut net = Network::new(inst.neighbor_sets().to_vec());
        let mut ags = agents(4);
        let start = ind(&inst, &[1, 2, 2, 2]);
        let better = ind(&inst, &[1, 1, 1, 2]);
        let mut root_versions = Vec::new();
        for itr in 1..=7u64 {
            net.begin_iteration(itr);
            let mut bests = vec![Some(start.clone()); 4];
            if itr == 3 {
                bests[0] = Some(better.clone());
            }
            anytime_update_round(&mut ags, &bests, &tree, &mut net, itr).unwrap();
            root_versions.push(ags[3].gb.tags());
            match itr {
                3 => assert_eq!(ags[1].lb.as_ref(), Some(&better), "parent hears Found in the same iteration"),
                4 => assert_eq!(ags[3].lb.as_ref(), Some(&better), "root hears it at 4"),
                5 => {
                    assert_eq!(ags[3].gb.get(5), Some(&better));
                    assert_eq!(ags[1].gb.get(5), Some(&better));
                    assert_ne!(ags[0].gb.get(5), Some(&better));
                }
                6 => {
                    for a in &ags {
                        assert_eq!(a.gb.get(5), Some(&better), "agent {} by iteration 6", a.id);
                        assert_eq!(a.value, better.get(a.id).unwrap());
                    }
                }
                _ => {}
            }
        }
        assert!(root_versions[4].contains(&5));
    }

    #[test]
    fn no_improvement_means_no_traffic() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::Fixed(3)).unwrap();
        let mut net = Network::new(inst.neighbor_sets().to_vec());
        let mut ags = agents(4);
        let start = ind(&inst, &[1, 2, 2, 2]);
        for itr in 1..=4 {
            net.begin_iteration(itr);
            anytime_update_round(&mut ags, &vec![Some(start.clone()); 4], &tree, &mut net, itr).unwrap();
        }
        // propagation settles after the first H iterations
        let values: Vec<usize> = ags.iter().map(|a| a.value).collect();
        net.begin_iteration(5);
        anytime_update_round(&mut ags, &vec![Some(start.clone()); 4], &tree, &mut net, 5).unwrap();
        assert_eq!(net.stats().total_sent(), 0);
        assert_eq!(values, ags.iter().map(|a| a.value).collect::<Vec<_>>());
    }

    #[test]
    fn parent_keeps_the_better_of_two_founds() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::Fixed(3)).unwrap();
        let mut net = Network::new(inst.neighbor_sets().to_vec());
        let mut ags = agents(4);
        let a = ind(&inst, &[1, 2, 1, 2]);
        let b = ind(&inst, &[1, 1, 1, 2]);
        net.begin_iteration(1);
        let bests = vec![Some(a.clone()), Some(ind(&inst, &[1, 2, 2, 2])), Some(b.clone()), None];
        anytime_update_round(&mut ags, &bests, &tree, &mut net, 1).unwrap();
        assert_eq!(ags[1].lb.as_ref().unwrap().fitness, 22);
    }

    #[test]
    fn update_at_root_is_a_protocol_error() {
        let inst = figure1();
        let tree = PseudoTree::build(&inst, RootRule::Fixed(3)).unwrap();
        let mut ags = agents(4);
        let env = Envelope::new(1, 3, 1, Slot::Update, Message::Update(UpdateRecord { version: 1, individual: ind(&inst, &[1, 1, 1, 1]) }));
        assert!(matches!(ags[3].anytime_receive(vec![], vec![env], &tree, 1), Err(AedError::Protocol { agent: 3, .. })));
        let env = Envelope::new(1, 0, 1, Slot::Found, Message::Found(ind(&inst, &[1, 1, 1, 1])));
        assert!(matches!(ags[0].anytime_receive(vec![env], vec![], &tree, 1), Err(AedError::Protocol { agent: 0, .. })));
    }

    #[test]
    fn population_sizes_follow_the_schedule() {
        let inst = Arc::new(figure1());
        let params = AedParams::<f64> { exchange_rate: 3, ..AedParams::default() };
        let mut e = AedEngine::new(inst.clone(), RootRule::default(), params, 9).unwrap();
        for itr in 1..=12 {
            let rep = e.step(itr).unwrap().clone();
            assert_eq!(rep.migrated, itr % 5 == 0);
            for (i, r) in rep.agents.iter().enumerate() {
                let deg = inst.neighbors(i).len();
                assert_eq!(r.after_reinsertion, deg * 3);
                if rep.migrated {
                    assert_eq!(r.after_migration, Some(2 * deg * 3));
                }
                assert!(r.messages <= 4 * deg);
            }
        }
        assert!(matches!(e.step(20), Err(AedError::OutOfOrder { expected: 13, got: 20 })));
    }
}
