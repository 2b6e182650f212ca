//! DCOP instances, assignments and individuals.
//!
//! Each agent controls exactly one variable, and a variable's value is the
//! 0-based index into its domain. Constraints are binary with one shared cost
//! table per constrained pair.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::scalar::Cost;

pub type AgentId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("instance has no agents")]
    NoAgents,
    #[error("agent {agent} has an empty domain")]
    EmptyDomain { agent: AgentId },
    #[error("constraint references agent {agent} but the instance has {agents} agents")]
    UnknownAgent { agent: AgentId, agents: usize },
    #[error("constraint ({0},{0}) is a self loop")]
    SelfLoop(AgentId),
    #[error("more than one constraint between agents {0} and {1}")]
    DuplicateConstraint(AgentId, AgentId),
    #[error("cost table for ({i},{j}) has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    TableShape {
        i: AgentId,
        j: AgentId,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("cost table for ({i},{j}) contains a negative cost")]
    NegativeCost { i: AgentId, j: AgentId },
    #[error("assignment is incomplete, missing agents {missing:?}")]
    Incomplete { missing: Vec<AgentId> },
    #[error("agent {agent} has no neighbors")]
    NoNeighbors { agent: AgentId },
    #[error("agent {agent} is not bound")]
    Unbound { agent: AgentId },
    #[error("value {value} is outside the domain of agent {agent} (size {size})")]
    ValueOutOfDomain { agent: AgentId, value: usize, size: usize },
    #[error("conflicting bindings for agent {agent}: {left} vs {right}")]
    Conflict { agent: AgentId, left: usize, right: usize },
    #[error("population length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// A binary constraint. `costs[a][b]` is the cost of `x_i = a, x_j = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint<C> {
    pub i: AgentId,
    pub j: AgentId,
    rows: usize,
    cols: usize,
    table: Vec<C>,
}

impl<C: Cost> Constraint<C> {
    pub fn new(i: AgentId, j: AgentId, costs: Vec<Vec<C>>) -> Self {
        let rows = costs.len();
        let cols = costs.first().map_or(0, Vec::len);
        let ragged = costs.iter().any(|r| r.len() != cols);
        let table: Vec<C> = costs.into_iter().flatten().collect();
        Constraint {
            i,
            j,
            rows,
            // a ragged table can never match the domain sizes; poison the column count
            cols: if ragged { usize::MAX } else { cols },
            table,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Cost with `a` a value of `i` and `b` a value of `j`.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> C {
        self.table[a * self.cols + b]
    }

    pub fn to_rows(&self) -> Vec<Vec<C>> {
        self.table.chunks(self.cols).map(<[C]>::to_vec).collect()
    }
}

/// One endpoint's view of a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: AgentId,
    pub constraint: usize,
    /// True when the viewing agent is the constraint's `j` side.
    flipped: bool,
    /// Start of this constraint's block in the viewing agent's column table.
    column: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcopInstance<C> {
    domains: Vec<usize>,
    constraints: Vec<Constraint<C>>,
    incidences: Vec<Vec<Incidence>>,
    neighbors: Vec<Vec<AgentId>>,
    /// `best_case[i][k * |D_i| + d]`: cheapest cost of `i`'s k-th incidence with `i = d`.
    best_case: Vec<Vec<C>>,
    /// Per agent, each incident table re-laid out so that the costs of all
    /// own values against one neighbor value are contiguous.
    columns: Vec<Vec<C>>,
}

impl<C: Cost> DcopInstance<C> {
    /// Builds and validates an instance. `domains[i]` is the domain size of agent `i`.
    pub fn new(domains: Vec<usize>, constraints: Vec<Constraint<C>>) -> Result<Self, ModelError> {
        let n = domains.len();
        if n == 0 {
            return Err(ModelError::NoAgents);
        }
        if let Some(agent) = domains.iter().position(|&d| d == 0) {
            return Err(ModelError::EmptyDomain { agent });
        }
        let mut incidences = vec![Vec::new(); n];
        for (idx, c) in constraints.iter().enumerate() {
            for agent in [c.i, c.j] {
                if agent >= n {
                    return Err(ModelError::UnknownAgent { agent, agents: n });
                }
            }
            if c.i == c.j {
                return Err(ModelError::SelfLoop(c.i));
            }
            if c.rows != domains[c.i] || c.cols != domains[c.j] {
                return Err(ModelError::TableShape {
                    i: c.i,
                    j: c.j,
                    rows: c.rows,
                    cols: c.cols,
                    want_rows: domains[c.i],
                    want_cols: domains[c.j],
                });
            }
            if c.table.iter().any(|v| *v < C::zero()) {
                return Err(ModelError::NegativeCost { i: c.i, j: c.j });
            }
            incidences[c.i].push(Incidence { neighbor: c.j, constraint: idx, flipped: false, column: 0 });
            incidences[c.j].push(Incidence { neighbor: c.i, constraint: idx, flipped: true, column: 0 });
        }
        for list in &mut incidences {
            list.sort_by_key(|inc| inc.neighbor);
        }
        for (agent, list) in incidences.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0].neighbor == w[1].neighbor) {
                return Err(ModelError::DuplicateConstraint(agent.min(w[0].neighbor), agent.max(w[0].neighbor)));
            }
        }
        let neighbors = incidences
            .iter()
            .map(|l| l.iter().map(|inc| inc.neighbor).collect())
            .collect();
        let mut columns = Vec::with_capacity(n);
        for (i, list) in incidences.iter_mut().enumerate() {
            let mut col = Vec::new();
            for inc in list.iter_mut() {
                inc.column = col.len();
                let c = &constraints[inc.constraint];
                for e in 0..domains[inc.neighbor] {
                    for d in 0..domains[i] {
                        col.push(if inc.flipped { c.get(e, d) } else { c.get(d, e) });
                    }
                }
            }
            columns.push(col);
        }
        let mut inst =
            DcopInstance { domains, constraints, incidences, neighbors, best_case: Vec::new(), columns };
        inst.best_case = (0..n)
            .map(|i| {
                inst.incidences[i]
                    .iter()
                    .flat_map(|inc| {
                        let inst = &inst;
                        (0..inst.domains[i]).map(move |d| {
                            (0..inst.domains[inc.neighbor])
                                .map(|e| inst.incident_cost(inc, d, e))
                                .min()
                                .expect("domains are non-empty")
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(inst)
    }

    pub fn agent_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domain_size(&self, agent: AgentId) -> usize {
        self.domains[agent]
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn constraints(&self) -> &[Constraint<C>] {
        &self.constraints
    }

    /// N_i, ascending.
    pub fn neighbors(&self, agent: AgentId) -> &[AgentId] {
        &self.neighbors[agent]
    }

    pub fn neighbor_sets(&self) -> &[Vec<AgentId>] {
        &self.neighbors
    }

    /// Incident constraints of `agent`, ordered by neighbor.
    pub fn incidences(&self, agent: AgentId) -> &[Incidence] {
        &self.incidences[agent]
    }

    /// Cost of an incident constraint with `own` the viewing agent's value and
    /// `other` the neighbor's value.
    #[inline]
    pub fn incident_cost(&self, inc: &Incidence, own: usize, other: usize) -> C {
        let c = &self.constraints[inc.constraint];
        if inc.flipped {
            c.get(other, own)
        } else {
            c.get(own, other)
        }
    }

    /// Costs of every own value of `agent` against the neighbor of `inc` holding `other`.
    #[inline]
    pub fn incident_column(&self, agent: AgentId, inc: &Incidence, other: usize) -> &[C] {
        let d = self.domains[agent];
        let start = inc.column + other * d;
        &self.columns[agent][start..start + d]
    }

    /// Local cost of every value of `agent`, neighbors read from a complete assignment.
    pub(crate) fn local_costs_all(&self, agent: AgentId, a: &Assignment, out: &mut Vec<C>) {
        out.clear();
        out.resize(self.domains[agent], C::zero());
        for inc in &self.incidences[agent] {
            let col = self.incident_column(agent, inc, a.value_unchecked(inc.neighbor));
            for (o, &c) in out.iter_mut().zip(col) {
                *o = *o + c;
            }
        }
    }

    /// Lowest cost of `agent`'s `k`-th incident constraint over the neighbor's values, with `agent = own`.
    #[inline]
    pub fn best_incident_cost(&self, agent: AgentId, k: usize, own: usize) -> C {
        self.best_case[agent][k * self.domains[agent] + own]
    }

    /// `Cost(i, j, a, b)` accessed from `i`'s side; `None` if unconstrained.
    pub fn cost(&self, i: AgentId, j: AgentId, a: usize, b: usize) -> Option<C> {
        let list = &self.incidences[i];
        let pos = list.binary_search_by_key(&j, |inc| inc.neighbor).ok()?;
        Some(self.incident_cost(&list[pos], a, b))
    }

    pub fn is_neighbor(&self, i: AgentId, j: AgentId) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    fn check_value(&self, agent: AgentId, value: usize) -> Result<(), ModelError> {
        let size = self.domains[agent];
        if value >= size {
            return Err(ModelError::ValueOutOfDomain { agent, value, size });
        }
        Ok(())
    }

    /// Total cost of a complete assignment, each constraint counted once.
    pub fn evaluate_fitness(&self, a: &Assignment) -> Result<C, ModelError> {
        let missing = a.unbound_agents(self.agent_count());
        if !missing.is_empty() {
            return Err(ModelError::Incomplete { missing });
        }
        Ok(self
            .constraints
            .iter()
            .map(|c| c.get(a.value_unchecked(c.i), a.value_unchecked(c.j)))
            .sum())
    }

    /// Sum of `agent`'s incident constraint costs under the individual's bindings.
    pub fn local_cost(&self, agent: AgentId, ind: &Individual<C>) -> Result<C, ModelError> {
        let own = ind.assignment.get(agent).ok_or(ModelError::Unbound { agent })?;
        if self.incidences[agent].is_empty() {
            return Err(ModelError::NoNeighbors { agent });
        }
        let mut total = C::zero();
        for inc in &self.incidences[agent] {
            let other = ind
                .assignment
                .get(inc.neighbor)
                .ok_or(ModelError::Unbound { agent: inc.neighbor })?;
            total = total + self.incident_cost(inc, own, other);
        }
        Ok(total)
    }

    /// Local cost of `agent` taking `value`, with neighbors read from a complete assignment.
    #[inline]
    pub(crate) fn local_cost_with(&self, agent: AgentId, value: usize, a: &Assignment) -> C {
        self.incidences[agent]
            .iter()
            .fold(C::zero(), |acc, inc| acc + self.incident_cost(inc, value, a.value_unchecked(inc.neighbor)))
    }

    /// Change in fitness when `agent` moves from `old` to `new` with all neighbors fixed.
    pub fn delta_local(
        &self,
        agent: AgentId,
        ind: &Individual<C>,
        old: usize,
        new: usize,
    ) -> Result<C, ModelError> {
        self.check_value(agent, old)?;
        self.check_value(agent, new)?;
        let mut delta = C::zero();
        for inc in &self.incidences[agent] {
            let other = ind
                .assignment
                .get(inc.neighbor)
                .ok_or(ModelError::Unbound { agent: inc.neighbor })?;
            delta = delta + self.incident_cost(inc, new, other) - self.incident_cost(inc, old, other);
        }
        Ok(delta)
    }
}

const UNBOUND: u32 = u32::MAX;

/// Partial map from agent to value index.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    values: Vec<u32>,
}

impl Assignment {
    pub fn empty(agents: usize) -> Self {
        Assignment { values: vec![UNBOUND; agents] }
    }

    pub fn from_values(values: &[usize]) -> Self {
        Assignment { values: values.iter().map(|&v| v as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, agent: AgentId) -> Option<usize> {
        match self.values.get(agent) {
            Some(&v) if v != UNBOUND => Some(v as usize),
            _ => None,
        }
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, agent: AgentId) -> usize {
        debug_assert_ne!(self.values[agent], UNBOUND);
        self.values[agent] as usize
    }

    pub fn set(&mut self, agent: AgentId, value: usize) {
        self.values[agent] = value as u32;
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|&v| v != UNBOUND)
    }

    pub fn bound_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != UNBOUND).count()
    }

    fn unbound_agents(&self, agents: usize) -> Vec<AgentId> {
        (0..agents).filter(|&a| self.get(a).is_none()).collect()
    }

    /// Values of a complete assignment; `None` if any agent is unbound.
    pub fn to_values(&self) -> Option<Vec<usize>> {
        self.values.iter().map(|&v| (v != UNBOUND).then_some(v as usize)).collect()
    }

    /// Domain check for every bound agent.
    pub fn validate<C: Cost>(&self, instance: &DcopInstance<C>) -> Result<(), ModelError> {
        for agent in 0..self.values.len().min(instance.agent_count()) {
            if let Some(v) = self.get(agent) {
                instance.check_value(agent, v)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (agent, v) in self.values.iter().enumerate() {
            if *v == UNBOUND {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "x{agent}={v}")?;
        }
        f.write_str("}")
    }
}

/// A (possibly partial) assignment plus its accumulated fitness.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Individual<C> {
    pub assignment: Assignment,
    pub fitness: C,
}

impl<C: Cost> Individual<C> {
    /// No bindings, fitness 0.
    pub fn empty(agents: usize) -> Self {
        Individual { assignment: Assignment::empty(agents), fitness: C::zero() }
    }

    pub fn new(assignment: Assignment, fitness: C) -> Self {
        Individual { assignment, fitness }
    }

    /// Complete individual with its fitness computed from the instance.
    pub fn evaluated(instance: &DcopInstance<C>, values: &[usize]) -> Result<Self, ModelError> {
        let assignment = Assignment::from_values(values);
        assignment.validate(instance)?;
        let fitness = instance.evaluate_fitness(&assignment)?;
        Ok(Individual { assignment, fitness })
    }

    pub fn get(&self, agent: AgentId) -> Option<usize> {
        self.assignment.get(agent)
    }
}

/// Union of bindings with summed fitness. Agents bound on both sides must agree.
pub fn merge<C: Cost>(a: &Individual<C>, b: &Individual<C>) -> Result<Individual<C>, ModelError> {
    let len = a.assignment.len().max(b.assignment.len());
    let mut out = Assignment::empty(len);
    for agent in 0..len {
        match (a.get(agent), b.get(agent)) {
            (Some(l), Some(r)) if l != r => {
                return Err(ModelError::Conflict { agent, left: l, right: r });
            }
            (Some(v), _) | (None, Some(v)) => out.set(agent, v),
            (None, None) => {}
        }
    }
    Ok(Individual { assignment: out, fitness: a.fitness + b.fitness })
}

/// Element-wise `merge` of two index-aligned populations.
pub fn merge_populations<C: Cost>(
    left: &[Individual<C>],
    right: &[Individual<C>],
) -> Result<Vec<Individual<C>>, ModelError> {
    if left.len() != right.len() {
        return Err(ModelError::LengthMismatch { left: left.len(), right: right.len() });
    }
    left.iter().zip(right).map(|(a, b)| merge(a, b)).collect()
}

/// Fitness with a +infinity sentinel that orders after every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fitness<C> {
    Finite(C),
    Infinite,
}

impl<C: Cost> Fitness<C> {
    pub fn of(ind: Option<&Individual<C>>) -> Self {
        ind.map_or(Fitness::Infinite, |i| Fitness::Finite(i.fitness))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Fitness::Finite(_))
    }
}

/// Ordering of two individuals by fitness alone.
pub fn by_fitness<C: Cost>(a: &Individual<C>, b: &Individual<C>) -> Ordering {
    a.fitness.cmp(&b.fitness)
}
