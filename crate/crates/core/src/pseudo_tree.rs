//! BFS pseudo-tree over the constraint graph.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::model::{AgentId, DcopInstance};
use crate::scalar::Cost;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("constraint graph is disconnected: agent {0} is unreachable from the root")]
    Disconnected(AgentId),
    #[error("a pseudo-tree needs at least two agents")]
    Degenerate,
    #[error("root {root} is not an agent (instance has {agents})")]
    BadRoot { root: AgentId, agents: usize },
}

/// How the root is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootRule {
    /// Highest degree, smallest index on ties.
    #[default]
    MaxDegree,
    Fixed(AgentId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoTree {
    root: AgentId,
    parent: Vec<Option<AgentId>>,
    children: Vec<Vec<AgentId>>,
    level: Vec<usize>,
    height: usize,
}

impl PseudoTree {
    /// Breadth-first spanning tree from the root chosen by `rule`. Children
    /// are discovered in ascending agent order.
    pub fn build<C: Cost>(instance: &DcopInstance<C>, rule: RootRule) -> Result<Self, TreeError> {
        let n = instance.agent_count();
        if n < 2 {
            return Err(TreeError::Degenerate);
        }
        let root = match rule {
            RootRule::Fixed(r) if r >= n => return Err(TreeError::BadRoot { root: r, agents: n }),
            RootRule::Fixed(r) => r,
            RootRule::MaxDegree => (0..n)
                .max_by(|&a, &b| {
                    instance.neighbors(a).len().cmp(&instance.neighbors(b).len()).then(b.cmp(&a))
                })
                .expect("n >= 2"),
        };

        let mut parent = vec![None; n];
        let mut level = vec![usize::MAX; n];
        let mut children = vec![Vec::new(); n];
        let mut queue = VecDeque::from([root]);
        level[root] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in instance.neighbors(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    parent[v] = Some(u);
                    children[u].push(v);
                    queue.push_back(v);
                }
            }
        }
        if let Some(lost) = level.iter().position(|&l| l == usize::MAX) {
            return Err(TreeError::Disconnected(lost));
        }
        let height = level.iter().copied().max().unwrap_or(0);
        Ok(PseudoTree { root, parent, children, level, height })
    }

    pub fn root(&self) -> AgentId {
        self.root
    }

    pub fn is_root(&self, agent: AgentId) -> bool {
        agent == self.root
    }

    /// PR_i
    pub fn parent(&self, agent: AgentId) -> Option<AgentId> {
        self.parent[agent]
    }

    /// C_i
    pub fn children(&self, agent: AgentId) -> &[AgentId] {
        &self.children[agent]
    }

    pub fn level(&self, agent: AgentId) -> usize {
        self.level[agent]
    }

    /// H: the largest level, i.e. the longest root-to-leaf path in edges.
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn agent_count(&self) -> usize {
        self.level.len()
    }

    /// Agents grouped by level, root first.
    pub fn levels(&self) -> Vec<Vec<AgentId>> {
        let mut out = vec![Vec::new(); self.height + 1];
        for (agent, &l) in self.level.iter().enumerate() {
            out[l].push(agent);
        }
        out
    }
}

/// One line per agent: `agent level parent [children]`, `-` for the root's parent.
impl fmt::Display for PseudoTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for agent in 0..self.level.len() {
            let parent = self.parent[agent].map_or_else(|| "-".to_string(), |p| p.to_string());
            let kids: Vec<String> = self.children[agent].iter().map(ToString::to_string).collect();
            writeln!(f, "{agent} {} {parent} [{}]", self.level[agent], kids.join(","))?;
        }
        Ok(())
    }
}
