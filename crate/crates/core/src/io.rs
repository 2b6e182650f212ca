//! JSON problem files.
//!
//! ```json
//! {"agents": 2, "domains": [2, 3], "constraints": [{"i": 0, "j": 1, "costs": [[1, 2, 3], [4, 5, 6]]}]}
//! ```
//! Row index is the value index of `i`, column index the value index of `j`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Constraint, DcopInstance, ModelError};
use crate::scalar::Cost;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed problem file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("\"agents\" is {agents} but {domains} domain sizes were given")]
    AgentCount { agents: usize, domains: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile<C> {
    pub agents: usize,
    pub domains: Vec<usize>,
    pub constraints: Vec<ConstraintEntry<C>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintEntry<C> {
    pub i: usize,
    pub j: usize,
    pub costs: Vec<Vec<C>>,
}

impl<C: Cost> ProblemFile<C> {
    pub fn from_instance(instance: &DcopInstance<C>) -> Self {
        ProblemFile {
            agents: instance.agent_count(),
            domains: instance.domains().to_vec(),
            constraints: instance
                .constraints()
                .iter()
                .map(|c| ConstraintEntry { i: c.i, j: c.j, costs: c.to_rows() })
                .collect(),
        }
    }

    pub fn into_instance(self) -> Result<DcopInstance<C>, IoError> {
        if self.agents != self.domains.len() {
            return Err(IoError::AgentCount { agents: self.agents, domains: self.domains.len() });
        }
        let constraints = self.constraints.into_iter().map(|e| Constraint::new(e.i, e.j, e.costs)).collect();
        Ok(DcopInstance::new(self.domains, constraints)?)
    }
}

pub fn instance_from_json<C: Cost + DeserializeOwned>(text: &str) -> Result<DcopInstance<C>, IoError> {
    serde_json::from_str::<ProblemFile<C>>(text)?.into_instance()
}

pub fn instance_to_json<C: Cost + Serialize>(instance: &DcopInstance<C>) -> String {
    serde_json::to_string(&ProblemFile::from_instance(instance)).expect("plain data serializes")
}
