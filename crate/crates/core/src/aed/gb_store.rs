use std::collections::BTreeMap;

use crate::model::{Fitness, Individual};
use crate::scalar::Cost;

/// Versioned global-best store keyed by the iteration the root stamped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GbStore<C> {
    versions: BTreeMap<u64, Individual<C>>,
}

impl<C: Cost> GbStore<C> {
    pub fn new() -> Self {
        GbStore { versions: BTreeMap::new() }
    }

    /// GB^j: the newest version with tag `<= j`, `None` standing for the
    /// infinite-fitness sentinel.
    pub fn get(&self, j: u64) -> Option<&Individual<C>> {
        self.versions.range(..=j).next_back().map(|(_, ind)| ind)
    }

    pub fn fitness_at(&self, j: u64) -> Fitness<C> {
        Fitness::of(self.get(j))
    }

    pub fn insert(&mut self, version: u64, ind: Individual<C>) {
        self.versions.insert(version, ind);
    }

    /// Drops versions that no query for a tag `>= low` can return. The newest
    /// version below `low` is kept, since GB^low still resolves to it.
    pub fn evict_below(&mut self, low: u64) {
        let Some(&keep) = self.versions.range(..=low).next_back().map(|(k, _)| k) else {
            return;
        };
        self.versions = self.versions.split_off(&keep);
    }

    pub fn tags(&self) -> Vec<u64> {
        self.versions.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.versions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.versions.is_empty()
    }
}
