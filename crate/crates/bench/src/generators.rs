//! Erdős–Rényi benchmark instances.

use std::collections::VecDeque;

use aed_core::{Constraint, DcopInstance};
use rand::Rng;
use thiserror::Error;

/// Resampling attempts before giving up on a connected graph.
pub const MAX_CONNECT_ATTEMPTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("edge probability {0} is outside (0, 1]")]
    BadProbability(f64),
    #[error("cost range [{lo}, {hi}] is empty or negative")]
    BadCostRange { lo: i64, hi: i64 },
    #[error("need at least {min} {what}, got {got}")]
    TooSmall { what: &'static str, min: usize, got: usize },
    #[error("no connected graph after {0} attempts")]
    NotConnected(usize),
}

fn check(n: usize, d: usize, min_d: usize, p: f64, lo: i64, hi: i64) -> Result<(), GenError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(GenError::BadProbability(p));
    }
    if lo > hi || lo < 0 {
        return Err(GenError::BadCostRange { lo, hi });
    }
    if n < 2 {
        return Err(GenError::TooSmall { what: "agents", min: 2, got: n });
    }
    if d < min_d {
        return Err(GenError::TooSmall { what: "domain values", min: min_d, got: d });
    }
    Ok(())
}

/// Each unordered pair independently with probability `p`.
pub fn erdos_renyi_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

fn connected_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<(usize, usize)>, GenError> {
    for _ in 0..MAX_CONNECT_ATTEMPTS {
        let edges = erdos_renyi_edges(n, p, rng);
        if is_connected(n, &edges) {
            return Ok(edges);
        }
    }
    Err(GenError::NotConnected(MAX_CONNECT_ATTEMPTS))
}

/// Random DCOP: every table cell uniform in `[lo, hi]`.
pub fn gen_random_dcop<R: Rng + ?Sized>(
    n: usize,
    domain_size: usize,
    p: f64,
    (lo, hi): (i64, i64),
    rng: &mut R,
) -> Result<DcopInstance<i64>, GenError> {
    check(n, domain_size, 1, p, lo, hi)?;
    let edges = connected_edges(n, p, rng)?;
    let constraints = edges
        .into_iter()
        .map(|(i, j)| {
            let rows = (0..domain_size)
                .map(|_| (0..domain_size).map(|_| rng.gen_range(lo..=hi)).collect())
                .collect();
            Constraint::new(i, j, rows)
        })
        .collect();
    Ok(DcopInstance::new(vec![domain_size; n], constraints).expect("generated tables are well formed"))
}

/// Weighted graph coloring: one violation weight per edge, charged when
/// both endpoints share a color.
pub fn gen_weighted_graph_coloring<R: Rng + ?Sized>(
    n: usize,
    colors: usize,
    p: f64,
    (lo, hi): (i64, i64),
    rng: &mut R,
) -> Result<DcopInstance<i64>, GenError> {
    check(n, colors, 2, p, lo, hi)?;
    let edges = connected_edges(n, p, rng)?;
    let constraints = edges
        .into_iter()
        .map(|(i, j)| {
            let w = rng.gen_range(lo..=hi);
            let rows = (0..colors)
                .map(|a| (0..colors).map(|b| if a == b { w } else { 0 }).collect())
                .collect();
            Constraint::new(i, j, rows)
        })
        .collect();
    Ok(DcopInstance::new(vec![colors; n], constraints).expect("generated tables are well formed"))
}
