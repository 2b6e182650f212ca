//! Aggregation over a set of trace CSVs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{read_trace_csv, TraceRow};

#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("no traces to summarize")]
    Empty,
    #[error("{0}: not a trace file name (expected family_instance_repeat_algo.csv)")]
    BadName(PathBuf),
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{0}: trace has no rows")]
    EmptyTrace(PathBuf),
    #[error("mixed configurations: {0}")]
    Mixed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub family: String,
    pub instance: usize,
    pub repeat: usize,
    pub algo: String,
    pub rows: Vec<TraceRow>,
}

/// Splits `{family}_{instance}_{repeat}_{algo}.csv`.
pub fn parse_trace_name(path: &Path) -> Option<(String, usize, usize, String)> {
    let stem = path.file_name()?.to_str()?.strip_suffix(".csv")?;
    let mut parts = stem.rsplitn(4, '_');
    let algo = parts.next()?.to_string();
    let repeat = parts.next()?.parse().ok()?;
    let instance = parts.next()?.parse().ok()?;
    let family = parts.next()?.to_string();
    Some((family, instance, repeat, algo))
}

pub fn load_trace(path: &Path) -> Result<TraceFile, SummaryError> {
    let (family, instance, repeat, algo) = parse_trace_name(path).ok_or_else(|| SummaryError::BadName(path.into()))?;
    let rows = read_trace_csv(path).map_err(|source| SummaryError::Csv { path: path.into(), source })?;
    if rows.is_empty() {
        return Err(SummaryError::EmptyTrace(path.into()));
    }
    Ok(TraceFile { family, instance, repeat, algo, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub runs: usize,
    /// Mean cost per row over the rows every run has.
    pub mean_curve: Vec<(u64, f64)>,
    pub final_mean: f64,
    /// Sample standard deviation (0 for a single run).
    pub final_std: f64,
}

/// `(final_mean[algo] - final_mean[baseline]) / final_mean[baseline]`, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub algo: String,
    pub baseline: String,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub family: String,
    pub algos: BTreeMap<String, AlgoSummary>,
    pub gaps: Vec<Gap>,
}

fn summarize_algo(traces: &[&TraceFile]) -> Result<AlgoSummary, SummaryError> {
    let len = traces.iter().map(|t| t.rows.len()).min().unwrap_or(0);
    let mut mean_curve = Vec::with_capacity(len);
    for k in 0..len {
        let iteration = traces[0].rows[k].iteration;
        if traces.iter().any(|t| t.rows[k].iteration != iteration) {
            return Err(SummaryError::Mixed(format!("row {k} has differing iteration numbers")));
        }
        let mean = traces.iter().map(|t| t.rows[k].cost as f64).sum::<f64>() / traces.len() as f64;
        mean_curve.push((iteration, mean));
    }
    let finals: Vec<f64> = traces.iter().map(|t| t.rows.last().expect("non-empty").cost as f64).collect();
    let n = finals.len() as f64;
    let final_mean = finals.iter().sum::<f64>() / n;
    let final_std = if finals.len() > 1 {
        (finals.iter().map(|x| (x - final_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(AlgoSummary { runs: traces.len(), mean_curve, final_mean, final_std })
}

pub fn summarize(traces: &[TraceFile]) -> Result<Summary, SummaryError> {
    let first = traces.first().ok_or(SummaryError::Empty)?;
    if let Some(t) = traces.iter().find(|t| t.family != first.family) {
        return Err(SummaryError::Mixed(format!("families {} and {}", first.family, t.family)));
    }
    let mut by_algo: BTreeMap<&str, Vec<&TraceFile>> = BTreeMap::new();
    for t in traces {
        by_algo.entry(&t.algo).or_default().push(t);
    }
    let mut runs_of: Option<BTreeSet<(usize, usize)>> = None;
    for (algo, list) in &by_algo {
        let keys: BTreeSet<(usize, usize)> = list.iter().map(|t| (t.instance, t.repeat)).collect();
        if keys.len() != list.len() {
            return Err(SummaryError::Mixed(format!("duplicate runs for {algo}")));
        }
        match &runs_of {
            Some(prev) if *prev != keys => {
                return Err(SummaryError::Mixed(format!("{algo} covers different runs than the other algorithms")))
            }
            _ => runs_of = Some(keys),
        }
    }

    let algos = by_algo
        .iter()
        .map(|(a, list)| Ok((a.to_string(), summarize_algo(list)?)))
        .collect::<Result<BTreeMap<_, _>, SummaryError>>()?;
    let mut gaps = Vec::new();
    for (a, sa) in &algos {
        for (b, sb) in &algos {
            if a != b {
                gaps.push(Gap {
                    algo: a.clone(),
                    baseline: b.clone(),
                    percent: (sa.final_mean - sb.final_mean) / sb.final_mean * 100.0,
                });
            }
        }
    }
    Ok(Summary { family: first.family.clone(), algos, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(algo: &str, instance: usize, cost: i64, len: u64) -> TraceFile {
        TraceFile {
            family: "random-dcop".into(),
            instance,
            repeat: 0,
            algo: algo.into(),
            rows: (0..len).map(|i| TraceRow { iteration: i, cost, elapsed_ms: 0.0, messages: 0 }).collect(),
        }
    }

    #[test]
    fn names_split_from_the_right() {
        let p = Path::new("/x/graph-coloring_12_3_aed.csv");
        assert_eq!(parse_trace_name(p), Some(("graph-coloring".into(), 12, 3, "aed".into())));
        assert_eq!(parse_trace_name(Path::new("summary.json")), None);
        assert_eq!(parse_trace_name(Path::new("a_b_1_aed.csv")), None);
    }

    #[test]
    fn single_trace_is_its_own_mean() {
        let mut t = constant("aed", 0, 0, 0);
        t.rows = [9, 7, 7, 4].iter().enumerate().map(|(i, &c)| TraceRow { iteration: i as u64, cost: c, elapsed_ms: 0.0, messages: 0 }).collect();
        let s = summarize(&[t]).unwrap();
        let a = &s.algos["aed"];
        assert_eq!(a.mean_curve, vec![(0, 9.0), (1, 7.0), (2, 7.0), (3, 4.0)]);
        assert_eq!((a.final_mean, a.final_std), (4.0, 0.0));
        assert!(s.gaps.is_empty());
    }

    #[test]
    fn two_constant_traces_average() {
        let s = summarize(&[constant("aed", 0, 10, 5), constant("aed", 1, 20, 5)]).unwrap();
        let a = &s.algos["aed"];
        assert!(a.mean_curve.iter().all(|&(_, m)| m == 15.0));
        assert_eq!(a.final_mean, 15.0);
    }

    #[test]
    fn pairwise_gap() {
        let s = summarize(&[constant("aed", 0, 90, 3), constant("dsa", 0, 100, 3)]).unwrap();
        let g = s.gaps.iter().find(|g| g.algo == "aed").unwrap();
        assert_eq!(g.baseline, "dsa");
        assert!((g.percent + 10.0).abs() < 1e-12);
    }

    #[test]
    fn mixtures_are_rejected() {
        let mut other = constant("aed", 1, 10, 3);
        other.family = "graph-coloring".into();
        assert!(matches!(summarize(&[constant("aed", 0, 10, 3), other]), Err(SummaryError::Mixed(_))));
        assert!(matches!(summarize(&[constant("aed", 0, 10, 3), constant("aed", 0, 10, 3)]), Err(SummaryError::Mixed(_))));
        assert!(matches!(summarize(&[constant("aed", 0, 10, 3), constant("dsa", 1, 10, 3)]), Err(SummaryError::Mixed(_))));
        assert!(matches!(summarize(&[]), Err(SummaryError::Empty)));
    }
}
