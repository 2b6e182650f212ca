//! Batch runner: generate instances, run every (instance, repeat) pair and
//! write one CSV trace per run plus an aggregate JSON summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aed_core::io::instance_to_json;
use aed_core::{run_synchronous, Dsa, Engine, Instance, StopCondition, Trace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Algo, BenchmarkConfig, Family};
use crate::generators::{gen_random_dcop, gen_weighted_graph_coloring, GenError};
use crate::trace::{write_trace_csv, TraceRow};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("generating instance {index}: {source}")]
    Generate { index: usize, source: GenError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serializing {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub instance: usize,
    pub repeat: usize,
    pub seed: u64,
    pub final_cost: Option<i64>,
    pub best_cost: Option<i64>,
    pub iterations: u64,
    pub wall_ms: f64,
    pub trace: Option<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: BenchmarkConfig,
    pub algo: Algo,
    pub runs: Vec<RunResult>,
    pub failed: usize,
    pub final_mean: Option<f64>,
    pub final_std: Option<f64>,
}

/// Trace file name for one run.
pub fn trace_name(family: Family, instance: usize, repeat: usize, algo: Algo) -> String {
    format!("{family}_{instance}_{repeat}_{algo}.csv")
}

pub fn summary_name(family: Family, algo: Algo) -> String {
    format!("{family}_{algo}_summary.json")
}

/// Instance `index` of the configured family together with the seeds of its
/// repeats. Both algorithms see the same instances and run seeds.
pub fn generate_instance(cfg: &BenchmarkConfig, index: usize) -> Result<(Instance, Vec<u64>), GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let inst = match cfg.family {
        Family::RandomDcop => gen_random_dcop(cfg.n, cfg.domain_size, cfg.p, cfg.cost_range, &mut rng)?,
        Family::GraphColoring => gen_weighted_graph_coloring(cfg.n, cfg.domain_size, cfg.p, cfg.cost_range, &mut rng)?,
    };
    let seeds = (0..cfg.repeats).map(|_| rng.gen()).collect();
    Ok((inst, seeds))
}

/// Runs one algorithm on one instance.
pub fn run_algorithm(cfg: &BenchmarkConfig, algo: Algo, instance: Arc<Instance>, seed: u64) -> Result<Trace, String> {
    run_with_stop(cfg, algo, instance, seed, cfg.stop_condition())
}

pub fn run_with_stop(
    cfg: &BenchmarkConfig,
    algo: Algo,
    instance: Arc<Instance>,
    seed: u64,
    stop: StopCondition,
) -> Result<Trace, String> {
    match algo {
        Algo::Aed => {
            let mut engine = Engine::new(instance, cfg.root_rule(), cfg.aed_params(), seed)
                .map_err(|e| e.to_string())?
                .parallel(cfg.engine.parallel);
            run_synchronous(&mut engine, stop).map_err(|e| e.to_string())
        }
        Algo::Dsa => {
            let mut dsa = Dsa::new(instance, cfg.dsa_params(), seed).map_err(|e| e.to_string())?;
            run_synchronous(&mut dsa, stop).map_err(|e| e.to_string())
        }
    }
}

pub fn trace_rows(trace: &Trace, record_wall_time: bool) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            iteration: r.iteration,
            cost: r.cost,
            elapsed_ms: if record_wall_time { r.elapsed_ms } else { 0.0 },
            messages: r.messages as u64,
        })
        .collect()
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some((mean, var.sqrt()))
}

/// Runs the whole batch for `algo` (the config's algorithm when `None`).
pub fn run_experiment(cfg: &BenchmarkConfig, algo: Option<Algo>) -> Result<ExperimentSummary, ExperimentError> {
    let algo = algo.unwrap_or(cfg.algo);
    let out = &cfg.output;
    let inst_dir = out.join("instances");
    fs::create_dir_all(&inst_dir).map_err(io_err(&inst_dir))?;

    let mut jobs = Vec::new();
    for index in 0..cfg.instances {
        let (inst, seeds) = generate_instance(cfg, index).map_err(|source| ExperimentError::Generate { index, source })?;
        let path = inst_dir.join(format!("{}_{index}.json", cfg.family));
        fs::write(&path, instance_to_json(&inst)).map_err(io_err(&path))?;
        let inst = Arc::new(inst);
        for (repeat, seed) in seeds.into_iter().enumerate() {
            jobs.push((index, repeat, seed, Arc::clone(&inst)));
        }
    }

    let runs = jobs
        .into_par_iter()
        .map(|(instance, repeat, seed, inst)| {
            let mut result = RunResult {
                instance,
                repeat,
                seed,
                final_cost: None,
                best_cost: None,
                iterations: 0,
                wall_ms: 0.0,
                trace: None,
                error: None,
            };
            match run_algorithm(cfg, algo, inst, seed) {
                Ok(trace) => {
                    let path = out.join(trace_name(cfg.family, instance, repeat, algo));
                    write_trace_csv(&path, &trace_rows(&trace, cfg.record_wall_time)).map_err(io_err(&path))?;
                    result.final_cost = trace.final_cost();
                    result.best_cost = trace.best_cost();
                    result.iterations = trace.iterations();
                    result.wall_ms = if cfg.record_wall_time { trace.wall_ms() } else { 0.0 };
                    result.trace = Some(path);
                }
                Err(e) => result.error = Some(e),
            }
            Ok(result)
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;

    let finals: Vec<f64> = runs.iter().filter_map(|r| r.final_cost).map(|c| c as f64).collect();
    let stats = mean_std(&finals);
    let summary = ExperimentSummary {
        config: cfg.clone(),
        algo,
        failed: runs.iter().filter(|r| r.error.is_some()).count(),
        runs,
        final_mean: stats.map(|s| s.0),
        final_std: stats.map(|s| s.1),
    };
    let path = out.join(summary_name(cfg.family, algo));
    let json = serde_json::to_string_pretty(&summary).map_err(|source| ExperimentError::Json { path: path.clone(), source })?;
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_std(&[]), None);
        assert_eq!(mean_std(&[4.0]), Some((4.0, 0.0)));
        let (m, s) = mean_std(&[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(m, 4.0);
        assert!((s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn names() {
        assert_eq!(trace_name(Family::RandomDcop, 3, 1, Algo::Dsa), "random-dcop_3_1_dsa.csv");
        assert_eq!(summary_name(Family::GraphColoring, Algo::Aed), "graph-coloring_aed_summary.json");
    }
}
