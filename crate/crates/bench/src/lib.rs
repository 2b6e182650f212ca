//! Benchmark generators, experiment runner and trace aggregation for the
//! AED solver.

pub mod config;
pub mod experiment;
pub mod generators;
pub mod summary;
pub mod trace;

pub use config::{Algo, BenchmarkConfig, Family};
pub use experiment::{run_experiment, ExperimentSummary};
pub use generators::{gen_random_dcop, gen_weighted_graph_coloring};
pub use summary::{summarize, Summary};
