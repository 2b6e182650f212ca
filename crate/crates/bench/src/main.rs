use std::path::PathBuf;

use aed_bench::config::{Algo, BenchmarkConfig, Family};
use aed_bench::generators::{gen_random_dcop, gen_weighted_graph_coloring};
use aed_bench::summary::{load_trace, summarize};
use aed_bench::experiment::run_experiment;
use aed_core::baselines::{brute_force_optimum_capped, DEFAULT_SEARCH_CAP};
use aed_core::io::{instance_from_json, instance_to_json};
use aed_core::{Instance, PseudoTree, RootRule};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "bench", about = "AED DCOP benchmark driver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a batch experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's algorithm.
        #[arg(long)]
        algo: Option<Algo>,
    },
    /// Generate one instance as JSON.
    Gen {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Domain size, or number of colors.
        #[arg(long)]
        domain_size: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        cost_lo: i64,
        #[arg(long, default_value_t = 100)]
        cost_hi: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively solve a small instance.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: u128,
    },
    /// Print the pseudo-tree of an instance (agent level parent children).
    Tree {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        root: Option<usize>,
    },
    /// Aggregate trace CSVs matching a glob pattern.
    Summarize {
        #[arg(long)]
        glob: String,
        /// Write the JSON summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_instance(path: &PathBuf) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    instance_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { config, algo } => {
            let cfg = BenchmarkConfig::load(&config)?;
            let summary = run_experiment(&cfg, algo)?;
            for r in summary.runs.iter().filter(|r| r.error.is_some()) {
                eprintln!("instance {} repeat {} failed: {}", r.instance, r.repeat, r.error.as_deref().unwrap_or(""));
            }
            println!(
                "{} runs ({} failed), final mean {:.2}, std {:.2}",
                summary.runs.len(),
                summary.failed,
                summary.final_mean.unwrap_or(f64::NAN),
                summary.final_std.unwrap_or(f64::NAN)
            );
        }
        Cmd::Gen { family, n, domain_size, p, cost_lo, cost_hi, seed, out } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = match family {
                Family::RandomDcop => gen_random_dcop(n, domain_size, p, (cost_lo, cost_hi), &mut rng)?,
                Family::GraphColoring => gen_weighted_graph_coloring(n, domain_size, p, (cost_lo, cost_hi), &mut rng)?,
            };
            std::fs::write(&out, instance_to_json(&inst)).with_context(|| format!("writing {}", out.display()))?;
        }
        Cmd::Oracle { instance, cap } => {
            let inst = read_instance(&instance)?;
            let (values, cost) = brute_force_optimum_capped(&inst, cap)?;
            println!("cost {cost}");
            println!("values {values:?}");
        }
        Cmd::Tree { instance, root } => {
            let inst = read_instance(&instance)?;
            let tree = PseudoTree::build(&inst, root.map_or(RootRule::MaxDegree, RootRule::Fixed))?;
            print!("{tree}");
            println!("height {}", tree.height());
        }
        Cmd::Summarize { glob: pattern, out } => {
            let mut traces = Vec::new();
            for entry in glob::glob(&pattern).with_context(|| format!("bad pattern {pattern}"))? {
                traces.push(load_trace(&entry?)?);
            }
            if traces.is_empty() {
                bail!("no files match {pattern}");
            }
            let summary = summarize(&traces)?;
            let json = serde_json::to_string_pretty(&summary)?;
            match out {
                Some(path) => std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}
