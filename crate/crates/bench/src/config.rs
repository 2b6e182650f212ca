//! TOML experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use aed_core::aed::{AlphaStage, AedParams};
use aed_core::baselines::DsaParams;
use aed_core::{Params, RootRule, StopCondition};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable overriding the configured seed.
pub const SEED_ENV: &str = "BENCH_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: PathBuf, source: Box<toml::de::Error> },
    #[error("{SEED_ENV}={0:?} is not an unsigned integer")]
    BadSeedOverride(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    RandomDcop,
    GraphColoring,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::RandomDcop => "random-dcop",
            Family::GraphColoring => "graph-coloring",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random-dcop" => Ok(Family::RandomDcop),
            "graph-coloring" => Ok(Family::GraphColoring),
            other => Err(format!("unknown family {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Aed,
    Dsa,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Aed => "aed",
            Algo::Dsa => "dsa",
        })
    }
}

impl FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "aed" => Ok(Algo::Aed),
            "dsa" => Ok(Algo::Dsa),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEntry {
    /// Last iteration (inclusive) using this exponent; omitted for the final stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<u64>,
    pub alpha: f64,
}

/// Engine overrides; anything left out falls back to the family default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(rename = "in")]
    pub initial_population: Option<usize>,
    pub er: Option<usize>,
    pub r_max: Option<f64>,
    pub o_max: Option<f64>,
    pub beta: Option<f64>,
    pub mi: Option<u64>,
    pub alpha_schedule: Option<Vec<AlphaEntry>>,
    /// Fixed pseudo-tree root; by default the highest-degree agent.
    pub root: Option<usize>,
    /// Run each agent's local computation on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSection {
    pub max_iter: Option<u64>,
    pub max_time_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub family: Family,
    pub n: usize,
    /// Domain size, or number of colors for graph coloring.
    pub domain_size: usize,
    pub p: f64,
    pub cost_range: (i64, i64),
    pub instances: usize,
    pub repeats: usize,
    pub algo: Algo,
    pub seed: u64,
    pub output: PathBuf,
    #[serde(default = "default_dsa_p")]
    pub dsa_p: f64,
    /// When false the elapsed_ms column is written as 0 so traces are
    /// reproducible byte for byte.
    #[serde(default = "default_true")]
    pub record_wall_time: bool,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub stop: StopSection,
}

fn default_dsa_p() -> f64 {
    DsaParams::default().p
}

fn default_true() -> bool {
    true
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: BenchmarkConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), source: Box::new(e) })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` and applies the `BENCH_SEED` override.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml(&text, path)?;
        if let Ok(raw) = std::env::var(SEED_ENV) {
            cfg.seed = raw.trim().parse().map_err(|_| ConfigError::BadSeedOverride(raw))?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad(format!("p = {} must lie in (0, 1]", self.p));
        }
        let (lo, hi) = self.cost_range;
        if lo > hi || lo < 0 {
            return bad(format!("cost_range [{lo}, {hi}] must satisfy 0 <= lo <= hi"));
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        if self.domain_size < 1 || (self.family == Family::GraphColoring && self.domain_size < 2) {
            return bad(format!("domain_size {} too small for {}", self.domain_size, self.family));
        }
        if self.instances == 0 || self.repeats == 0 {
            return bad("instances and repeats must be positive".into());
        }
        if self.stop.max_iter.is_none() && self.stop.max_time_ms.is_none() {
            return bad("[stop] needs max_iter and/or max_time_ms".into());
        }
        DsaParams { p: self.dsa_p }.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.aed_params().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    /// Family defaults with the `[engine]` overrides applied.
    pub fn aed_params(&self) -> Params {
        let base = match self.family {
            Family::RandomDcop => AedParams::default(),
            Family::GraphColoring => AedParams::graph_coloring(),
        };
        let e = &self.engine;
        AedParams {
            initial_population: e.initial_population.unwrap_or(base.initial_population),
            exchange_rate: e.er.unwrap_or(base.exchange_rate),
            r_max: e.r_max.unwrap_or(base.r_max),
            o_max: e.o_max.unwrap_or(base.o_max),
            alpha_schedule: match &e.alpha_schedule {
                Some(s) => s.iter().map(|a| AlphaStage { until: a.until, alpha: a.alpha }).collect(),
                None => base.alpha_schedule,
            },
            beta: e.beta.unwrap_or(base.beta),
            migration_interval: e.mi.unwrap_or(base.migration_interval),
        }
    }

    pub fn root_rule(&self) -> RootRule {
        self.engine.root.map_or(RootRule::MaxDegree, RootRule::Fixed)
    }

    pub fn dsa_params(&self) -> DsaParams {
        DsaParams { p: self.dsa_p }
    }

    pub fn stop_condition(&self) -> StopCondition {
        StopCondition {
            max_iter: self.stop.max_iter,
            max_time: self.stop.max_time_ms.map(Duration::from_millis),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
family = "random-dcop"
n = 70
domain_size = 10
p = 0.1
cost_range = [1, 100]
instances = 2
repeats = 3
algo = "aed"
seed = 7
output = "out"

[stop]
max_iter = 1000
"#;

    fn parse(text: &str) -> Result<BenchmarkConfig, ConfigError> {
        BenchmarkConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn defaults_follow_the_family() {
        let cfg = parse(BASIC).unwrap();
        assert_eq!(cfg.aed_params(), AedParams::default());
        assert_eq!(cfg.dsa_p, 0.8);
        assert!(cfg.record_wall_time);
        assert_eq!(cfg.stop_condition(), StopCondition::iterations(1000));
        let gc = parse(&BASIC.replace("random-dcop", "graph-coloring")).unwrap();
        assert_eq!(gc.aed_params().beta, 2.0);
    }

    #[test]
    fn engine_overrides() {
        let text = format!(
            "{BASIC}\n[engine]\nin = 10\ner = 20\nroot = 3\nalpha_schedule = [{{ until = 5, alpha = 2.0 }}, {{ alpha = 1.0 }}]\n"
        );
        let cfg = parse(&text).unwrap();
        let p = cfg.aed_params();
        assert_eq!((p.initial_population, p.exchange_rate), (10, 20));
        assert_eq!(p.alpha_schedule.len(), 2);
        assert_eq!(p.alpha_at(5), 2.0);
        assert_eq!(p.alpha_at(6), 1.0);
        assert_eq!(cfg.root_rule(), RootRule::Fixed(3));
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(parse(&BASIC.replace("p = 0.1", "p = 0.0")).is_err());
        assert!(parse(&BASIC.replace("[1, 100]", "[5, 1]")).is_err());
        assert!(parse(&BASIC.replace("max_iter = 1000", "")).is_err());
        assert!(parse(&format!("{BASIC}\n[engine]\ner = 0\n")).is_err());
        assert!(parse(&format!("{BASIC}\nbogus = 1\n")).is_err());
    }
}
