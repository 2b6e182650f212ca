use std::fs;
use std::path::Path;

use aed_bench::config::{Algo, BenchmarkConfig};
use aed_bench::experiment::run_experiment;
use aed_bench::summary::{load_trace, summarize};
use aed_bench::trace::HEADER;

fn config(out: &Path, extra: &str) -> BenchmarkConfig {
    let text = format!(
        r#"
family = "random-dcop"
n = 8
domain_size = 3
p = 0.4
cost_range = [1, 100]
instances = 2
repeats = 3
algo = "aed"
seed = 11
output = "{}"
record_wall_time = false
{extra}

[engine]
in = 12
er = 4

[stop]
max_iter = 60
"#,
        out.display()
    );
    BenchmarkConfig::from_toml(&text, Path::new("inline.toml")).unwrap()
}

fn csvs(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn two_instances_three_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    let summary = run_experiment(&cfg, None).unwrap();
    assert_eq!(summary.runs.len(), 6);
    assert_eq!(summary.failed, 0);
    assert_eq!(csvs(dir.path()).len(), 6);
    let jsons: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|e| e == "json"))
        .collect();
    assert_eq!(jsons.len(), 1);
    assert!(dir.path().join("random-dcop_aed_summary.json").exists());
    assert_eq!(fs::read_dir(dir.path().join("instances")).unwrap().count(), 2);

    let text = fs::read_to_string(dir.path().join("random-dcop_1_2_aed.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    // initialization record plus one row per optimization iteration
    assert_eq!(lines.count(), 61);
}

#[test]
fn repeated_runs_write_identical_traces() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&config(a.path(), ""), None).unwrap();
    run_experiment(&config(b.path(), ""), None).unwrap();
    run_experiment(&config(a.path(), ""), Some(Algo::Dsa)).unwrap();
    run_experiment(&config(b.path(), ""), Some(Algo::Dsa)).unwrap();
    let (fa, fb) = (csvs(a.path()), csvs(b.path()));
    assert_eq!(fa.len(), 12);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn run_errors_are_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), "");
    // agent 40 does not exist, so building the pseudo-tree fails for every run
    cfg.engine.root = Some(40);
    let summary = run_experiment(&cfg, None).unwrap();
    assert_eq!(summary.failed, 6);
    assert!(summary.runs.iter().all(|r| r.error.is_some() && r.trace.is_none()));
    assert!(csvs(dir.path()).is_empty());
}

#[test]
fn summaries_compare_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "");
    run_experiment(&cfg, Some(Algo::Aed)).unwrap();
    run_experiment(&cfg, Some(Algo::Dsa)).unwrap();
    let traces: Vec<_> = csvs(dir.path()).iter().map(|p| load_trace(p).unwrap()).collect();
    let s = summarize(&traces).unwrap();
    assert_eq!(s.algos.len(), 2);
    assert_eq!(s.algos["aed"].runs, 6);
    assert_eq!(s.algos["aed"].mean_curve.len(), 61);
    assert_eq!(s.gaps.len(), 2);
    assert!(s.gaps.iter().all(|g| g.percent.is_finite()));
}

#[test]
fn io_failures_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = run_experiment(&config(&blocker.join("sub"), ""), None).unwrap_err();
    assert!(err.to_string().contains("file"), "{err}");
}
