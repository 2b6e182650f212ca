//! CSV trace files: `iteration,cost,elapsed_ms,messages`.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub cost: i64,
    pub elapsed_ms: f64,
    pub messages: u64,
}

pub const HEADER: &str = "iteration,cost,elapsed_ms,messages";

pub fn write_trace_csv(path: &Path, rows: &[TraceRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().collect()
}
