//! Measurement protocol, aggregation and report emission.
//!
//! Cold mode clears every lazily built structure before each timed execution.
//! Hot mode runs one discarded warm-up and then times every run with caches
//! retained. Only `execute` sits inside the timed region, and timed regions
//! are serialized process-wide.

mod orchestrate;
mod report;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Backend, EngineError};
use crate::par::Execution;
use crate::workload::ExecutablePlan;

pub use orchestrate::{
    run_benchmark, verify_equivalence, BenchOutcome, BenchPlan, EquivalenceFailure, ScaleMetrics,
};
pub use report::{
    chart_data, emit_report, read_runs_csv, write_aggregate_csv, write_runs_csv, ChartData, ChartPoint,
    ChartSeries, EnvironmentSnapshot, ReportFiles, AGGREGATE_HEADER, RUNS_HEADER,
};
pub use stats::{summarize, t_critical_95, Summary};

/// Default number of timed runs per cell.
pub const DEFAULT_RUNS: usize = 31;

/// Untimed executions before the first timed hot run.
pub const HOT_WARMUP_RUNS: usize = 1;

/// Smallest reported latency; sub-microsecond runs are clamped up to it.
pub const MIN_ELAPSED_MS: f64 = 0.001;

static TIMING: Mutex<()> = Mutex::new(());

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(
        "{backend}/{query_id} {mode} run {run_index} returned {found} rows, earlier runs returned {expected}"
    )]
    NonDeterministic {
        backend: String,
        query_id: String,
        mode: Mode,
        run_index: u32,
        expected: u64,
        found: u64,
    },
    #[error("cell {0} has fewer than two runs")]
    TooFewRuns(CellKey),
    #[error("at least one timed run is required")]
    NoRuns,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{} equivalence failure(s): {}", .0.len(), .0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; "))]
    Equivalence(Vec<EquivalenceFailure>),
    #[error(transparent)]
    Scale(#[from] crate::scale::ScaleError),
    #[error(transparent)]
    Workload(#[from] crate::workload::WorkloadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cold,
    Hot,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cold => "cold",
            Mode::Hot => "hot",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cold" => Ok(Mode::Cold),
            "hot" => Ok(Mode::Hot),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub backend: String,
    pub query_id: String,
    pub scale: u64,
    pub mode: Mode,
    pub run_index: u32,
    pub elapsed_ms: f64,
    pub result_count: u64,
}

impl RunRecord {
    pub fn cell(&self) -> CellKey {
        CellKey {
            backend: self.backend.clone(),
            query_id: self.query_id.clone(),
            scale: self.scale,
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub backend: String,
    pub query_id: String,
    pub scale: u64,
    pub mode: Mode,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/x{}/{}", self.backend, self.query_id, self.scale, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub backend: String,
    pub query_id: String,
    pub scale: u64,
    pub mode: Mode,
    pub n: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub ci_low_ms: f64,
    pub ci_high_ms: f64,
}

impl AggregateRow {
    pub fn cell(&self) -> CellKey {
        CellKey {
            backend: self.backend.clone(),
            query_id: self.query_id.clone(),
            scale: self.scale,
            mode: self.mode,
        }
    }

    pub fn summary(&self) -> Summary {
        Summary {
            n: self.n,
            mean: self.mean_ms,
            stddev: self.stddev_ms,
            ci_low: self.ci_low_ms,
            ci_high: self.ci_high_ms,
        }
    }
}

/// Milliseconds at microsecond resolution, never below [`MIN_ELAPSED_MS`].
pub fn to_millis(d: Duration) -> f64 {
    (d.as_micros() as f64 / 1000.0).max(MIN_ELAPSED_MS)
}

/// Runs one (backend, query, scale, mode) cell: `runs` timed executions.
pub fn run_cell(
    engine: &mut dyn Backend,
    plan: &ExecutablePlan,
    mode: Mode,
    runs: usize,
    scale: u64,
) -> Result<Vec<RunRecord>, HarnessError> {
    if runs == 0 {
        return Err(HarnessError::NoRuns);
    }
    let _serial = TIMING.lock().unwrap_or_else(|p| p.into_inner());
    let backend = engine.paradigm().to_string();
    if mode == Mode::Hot {
        for _ in 0..HOT_WARMUP_RUNS {
            engine.execute(plan)?;
        }
    }
    let mut records = Vec::with_capacity(runs);
    for i in 1..=runs {
        if mode == Mode::Cold {
            engine.clear_caches();
        }
        let start = Instant::now();
        let result = engine.execute(plan);
        let elapsed = start.elapsed();
        let count = result?.len() as u64;
        if let Some(first) = records.first().map(|r: &RunRecord| r.result_count) {
            if first != count {
                return Err(HarnessError::NonDeterministic {
                    backend,
                    query_id: plan.query_id().to_owned(),
                    mode,
                    run_index: i as u32,
                    expected: first,
                    found: count,
                });
            }
        }
        records.push(RunRecord {
            backend: backend.clone(),
            query_id: plan.query_id().to_owned(),
            scale,
            mode,
            run_index: i as u32,
            elapsed_ms: to_millis(elapsed),
            result_count: count,
        });
    }
    Ok(records)
}

/// Groups records by cell and summarizes each; rows come back sorted by cell.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>, HarnessError> {
    aggregate_with(records, Execution::default())
}

pub fn aggregate_with(records: &[RunRecord], exec: Execution) -> Result<Vec<AggregateRow>, HarnessError> {
    let mut cells: BTreeMap<CellKey, Vec<f64>> = BTreeMap::new();
    for r in records {
        cells.entry(r.cell()).or_default().push(r.elapsed_ms);
    }
    let cells: Vec<(CellKey, Vec<f64>)> = cells.into_iter().collect();
    exec.map(&cells, |(key, values)| {
        let s = summarize(values).ok_or_else(|| HarnessError::TooFewRuns(key.clone()))?;
        Ok(AggregateRow {
            backend: key.backend.clone(),
            query_id: key.query_id.clone(),
            scale: key.scale,
            mode: key.mode,
            n: s.n,
            mean_ms: s.mean,
            stddev_ms: s.stddev,
            ci_low_ms: s.ci_low,
            ci_high_ms: s.ci_high,
        })
    })
    .into_iter()
    .collect()
}
