use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AggregateRow, HarnessError, Mode, RunRecord, HOT_WARMUP_RUNS};

pub const RUNS_HEADER: &str = "backend,query_id,scale,mode,run_index,elapsed_ms,result_count";
pub const AGGREGATE_HEADER: &str = "backend,query_id,scale,mode,n,mean_ms,stddev_ms,ci_low_ms,ci_high_ms";

/// Where and how a benchmark ran. Captured once and embedded verbatim in
/// every emitted report so re-emission stays byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentSnapshot {
    pub host: String,
    pub os: String,
    pub arch: String,
    pub cpus: usize,
    pub timestamp: String,
    pub artifact_version: String,
    pub execution: String,
    pub hot_warmup_runs: usize,
}

impl EnvironmentSnapshot {
    pub fn capture() -> Self {
        let host = std::env::var("HOSTNAME")
            .ok()
            .or_else(|| std::fs::read_to_string("/etc/hostname").ok())
            .map(|h| h.trim().to_owned())
            .filter(|h| !h.is_empty())
            .unwrap_or_else(|| "unknown".to_owned());
        EnvironmentSnapshot {
            host,
            os: std::env::consts::OS.to_owned(),
            arch: std::env::consts::ARCH.to_owned(),
            cpus: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            artifact_version: env!("CARGO_PKG_VERSION").to_owned(),
            execution: if crate::Execution::default().is_parallel() {
                "parallel".into()
            } else {
                "sequential".into()
            },
            hot_warmup_runs: HOT_WARMUP_RUNS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub scale: u64,
    pub mean_ms: f64,
    pub ci_low_ms: f64,
    pub ci_high_ms: f64,
}

/// One backend's latency curve over scale, per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub backend: String,
    pub cold: Vec<ChartPoint>,
    pub hot: Vec<ChartPoint>,
}

/// Chart data for one query: x is the scale factor, y the mean latency with
/// its 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub query_id: String,
    pub unit: String,
    pub environment: EnvironmentSnapshot,
    pub series: Vec<ChartSeries>,
}

pub fn chart_data(rows: &[AggregateRow], env: &EnvironmentSnapshot) -> Vec<ChartData> {
    let mut by_query: BTreeMap<&str, BTreeMap<&str, ChartSeries>> = BTreeMap::new();
    for r in rows {
        let series = by_query
            .entry(&r.query_id)
            .or_default()
            .entry(&r.backend)
            .or_insert_with(|| ChartSeries {
                backend: r.backend.clone(),
                cold: Vec::new(),
                hot: Vec::new(),
            });
        let point = ChartPoint {
            scale: r.scale,
            mean_ms: r.mean_ms,
            ci_low_ms: r.ci_low_ms,
            ci_high_ms: r.ci_high_ms,
        };
        match r.mode {
            Mode::Cold => series.cold.push(point),
            Mode::Hot => series.hot.push(point),
        }
    }
    by_query
        .into_iter()
        .map(|(query_id, series)| ChartData {
            query_id: query_id.to_owned(),
            unit: "ms".into(),
            environment: env.clone(),
            series: series
                .into_values()
                .map(|mut s| {
                    s.cold.sort_by_key(|p| p.scale);
                    s.hot.sort_by_key(|p| p.scale);
                    s
                })
                .collect(),
        })
        .collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &str) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    w.write_record(header.split(',')).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_runs_csv(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    write_csv(path, records, RUNS_HEADER)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<(), HarnessError> {
    write_csv(path, rows, AGGREGATE_HEADER)
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header = r.headers().map_err(|e| io_err(path, e))?.iter().collect::<Vec<_>>().join(",");
    if header != RUNS_HEADER {
        return Err(io_err(path, format!("expected header {RUNS_HEADER:?}, found {header:?}")));
    }
    r.deserialize()
        .collect::<Result<Vec<RunRecord>, _>>()
        .map_err(|e| io_err(path, e))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ReportFiles {
    pub runs_csv: Option<PathBuf>,
    pub aggregate_csv: PathBuf,
    pub environment_json: PathBuf,
    pub charts: Vec<PathBuf>,
}

impl ReportFiles {
    pub fn all(&self) -> Vec<&Path> {
        let mut out: Vec<&Path> = self.runs_csv.iter().map(PathBuf::as_path).collect();
        out.push(&self.aggregate_csv);
        out.push(&self.environment_json);
        out.extend(self.charts.iter().map(PathBuf::as_path));
        out
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Writes `aggregated.csv`, `environment.json`, `charts/<query>.json` and,
/// when records are given, `runs.csv` under `dir`.
pub fn emit_report(
    dir: &Path,
    rows: &[AggregateRow],
    records: Option<&[RunRecord]>,
    env: &EnvironmentSnapshot,
) -> Result<ReportFiles, HarnessError> {
    let charts_dir = dir.join("charts");
    std::fs::create_dir_all(&charts_dir).map_err(|e| io_err(&charts_dir, e))?;
    let mut files = ReportFiles {
        aggregate_csv: dir.join("aggregated.csv"),
        environment_json: dir.join("environment.json"),
        ..Default::default()
    };
    if let Some(records) = records {
        let path = dir.join("runs.csv");
        write_runs_csv(&path, records)?;
        files.runs_csv = Some(path);
    }
    write_aggregate_csv(&files.aggregate_csv, rows)?;
    write_json(&files.environment_json, env)?;
    for chart in chart_data(rows, env) {
        let path = charts_dir.join(format!("{}.json", chart.query_id));
        write_json(&path, &chart)?;
        files.charts.push(path);
    }
    Ok(files)
}
