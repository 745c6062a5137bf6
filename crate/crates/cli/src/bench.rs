use std::path::{Path, PathBuf};

use clap::Args;
use kgbench_core::harness::{
    aggregate, emit_report, run_benchmark, BenchPlan, CellKey, EnvironmentSnapshot, Mode, DEFAULT_RUNS,
};
use kgbench_core::scale::{duplications_for_factor, DEFAULT_MAX_ELEMENTS};
use kgbench_core::workload::{Paradigm, Workload};
use serde::{Deserialize, Serialize};

use crate::{load_bundle, usage, write_json, CmdResult, DataContext, Failure};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// CSV bundle directory.
    dataset: Option<PathBuf>,
    /// JSON config; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    backends: Option<Vec<Paradigm>>,
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<Mode>>,
    /// Workload JSON; the built-in adverse-event workload when omitted.
    #[arg(long)]
    workload: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Check every backend against the oracle before timing.
    #[arg(long)]
    verify: bool,
}

/// Everything that defines a benchmark run. Written back into the manifest
/// fully resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: Option<PathBuf>,
    pub scales: Vec<u64>,
    pub backends: Vec<Paradigm>,
    pub modes: Vec<Mode>,
    pub workload: Option<PathBuf>,
    pub runs: usize,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub verify: bool,
    pub max_elements: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: None,
            scales: vec![1, 8, 128],
            backends: Paradigm::BENCHMARKED.to_vec(),
            modes: vec![Mode::Cold, Mode::Hot],
            workload: None,
            runs: DEFAULT_RUNS,
            out: None,
            seed: None,
            verify: false,
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }
}

impl BenchConfig {
    fn resolve(out: Option<&Path>, seed: Option<u64>, args: &BenchArgs) -> CmdResult<Self> {
        let mut c = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
            }
            None => BenchConfig::default(),
        };
        if let Some(d) = &args.dataset {
            c.dataset = Some(d.clone());
        }
        if let Some(s) = &args.scales {
            c.scales = s.clone();
        }
        if let Some(b) = &args.backends {
            c.backends = b.clone();
        }
        if let Some(m) = &args.modes {
            c.modes = m.clone();
        }
        if let Some(w) = &args.workload {
            c.workload = Some(w.clone());
        }
        if let Some(r) = args.runs {
            c.runs = r;
        }
        if let Some(o) = out {
            c.out = Some(o.to_owned());
        }
        c.seed = seed.or(c.seed);
        c.verify |= args.verify;
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> CmdResult {
        let dataset = self.dataset.as_ref().ok_or_else(|| usage("no dataset given"))?;
        if !dataset.is_dir() {
            return Err(usage(format!("dataset {} does not exist", dataset.display())));
        }
        if let Some(w) = &self.workload {
            if !w.is_file() {
                return Err(usage(format!("workload {} does not exist", w.display())));
            }
        }
        if self.out.is_none() {
            return Err(usage("`bench` needs --out"));
        }
        if self.runs < 2 {
            return Err(usage(format!("runs must be at least 2, got {}", self.runs)));
        }
        if self.scales.is_empty() || self.backends.is_empty() || self.modes.is_empty() {
            return Err(usage("scales, backends and modes must be non-empty"));
        }
        for &s in &self.scales {
            duplications_for_factor(s).map_err(|e| Failure::Usage(e.into()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ScaleRow {
    factor: u64,
    #[serde(flatten)]
    report: Option<kgbench_core::metrics::MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a BenchConfig,
    workload: &'a str,
    environment: &'a EnvironmentSnapshot,
    cells: &'a [CellKey],
    files: Vec<String>,
}

pub fn cmd_bench(out: Option<&Path>, seed: Option<u64>, verbose: bool, args: &BenchArgs) -> CmdResult {
    let config = BenchConfig::resolve(out, seed, args)?;
    let out = config.out.clone().expect("checked");
    let dataset = config.dataset.clone().expect("checked");

    let workload = match &config.workload {
        Some(path) => Workload::load(path).data("loading workload")?,
        None => Workload::faers_default(),
    };
    workload.validate().data("validating workload")?;
    let kg = load_bundle(&dataset)?;
    if verbose {
        eprintln!("{}: {} nodes, {} edges", dataset.display(), kg.node_count(), kg.edge_count());
    }

    let plan = BenchPlan {
        scales: config.scales.clone(),
        backends: config.backends.clone(),
        queries: workload.queries.clone(),
        runs: config.runs,
        modes: config.modes.clone(),
        shuffle_seed: config.seed,
        verify: config.verify,
        max_elements: config.max_elements,
    };
    let mut log = |line: &str| {
        if verbose {
            eprintln!("{line}");
        }
    };
    let outcome = run_benchmark(&kg, &plan, &mut log)?;
    drop(kg);

    let rows = aggregate(&outcome.records)?;
    let env = EnvironmentSnapshot::capture();
    let report = emit_report(&out, &rows, Some(&outcome.records), &env)?;
    let metrics_path = out.join("metrics.json");
    let metrics: Vec<ScaleRow> = outcome
        .metrics
        .iter()
        .map(|m| ScaleRow {
            factor: m.scale,
            report: m.metrics.clone(),
            error: m.error.clone(),
        })
        .collect();
    write_json(&metrics_path, &metrics)?;

    let mut files: Vec<String> = report
        .all()
        .into_iter()
        .chain([metrics_path.as_path()])
        .map(|p| p.strip_prefix(&out).unwrap_or(p).display().to_string())
        .collect();
    files.sort();
    let manifest = Manifest {
        config: &config,
        workload: &workload.name,
        environment: &env,
        cells: &outcome.cells,
        files,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    if verbose {
        eprintln!("{} cells, report in {}", outcome.cells.len(), out.display());
    }
    Ok(())
}
