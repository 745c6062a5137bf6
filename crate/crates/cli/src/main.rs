//! `kgbench`: convert, measure, scale, benchmark and advise on knowledge graphs.

mod bench;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgbench_core::advisor::{advise_with, explain, Rules, WorkloadProfile};
use kgbench_core::harness::{aggregate, emit_report, read_runs_csv, EnvironmentSnapshot, HarnessError};
use kgbench_core::ingest::{load_csv_bundle, to_document_dump, to_multimodel_dump, CsvExportBundle};
use kgbench_core::metrics::{compute_all, render_table, MetricsReport};
use kgbench_core::scale::{duplicate_merge, duplications_for_factor};
use kgbench_core::synth::{generate_synthetic, SyntheticSpec};
use kgbench_core::{Execution, KnowledgeGraph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "kgbench", version, about = "Knowledge-graph metrics and paradigm benchmarking")]
struct Cli {
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for synthetic generation and backend ordering.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Progress messages on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CSV bundle to document and multi-model dumps (`<out>/document`, `<out>/multimodel`).
    Convert { bundle: PathBuf },
    /// Scale, connectivity density and semantic richness of a CSV bundle.
    Metrics(MetricsArgs),
    /// Grow a CSV bundle by `n` disjoint self-duplications.
    Scale {
        bundle: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Generate a synthetic CSV bundle.
    Gen(GenArgs),
    /// Run the benchmark protocol.
    Bench(bench::BenchArgs),
    /// Re-aggregate a per-run CSV into report files.
    Report { runs: PathBuf },
    /// Rank paradigms for a metrics report and a query mix.
    Advise(AdviseArgs),
}

#[derive(Debug, Args)]
struct MetricsArgs {
    bundle: PathBuf,
    /// Comma-separated duplication factors to report alongside the input.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    scales: Vec<u64>,
    /// Print JSON on stdout instead of the table.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// JSON synthetic spec; overrides the preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "faers")]
    preset: Preset,
    #[arg(long, default_value_t = 14_000)]
    nodes: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Preset {
    Faers,
    Uniform,
}

#[derive(Debug, Args)]
struct AdviseArgs {
    /// Metrics JSON as written by `metrics` (the first row is used).
    metrics: PathBuf,
    #[arg(long, default_value = "0.25,0.25,0.25,0.25")]
    tier_weights: WorkloadProfile,
    /// JSON rules file overriding thresholds.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Print JSON on stdout instead of the text report.
    #[arg(long)]
    json: bool,
}

/// Error classes, mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Protocol(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Protocol(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, e) = match self {
            Failure::Usage(e) => ("usage", e),
            Failure::Data(e) => ("data", e),
            Failure::Protocol(e) => ("protocol", e),
        };
        write!(f, "{kind} error: {e:#}")
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

trait DataContext<T> {
    fn data(self, what: impl fmt::Display) -> CmdResult<T>;
}

impl<T, E: std::error::Error + Send + Sync + 'static> DataContext<T> for Result<T, E> {
    fn data(self, what: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| Failure::Data(anyhow::Error::new(e).context(what.to_string())))
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Scale(_) => Failure::Usage(e.into()),
            HarnessError::Engine(_) | HarnessError::Io { .. } | HarnessError::Workload(_) => Failure::Data(e.into()),
            _ => Failure::Protocol(e.into()),
        }
    }
}

pub fn usage(msg: impl fmt::Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

pub fn require_out(out: &Option<PathBuf>, command: &str) -> CmdResult<PathBuf> {
    out.clone().ok_or_else(|| usage(format!("`{command}` needs --out")))
}

pub fn load_bundle(path: &Path) -> CmdResult<KnowledgeGraph> {
    if !path.is_dir() {
        return Err(usage(format!("{}: not a CSV bundle directory", path.display())));
    }
    let bundle = CsvExportBundle::read_dir(path).data(format!("reading {}", path.display()))?;
    load_csv_bundle(&bundle, Execution::default()).data(format!("loading {}", path.display()))
}

fn write_bundle(kg: &KnowledgeGraph, dir: &Path) -> CmdResult {
    CsvExportBundle::from_graph(kg)
        .and_then(|b| b.write_dir(dir))
        .data(format!("writing {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).data(format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).data(format!("writing {}", path.display()))
}

/// One row of the metrics JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub factor: u64,
    #[serde(flatten)]
    pub report: MetricsReport,
}

pub fn metrics_rows(kg: &KnowledgeGraph, factors: &[u64]) -> CmdResult<Vec<MetricsRow>> {
    factors
        .iter()
        .map(|&factor| {
            let n = duplications_for_factor(factor).map_err(|e| Failure::Usage(e.into()))?;
            let report = if n == 0 {
                compute_all(kg)
            } else {
                compute_all(&duplicate_merge(kg, n).data("scaling")?)
            };
            Ok(MetricsRow {
                factor,
                report: report.data(format!("metrics at x{factor}"))?,
            })
        })
        .collect()
}

pub fn metrics_table(rows: &[MetricsRow]) -> String {
    let rows: Vec<(String, MetricsReport)> = rows.iter().map(|r| (format!("{}x", r.factor), r.report.clone())).collect();
    render_table(&rows)
}

fn cmd_convert(cli: &Cli, bundle: &Path) -> CmdResult {
    let out = require_out(&cli.out, "convert")?;
    let kg = load_bundle(bundle)?;
    let doc = out.join("document");
    to_document_dump(&kg).write_dir(&doc).data(format!("writing {}", doc.display()))?;
    let mm = out.join("multimodel");
    to_multimodel_dump(&kg).write_dir(&mm).data(format!("writing {}", mm.display()))?;
    if cli.verbose {
        eprintln!("wrote {} and {}", doc.display(), mm.display());
    }
    Ok(())
}

fn cmd_metrics(cli: &Cli, args: &MetricsArgs) -> CmdResult {
    let kg = load_bundle(&args.bundle)?;
    let rows = metrics_rows(&kg, &args.scales)?;
    if let Some(out) = &cli.out {
        write_json(out, &rows)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
    } else {
        print!("{}", metrics_table(&rows));
    }
    Ok(())
}

fn cmd_scale(cli: &Cli, bundle: &Path, n: u32) -> CmdResult {
    let out = require_out(&cli.out, "scale")?;
    let kg = load_bundle(bundle)?;
    let scaled = duplicate_merge(&kg, n).map_err(|e| Failure::Usage(e.into()))?;
    if cli.verbose {
        eprintln!("{} nodes, {} edges", scaled.node_count(), scaled.edge_count());
    }
    write_bundle(&scaled, &out)
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> CmdResult {
    let out = require_out(&cli.out, "gen")?;
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).data(format!("reading {}", path.display()))?;
            serde_json::from_str::<SyntheticSpec>(&text).data(format!("parsing {}", path.display()))?
        }
        None => match args.preset {
            Preset::Faers => SyntheticSpec::faers_like(args.nodes, 0),
            Preset::Uniform => SyntheticSpec::uniform(args.nodes, 8, 11, 11.0 / 14.0, 0),
        },
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let kg = generate_synthetic(&spec).map_err(|e| Failure::Usage(e.into()))?;
    if cli.verbose {
        eprintln!("{} nodes, {} edges", kg.node_count(), kg.edge_count());
    }
    write_bundle(&kg, &out)
}

fn cmd_report(cli: &Cli, runs: &Path) -> CmdResult {
    let out = require_out(&cli.out, "report")?;
    let records = read_runs_csv(runs)?;
    let rows = aggregate(&records)?;
    let env_path = runs.with_file_name("environment.json");
    let env = match std::fs::read_to_string(&env_path) {
        Ok(text) => serde_json::from_str(&text).data(format!("parsing {}", env_path.display()))?,
        Err(_) => EnvironmentSnapshot::capture(),
    };
    let files = emit_report(&out, &rows, None, &env)?;
    if cli.verbose {
        for f in files.all() {
            eprintln!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn read_metrics(path: &Path) -> CmdResult<MetricsReport> {
    let text = std::fs::read_to_string(path).data(format!("reading {}", path.display()))?;
    if let Ok(rows) = serde_json::from_str::<Vec<MetricsRow>>(&text) {
        return rows
            .into_iter()
            .next()
            .map(|r| r.report)
            .ok_or_else(|| Failure::Data(anyhow::anyhow!("{}: no metrics rows", path.display())));
    }
    serde_json::from_str::<MetricsReport>(&text).data(format!("parsing {}", path.display()))
}

fn cmd_advise(cli: &Cli, args: &AdviseArgs) -> CmdResult {
    let metrics = read_metrics(&args.metrics)?;
    let rules = match &args.rules {
        Some(path) => Rules::load(path).data("loading rules")?,
        None => Rules::default(),
    };
    let rec = advise_with(&metrics, &args.tier_weights, &rules);
    if let Some(out) = &cli.out {
        write_json(out, &rec)?;
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rec).expect("recommendation serializes"));
    } else {
        print!("{}", explain(&rec));
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Convert { bundle } => cmd_convert(cli, bundle),
        Command::Metrics(args) => cmd_metrics(cli, args),
        Command::Scale { bundle, n } => cmd_scale(cli, bundle, *n),
        Command::Gen(args) => cmd_gen(cli, args),
        Command::Bench(args) => bench::cmd_bench(cli.out.as_deref(), cli.seed, cli.verbose, args),
        Command::Report { runs } => cmd_report(cli, runs),
        Command::Advise(args) => cmd_advise(cli, args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
