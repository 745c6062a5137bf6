use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{ingest_graph, Backend};
use crate::metrics::{compute_all, MetricsReport};
use crate::model::KnowledgeGraph;
use crate::scale::{duplicate_merge_with, duplications_for_factor, DuplicationOptions, DEFAULT_MAX_ELEMENTS};
use crate::workload::{compile, Paradigm, QuerySpec};

use super::{run_cell, CellKey, HarnessError, Mode, RunRecord, DEFAULT_RUNS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub scales: Vec<u64>,
    pub backends: Vec<Paradigm>,
    pub queries: Vec<QuerySpec>,
    pub runs: usize,
    pub modes: Vec<Mode>,
    /// Shuffles backend order per (scale, query) instead of round-robin.
    pub shuffle_seed: Option<u64>,
    /// Checks every backend against the oracle before timing each scale.
    pub verify: bool,
    pub max_elements: u64,
}

impl BenchPlan {
    pub fn new(queries: Vec<QuerySpec>) -> Self {
        BenchPlan {
            scales: vec![1, 8, 128],
            backends: Paradigm::BENCHMARKED.to_vec(),
            queries,
            runs: DEFAULT_RUNS,
            modes: vec![Mode::Cold, Mode::Hot],
            shuffle_seed: None,
            verify: false,
            max_elements: DEFAULT_MAX_ELEMENTS,
        }
    }

    /// Every cell the plan will execute, in report order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &scale in &self.scales {
            for q in &self.queries {
                for &mode in &self.modes {
                    for b in &self.backends {
                        cells.push(CellKey {
                            backend: b.to_string(),
                            query_id: q.id.clone(),
                            scale,
                            mode,
                        });
                    }
                }
            }
        }
        cells.sort();
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMetrics {
    pub scale: u64,
    pub metrics: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub records: Vec<RunRecord>,
    pub metrics: Vec<ScaleMetrics>,
    pub cells: Vec<CellKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceFailure {
    pub query_id: String,
    pub backend: Paradigm,
    pub oracle_rows: usize,
    pub backend_rows: usize,
}

impl fmt::Display for EquivalenceFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} on {}: {} rows vs oracle {}",
            self.query_id, self.backend, self.backend_rows, self.oracle_rows
        )
    }
}

/// Runs every query on every backend and on the oracle; fails listing each
/// (query, backend) whose result bag differs.
pub fn verify_equivalence(
    kg: &KnowledgeGraph,
    queries: &[QuerySpec],
    backends: &[Paradigm],
) -> Result<(), HarnessError> {
    let mut oracle = ingest_graph(Paradigm::Oracle, kg);
    let mut engines: Vec<Box<dyn Backend>> = backends
        .iter()
        .filter(|&&p| p != Paradigm::Oracle)
        .map(|&p| ingest_graph(p, kg))
        .collect();
    let mut failures = Vec::new();
    for q in queries {
        let expected = oracle.execute(&compile(q, Paradigm::Oracle)?)?;
        for e in engines.iter_mut() {
            let got = e.execute(&compile(q, e.paradigm())?)?;
            if !got.same_bag(&expected) {
                failures.push(EquivalenceFailure {
                    query_id: q.id.clone(),
                    backend: e.paradigm(),
                    oracle_rows: expected.len(),
                    backend_rows: got.len(),
                });
            }
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Equivalence(failures))
    }
}

/// For each scale: duplicate, compute metrics, ingest every backend, then
/// time each query cold and hot on every backend. Backends take turns per
/// query so no backend always runs first.
pub fn run_benchmark(
    base: &KnowledgeGraph,
    plan: &BenchPlan,
    log: &mut dyn FnMut(&str),
) -> Result<BenchOutcome, HarnessError> {
    let mut records = Vec::new();
    let mut metrics = Vec::new();
    for &scale in &plan.scales {
        let n = duplications_for_factor(scale)?;
        let kg = duplicate_merge_with(
            base,
            n,
            DuplicationOptions {
                max_elements: plan.max_elements,
                ..Default::default()
            },
        )?;
        log(&format!(
            "scale x{scale}: {} nodes, {} edges",
            kg.node_count(),
            kg.edge_count()
        ));
        metrics.push(match compute_all(&kg) {
            Ok(m) => ScaleMetrics {
                scale,
                metrics: Some(m),
                error: None,
            },
            Err(e) => ScaleMetrics {
                scale,
                metrics: None,
                error: Some(e.to_string()),
            },
        });
        if plan.verify {
            verify_equivalence(&kg, &plan.queries, &plan.backends)?;
            log(&format!("scale x{scale}: all backends match the oracle"));
        }
        let mut engines: Vec<Box<dyn Backend>> =
            plan.backends.iter().map(|&p| ingest_graph(p, &kg)).collect();
        drop(kg);
        for (qi, q) in plan.queries.iter().enumerate() {
            let plans = engines
                .iter()
                .map(|e| compile(q, e.paradigm()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut order: Vec<usize> = (0..engines.len()).collect();
            if let Some(seed) = plan.shuffle_seed {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (scale << 16) ^ qi as u64);
                order.shuffle(&mut rng);
            } else if !order.is_empty() {
                let k = qi % order.len();
                order.rotate_left(k);
            }
            for &mode in &plan.modes {
                for &i in &order {
                    let recs = run_cell(engines[i].as_mut(), &plans[i], mode, plan.runs, scale)?;
                    log(&format!(
                        "  {} {} {mode}: {} runs, {} rows",
                        engines[i].paradigm(),
                        q.id,
                        recs.len(),
                        recs[0].result_count
                    ));
                    records.extend(recs);
                }
            }
        }
    }
    Ok(BenchOutcome {
        records,
        metrics,
        cells: plan.cells(),
    })
}
