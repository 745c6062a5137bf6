//! In-process engines, one per storage paradigm, behind a common backend
//! interface.
//!
//! * document: node and relationship collections, lazily built field indexes,
//!   joins through relationship documents
//! * graph: CSR adjacency lists built at ingest, index-free traversal
//! * multi-model: vertex and edge collections with a primary-key index, edge
//!   indexes on `_from`/`_to`
//! * oracle: brute-force evaluation of the logical plan, for correctness only

mod document;
pub mod eval;
mod graph;
mod multimodel;
mod oracle;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{DocumentDump, MultiModelDump};
use crate::model::{KnowledgeGraph, PropertyValue};
use crate::workload::{Catalog, ExecutablePlan, Field, Paradigm};

pub use document::DocumentEngine;
pub use graph::GraphEngine;
pub use multimodel::MultiModelEngine;
pub use oracle::OracleEngine;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("the {paradigm} engine ingests {expected}, not {found}")]
    FormatMismatch {
        paradigm: Paradigm,
        expected: &'static str,
        found: &'static str,
    },
    #[error("plan for {plan} cannot run on the {engine} engine")]
    WrongParadigm { plan: Paradigm, engine: Paradigm },
    #[error("query {query} does not fit the dataset: {}", .problems.join("; "))]
    PlanValidation { query: String, problems: Vec<String> },
}

/// A dataset in one of the three on-disk representations.
#[derive(Debug, Clone, Copy)]
pub enum Dataset<'a> {
    Graph(&'a KnowledgeGraph),
    Document(&'a DocumentDump),
    MultiModel(&'a MultiModelDump),
}

impl Dataset<'_> {
    fn format_name(&self) -> &'static str {
        match self {
            Dataset::Graph(_) => "a CSV export bundle",
            Dataset::Document(_) => "a document dump",
            Dataset::MultiModel(_) => "a multi-model dump",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub executions: u64,
    pub cache_clears: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Id(Arc<str>),
    Label(Arc<str>),
    Value(PropertyValue),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows serialized and sorted, so two bags compare independently of order.
    pub fn canonical_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("cells serialize"))
            .collect();
        rows.sort_unstable();
        rows
    }

    pub fn same_bag(&self, other: &ResultSet) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.canonical_rows() == other.canonical_rows()
    }
}

/// A paradigm engine holding one dataset.
pub trait Backend: Send {
    fn paradigm(&self) -> Paradigm;

    /// `(nodes, edges)` as ingested.
    fn element_counts(&self) -> (usize, usize);

    fn catalog(&self) -> &Catalog;

    /// Drops every lazily built index and cache.
    fn clear_caches(&mut self);

    /// Names of the lazily built structures currently held.
    fn cached_structures(&self) -> Vec<String>;

    fn execute(&mut self, plan: &ExecutablePlan) -> Result<ResultSet, EngineError>;

    fn counters(&self) -> Counters;
}

/// Loads `dataset` into the engine for `paradigm`. The document and
/// multi-model engines take their own dump formats; graph and oracle take the
/// graph parsed from a CSV bundle.
pub fn ingest(paradigm: Paradigm, dataset: Dataset<'_>) -> Result<Box<dyn Backend>, EngineError> {
    let mismatch = |expected| EngineError::FormatMismatch {
        paradigm,
        expected,
        found: dataset.format_name(),
    };
    match (paradigm, dataset) {
        (Paradigm::Document, Dataset::Document(d)) => Ok(Box::new(DocumentEngine::new(d))),
        (Paradigm::Graph, Dataset::Graph(kg)) => Ok(Box::new(GraphEngine::new(kg))),
        (Paradigm::MultiModel, Dataset::MultiModel(d)) => Ok(Box::new(MultiModelEngine::new(d))),
        (Paradigm::Oracle, Dataset::Graph(kg)) => Ok(Box::new(OracleEngine::new(kg))),
        (Paradigm::Document, _) => Err(mismatch("a document dump")),
        (Paradigm::MultiModel, _) => Err(mismatch("a multi-model dump")),
        (Paradigm::Graph | Paradigm::Oracle, _) => Err(mismatch("a CSV export bundle")),
    }
}

/// Converts `kg` to the format `paradigm` ingests and loads it.
pub fn ingest_graph(paradigm: Paradigm, kg: &KnowledgeGraph) -> Box<dyn Backend> {
    match paradigm {
        Paradigm::Document => Box::new(DocumentEngine::new(&crate::ingest::to_document_dump(kg))),
        Paradigm::Graph => Box::new(GraphEngine::new(kg)),
        Paradigm::MultiModel => Box::new(MultiModelEngine::new(&crate::ingest::to_multimodel_dump(kg))),
        Paradigm::Oracle => Box::new(OracleEngine::new(kg)),
    }
}

fn check_plan(plan: &ExecutablePlan, engine: Paradigm, catalog: &Catalog) -> Result<(), EngineError> {
    if plan.paradigm != engine {
        return Err(EngineError::WrongParadigm {
            plan: plan.paradigm,
            engine,
        });
    }
    let problems = catalog.check(&plan.spec);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(EngineError::PlanValidation {
            query: plan.spec.id.clone(),
            problems,
        })
    }
}

/// Partial bindings stored row-major; each row holds one node reference per
/// bound slot.
struct Tuples {
    width: usize,
    data: Vec<u64>,
}

impl Tuples {
    fn roots(refs: Vec<u64>) -> Self {
        Tuples { width: 1, data: refs }
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, u64> {
        self.data.chunks_exact(self.width)
    }

    fn len(&self) -> usize {
        self.data.len() / self.width
    }

    /// Appends one slot: every row is repeated once per reference `step`
    /// produces for the row's `from` slot.
    fn extend(&self, from: usize, mut step: impl FnMut(u64, &mut Vec<u64>)) -> Tuples {
        let width = self.width + 1;
        let mut data = Vec::with_capacity(self.data.len() + self.len());
        let mut buf = Vec::new();
        for row in self.rows() {
            buf.clear();
            step(row[from], &mut buf);
            for &r in &buf {
                data.extend_from_slice(row);
                data.push(r);
            }
        }
        Tuples { width, data }
    }

    fn project(
        &self,
        plan: &ExecutablePlan,
        columns: &[crate::workload::OutputColumn],
        mut cell: impl FnMut(u64, &Field) -> Cell,
    ) -> ResultSet {
        let rows = self
            .rows()
            .map(|row| columns.iter().map(|c| cell(row[c.slot], &c.field)).collect())
            .collect();
        ResultSet {
            columns: plan.column_names(),
            rows,
        }
    }
}

fn pack(collection: usize, index: usize) -> u64 {
    ((collection as u64) << 32) | index as u64
}

fn unpack(r: u64) -> (usize, usize) {
    ((r >> 32) as usize, (r & 0xffff_ffff) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::to_document_dump;
    use crate::model::{Edge, Node};
    use crate::workload::{compile, SchemaBinding};

    #[test]
    fn format_mismatch_names_both_formats() {
        let kg = KnowledgeGraph::default();
        let err = ingest(Paradigm::Document, Dataset::Graph(&kg)).err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("document dump") && msg.contains("CSV"), "{msg}");
        let dump = to_document_dump(&kg);
        assert!(ingest(Paradigm::Graph, Dataset::Document(&dump)).is_err());
        assert!(ingest(Paradigm::Document, Dataset::Document(&dump)).is_ok());
    }

    #[test]
    fn plan_for_other_paradigm_is_refused() {
        let kg = KnowledgeGraph::new(vec![Node::new("a", "Case")], vec![]);
        let mut engine = ingest_graph(Paradigm::Graph, &kg);
        let plan = compile(&SchemaBinding::default().tier4(1), Paradigm::Document).unwrap();
        assert!(matches!(engine.execute(&plan), Err(EngineError::WrongParadigm { .. })));
    }

    #[test]
    fn unknown_label_is_a_validation_error_on_every_engine() {
        let kg = KnowledgeGraph::new(
            vec![Node::new("a", "Other"), Node::new("b", "Other")],
            vec![Edge::new("e", "R", "a", "b")],
        );
        for p in [Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel, Paradigm::Oracle] {
            let mut engine = ingest_graph(p, &kg);
            let plan = compile(&SchemaBinding::default().tier1(), p).unwrap();
            match engine.execute(&plan) {
                Err(EngineError::PlanValidation { problems, .. }) => {
                    assert!(problems.iter().any(|m| m.contains("Case")))
                }
                other => panic!("{p}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn empty_dataset_gives_empty_results() {
        let kg = KnowledgeGraph::default();
        for p in [Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel, Paradigm::Oracle] {
            let mut engine = ingest_graph(p, &kg);
            for q in crate::workload::Workload::faers_default().queries {
                let rs = engine.execute(&compile(&q, p).unwrap()).unwrap();
                assert!(rs.is_empty());
                assert_eq!(rs.columns, q.columns().iter().map(|c| c.name.clone()).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn canonical_rows_ignore_order() {
        let a = ResultSet {
            columns: vec!["x".into()],
            rows: vec![vec![Cell::Id("1".into())], vec![Cell::Id("2".into())]],
        };
        let mut b = a.clone();
        b.rows.reverse();
        assert!(a.same_bag(&b));
        b.rows.push(vec![Cell::Id("1".into())]);
        assert!(!a.same_bag(&b));
    }

    #[test]
    fn engines_agree_with_oracle_on_synthetic_faers() {
        use crate::synth::{generate_synthetic, SyntheticSpec};
        let kg = generate_synthetic(&SyntheticSpec::faers_like(1400, 11)).unwrap();
        let mut engines: Vec<Box<dyn Backend>> = [Paradigm::Oracle, Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel]
            .into_iter()
            .map(|p| ingest_graph(p, &kg))
            .collect();
        let b = SchemaBinding::default();
        for q in [b.tier1(), b.tier2(), b.tier3(), b.tier4(1), b.tier4(3)] {
            let mut results = Vec::new();
            for e in engines.iter_mut() {
                let plan = compile(&q, e.paradigm()).unwrap();
                let cold = e.execute(&plan).unwrap();
                let hot = e.execute(&plan).unwrap();
                assert!(cold.same_bag(&hot), "{} {}", q.id, e.paradigm());
                results.push(cold);
            }
            assert!(!results[0].is_empty(), "{} is empty", q.id);
            for r in &results[1..] {
                assert!(r.same_bag(&results[0]), "{} differs from oracle", q.id);
            }
        }
    }
}
