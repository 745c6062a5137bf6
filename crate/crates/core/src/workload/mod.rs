//! Declarative query workload: a small logical IR, the four complexity tiers
//! over a FAERS-shaped schema, and compilation to per-paradigm physical plans.

mod binding;
mod plan;
mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::KnowledgeGraph;

pub use binding::{HopBinding, HopSource, SchemaBinding};
pub use plan::{compile, ExecutablePlan, OutputColumn, Paradigm, PhysicalStep, Seek};
pub use spec::{Column, Comparator, Direction, Field, Predicate, QuerySpec, Stage};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("query {id}: {message}")]
    InvalidQuery { id: String, message: String },
    #[error("schema binding does not match the dataset: {}", .0.join("; "))]
    Binding(Vec<String>),
    #[error("workload file {path}: {message}")]
    File { path: String, message: String },
    #[error("duplicate query id {0}")]
    DuplicateId(String),
}

/// Labels, relationship types and property names present in a dataset.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    pub fields: BTreeMap<String, BTreeSet<String>>,
    pub rel_types: BTreeSet<String>,
    pub node_count: usize,
    pub edge_count: usize,
}

impl Catalog {
    pub fn from_graph(kg: &KnowledgeGraph) -> Self {
        let mut cat = Catalog::default();
        for n in kg.nodes() {
            cat.add_node(&n.label, n.properties.keys());
        }
        for (rel_type, count) in kg.reltype_histogram() {
            cat.add_edges(&rel_type, count);
        }
        cat
    }

    pub fn add_node<'a>(&mut self, label: &str, keys: impl Iterator<Item = &'a String>) {
        self.node_count += 1;
        let fields = self.fields.entry(label.to_owned()).or_default();
        for k in keys {
            if !fields.contains(k) {
                fields.insert(k.clone());
            }
        }
    }

    pub fn add_edges(&mut self, rel_type: &str, count: usize) {
        self.edge_count += count;
        self.rel_types.insert(rel_type.to_owned());
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0 && self.edge_count == 0
    }

    /// Every problem that would make `spec` reference something absent from
    /// the dataset. Empty catalogs accept any query.
    pub fn check(&self, spec: &QuerySpec) -> Vec<String> {
        let mut problems = Vec::new();
        if self.is_empty() {
            return problems;
        }
        let mut labels: BTreeMap<&str, Option<&str>> = BTreeMap::new();
        let check_fields = |label: &str, preds: &[Predicate], problems: &mut Vec<String>| {
            match self.fields.get(label) {
                None => problems.push(format!("unknown label {label:?}")),
                Some(fields) => {
                    for p in preds {
                        if !fields.contains(&p.field) {
                            problems.push(format!("label {label:?} has no field {:?}", p.field));
                        }
                    }
                }
            }
        };
        for stage in &spec.stages {
            match stage {
                Stage::NodeScan { bind, label, predicates } => {
                    check_fields(label, predicates, &mut problems);
                    labels.insert(bind, Some(label.as_str()));
                }
                Stage::Expand {
                    bind,
                    rel_types,
                    target_label,
                    predicates,
                    ..
                } => {
                    for r in rel_types {
                        if !self.rel_types.contains(r) {
                            problems.push(format!("unknown relationship type {r:?}"));
                        }
                    }
                    check_fields(target_label, predicates, &mut problems);
                    labels.insert(bind, Some(target_label.as_str()));
                }
                Stage::NeighborhoodExpand { bind, .. } => {
                    labels.insert(bind, None);
                }
                Stage::Project { columns } => {
                    for c in columns {
                        let Field::Property(name) = &c.field else { continue };
                        let known = match labels.get(c.bind.as_str()).copied().flatten() {
                            Some(label) => self.fields.get(label).is_some_and(|f| f.contains(name)),
                            None => self.fields.values().any(|f| f.contains(name)),
                        };
                        if !known {
                            problems.push(format!("column {:?} projects unknown field {name:?}", c.name));
                        }
                    }
                }
            }
        }
        problems
    }
}

/// A named set of queries plus the binding they were generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub name: String,
    pub binding: SchemaBinding,
    pub queries: Vec<QuerySpec>,
}

impl Workload {
    /// The four tier templates over `binding`, with a depth-1 neighborhood.
    pub fn from_binding(name: &str, binding: SchemaBinding, neighborhood_depth: u32) -> Self {
        let queries = vec![
            binding.tier1(),
            binding.tier2(),
            binding.tier3(),
            binding.tier4(neighborhood_depth),
        ];
        Workload {
            name: name.to_owned(),
            binding,
            queries,
        }
    }

    pub fn faers_default() -> Self {
        Self::from_binding("faers-default", SchemaBinding::default(), 1)
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let mut seen = BTreeSet::new();
        for q in &self.queries {
            q.validate()?;
            if !seen.insert(q.id.as_str()) {
                return Err(WorkloadError::DuplicateId(q.id.clone()));
            }
        }
        Ok(())
    }

    pub fn query(&self, id: &str) -> Option<&QuerySpec> {
        self.queries.iter().find(|q| q.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workload serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, WorkloadError> {
        let w: Workload = serde_json::from_str(text).map_err(|e| WorkloadError::File {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        w.validate()?;
        Ok(w)
    }

    pub fn load(path: &Path) -> Result<Self, WorkloadError> {
        let file_err = |message: String| WorkloadError::File {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
        let w: Workload = serde_json::from_str(&text).map_err(|e| file_err(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn save(&self, path: &Path) -> Result<(), WorkloadError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text).map_err(|e| WorkloadError::File {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}
