//! Iterative duplication: after `n` rounds a dataset of size `X` holds `X · 2ⁿ`
//! elements.
//!
//! Duplication produces `2ⁿ` disjoint copies of the source. Copy `k` suffixes
//! every node and edge id with `#k`; no edges cross copies, so every ratio
//! metric (CD, entropies, SR) is unchanged.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Edge, KnowledgeGraph, Node};
use crate::par::Execution;

/// Refuse plans larger than this many elements unless overridden.
pub const DEFAULT_MAX_ELEMENTS: u64 = 20_000_000;

/// Largest supported duplication count.
pub const MAX_DUPLICATIONS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error(
        "duplication x{factor} would produce {predicted_nodes} nodes and {predicted_edges} edges, \
         above the budget of {max_elements} elements"
    )]
    OverBudget {
        factor: u64,
        predicted_nodes: u64,
        predicted_edges: u64,
        max_elements: u64,
    },
    #[error("{0} duplications exceed the supported maximum of {MAX_DUPLICATIONS}")]
    TooManyDuplications(u32),
    #[error("scale factor {0} is not a power of two")]
    NotPowerOfTwo(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePlan {
    pub base_nodes: u64,
    pub base_edges: u64,
    pub duplications: u32,
}

impl ScalePlan {
    pub fn for_graph(kg: &KnowledgeGraph, duplications: u32) -> Self {
        ScalePlan {
            base_nodes: kg.node_count() as u64,
            base_edges: kg.edge_count() as u64,
            duplications,
        }
    }

    pub fn factor(&self) -> u64 {
        1u64 << self.duplications
    }

    /// `X`, the element count of the source.
    pub fn base_size(&self) -> u64 {
        self.base_nodes + self.base_edges
    }

    pub fn predicted_nodes(&self) -> u64 {
        self.base_nodes * self.factor()
    }

    pub fn predicted_edges(&self) -> u64 {
        self.base_edges * self.factor()
    }

    /// `X · 2ⁿ`
    pub fn predicted_size(&self) -> u64 {
        self.base_size() * self.factor()
    }
}

/// Number of duplications that yields `factor` (which must be a power of two).
pub fn duplications_for_factor(factor: u64) -> Result<u32, ScaleError> {
    if factor == 0 || !factor.is_power_of_two() {
        return Err(ScaleError::NotPowerOfTwo(factor));
    }
    Ok(factor.trailing_zeros())
}

#[derive(Debug, Clone, Copy)]
pub struct DuplicationOptions {
    pub max_elements: u64,
    pub execution: Execution,
}

impl Default for DuplicationOptions {
    fn default() -> Self {
        DuplicationOptions {
            max_elements: DEFAULT_MAX_ELEMENTS,
            execution: Execution::default(),
        }
    }
}

/// Doubles `kg` `n` times with the default budget.
pub fn duplicate_merge(kg: &KnowledgeGraph, n: u32) -> Result<KnowledgeGraph, ScaleError> {
    duplicate_merge_with(kg, n, DuplicationOptions::default())
}

pub fn duplicate_merge_with(
    kg: &KnowledgeGraph,
    n: u32,
    options: DuplicationOptions,
) -> Result<KnowledgeGraph, ScaleError> {
    if n > MAX_DUPLICATIONS {
        return Err(ScaleError::TooManyDuplications(n));
    }
    let plan = ScalePlan::for_graph(kg, n);
    if plan.predicted_size() > options.max_elements {
        return Err(ScaleError::OverBudget {
            factor: plan.factor(),
            predicted_nodes: plan.predicted_nodes(),
            predicted_edges: plan.predicted_edges(),
            max_elements: options.max_elements,
        });
    }
    if n == 0 {
        return Ok(kg.clone());
    }

    let copies = options
        .execution
        .map_range(0..plan.factor() as usize, |k| copy_of(kg, k));

    let mut nodes = Vec::with_capacity(plan.predicted_nodes() as usize);
    let mut edges = Vec::with_capacity(plan.predicted_edges() as usize);
    for (copy_nodes, copy_edges) in copies {
        nodes.extend(copy_nodes);
        edges.extend(copy_edges);
    }
    Ok(KnowledgeGraph::new(nodes, edges))
}

fn copy_of(kg: &KnowledgeGraph, k: usize) -> (Vec<Node>, Vec<Edge>) {
    let suffix = format!("#{k}");
    let rename = |id: &str| {
        let mut s = String::with_capacity(id.len() + suffix.len());
        s.push_str(id);
        s.push_str(&suffix);
        s
    };
    let nodes = kg
        .nodes()
        .iter()
        .map(|n| Node {
            id: rename(&n.id),
            label: n.label.clone(),
            properties: n.properties.clone(),
        })
        .collect();
    let edges = kg
        .edges()
        .iter()
        .map(|e| Edge {
            id: rename(&e.id),
            rel_type: e.rel_type.clone(),
            from: rename(&e.from),
            to: rename(&e.to),
            properties: e.properties.clone(),
        })
        .collect();
    (nodes, edges)
}
