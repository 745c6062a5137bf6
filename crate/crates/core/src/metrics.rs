//! Scale, connectivity density, and semantic richness of a knowledge graph.
//!
//! * `S = |V| + |E|`
//! * `CD = |E| / |V|`
//! * `D_types = ln|C| + ln|R|`
//! * `H(C)`, `H(R)`: Shannon entropy (nats) of the label and relationship-type
//!   frequency distributions, with `0 · ln 0 = 0`
//! * `SR = D_types + H(C) + H(R)`
//!
//! Every function is a pure read over the graph. Values are kept at full
//! precision; [`render_table`] rounds for display only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::KnowledgeGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{metric} is undefined: {reason}")]
pub struct MetricError {
    pub metric: &'static str,
    pub reason: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub node_count: u64,
    pub edge_count: u64,
    pub scale: u64,
    pub connectivity_density: f64,
    pub type_diversity: f64,
    pub class_entropy: f64,
    pub reltype_entropy: f64,
    pub semantic_richness: f64,
    pub class_count: u64,
    pub reltype_count: u64,
}

pub fn scale_metric(kg: &KnowledgeGraph) -> u64 {
    (kg.node_count() + kg.edge_count()) as u64
}

pub fn connectivity_density(kg: &KnowledgeGraph) -> Result<f64, MetricError> {
    if kg.node_count() == 0 {
        return Err(MetricError {
            metric: "connectivity density",
            reason: "graph has no nodes",
        });
    }
    Ok(kg.edge_count() as f64 / kg.node_count() as f64)
}

pub fn type_diversity(kg: &KnowledgeGraph) -> Result<f64, MetricError> {
    let classes = kg.class_set().len();
    let rel_types = kg.rel_type_set().len();
    if classes == 0 {
        return Err(MetricError {
            metric: "type diversity",
            reason: "graph has no node classes",
        });
    }
    if rel_types == 0 {
        return Err(MetricError {
            metric: "type diversity",
            reason: "graph has no relationship types",
        });
    }
    Ok((classes as f64).ln() + (rel_types as f64).ln())
}

/// Shannon entropy in nats of a frequency table.
///
/// Iteration order of a `BTreeMap` is fixed, so equal tables give bit-equal
/// results; tables whose counts are all scaled by a power of two do as well.
pub fn entropy(counts: &BTreeMap<String, usize>) -> Option<f64> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return None;
    }
    let total = total as f64;
    let h = counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum::<f64>();
    // A single-class distribution gives -0.0.
    Some(h.max(0.0))
}

pub fn class_entropy(kg: &KnowledgeGraph) -> Result<f64, MetricError> {
    entropy(&kg.label_histogram()).ok_or(MetricError {
        metric: "class entropy",
        reason: "graph has no nodes",
    })
}

pub fn reltype_entropy(kg: &KnowledgeGraph) -> Result<f64, MetricError> {
    entropy(&kg.reltype_histogram()).ok_or(MetricError {
        metric: "relationship-type entropy",
        reason: "graph has no edges",
    })
}

pub fn semantic_richness(kg: &KnowledgeGraph) -> Result<f64, MetricError> {
    Ok(type_diversity(kg)? + class_entropy(kg)? + reltype_entropy(kg)?)
}

/// Fills every field of a [`MetricsReport`] from one pass over the histograms.
pub fn compute_all(kg: &KnowledgeGraph) -> Result<MetricsReport, MetricError> {
    let labels = kg.label_histogram();
    let rel_types = kg.reltype_histogram();
    let connectivity_density = connectivity_density(kg)?;
    let type_diversity = type_diversity(kg)?;
    let class_entropy = entropy(&labels).ok_or(MetricError {
        metric: "class entropy",
        reason: "graph has no nodes",
    })?;
    let reltype_entropy = entropy(&rel_types).ok_or(MetricError {
        metric: "relationship-type entropy",
        reason: "graph has no edges",
    })?;
    Ok(MetricsReport {
        node_count: kg.node_count() as u64,
        edge_count: kg.edge_count() as u64,
        scale: scale_metric(kg),
        connectivity_density,
        type_diversity,
        class_entropy,
        reltype_entropy,
        semantic_richness: type_diversity + class_entropy + reltype_entropy,
        class_count: labels.len() as u64,
        reltype_count: rel_types.len() as u64,
    })
}

/// Rounds half away from zero to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

/// Aligned text table with one row per `(scale label, report)`.
pub fn render_table(rows: &[(String, MetricsReport)]) -> String {
    let header = ["Scale", "Nodes", "Relationships", "Dtypes", "HC", "HR", "SR", "CD"];
    let body: Vec<[String; 8]> = rows
        .iter()
        .map(|(label, m)| {
            [
                label.clone(),
                thousands(m.node_count),
                thousands(m.edge_count),
                format!("{:.2}", round2(m.type_diversity)),
                format!("{:.2}", round2(m.class_entropy)),
                format!("{:.2}", round2(m.reltype_entropy)),
                format!("{:.2}", round2(m.semantic_richness)),
                format!("{:.2}", round2(m.connectivity_density)),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &body {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Edge, Node};

    /// Independent entropy: straight from the definition over raw labels.
    fn brute_entropy(labels: &[&str]) -> f64 {
        let mut distinct: Vec<&str> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let n = labels.len() as f64;
        let mut h = 0.0;
        for d in distinct {
            let k = labels.iter().filter(|l| **l == d).count() as f64;
            h -= (k / n) * (k / n).ln();
        }
        h
    }

    fn graph(labels: &[&str], rels: &[&str]) -> KnowledgeGraph {
        let nodes: Vec<Node> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Node::new(format!("n{i}"), *l))
            .collect();
        let edges: Vec<Edge> = rels
            .iter()
            .enumerate()
            .map(|(i, r)| Edge::new(format!("e{i}"), *r, "n0", format!("n{}", i % labels.len())))
            .collect();
        KnowledgeGraph::new(nodes, edges)
    }

    #[test]
    fn scale_of_empty_graph_is_zero() {
        assert_eq!(scale_metric(&KnowledgeGraph::default()), 0);
    }

    #[test]
    fn connectivity_cases() {
        assert!(connectivity_density(&KnowledgeGraph::default()).is_err());
        assert_eq!(connectivity_density(&graph(&["A", "B"], &[])).unwrap(), 0.0);
        let tri = graph(&["A", "A", "A"], &["R"; 6]);
        assert_eq!(connectivity_density(&tri).unwrap(), 2.0);
    }

    #[test]
    fn type_diversity_cases() {
        assert_eq!(type_diversity(&graph(&["A"], &["R"])).unwrap(), 0.0);
        let d = type_diversity(&graph(&["A", "B"], &["R", "S"])).unwrap();
        assert!((d - 2.0 * 2f64.ln()).abs() < 1e-12);
        let err = type_diversity(&graph(&["A"], &[])).unwrap_err();
        assert_eq!(err.metric, "type diversity");
    }

    #[test]
    fn entropy_extremes() {
        assert_eq!(class_entropy(&graph(&["A", "A", "A"], &[])).unwrap(), 0.0);
        let labels: Vec<String> = (0..80).map(|i| format!("C{}", i % 8)).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let h = class_entropy(&graph(&refs, &[])).unwrap();
        assert!((h - 8f64.ln()).abs() < 1e-12);
        assert!(reltype_entropy(&graph(&["A"], &[])).is_err());
    }

    #[test]
    fn single_class_single_type_has_zero_richness() {
        let m = compute_all(&graph(&["A", "A"], &["R", "R", "R"])).unwrap();
        assert_eq!(m.semantic_richness, 0.0);
    }

    #[test]
    fn richness_matches_brute_force_on_mixed_graph() {
        // 5 classes, 7 relationship types, skewed counts.
        let labels = [
            "A", "A", "A", "B", "B", "C", "D", "D", "D", "D", "E", "A", "C", "B", "A",
        ];
        let rels = [
            "r1", "r2", "r2", "r3", "r3", "r3", "r4", "r5", "r5", "r6", "r7", "r7", "r7", "r7", "r1",
            "r2", "r2",
        ];
        let kg = graph(&labels, &rels);
        let m = compute_all(&kg).unwrap();
        let expected = 5f64.ln() + 7f64.ln() + brute_entropy(&labels) + brute_entropy(&rels);
        assert!((m.semantic_richness - expected).abs() < 1e-12);
        assert_eq!(
            m.semantic_richness,
            m.type_diversity + m.class_entropy + m.reltype_entropy
        );
        assert_eq!(m.scale, (labels.len() + rels.len()) as u64);
        assert_eq!((m.class_count, m.reltype_count), (5, 7));
    }

    #[test]
    fn compute_all_names_failing_component() {
        let err = compute_all(&graph(&["A"], &[])).unwrap_err();
        assert_eq!(err.metric, "type diversity");
        assert!(compute_all(&KnowledgeGraph::default()).is_err());
    }

    #[test]
    fn faers_cardinalities_give_published_diversity() {
        let d = 8f64.ln() + 11f64.ln();
        assert_eq!(round2(d), 4.48);
        assert_eq!(round2(4.48 + 1.39 + 2.04), 7.91);
        assert_eq!(round2(11_000.0 / 14_000.0), 0.79);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(2.675000001), 2.68);
    }

    #[test]
    fn table_layout() {
        let report = MetricsReport {
            node_count: 14_000,
            edge_count: 11_000,
            scale: 25_000,
            connectivity_density: 11.0 / 14.0,
            type_diversity: 8f64.ln() + 11f64.ln(),
            class_entropy: 1.3917,
            reltype_entropy: 2.0398,
            semantic_richness: 8f64.ln() + 11f64.ln() + 1.3917 + 2.0398,
            class_count: 8,
            reltype_count: 11,
        };
        let table = render_table(&[("1x".into(), report)]);
        let lines: Vec<&str> = table.lines().collect();
        assert!(lines[0].starts_with("Scale"));
        assert!(lines[1].contains("14,000"));
        assert!(lines[1].contains("11,000"));
        assert!(lines[1].contains("4.48"));
        assert!(lines[1].contains("7.91"));
        assert!(lines[1].ends_with("0.79"));
        assert_eq!(lines[0].len(), lines[1].len());
    }
}
