//! Labelled property-graph model shared by every other module.
//!
//! A [`KnowledgeGraph`] is a directed multigraph whose nodes carry exactly one
//! class label and whose edges carry exactly one relationship type. Both carry
//! arbitrary nested property trees. The graph is immutable once built.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::de::{self, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Property tree keyed by attribute name.
pub type Properties = BTreeMap<String, PropertyValue>;

/// A JSON-like attribute value. Integers and floats are kept distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PropertyValue {
    #[default]
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<PropertyValue>),
    Map(Properties),
}

impl PropertyValue {
    /// Numeric view used by comparisons; integers coerce to floats.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropertyValue::Int(i) => Some(*i as f64),
            PropertyValue::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Maximum container nesting; scalars have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            PropertyValue::List(items) => 1 + items.iter().map(Self::depth).max().unwrap_or(0),
            PropertyValue::Map(map) => 1 + map.values().map(Self::depth).max().unwrap_or(0),
            _ => 0,
        }
    }
}

impl From<&str> for PropertyValue {
    fn from(s: &str) -> Self {
        PropertyValue::Text(s.to_owned())
    }
}

impl From<String> for PropertyValue {
    fn from(s: String) -> Self {
        PropertyValue::Text(s)
    }
}

impl From<i64> for PropertyValue {
    fn from(i: i64) -> Self {
        PropertyValue::Int(i)
    }
}

impl From<f64> for PropertyValue {
    fn from(f: f64) -> Self {
        PropertyValue::Float(f)
    }
}

impl From<bool> for PropertyValue {
    fn from(b: bool) -> Self {
        PropertyValue::Bool(b)
    }
}

impl Serialize for PropertyValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            PropertyValue::Null => serializer.serialize_unit(),
            PropertyValue::Bool(b) => serializer.serialize_bool(*b),
            PropertyValue::Int(i) => serializer.serialize_i64(*i),
            PropertyValue::Float(f) => serializer.serialize_f64(*f),
            PropertyValue::Text(s) => serializer.serialize_str(s),
            PropertyValue::List(items) => items.serialize(serializer),
            PropertyValue::Map(map) => map.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for PropertyValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor;

        impl<'de> Visitor<'de> for ValueVisitor {
            type Value = PropertyValue;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON value")
            }

            fn visit_unit<E>(self) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Null)
            }

            fn visit_none<E>(self) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Null)
            }

            fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<PropertyValue, D::Error> {
                PropertyValue::deserialize(d)
            }

            fn visit_bool<E>(self, b: bool) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Bool(b))
            }

            fn visit_i64<E>(self, i: i64) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Int(i))
            }

            fn visit_u64<E>(self, u: u64) -> Result<PropertyValue, E> {
                // Out-of-range unsigned values degrade to floats.
                Ok(i64::try_from(u)
                    .map(PropertyValue::Int)
                    .unwrap_or(PropertyValue::Float(u as f64)))
            }

            fn visit_f64<E>(self, f: f64) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Float(f))
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Text(s.to_owned()))
            }

            fn visit_string<E>(self, s: String) -> Result<PropertyValue, E> {
                Ok(PropertyValue::Text(s))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PropertyValue, A::Error> {
                let mut items = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(item) = seq.next_element()? {
                    items.push(item);
                }
                Ok(PropertyValue::List(items))
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<PropertyValue, A::Error> {
                let mut map = Properties::new();
                while let Some((k, v)) = access.next_entry::<String, PropertyValue>()? {
                    map.insert(k, v);
                }
                Ok(PropertyValue::Map(map))
            }
        }

        deserializer.deserialize_any(ValueVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub properties: Properties,
}

impl Node {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Node {
            id: id.into(),
            label: label.into(),
            properties: Properties::new(),
        }
    }

    pub fn with_property(mut self, key: impl Into<String>, value: impl Into<PropertyValue>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }
}

/// A directed, typed edge `from -[rel_type]-> to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub rel_type: String,
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub properties: Properties,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        rel_type: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
    ) -> Self {
        Edge {
            id: id.into(),
            rel_type: rel_type.into(),
            from: from.into(),
            to: to.into(),
            properties: Properties::new(),
        }
    }

    pub fn with_property(mut self, key: impl Into<String>, value: impl Into<PropertyValue>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }
}

/// One structural problem found by [`KnowledgeGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    DanglingEdge { edge_id: String, missing_node: String },
    DuplicateNodeId { id: String },
    DuplicateEdgeId { id: String },
    UnlabeledNode { id: String },
    UntypedEdge { id: String },
    EmptyId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { edge_id, missing_node } => {
                write!(f, "edge {edge_id:?} references missing node {missing_node:?}")
            }
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id:?}"),
            Violation::DuplicateEdgeId { id } => write!(f, "duplicate edge id {id:?}"),
            Violation::UnlabeledNode { id } => write!(f, "node {id:?} has no label"),
            Violation::UntypedEdge { id } => write!(f, "edge {id:?} has no relationship type"),
            Violation::EmptyId => f.write_str("element with an empty id"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{} violation(s): {}", parts.len(), parts.join("; "))
    }
}

/// Immutable labelled property graph.
///
/// `class_set` and `rel_type_set` are derived from the elements at construction
/// time, so they always equal the labels and relationship types in use.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    class_set: BTreeSet<String>,
    rel_type_set: BTreeSet<String>,
}

impl KnowledgeGraph {
    /// Assembles a graph without validating it. Use [`KnowledgeGraph::try_new`]
    /// for untrusted input.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        let class_set = nodes.iter().map(|n| n.label.clone()).collect();
        let rel_type_set = edges.iter().map(|e| e.rel_type.clone()).collect();
        KnowledgeGraph {
            nodes,
            edges,
            class_set,
            rel_type_set,
        }
    }

    /// Assembles and validates; any violation is returned as the error.
    pub fn try_new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, ValidationReport> {
        let kg = Self::new(nodes, edges);
        let report = kg.validate();
        if report.is_valid() {
            Ok(kg)
        } else {
            Err(report)
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn class_set(&self) -> &BTreeSet<String> {
        &self.class_set
    }

    pub fn rel_type_set(&self) -> &BTreeSet<String> {
        &self.rel_type_set
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Node>, Vec<Edge>) {
        (self.nodes, self.edges)
    }

    /// Reports every dangling edge, duplicate id, and unlabeled node.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut node_ids: HashSet<&str> = HashSet::with_capacity(self.nodes.len());
        for node in &self.nodes {
            if node.id.is_empty() {
                violations.push(Violation::EmptyId);
            }
            if node.label.is_empty() {
                violations.push(Violation::UnlabeledNode { id: node.id.clone() });
            }
            if !node_ids.insert(&node.id) {
                violations.push(Violation::DuplicateNodeId { id: node.id.clone() });
            }
        }
        let mut edge_ids: HashSet<&str> = HashSet::with_capacity(self.edges.len());
        for edge in &self.edges {
            if edge.id.is_empty() {
                violations.push(Violation::EmptyId);
            }
            if edge.rel_type.is_empty() {
                violations.push(Violation::UntypedEdge { id: edge.id.clone() });
            }
            if !edge_ids.insert(&edge.id) {
                violations.push(Violation::DuplicateEdgeId { id: edge.id.clone() });
            }
            let endpoints = if edge.from == edge.to {
                &[&edge.from][..]
            } else {
                &[&edge.from, &edge.to][..]
            };
            for endpoint in endpoints {
                if !node_ids.contains(endpoint.as_str()) {
                    violations.push(Violation::DanglingEdge {
                        edge_id: edge.id.clone(),
                        missing_node: (*endpoint).clone(),
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Node count per class label.
    pub fn label_histogram(&self) -> BTreeMap<String, usize> {
        histogram(self.nodes.iter().map(|n| n.label.as_str()))
    }

    /// Edge count per relationship type.
    pub fn reltype_histogram(&self) -> BTreeMap<String, usize> {
        histogram(self.edges.iter().map(|e| e.rel_type.as_str()))
    }

    /// Map from node id to position in [`KnowledgeGraph::nodes`].
    pub fn node_index(&self) -> HashMap<&str, usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_str(), i))
            .collect()
    }

    /// Copy with nodes and edges sorted by id; equal graphs have equal
    /// canonical forms regardless of insertion order.
    pub fn canonicalized(&self) -> KnowledgeGraph {
        let mut nodes = self.nodes.clone();
        let mut edges = self.edges.clone();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        KnowledgeGraph::new(nodes, edges)
    }
}

/// Order-insensitive equality over id sets, labels, endpoints, and property trees.
impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        if self.nodes.len() != other.nodes.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let mut a: Vec<&Node> = self.nodes.iter().collect();
        let mut b: Vec<&Node> = other.nodes.iter().collect();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        if a != b {
            return false;
        }
        let mut a: Vec<&Edge> = self.edges.iter().collect();
        let mut b: Vec<&Edge> = other.edges.iter().collect();
        a.sort_by(|x, y| x.id.cmp(&y.id));
        b.sort_by(|x, y| x.id.cmp(&y.id));
        a == b
    }
}

fn histogram<'a>(keys: impl Iterator<Item = &'a str>) -> BTreeMap<String, usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for key in keys {
        *counts.entry(key).or_insert(0) += 1;
    }
    counts.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_valid() {
        assert!(KnowledgeGraph::default().validate().is_valid());
    }

    #[test]
    fn dangling_edge_is_named() {
        let kg = KnowledgeGraph::new(
            vec![Node::new("c1", "Case")],
            vec![Edge::new("e1", "FALLS_UNDER", "c1", "ag9")],
        );
        let report = kg.validate();
        assert_eq!(
            report.violations,
            vec![Violation::DanglingEdge {
                edge_id: "e1".into(),
                missing_node: "ag9".into()
            }]
        );
    }

    #[test]
    fn duplicate_node_id_reported_once() {
        let kg = KnowledgeGraph::new(vec![Node::new("c1", "Case"), Node::new("c1", "Drug")], vec![]);
        assert_eq!(
            kg.validate().violations,
            vec![Violation::DuplicateNodeId { id: "c1".into() }]
        );
    }

    #[test]
    fn dangling_self_loop_reported_once() {
        let kg = KnowledgeGraph::new(vec![], vec![Edge::new("e", "R", "x", "x")]);
        assert_eq!(kg.validate().violations.len(), 1);
    }

    #[test]
    fn unlabeled_node_reported() {
        let kg = KnowledgeGraph::new(vec![Node::new("n", "")], vec![]);
        assert_eq!(
            kg.validate().violations,
            vec![Violation::UnlabeledNode { id: "n".into() }]
        );
    }

    #[test]
    fn histograms_count_labels_and_types() {
        let kg = KnowledgeGraph::new(
            vec![Node::new("a1", "A"), Node::new("a2", "A"), Node::new("b1", "B")],
            vec![Edge::new("e1", "X", "a1", "b1")],
        );
        assert_eq!(
            kg.label_histogram(),
            BTreeMap::from([("A".to_string(), 2), ("B".to_string(), 1)])
        );
        assert_eq!(kg.reltype_histogram(), BTreeMap::from([("X".to_string(), 1)]));
    }

    #[test]
    fn uniform_histograms() {
        let nodes: Vec<Node> = (0..80).map(|i| Node::new(format!("n{i}"), format!("C{}", i % 8))).collect();
        let edges: Vec<Edge> = (0..110)
            .map(|i| Edge::new(format!("e{i}"), format!("R{}", i % 11), "n0", "n1"))
            .collect();
        let kg = KnowledgeGraph::new(nodes, edges);
        assert!(kg.label_histogram().values().all(|&c| c == 10));
        assert_eq!(kg.reltype_histogram().len(), 11);
        assert!(kg.reltype_histogram().values().all(|&c| c == 10));
    }

    #[test]
    fn int_and_float_stay_distinct_through_json() {
        let v: PropertyValue = serde_json::from_str(r#"{"a":1,"b":1.0,"c":[null,true,"x"]}"#).unwrap();
        let PropertyValue::Map(map) = &v else { panic!() };
        assert_eq!(map["a"], PropertyValue::Int(1));
        assert_eq!(map["b"], PropertyValue::Float(1.0));
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":1,"b":1.0,"c":[null,true,"x"]}"#);
    }

    #[test]
    fn equality_ignores_order() {
        let a = KnowledgeGraph::new(vec![Node::new("x", "A"), Node::new("y", "B")], vec![]);
        let b = KnowledgeGraph::new(vec![Node::new("y", "B"), Node::new("x", "A")], vec![]);
        assert_eq!(a, b);
        let c = KnowledgeGraph::new(vec![Node::new("y", "A"), Node::new("x", "A")], vec![]);
        assert_ne!(a, c);
    }
}
