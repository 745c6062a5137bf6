use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Edge, KnowledgeGraph, Node, Properties};

use super::{
    check_collection_name, list_collections, parse_json_lines, read_file, to_json_lines, write_file,
    IngestError,
};

/// Node document keyed by the source id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    #[serde(rename = "_id")]
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub properties: Properties,
}

/// Relationship document; all four fields are always written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipDocument {
    pub id: String,
    pub from: String,
    pub to: String,
    pub properties: Properties,
}

/// Document-paradigm representation: one collection per class and one per
/// relationship type.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentDump {
    pub node_collections: BTreeMap<String, Vec<NodeDocument>>,
    pub relationship_collections: BTreeMap<String, Vec<RelationshipDocument>>,
}

impl DocumentDump {
    pub fn node_document_count(&self) -> usize {
        self.node_collections.values().map(Vec::len).sum()
    }

    pub fn relationship_document_count(&self) -> usize {
        self.relationship_collections.values().map(Vec::len).sum()
    }

    /// Writes `nodes/<Label>.jsonl` and `relationships/<RelType>.jsonl` under `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir.join("relationships")).map_err(|e| IngestError::io(dir, e))?;
        for (name, docs) in &self.node_collections {
            check_collection_name(name)?;
            write_file(&dir.join("nodes").join(format!("{name}.jsonl")), &to_json_lines(docs))?;
        }
        for (name, docs) in &self.relationship_collections {
            check_collection_name(name)?;
            write_file(
                &dir.join("relationships").join(format!("{name}.jsonl")),
                &to_json_lines(docs),
            )?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut dump = DocumentDump::default();
        for (name, path) in list_collections(&dir.join("nodes"), "jsonl")? {
            let file = format!("nodes/{name}.jsonl");
            let docs = parse_json_lines(&file, &read_file(&path)?, |value, _| {
                if let Some(serde_json::Value::Array(labels)) = value.get("label") {
                    return Err(IngestError::MultiLabel {
                        id: value.get("_id").map(|v| v.to_string()).unwrap_or_default(),
                        labels: labels.iter().map(|l| l.to_string()).collect(),
                    });
                }
                Ok(())
            })?;
            dump.node_collections.insert(name, docs);
        }
        for (name, path) in list_collections(&dir.join("relationships"), "jsonl")? {
            let file = format!("relationships/{name}.jsonl");
            let docs = parse_json_lines(&file, &read_file(&path)?, |_, _| Ok(()))?;
            dump.relationship_collections.insert(name, docs);
        }
        Ok(dump)
    }
}

pub fn to_document_dump(kg: &KnowledgeGraph) -> DocumentDump {
    let mut dump = DocumentDump::default();
    for n in kg.nodes() {
        dump.node_collections
            .entry(n.label.clone())
            .or_default()
            .push(NodeDocument {
                id: n.id.clone(),
                label: n.label.clone(),
                properties: n.properties.clone(),
            });
    }
    for e in kg.edges() {
        dump.relationship_collections
            .entry(e.rel_type.clone())
            .or_default()
            .push(RelationshipDocument {
                id: e.id.clone(),
                from: e.from.clone(),
                to: e.to.clone(),
                properties: e.properties.clone(),
            });
    }
    dump
}

/// Rebuilds the graph; `from`/`to` values that match no node document are
/// reported together.
pub fn load_document_dump(dump: &DocumentDump) -> Result<KnowledgeGraph, IngestError> {
    let mut nodes = Vec::with_capacity(dump.node_document_count());
    for (collection, docs) in &dump.node_collections {
        for doc in docs {
            if &doc.label != collection {
                return Err(IngestError::LabelMismatch {
                    id: doc.id.clone(),
                    collection: collection.clone(),
                    label: doc.label.clone(),
                });
            }
            nodes.push(Node {
                id: doc.id.clone(),
                label: doc.label.clone(),
                properties: doc.properties.clone(),
            });
        }
    }
    let ids: HashSet<&str> = nodes.iter().map(|n| n.id.as_str()).collect();
    let mut unresolved = Vec::new();
    let mut edges = Vec::with_capacity(dump.relationship_document_count());
    for (rel_type, docs) in &dump.relationship_collections {
        for doc in docs {
            for endpoint in [&doc.from, &doc.to] {
                if !ids.contains(endpoint.as_str()) {
                    unresolved.push(format!("{rel_type}:{} -> {endpoint}", doc.id));
                }
            }
            edges.push(Edge {
                id: doc.id.clone(),
                rel_type: rel_type.clone(),
                from: doc.from.clone(),
                to: doc.to.clone(),
                properties: doc.properties.clone(),
            });
        }
    }
    if !unresolved.is_empty() {
        unresolved.dedup();
        return Err(IngestError::Unresolved(unresolved));
    }
    KnowledgeGraph::try_new(nodes, edges).map_err(IngestError::Invalid)
}
