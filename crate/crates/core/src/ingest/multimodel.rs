use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Edge, KnowledgeGraph, Node, Properties};

use super::{
    build_lookup_table, check_collection_name, list_collections, parse_json_lines, read_file,
    to_json_lines, write_file, IngestError,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDocument {
    #[serde(rename = "_key")]
    pub key: String,
    #[serde(default)]
    pub properties: Properties,
}

/// Edge document; `_from` and `_to` are `<collection>/<_key>` handles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    #[serde(rename = "_key")]
    pub key: String,
    #[serde(rename = "_from")]
    pub from: String,
    #[serde(rename = "_to")]
    pub to: String,
    #[serde(default)]
    pub properties: Properties,
}

/// Multi-model representation: vertex and edge collections plus the global
/// id → label lookup table used to form vertex handles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiModelDump {
    pub vertex_collections: BTreeMap<String, Vec<VertexDocument>>,
    pub edge_collections: BTreeMap<String, Vec<EdgeDocument>>,
    pub lookup_table: BTreeMap<String, String>,
}

impl MultiModelDump {
    pub fn vertex_count(&self) -> usize {
        self.vertex_collections.values().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_collections.values().map(Vec::len).sum()
    }

    /// Writes `vertices/<Label>.jsonl`, `edges/<RelType>.jsonl` and `lookup.json`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir.join("edges")).map_err(|e| IngestError::io(dir, e))?;
        for (name, docs) in &self.vertex_collections {
            check_collection_name(name)?;
            write_file(&dir.join("vertices").join(format!("{name}.jsonl")), &to_json_lines(docs))?;
        }
        for (name, docs) in &self.edge_collections {
            check_collection_name(name)?;
            write_file(&dir.join("edges").join(format!("{name}.jsonl")), &to_json_lines(docs))?;
        }
        let lookup = serde_json::to_vec_pretty(&self.lookup_table).expect("lookup serializes");
        write_file(&dir.join("lookup.json"), &lookup)
    }

    pub fn read_dir(dir: &Path) -> Result<Self, IngestError> {
        let mut dump = MultiModelDump::default();
        for (name, path) in list_collections(&dir.join("vertices"), "jsonl")? {
            let file = format!("vertices/{name}.jsonl");
            let docs = parse_json_lines(&file, &read_file(&path)?, |_, _| Ok(()))?;
            dump.vertex_collections.insert(name, docs);
        }
        for (name, path) in list_collections(&dir.join("edges"), "jsonl")? {
            let file = format!("edges/{name}.jsonl");
            let docs = parse_json_lines(&file, &read_file(&path)?, |_, _| Ok(()))?;
            dump.edge_collections.insert(name, docs);
        }
        let lookup_path = dir.join("lookup.json");
        let text = read_file(&lookup_path)?;
        dump.lookup_table = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
            file: "lookup.json".into(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        Ok(dump)
    }
}

/// Percent-escapes `%` and `/` so a handle splits unambiguously on its first `/`.
pub fn escape_key(id: &str) -> String {
    let mut out = String::with_capacity(id.len());
    for ch in id.chars() {
        match ch {
            '%' => out.push_str("%25"),
            '/' => out.push_str("%2F"),
            c => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_key`]. Unknown escape sequences are kept verbatim.
pub fn unescape_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    let mut rest = key;
    while let Some(pos) = rest.find('%') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if let Some(r) = tail.strip_prefix("%25") {
            out.push('%');
            rest = r;
        } else if let Some(r) = tail.strip_prefix("%2F") {
            out.push('/');
            rest = r;
        } else {
            out.push('%');
            rest = &tail[1..];
        }
    }
    out.push_str(rest);
    out
}

/// Splits a `<collection>/<_key>` handle.
pub fn split_handle(handle: &str) -> Option<(&str, &str)> {
    handle
        .split_once('/')
        .filter(|(c, k)| !c.is_empty() && !k.is_empty())
}

pub fn to_multimodel_dump(kg: &KnowledgeGraph) -> MultiModelDump {
    let lookup_table = build_lookup_table(kg);
    let handle = |id: &str| format!("{}/{}", lookup_table[id], escape_key(id));

    let mut vertex_collections: BTreeMap<String, Vec<VertexDocument>> = BTreeMap::new();
    for n in kg.nodes() {
        vertex_collections
            .entry(n.label.clone())
            .or_default()
            .push(VertexDocument {
                key: escape_key(&n.id),
                properties: n.properties.clone(),
            });
    }
    let mut edge_collections: BTreeMap<String, Vec<EdgeDocument>> = BTreeMap::new();
    for e in kg.edges() {
        edge_collections
            .entry(e.rel_type.clone())
            .or_default()
            .push(EdgeDocument {
                key: escape_key(&e.id),
                from: handle(&e.from),
                to: handle(&e.to),
                properties: e.properties.clone(),
            });
    }
    MultiModelDump {
        vertex_collections,
        edge_collections,
        lookup_table,
    }
}

/// Rebuilds the graph, resolving every `_from`/`_to` against the vertex
/// collections. Unresolvable handles are reported together.
pub fn load_multimodel_dump(dump: &MultiModelDump) -> Result<KnowledgeGraph, IngestError> {
    let mut nodes = Vec::with_capacity(dump.vertex_count());
    let mut keys: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (collection, docs) in &dump.vertex_collections {
        let set = keys.entry(collection.as_str()).or_default();
        for doc in docs {
            set.insert(&doc.key);
            let id = unescape_key(&doc.key);
            match dump.lookup_table.get(&id) {
                Some(label) if label == collection => {}
                Some(label) => {
                    return Err(IngestError::LookupMismatch(format!(
                        "{id:?} listed as {label:?} but stored in {collection:?}"
                    )))
                }
                None => {
                    return Err(IngestError::LookupMismatch(format!("{id:?} missing from lookup table")))
                }
            }
            nodes.push(Node {
                id,
                label: collection.clone(),
                properties: doc.properties.clone(),
            });
        }
    }
    if dump.lookup_table.len() != nodes.len() {
        return Err(IngestError::LookupMismatch(format!(
            "{} lookup entries for {} vertices",
            dump.lookup_table.len(),
            nodes.len()
        )));
    }

    let resolve = |handle: &str| -> Option<String> {
        let (collection, key) = split_handle(handle)?;
        keys.get(collection)
            .filter(|set| set.contains(key))
            .map(|_| unescape_key(key))
    };

    let mut unresolved = Vec::new();
    let mut edges = Vec::with_capacity(dump.edge_count());
    for (rel_type, docs) in &dump.edge_collections {
        for doc in docs {
            let from = resolve(&doc.from);
            let to = resolve(&doc.to);
            if from.is_none() {
                unresolved.push(doc.from.clone());
            }
            if to.is_none() {
                unresolved.push(doc.to.clone());
            }
            if let (Some(from), Some(to)) = (from, to) {
                edges.push(Edge {
                    id: unescape_key(&doc.key),
                    rel_type: rel_type.clone(),
                    from,
                    to,
                    properties: doc.properties.clone(),
                });
            }
        }
    }
    if !unresolved.is_empty() {
        unresolved.sort();
        unresolved.dedup();
        return Err(IngestError::Unresolved(unresolved));
    }
    KnowledgeGraph::try_new(nodes, edges).map_err(IngestError::Invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handles_use_collection_slash_key() {
        let kg = KnowledgeGraph::new(
            vec![Node::new("d1", "Drug"), Node::new("c1", "Case")],
            vec![Edge::new("e1", "IS_PRIMARY_SUSPECT", "d1", "c1")],
        );
        let dump = to_multimodel_dump(&kg);
        let e = &dump.edge_collections["IS_PRIMARY_SUSPECT"][0];
        assert_eq!(e.from, "Drug/d1");
        assert_eq!(e.to, "Case/c1");
        assert_eq!(load_multimodel_dump(&dump).unwrap(), kg);
    }

    #[test]
    fn empty_graph() {
        let dump = to_multimodel_dump(&KnowledgeGraph::default());
        assert!(dump.vertex_collections.is_empty());
        assert!(dump.edge_collections.is_empty());
        assert!(dump.lookup_table.is_empty());
    }

    #[test]
    fn slash_in_id_is_escaped() {
        let kg = KnowledgeGraph::new(
            vec![Node::new("a/b%2F", "A")],
            vec![Edge::new("x/y", "R", "a/b%2F", "a/b%2F")],
        );
        let dump = to_multimodel_dump(&kg);
        let e = &dump.edge_collections["R"][0];
        assert_eq!(e.from, "A/a%2Fb%252F");
        assert_eq!(split_handle(&e.from), Some(("A", "a%2Fb%252F")));
        assert_eq!(load_multimodel_dump(&dump).unwrap(), kg);
    }

    #[test]
    fn escape_round_trip() {
        for id in ["", "plain", "/", "%", "%2F", "a/%/b", "ünï/cødé"] {
            assert_eq!(unescape_key(&escape_key(id)), id);
            assert!(!escape_key(id).contains('/'));
        }
    }

    #[test]
    fn missing_vertex_named_by_handle() {
        let mut dump = to_multimodel_dump(&KnowledgeGraph::new(vec![Node::new("c1", "Case")], vec![]));
        dump.edge_collections.insert(
            "R".into(),
            vec![EdgeDocument {
                key: "e".into(),
                from: "Case/c1".into(),
                to: "Drug/d9".into(),
                properties: Properties::new(),
            }],
        );
        match load_multimodel_dump(&dump) {
            Err(IngestError::Unresolved(list)) => assert_eq!(list, vec!["Drug/d9"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let kg = KnowledgeGraph::new(
            vec![Node::new("a", "A"), Node::new("b", "B")],
            vec![Edge::new("e", "R", "a", "b").with_property("w", 0.5)],
        );
        let dump = to_multimodel_dump(&kg);
        dump.write_dir(dir.path()).unwrap();
        assert!(dir.path().join("lookup.json").is_file());
        assert_eq!(MultiModelDump::read_dir(dir.path()).unwrap(), dump);
    }
}
