use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::model::{Edge, KnowledgeGraph, Node, Properties};
use crate::par::Execution;

use super::{check_collection_name, list_collections, read_file, write_file, IngestError};

pub const NODE_HEADER: [&str; 2] = ["id", "properties"];
pub const EDGE_HEADER: [&str; 4] = ["id", "from", "to", "properties"];

/// In-memory image of a CSV export: file contents keyed by label (nodes) or
/// relationship type (edges).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CsvExportBundle {
    pub node_files: BTreeMap<String, String>,
    pub edge_files: BTreeMap<String, String>,
}

impl CsvExportBundle {
    /// Exports a graph, one file per label and per relationship type.
    pub fn from_graph(kg: &KnowledgeGraph) -> Result<Self, IngestError> {
        let mut node_rows: BTreeMap<&str, Vec<&Node>> = BTreeMap::new();
        for node in kg.nodes() {
            node_rows.entry(&node.label).or_default().push(node);
        }
        let mut edge_rows: BTreeMap<&str, Vec<&Edge>> = BTreeMap::new();
        for edge in kg.edges() {
            edge_rows.entry(&edge.rel_type).or_default().push(edge);
        }

        let mut bundle = CsvExportBundle::default();
        for (label, nodes) in node_rows {
            check_collection_name(label)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(NODE_HEADER).expect("in-memory write");
            for n in nodes {
                w.write_record([n.id.as_str(), &properties_text(&n.properties)])
                    .expect("in-memory write");
            }
            bundle.node_files.insert(label.to_owned(), finish(w));
        }
        for (rel, edges) in edge_rows {
            check_collection_name(rel)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(EDGE_HEADER).expect("in-memory write");
            for e in edges {
                w.write_record([
                    e.id.as_str(),
                    &e.from,
                    &e.to,
                    &properties_text(&e.properties),
                ])
                .expect("in-memory write");
            }
            bundle.edge_files.insert(rel.to_owned(), finish(w));
        }
        Ok(bundle)
    }

    /// Reads `nodes/<Label>.csv` and `edges/<RelType>.csv` under `dir`.
    pub fn read_dir(dir: &Path) -> Result<Self, IngestError> {
        let nodes_dir = dir.join("nodes");
        if !nodes_dir.is_dir() {
            return Err(IngestError::io(
                &nodes_dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "missing nodes/ directory"),
            ));
        }
        let mut bundle = CsvExportBundle::default();
        for (name, path) in list_collections(&nodes_dir, "csv")? {
            bundle.node_files.insert(name, read_file(&path)?);
        }
        for (name, path) in list_collections(&dir.join("edges"), "csv")? {
            bundle.edge_files.insert(name, read_file(&path)?);
        }
        Ok(bundle)
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir.join("nodes")).map_err(|e| IngestError::io(dir, e))?;
        for (label, text) in &self.node_files {
            check_collection_name(label)?;
            write_file(&dir.join("nodes").join(format!("{label}.csv")), text.as_bytes())?;
        }
        std::fs::create_dir_all(dir.join("edges")).map_err(|e| IngestError::io(dir, e))?;
        for (rel, text) in &self.edge_files {
            check_collection_name(rel)?;
            write_file(&dir.join("edges").join(format!("{rel}.csv")), text.as_bytes())?;
        }
        Ok(())
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn properties_text(props: &Properties) -> String {
    serde_json::to_string(props).expect("property trees serialize")
}

fn parse_properties(file: &str, line: u64, text: &str) -> Result<Properties, IngestError> {
    if text.trim().is_empty() {
        return Ok(Properties::new());
    }
    serde_json::from_str(text).map_err(|e| IngestError::Parse {
        file: file.to_owned(),
        line,
        message: format!("properties column: {e}"),
    })
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes())
}

fn check_header(file: &str, rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<(), IngestError> {
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(file, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if found != expected {
        return Err(IngestError::Header {
            file: file.to_owned(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(())
}

fn csv_error(file: &str, e: csv::Error) -> IngestError {
    IngestError::Parse {
        file: file.to_owned(),
        line: e.position().map(|p| p.line()).unwrap_or(0),
        message: e.to_string(),
    }
}

fn parse_node_file(label: &str, text: &str) -> Result<Vec<Node>, IngestError> {
    let file = format!("nodes/{label}.csv");
    let mut rdr = reader(text);
    check_header(&file, &mut rdr, &NODE_HEADER)?;
    let mut nodes = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(&file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        nodes.push(Node {
            id: record[0].to_owned(),
            label: label.to_owned(),
            properties: parse_properties(&file, line, &record[1])?,
        });
    }
    Ok(nodes)
}

fn parse_edge_file(rel: &str, text: &str) -> Result<Vec<Edge>, IngestError> {
    let file = format!("edges/{rel}.csv");
    let mut rdr = reader(text);
    check_header(&file, &mut rdr, &EDGE_HEADER)?;
    let mut edges = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(&file, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        edges.push(Edge {
            id: record[0].to_owned(),
            rel_type: rel.to_owned(),
            from: record[1].to_owned(),
            to: record[2].to_owned(),
            properties: parse_properties(&file, line, &record[3])?,
        });
    }
    Ok(edges)
}

/// Parses every file (possibly in parallel) and assembles a validated graph.
///
/// A node id present in two label files is rejected as multi-labelled.
pub fn load_csv_bundle(bundle: &CsvExportBundle, exec: Execution) -> Result<KnowledgeGraph, IngestError> {
    let node_files: Vec<(&String, &String)> = bundle.node_files.iter().collect();
    let edge_files: Vec<(&String, &String)> = bundle.edge_files.iter().collect();
    let parsed_nodes = exec.map(&node_files, |(label, text)| parse_node_file(label, text));
    let parsed_edges = exec.map(&edge_files, |(rel, text)| parse_edge_file(rel, text));

    let mut nodes = Vec::new();
    for batch in parsed_nodes {
        nodes.extend(batch?);
    }
    let mut edges = Vec::new();
    for batch in parsed_edges {
        edges.extend(batch?);
    }

    let mut labels_by_id: HashMap<&str, Vec<&str>> = HashMap::new();
    for n in &nodes {
        labels_by_id.entry(&n.id).or_default().push(&n.label);
    }
    let mut multi: Vec<(&str, Vec<&str>)> = labels_by_id
        .into_iter()
        .filter_map(|(id, mut labels)| {
            labels.sort_unstable();
            labels.dedup();
            (labels.len() > 1).then_some((id, labels))
        })
        .collect();
    multi.sort();
    if let Some((id, labels)) = multi.into_iter().next() {
        return Err(IngestError::MultiLabel {
            id: id.to_owned(),
            labels: labels.into_iter().map(str::to_owned).collect(),
        });
    }

    KnowledgeGraph::try_new(nodes, edges).map_err(IngestError::Invalid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PropertyValue;

    fn bundle(nodes: &[(&str, &str)], edges: &[(&str, &str)]) -> CsvExportBundle {
        CsvExportBundle {
            node_files: nodes.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
            edge_files: edges.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    #[test]
    fn single_node_file() {
        let b = bundle(&[("Case", "id,properties\nc1,\"{\"\"age\"\":70}\"\n")], &[]);
        let kg = load_csv_bundle(&b, Execution::Sequential).unwrap();
        assert_eq!(kg.node_count(), 1);
        assert_eq!(kg.edge_count(), 0);
        assert_eq!(kg.nodes()[0].properties["age"], PropertyValue::Int(70));
        assert_eq!(kg.class_set().iter().collect::<Vec<_>>(), vec!["Case"]);
    }

    #[test]
    fn nested_properties_survive() {
        let b = bundle(
            &[("Case", "id,properties\nc1,\"{\"\"dates\"\":{\"\"start\"\":\"\"2004-01-01\"\"}}\"\n")],
            &[],
        );
        let kg = load_csv_bundle(&b, Execution::Sequential).unwrap();
        let dates = &kg.nodes()[0].properties["dates"];
        assert_eq!(dates.depth(), 1);
        let PropertyValue::Map(m) = dates else { panic!() };
        assert_eq!(m["start"], PropertyValue::from("2004-01-01"));
    }

    #[test]
    fn malformed_properties_name_file_and_line() {
        let b = bundle(&[("Case", "id,properties\nc1,{}\nc2,{oops\n")], &[]);
        match load_csv_bundle(&b, Execution::Sequential) {
            Err(IngestError::Parse { file, line, .. }) => {
                assert_eq!(file, "nodes/Case.csv");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_properties_column_is_tolerated() {
        let b = bundle(
            &[("A", "id,properties\na,\nb,{}\n")],
            &[("R", "id,from,to,properties\ne,a,b,\n")],
        );
        let kg = load_csv_bundle(&b, Execution::Sequential).unwrap();
        assert!(kg.edges()[0].properties.is_empty());
    }

    #[test]
    fn dangling_edge_is_a_validation_error() {
        let b = bundle(
            &[("A", "id,properties\na,{}\n")],
            &[("R", "id,from,to,properties\ne1,a,zz,{}\n")],
        );
        match load_csv_bundle(&b, Execution::Sequential) {
            Err(IngestError::Invalid(report)) => assert_eq!(report.violations.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_header_rejected() {
        let b = bundle(&[("A", "key,props\na,{}\n")], &[]);
        assert!(matches!(
            load_csv_bundle(&b, Execution::Sequential),
            Err(IngestError::Header { .. })
        ));
    }

    #[test]
    fn multi_label_rejected() {
        let b = bundle(&[("A", "id,properties\nx,{}\n"), ("B", "id,properties\nx,{}\n")], &[]);
        match load_csv_bundle(&b, Execution::Sequential) {
            Err(IngestError::MultiLabel { id, labels }) => {
                assert_eq!(id, "x");
                assert_eq!(labels, vec!["A", "B"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn awkward_ids_are_quoted() {
        let kg = KnowledgeGraph::new(
            vec![
                Node::new("a,b", "A").with_property("t", "line\nbreak"),
                Node::new("q\"x", "A"),
            ],
            vec![Edge::new("e/1", "R", "a,b", "q\"x")],
        );
        let b = CsvExportBundle::from_graph(&kg).unwrap();
        assert_eq!(load_csv_bundle(&b, Execution::Parallel).unwrap(), kg);
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let kg = KnowledgeGraph::new(
            vec![Node::new("a", "A"), Node::new("b", "B")],
            vec![Edge::new("e", "R", "a", "b")],
        );
        CsvExportBundle::from_graph(&kg).unwrap().write_dir(dir.path()).unwrap();
        assert!(dir.path().join("nodes/A.csv").is_file());
        assert!(dir.path().join("edges/R.csv").is_file());
        let back = CsvExportBundle::read_dir(dir.path()).unwrap();
        assert_eq!(load_csv_bundle(&back, Execution::Sequential).unwrap(), kg);
    }
}
