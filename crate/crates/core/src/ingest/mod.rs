//! Conversion between the CSV export bundle, the document-paradigm dump, and
//! the multi-model dump.
//!
//! The CSV bundle is the interchange format: one file per node label and one
//! per relationship type. From a loaded graph two JSON targets are produced:
//!
//! * a [`DocumentDump`] keyed by source ids, with relationship documents that
//!   carry `id`, `from`, `to` and `properties`;
//! * a [`MultiModelDump`] whose edges address vertices as `<collection>/<_key>`,
//!   built through a global id → label lookup table.
//!
//! Both dumps reload losslessly into the original [`KnowledgeGraph`].

mod csv_bundle;
mod document;
mod multimodel;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{KnowledgeGraph, ValidationReport};

pub use csv_bundle::{load_csv_bundle, CsvExportBundle, EDGE_HEADER, NODE_HEADER};
pub use document::{
    load_document_dump, to_document_dump, DocumentDump, NodeDocument, RelationshipDocument,
};
pub use multimodel::{
    escape_key, load_multimodel_dump, split_handle, to_multimodel_dump, unescape_key, EdgeDocument,
    MultiModelDump, VertexDocument,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },
    #[error("{file}: expected header {expected:?}, found {found:?}")]
    Header {
        file: String,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("node {id:?} carries more than one label: {labels:?}")]
    MultiLabel { id: String, labels: Vec<String> },
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
    #[error("unresolvable references: {}", .0.join(", "))]
    Unresolved(Vec<String>),
    #[error("{name:?} cannot be used as a collection or file name")]
    BadCollectionName { name: String },
    #[error("document {id:?} stored in collection {collection:?} but labelled {label:?}")]
    LabelMismatch {
        id: String,
        collection: String,
        label: String,
    },
    #[error("lookup table disagrees with vertex collections: {0}")]
    LookupMismatch(String),
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Global map from source node id to class label.
pub fn build_lookup_table(kg: &KnowledgeGraph) -> BTreeMap<String, String> {
    kg.nodes()
        .iter()
        .map(|n| (n.id.clone(), n.label.clone()))
        .collect()
}

/// Labels and relationship types double as file names.
pub(crate) fn check_collection_name(name: &str) -> Result<(), IngestError> {
    let bad = name.is_empty()
        || name == "."
        || name == ".."
        || name.contains(['/', '\\', '\0']);
    if bad {
        Err(IngestError::BadCollectionName { name: name.to_owned() })
    } else {
        Ok(())
    }
}

/// Files in `dir` with the given extension, sorted by collection name.
/// A missing directory yields an empty list.
pub(crate) fn list_collections(dir: &Path, ext: &str) -> Result<Vec<(String, PathBuf)>, IngestError> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(IngestError::io(dir, e)),
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| IngestError::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some(ext) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.push((stem.to_owned(), path.clone()));
        }
    }
    out.sort();
    Ok(out)
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), IngestError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| IngestError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| IngestError::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|e| IngestError::io(path, e))
}

/// Serializes documents one per line.
pub(crate) fn to_json_lines<T: serde::Serialize>(docs: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for doc in docs {
        serde_json::to_writer(&mut out, doc).expect("documents serialize");
        out.push(b'\n');
    }
    out
}

pub(crate) fn parse_json_lines<T: serde::de::DeserializeOwned>(
    file: &str,
    text: &str,
    check: impl Fn(&serde_json::Value, u64) -> Result<(), IngestError>,
) -> Result<Vec<T>, IngestError> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i as u64 + 1;
        let parse_err = |e: serde_json::Error| IngestError::Parse {
            file: file.to_owned(),
            line: line_no,
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(line).map_err(parse_err)?;
        check(&value, line_no)?;
        docs.push(serde_json::from_value(value).map_err(parse_err)?);
    }
    Ok(docs)
}
