//! Knowledge-graph complexity metrics and a paradigm benchmarking toolkit.
//!
//! The crate measures a labelled property graph along three dimensions (scale,
//! connectivity density, semantic richness), grows it by disjoint
//! self-duplication, runs a four-tier query workload against in-process
//! document, graph-native, and multi-model engines under cold and hot
//! protocols, and turns the metrics into a paradigm recommendation.

pub mod advisor;
pub mod engine;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod par;
pub mod scale;
pub mod synth;
pub mod workload;

pub use model::{Edge, KnowledgeGraph, Node, Properties, PropertyValue};
pub use par::Execution;
