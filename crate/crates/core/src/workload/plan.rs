use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::spec::{Comparator, Direction, Field, Predicate, QuerySpec, Stage};
use super::WorkloadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradigm {
    Document,
    Graph,
    #[serde(rename = "multimodel")]
    MultiModel,
    /// Naive nested-loop reference used only for correctness checks.
    Oracle,
}

impl Paradigm {
    pub const BENCHMARKED: [Paradigm; 3] = [Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel];

    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::Document => "document",
            Paradigm::Graph => "graph",
            Paradigm::MultiModel => "multimodel",
            Paradigm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Paradigm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "document" => Ok(Paradigm::Document),
            "graph" => Ok(Paradigm::Graph),
            "multimodel" | "multi-model" => Ok(Paradigm::MultiModel),
            "oracle" => Ok(Paradigm::Oracle),
            other => Err(format!("unknown paradigm {other:?}")),
        }
    }
}

/// An index probe on a document collection.
#[derive(Debug, Clone, PartialEq)]
pub enum Seek {
    Eq { field: String, value: crate::model::PropertyValue },
    Range { field: String, min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputColumn {
    pub name: String,
    pub slot: usize,
    pub field: Field,
}

/// One physical operator. `slot` is the tuple position the step fills and
/// `from` the position it reads.
#[derive(Debug, Clone, PartialEq)]
pub enum PhysicalStep {
    /// Full scan of one collection with a residual filter (document, multi-model).
    CollectionScan {
        slot: usize,
        collection: String,
        filter: Vec<Predicate>,
    },
    /// Document: intersect field-index probes, then filter the rest.
    IndexedScan {
        slot: usize,
        collection: String,
        seeks: Vec<Seek>,
        residual: Vec<Predicate>,
    },
    /// Document: `$lookup` through relationship collections by `from`/`to`.
    HopLookup {
        from: usize,
        slot: usize,
        rel_collections: Vec<String>,
        direction: Direction,
        target_collection: String,
        filter: Vec<Predicate>,
    },
    /// Document: repeated `$graphLookup` over every relationship collection.
    NeighborhoodLookup { from: usize, slot: usize, max_depth: u32 },
    /// Graph: label index scan with a property filter.
    LabelScan {
        slot: usize,
        label: String,
        filter: Vec<Predicate>,
    },
    /// Graph: follow adjacency lists of the given types.
    AdjacencyWalk {
        from: usize,
        slot: usize,
        rel_types: Vec<String>,
        direction: Direction,
        target_label: String,
        filter: Vec<Predicate>,
    },
    /// Graph: bounded breadth-first walk over adjacency lists.
    NeighborhoodWalk { from: usize, slot: usize, max_depth: u32 },
    /// Multi-model: probe `_from`/`_to` indexes of edge collections.
    EdgeHop {
        from: usize,
        slot: usize,
        edge_collections: Vec<String>,
        direction: Direction,
        target_collection: String,
        filter: Vec<Predicate>,
    },
    /// Multi-model: `FOR v IN 1..d ANY` traversal over all edge collections.
    Traverse { from: usize, slot: usize, max_depth: u32 },
    /// Oracle: evaluate a logical stage by brute force.
    NestedLoop { slot: usize, from: Option<usize>, stage: Stage },
    Project { columns: Vec<OutputColumn> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutablePlan {
    pub spec: QuerySpec,
    pub paradigm: Paradigm,
    pub slots: Vec<String>,
    pub steps: Vec<PhysicalStep>,
}

impl ExecutablePlan {
    pub fn query_id(&self) -> &str {
        &self.spec.id
    }

    pub fn column_names(&self) -> Vec<String> {
        self.spec.columns().iter().map(|c| c.name.clone()).collect()
    }

    /// One line per step, for `--verbose` output.
    pub fn describe(&self) -> String {
        self.steps
            .iter()
            .map(|s| format!("{s:?}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn document_scan(slot: usize, label: &str, predicates: &[Predicate]) -> PhysicalStep {
    let mut seeks = Vec::new();
    let mut residual = Vec::new();
    for p in predicates {
        match &p.comparator {
            Comparator::Eq { value } => seeks.push(Seek::Eq {
                field: p.field.clone(),
                value: value.clone(),
            }),
            _ => residual.push(p.clone()),
        }
    }
    if seeks.is_empty() {
        if let Some(pos) = residual
            .iter()
            .position(|p| matches!(p.comparator, Comparator::Range { .. }))
        {
            let p = residual.remove(pos);
            if let Comparator::Range { min, max } = p.comparator {
                seeks.push(Seek::Range { field: p.field, min, max });
            }
        }
    }
    if seeks.is_empty() {
        PhysicalStep::CollectionScan {
            slot,
            collection: label.to_owned(),
            filter: residual,
        }
    } else {
        PhysicalStep::IndexedScan {
            slot,
            collection: label.to_owned(),
            seeks,
            residual,
        }
    }
}

/// Validates `spec` and lowers it to the operators of `paradigm`.
pub fn compile(spec: &QuerySpec, paradigm: Paradigm) -> Result<ExecutablePlan, WorkloadError> {
    spec.validate()?;
    let mut slots: Vec<String> = Vec::new();
    let mut slot_of: HashMap<String, usize> = HashMap::new();
    let mut steps = Vec::with_capacity(spec.stages.len());
    for stage in &spec.stages {
        let bind = match stage {
            Stage::NodeScan { bind, .. }
            | Stage::Expand { bind, .. }
            | Stage::NeighborhoodExpand { bind, .. } => bind,
            Stage::Project { columns } => {
                let columns = columns
                    .iter()
                    .map(|c| OutputColumn {
                        name: c.name.clone(),
                        slot: slot_of[&c.bind],
                        field: c.field.clone(),
                    })
                    .collect();
                steps.push(PhysicalStep::Project { columns });
                continue;
            }
        };
        let slot = slots.len();
        let from = match stage {
            Stage::Expand { from, .. } | Stage::NeighborhoodExpand { from, .. } => Some(slot_of[from]),
            _ => None,
        };
        slots.push(bind.clone());
        slot_of.insert(bind.clone(), slot);

        let step = match (paradigm, stage) {
            (Paradigm::Oracle, _) => PhysicalStep::NestedLoop {
                slot,
                from,
                stage: stage.clone(),
            },
            (Paradigm::Document, Stage::NodeScan { label, predicates, .. }) => {
                document_scan(slot, label, predicates)
            }
            (Paradigm::Graph, Stage::NodeScan { label, predicates, .. }) => PhysicalStep::LabelScan {
                slot,
                label: label.clone(),
                filter: predicates.clone(),
            },
            (Paradigm::MultiModel, Stage::NodeScan { label, predicates, .. }) => {
                PhysicalStep::CollectionScan {
                    slot,
                    collection: label.clone(),
                    filter: predicates.clone(),
                }
            }
            (
                _,
                Stage::Expand {
                    rel_types,
                    direction,
                    target_label,
                    predicates,
                    ..
                },
            ) => {
                let from = from.expect("expand has a source");
                let (rel_types, direction) = (rel_types.clone(), *direction);
                let (target, filter) = (target_label.clone(), predicates.clone());
                match paradigm {
                    Paradigm::Document => PhysicalStep::HopLookup {
                        from,
                        slot,
                        rel_collections: rel_types,
                        direction,
                        target_collection: target,
                        filter,
                    },
                    Paradigm::Graph => PhysicalStep::AdjacencyWalk {
                        from,
                        slot,
                        rel_types,
                        direction,
                        target_label: target,
                        filter,
                    },
                    _ => PhysicalStep::EdgeHop {
                        from,
                        slot,
                        edge_collections: rel_types,
                        direction,
                        target_collection: target,
                        filter,
                    },
                }
            }
            (_, Stage::NeighborhoodExpand { max_depth, .. }) => {
                let (from, max_depth) = (from.expect("expand has a source"), *max_depth);
                match paradigm {
                    Paradigm::Document => PhysicalStep::NeighborhoodLookup { from, slot, max_depth },
                    Paradigm::Graph => PhysicalStep::NeighborhoodWalk { from, slot, max_depth },
                    _ => PhysicalStep::Traverse { from, slot, max_depth },
                }
            }
            (_, Stage::Project { .. }) => unreachable!("handled above"),
        };
        steps.push(step);
    }
    Ok(ExecutablePlan {
        spec: spec.clone(),
        paradigm,
        slots,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::SchemaBinding;

    #[test]
    fn document_tier1_probes_equality_index() {
        let plan = compile(&SchemaBinding::default().tier1(), Paradigm::Document).unwrap();
        match &plan.steps[0] {
            PhysicalStep::IndexedScan { seeks, residual, .. } => {
                assert_eq!(seeks.len(), 1);
                assert!(matches!(&seeks[0], Seek::Eq { field, .. } if field == "occupation"));
                assert_eq!(residual.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn graph_tier4_is_a_single_walk() {
        let plan = compile(&SchemaBinding::default().tier4(1), Paradigm::Graph).unwrap();
        assert!(matches!(plan.steps[0], PhysicalStep::LabelScan { .. }));
        assert!(matches!(plan.steps[1], PhysicalStep::NeighborhoodWalk { from: 0, slot: 1, max_depth: 1 }));
        assert!(matches!(plan.steps[2], PhysicalStep::Project { .. }));
        assert_eq!(plan.steps.len(), 3);
    }

    #[test]
    fn multimodel_tier3_uses_edge_hops() {
        let plan = compile(&SchemaBinding::default().tier3(), Paradigm::MultiModel).unwrap();
        let hops = plan
            .steps
            .iter()
            .filter(|s| matches!(s, PhysicalStep::EdgeHop { .. }))
            .count();
        assert_eq!(hops, 3);
        assert_eq!(plan.slots, vec!["case", "drug", "manufacturer", "age_group"]);
    }

    #[test]
    fn range_only_scan_seeks_range() {
        let step = document_scan(0, "Case", &[Predicate::range("age", 1.0, 2.0)]);
        assert!(matches!(step, PhysicalStep::IndexedScan { ref seeks, .. } if matches!(seeks[0], Seek::Range { .. })));
        let step = document_scan(0, "Case", &[]);
        assert!(matches!(step, PhysicalStep::CollectionScan { .. }));
    }

    #[test]
    fn invalid_spec_does_not_compile() {
        let mut q = SchemaBinding::default().tier2();
        q.tier = 1;
        assert!(compile(&q, Paradigm::Graph).is_err());
    }

    #[test]
    fn paradigm_names() {
        for p in [Paradigm::Document, Paradigm::Graph, Paradigm::MultiModel, Paradigm::Oracle] {
            assert_eq!(p.as_str().parse::<Paradigm>().unwrap(), p);
            assert_eq!(serde_json::to_string(&p).unwrap(), format!("\"{p}\""));
        }
    }
}
