use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::PropertyValue;

use super::WorkloadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Outbound,
    Inbound,
    /// Outbound and inbound matches as one bag; a self-loop matches twice.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Comparator {
    Eq { value: PropertyValue },
    In { values: Vec<PropertyValue> },
    /// Inclusive numeric range; integers coerce to floats, other types never match.
    Range { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub field: String,
    #[serde(flatten)]
    pub comparator: Comparator,
}

impl Predicate {
    pub fn eq(field: impl Into<String>, value: impl Into<PropertyValue>) -> Self {
        Predicate {
            field: field.into(),
            comparator: Comparator::Eq { value: value.into() },
        }
    }

    pub fn any_of(field: impl Into<String>, values: Vec<PropertyValue>) -> Self {
        Predicate {
            field: field.into(),
            comparator: Comparator::In { values },
        }
    }

    pub fn range(field: impl Into<String>, min: f64, max: f64) -> Self {
        Predicate {
            field: field.into(),
            comparator: Comparator::Range { min, max },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Id,
    Label,
    Property(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub bind: String,
    pub field: Field,
}

impl Column {
    pub fn new(name: &str, bind: &str, field: Field) -> Self {
        Column {
            name: name.to_owned(),
            bind: bind.to_owned(),
            field,
        }
    }
}

/// One logical stage. Every stage but `Project` introduces a binding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    NodeScan {
        bind: String,
        label: String,
        #[serde(default)]
        predicates: Vec<Predicate>,
    },
    /// Follows edges of any listed type from an earlier binding to nodes of
    /// `target_label` that satisfy `predicates`. Bag semantics.
    Expand {
        from: String,
        bind: String,
        rel_types: Vec<String>,
        direction: Direction,
        target_label: String,
        #[serde(default)]
        predicates: Vec<Predicate>,
    },
    /// Distinct nodes within `max_depth` hops over every edge in either
    /// direction, excluding the start node.
    NeighborhoodExpand {
        from: String,
        bind: String,
        max_depth: u32,
    },
    Project {
        columns: Vec<Column>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub id: String,
    pub tier: u8,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub stages: Vec<Stage>,
}

impl QuerySpec {
    /// Binding names with their statically known label, in introduction order.
    /// Neighborhood bindings have no single label.
    pub fn bindings(&self) -> Vec<(&str, Option<&str>)> {
        self.stages
            .iter()
            .filter_map(|stage| match stage {
                Stage::NodeScan { bind, label, .. } => Some((bind.as_str(), Some(label.as_str()))),
                Stage::Expand { bind, target_label, .. } => {
                    Some((bind.as_str(), Some(target_label.as_str())))
                }
                Stage::NeighborhoodExpand { bind, .. } => Some((bind.as_str(), None)),
                Stage::Project { .. } => None,
            })
            .collect()
    }

    pub fn columns(&self) -> &[Column] {
        match self.stages.last() {
            Some(Stage::Project { columns }) => columns,
            _ => &[],
        }
    }

    pub fn expand_count(&self) -> usize {
        self.stages
            .iter()
            .filter(|s| matches!(s, Stage::Expand { .. }))
            .count()
    }

    pub fn has_neighborhood(&self) -> bool {
        self.stages
            .iter()
            .any(|s| matches!(s, Stage::NeighborhoodExpand { .. }))
    }

    /// Structural checks plus the tier shape: tier 1 has no expansion, tier 2
    /// exactly one, tier 3 two or more, tier 4 a neighborhood expansion.
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let err = |msg: String| Err(WorkloadError::InvalidQuery {
            id: self.id.clone(),
            message: msg,
        });

        match self.stages.first() {
            Some(Stage::NodeScan { .. }) => {}
            _ => return err("first stage must be a node scan".into()),
        }
        match self.stages.last() {
            Some(Stage::Project { columns }) if !columns.is_empty() => {}
            _ => return err("last stage must be a non-empty projection".into()),
        }

        let mut bound: HashMap<&str, usize> = HashMap::new();
        for (i, stage) in self.stages.iter().enumerate() {
            let (from, bind) = match stage {
                Stage::NodeScan { bind, .. } => {
                    if i != 0 {
                        return err("only one node scan is allowed".into());
                    }
                    (None, bind)
                }
                Stage::Expand { from, bind, rel_types, .. } => {
                    if rel_types.is_empty() {
                        return err(format!("expansion into {bind:?} lists no relationship types"));
                    }
                    (Some(from), bind)
                }
                Stage::NeighborhoodExpand { from, bind, max_depth } => {
                    if *max_depth == 0 {
                        return err("neighborhood depth must be >= 1".into());
                    }
                    (Some(from), bind)
                }
                Stage::Project { columns } => {
                    if i + 1 != self.stages.len() {
                        return err("projection must be the last stage".into());
                    }
                    for c in columns {
                        if !bound.contains_key(c.bind.as_str()) {
                            return err(format!("column {:?} uses unbound {:?}", c.name, c.bind));
                        }
                    }
                    continue;
                }
            };
            if let Some(from) = from {
                if !bound.contains_key(from.as_str()) {
                    return err(format!("stage {i} expands from unbound {from:?}"));
                }
            }
            if bound.insert(bind, i).is_some() {
                return err(format!("binding {bind:?} introduced twice"));
            }
        }

        let expands = self.expand_count();
        let tier_ok = match self.tier {
            1 => expands == 0 && !self.has_neighborhood(),
            2 => expands == 1,
            3 => expands >= 2,
            4 => self.has_neighborhood(),
            _ => return err(format!("tier {} is not in 1..=4", self.tier)),
        };
        if !tier_ok {
            return err(format!("stages do not have the shape of a tier-{} query", self.tier));
        }
        Ok(())
    }
}
