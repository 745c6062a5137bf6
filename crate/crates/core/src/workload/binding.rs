use serde::{Deserialize, Serialize};

use crate::model::PropertyValue;

use super::spec::{Column, Direction, Field, Predicate, QuerySpec, Stage};
use super::{Catalog, WorkloadError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HopBinding {
    pub rel_types: Vec<String>,
    pub direction: Direction,
}

impl HopBinding {
    fn new(rel_types: &[&str], direction: Direction) -> Self {
        HopBinding {
            rel_types: rel_types.iter().map(|s| s.to_string()).collect(),
            direction,
        }
    }
}

/// Which earlier binding the manufacturer hop of the tier-3 query starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopSource {
    Case,
    Drug,
}

/// Maps the abstract tier templates onto concrete labels, relationship types,
/// property names and literal values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchemaBinding {
    pub case_label: String,
    pub drug_label: String,
    pub manufacturer_label: String,
    pub age_group_label: String,
    pub age_field: String,
    pub age_range: [f64; 2],
    pub gender_field: String,
    pub gender_values: Vec<String>,
    pub occupation_field: String,
    pub hospital_staff_value: String,
    pub age_group_name_field: String,
    pub age_group_names: Vec<String>,
    pub age_group_hop: HopBinding,
    pub drug_hop: HopBinding,
    pub manufacturer_hop: HopBinding,
    pub manufacturer_hop_source: HopSource,
}

impl Default for SchemaBinding {
    fn default() -> Self {
        SchemaBinding {
            case_label: "Case".into(),
            drug_label: "Drug".into(),
            manufacturer_label: "Manufacturer".into(),
            age_group_label: "AgeGroup".into(),
            age_field: "age".into(),
            age_range: [60.0, 90.0],
            gender_field: "gender".into(),
            gender_values: vec!["F".into(), "M".into()],
            occupation_field: "occupation".into(),
            hospital_staff_value: "HP".into(),
            age_group_name_field: "name".into(),
            age_group_names: vec!["Child".into(), "Adult".into()],
            age_group_hop: HopBinding::new(&["FALLS_UNDER"], Direction::Outbound),
            drug_hop: HopBinding::new(
                &[
                    "IS_PRIMARY_SUSPECT",
                    "IS_SECONDARY_SUSPECT",
                    "IS_CONCOMITANT",
                    "IS_INTERACTING",
                ],
                Direction::Outbound,
            ),
            manufacturer_hop: HopBinding::new(&["REGISTERED"], Direction::Inbound),
            manufacturer_hop_source: HopSource::Case,
        }
    }
}

const CASE: &str = "case";

fn texts(values: &[String]) -> Vec<PropertyValue> {
    values.iter().map(|v| PropertyValue::Text(v.clone())).collect()
}

impl SchemaBinding {
    /// Fails with every label, relationship type or field the binding names
    /// that the dataset lacks.
    pub fn check(&self, catalog: &Catalog) -> Result<(), WorkloadError> {
        let mut missing = Vec::new();
        let mut need_field = |label: &str, field: &str| match catalog.fields.get(label) {
            None => missing.push(format!("label {label:?}")),
            Some(f) if !f.contains(field) => missing.push(format!("field {label}.{field}")),
            Some(_) => {}
        };
        need_field(&self.case_label, &self.age_field);
        need_field(&self.case_label, &self.gender_field);
        need_field(&self.case_label, &self.occupation_field);
        need_field(&self.age_group_label, &self.age_group_name_field);
        for label in [&self.drug_label, &self.manufacturer_label] {
            if !catalog.fields.contains_key(label) {
                missing.push(format!("label {label:?}"));
            }
        }
        for hop in [&self.age_group_hop, &self.drug_hop, &self.manufacturer_hop] {
            for r in &hop.rel_types {
                if !catalog.rel_types.contains(r) {
                    missing.push(format!("relationship type {r:?}"));
                }
            }
        }
        missing.dedup();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(WorkloadError::Binding(missing))
        }
    }

    fn case_scan(&self, predicates: Vec<Predicate>) -> Stage {
        Stage::NodeScan {
            bind: CASE.into(),
            label: self.case_label.clone(),
            predicates,
        }
    }

    fn hospital_staff(&self) -> Predicate {
        Predicate::eq(&self.occupation_field, self.hospital_staff_value.as_str())
    }

    fn age_group_expand(&self, predicates: Vec<Predicate>) -> Stage {
        Stage::Expand {
            from: CASE.into(),
            bind: "age_group".into(),
            rel_types: self.age_group_hop.rel_types.clone(),
            direction: self.age_group_hop.direction,
            target_label: self.age_group_label.clone(),
            predicates,
        }
    }

    /// Attribute filter on one class.
    pub fn tier1(&self) -> QuerySpec {
        QuerySpec {
            id: "q1_attribute_filter".into(),
            tier: 1,
            description: "elderly reports filed by hospital staff, known gender".into(),
            stages: vec![
                self.case_scan(vec![
                    Predicate::range(&self.age_field, self.age_range[0], self.age_range[1]),
                    self.hospital_staff(),
                    Predicate::any_of(&self.gender_field, texts(&self.gender_values)),
                ]),
                Stage::Project {
                    columns: vec![
                        Column::new("case_id", CASE, Field::Id),
                        Column::new("age", CASE, Field::Property(self.age_field.clone())),
                        Column::new("gender", CASE, Field::Property(self.gender_field.clone())),
                    ],
                },
            ],
        }
    }

    /// Single join from reports to age groups.
    pub fn tier2(&self) -> QuerySpec {
        QuerySpec {
            id: "q2_one_hop_join".into(),
            tier: 2,
            description: "hospital-staff reports joined to selected age groups".into(),
            stages: vec![
                self.case_scan(vec![self.hospital_staff()]),
                self.age_group_expand(vec![Predicate::any_of(
                    &self.age_group_name_field,
                    texts(&self.age_group_names),
                )]),
                Stage::Project {
                    columns: vec![
                        Column::new("case_id", CASE, Field::Id),
                        Column::new(
                            "age_group",
                            "age_group",
                            Field::Property(self.age_group_name_field.clone()),
                        ),
                    ],
                },
            ],
        }
    }

    /// Reports joined to drugs, manufacturers and age groups.
    pub fn tier3(&self) -> QuerySpec {
        let source = match self.manufacturer_hop_source {
            HopSource::Case => CASE,
            HopSource::Drug => "drug",
        };
        QuerySpec {
            id: "q3_multi_join".into(),
            tier: 3,
            description: "reports with their drugs, manufacturers and age group".into(),
            stages: vec![
                self.case_scan(vec![]),
                Stage::Expand {
                    from: CASE.into(),
                    bind: "drug".into(),
                    rel_types: self.drug_hop.rel_types.clone(),
                    direction: self.drug_hop.direction,
                    target_label: self.drug_label.clone(),
                    predicates: vec![],
                },
                Stage::Expand {
                    from: source.into(),
                    bind: "manufacturer".into(),
                    rel_types: self.manufacturer_hop.rel_types.clone(),
                    direction: self.manufacturer_hop.direction,
                    target_label: self.manufacturer_label.clone(),
                    predicates: vec![],
                },
                self.age_group_expand(vec![]),
                Stage::Project {
                    columns: vec![
                        Column::new("case_id", CASE, Field::Id),
                        Column::new("drug_id", "drug", Field::Id),
                        Column::new("manufacturer_id", "manufacturer", Field::Id),
                        Column::new(
                            "age_group",
                            "age_group",
                            Field::Property(self.age_group_name_field.clone()),
                        ),
                    ],
                },
            ],
        }
    }

    /// Every report's neighborhood up to `depth` hops.
    pub fn tier4(&self, depth: u32) -> QuerySpec {
        QuerySpec {
            id: format!("q4_neighborhood_d{depth}"),
            tier: 4,
            description: format!("all nodes within {depth} hop(s) of each report"),
            stages: vec![
                self.case_scan(vec![]),
                Stage::NeighborhoodExpand {
                    from: CASE.into(),
                    bind: "neighbor".into(),
                    max_depth: depth,
                },
                Stage::Project {
                    columns: vec![
                        Column::new("case_id", CASE, Field::Id),
                        Column::new("neighbor_label", "neighbor", Field::Label),
                        Column::new("neighbor_id", "neighbor", Field::Id),
                    ],
                },
            ],
        }
    }
}
