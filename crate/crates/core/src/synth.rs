//! Deterministic synthetic knowledge graphs for desk-scale testing.
//!
//! Class and relationship-type counts are apportioned exactly from the
//! requested distribution (largest-remainder rounding), so uniform specs give
//! exactly uniform histograms. Edge endpoints are sampled without repeating a
//! `(from, rel_type, to)` triple.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Edge, KnowledgeGraph, Node, Properties, PropertyValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
    #[error(
        "{requested} edges requested but at most {max_edges} distinct triples fit \
         (maximum connectivity density {max_cd:.4})"
    )]
    InfeasibleDensity {
        requested: u64,
        max_edges: u64,
        max_cd: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LabelDistribution {
    #[default]
    Uniform,
    Zipf {
        s: f64,
    },
    Weighted {
        weights: Vec<f64>,
    },
}

/// Naming scheme for classes, relationship types, and node properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Vocabulary {
    /// `Class0..`, `REL_0..`, with `name`/`value` properties.
    #[default]
    Generic,
    /// The eight adverse-event classes and eleven relationship types.
    Faers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EndpointRule {
    /// Both endpoints drawn uniformly from all nodes.
    #[default]
    Uniform,
    /// Endpoints restricted to the vocabulary's class pair per relationship type.
    Schema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub node_count: usize,
    pub class_count: usize,
    pub reltype_count: usize,
    #[serde(default)]
    pub class_distribution: LabelDistribution,
    #[serde(default)]
    pub reltype_distribution: LabelDistribution,
    pub target_cd: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub vocabulary: Vocabulary,
    #[serde(default)]
    pub endpoints: EndpointRule,
}

pub const FAERS_CLASSES: [&str; 8] = [
    "Case",
    "Drug",
    "Reaction",
    "Therapy",
    "Manufacturer",
    "Outcome",
    "AgeGroup",
    "ReportSource",
];

/// `(rel_type, from class, to class)`.
pub const FAERS_RELATIONSHIPS: [(&str, &str, &str); 11] = [
    ("FALLS_UNDER", "Case", "AgeGroup"),
    ("RESULTED_IN", "Case", "Outcome"),
    ("HAS_REACTION", "Case", "Reaction"),
    ("REPORTED_BY", "Case", "ReportSource"),
    ("IS_PRIMARY_SUSPECT", "Case", "Drug"),
    ("IS_SECONDARY_SUSPECT", "Case", "Drug"),
    ("IS_CONCOMITANT", "Case", "Drug"),
    ("IS_INTERACTING", "Case", "Drug"),
    ("RECEIVED", "Case", "Therapy"),
    ("PRESCRIBED", "Therapy", "Drug"),
    ("REGISTERED", "Manufacturer", "Case"),
];

/// Node counts per class in the 14,000-node base, aligned with [`FAERS_CLASSES`].
pub const FAERS_CLASS_WEIGHTS: [f64; 8] = [6600.0, 2600.0, 2300.0, 1700.0, 780.0, 7.0, 6.0, 7.0];

/// Edge counts per type in the 11,000-edge base, aligned with [`FAERS_RELATIONSHIPS`].
pub const FAERS_REL_WEIGHTS: [f64; 11] = [
    2100.0, 700.0, 2780.0, 900.0, 2100.0, 800.0, 600.0, 60.0, 500.0, 210.0, 250.0,
];

pub const AGE_GROUP_NAMES: [&str; 6] = ["Child", "Adult", "Elderly", "Adolescent", "Infant", "Neonate"];
const OUTCOME_CODES: [&str; 7] = ["DE", "LT", "HO", "DS", "CA", "RI", "OT"];
const SOURCE_CODES: [&str; 7] = ["FGN", "SDY", "LIT", "CSM", "HP", "UF", "CR"];
const OCCUPATIONS: [(&str, u32); 5] = [("HP", 25), ("MD", 25), ("CN", 30), ("PH", 12), ("LW", 8)];

impl SyntheticSpec {
    /// Uniform classes and relationship types with generic names.
    pub fn uniform(node_count: usize, class_count: usize, reltype_count: usize, target_cd: f64, seed: u64) -> Self {
        SyntheticSpec {
            node_count,
            class_count,
            reltype_count,
            class_distribution: LabelDistribution::Uniform,
            reltype_distribution: LabelDistribution::Uniform,
            target_cd,
            seed,
            vocabulary: Vocabulary::Generic,
            endpoints: EndpointRule::Uniform,
        }
    }

    /// Adverse-event shaped graph: eight classes, eleven schema-constrained
    /// relationship types, CD = 11/14. At 14,000 nodes the counts match the
    /// base dataset exactly.
    pub fn faers_like(node_count: usize, seed: u64) -> Self {
        SyntheticSpec {
            node_count,
            class_count: FAERS_CLASSES.len(),
            reltype_count: FAERS_RELATIONSHIPS.len(),
            class_distribution: LabelDistribution::Weighted {
                weights: FAERS_CLASS_WEIGHTS.to_vec(),
            },
            reltype_distribution: LabelDistribution::Weighted {
                weights: FAERS_REL_WEIGHTS.to_vec(),
            },
            target_cd: 11_000.0 / 14_000.0,
            seed,
            vocabulary: Vocabulary::Faers,
            endpoints: EndpointRule::Schema,
        }
    }

    pub fn edge_count(&self) -> usize {
        (self.target_cd * self.node_count as f64).round() as usize
    }
}

impl LabelDistribution {
    fn weights(&self, k: usize) -> Result<Vec<f64>, SynthError> {
        let w = match self {
            LabelDistribution::Uniform => vec![1.0; k],
            LabelDistribution::Zipf { s } => {
                if !s.is_finite() || *s < 0.0 {
                    return Err(SynthError::Invalid(format!("zipf exponent {s} must be >= 0")));
                }
                (1..=k).map(|r| 1.0 / (r as f64).powf(*s)).collect()
            }
            LabelDistribution::Weighted { weights } => {
                if weights.len() != k {
                    return Err(SynthError::Invalid(format!(
                        "{} weights given for {k} labels",
                        weights.len()
                    )));
                }
                if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(SynthError::Invalid("weights must be positive".into()));
                }
                weights.clone()
            }
        };
        Ok(w)
    }
}

/// Largest-remainder apportionment of `total` over `weights`, every share >= 1.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let k = weights.len();
    debug_assert!(total >= k);
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    for i in 0..k {
        if counts[i] == 0 {
            let donor = (0..k).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap();
            counts[donor] -= 1;
            counts[i] = 1;
        }
    }
    counts
}

struct Names {
    classes: Vec<String>,
    rel_types: Vec<String>,
    /// Class index pair per relationship type when endpoints follow the schema.
    pairs: Option<Vec<(usize, usize)>>,
}

fn names(spec: &SyntheticSpec) -> Result<Names, SynthError> {
    match spec.vocabulary {
        Vocabulary::Generic => {
            if spec.endpoints == EndpointRule::Schema {
                return Err(SynthError::Invalid(
                    "schema-constrained endpoints need the faers vocabulary".into(),
                ));
            }
            Ok(Names {
                classes: (0..spec.class_count).map(|i| format!("Class{i}")).collect(),
                rel_types: (0..spec.reltype_count).map(|i| format!("REL_{i}")).collect(),
                pairs: None,
            })
        }
        Vocabulary::Faers => {
            if spec.class_count != FAERS_CLASSES.len() || spec.reltype_count != FAERS_RELATIONSHIPS.len() {
                return Err(SynthError::Invalid(format!(
                    "the faers vocabulary has {} classes and {} relationship types",
                    FAERS_CLASSES.len(),
                    FAERS_RELATIONSHIPS.len()
                )));
            }
            let class_idx = |name: &str| FAERS_CLASSES.iter().position(|c| *c == name).unwrap();
            let pairs = (spec.endpoints == EndpointRule::Schema).then(|| {
                FAERS_RELATIONSHIPS
                    .iter()
                    .map(|(_, f, t)| (class_idx(f), class_idx(t)))
                    .collect()
            });
            Ok(Names {
                classes: FAERS_CLASSES.iter().map(|s| s.to_string()).collect(),
                rel_types: FAERS_RELATIONSHIPS.iter().map(|r| r.0.to_string()).collect(),
                pairs,
            })
        }
    }
}

fn faers_properties(class: &str, i: usize, rng: &mut ChaCha8Rng) -> Properties {
    let mut p = Properties::new();
    match class {
        "Case" => {
            p.insert("primaryid".into(), PropertyValue::Int(100_000_000 + i as i64));
            let roll: u32 = rng.gen_range(0..100);
            let age: i64 = rng.gen_range(0..=100);
            // Mixed encodings exercise numeric coercion.
            match roll {
                0..=3 => {}
                4..=6 => {
                    p.insert("age".into(), PropertyValue::Text(age.to_string()));
                }
                7..=16 => {
                    p.insert("age".into(), PropertyValue::Float(age as f64 + 0.5));
                }
                _ => {
                    p.insert("age".into(), PropertyValue::Int(age));
                }
            }
            p.insert("age_unit".into(), "YR".into());
            let gender = match rng.gen_range(0..100) {
                0..=45 => "F",
                46..=91 => "M",
                _ => "UNK",
            };
            p.insert("gender".into(), gender.into());
            let mut roll = rng.gen_range(0..100);
            let mut occupation = OCCUPATIONS[0].0;
            for (code, weight) in OCCUPATIONS {
                if roll < weight {
                    occupation = code;
                    break;
                }
                roll -= weight;
            }
            p.insert("occupation".into(), occupation.into());
        }
        "AgeGroup" => {
            p.insert("name".into(), AGE_GROUP_NAMES[i % AGE_GROUP_NAMES.len()].into());
        }
        "Drug" => {
            p.insert("name".into(), format!("DRUG-{i}").into());
            p.insert("primary_substance".into(), format!("SUBSTANCE-{}", i % 97).into());
        }
        "Reaction" => {
            p.insert("description".into(), format!("REACTION-{i}").into());
        }
        "Therapy" => {
            p.insert("primaryid".into(), PropertyValue::Int(200_000_000 + i as i64));
        }
        "Manufacturer" => {
            p.insert("manufacturer_name".into(), format!("MFR-{i}").into());
        }
        "Outcome" => {
            p.insert("code".into(), OUTCOME_CODES[i % OUTCOME_CODES.len()].into());
        }
        "ReportSource" => {
            p.insert("code".into(), SOURCE_CODES[i % SOURCE_CODES.len()].into());
        }
        _ => {}
    }
    p
}

/// Floyd's algorithm: `k` distinct values from `0..n`, in a seed-determined order.
fn sample_distinct(rng: &mut ChaCha8Rng, n: u64, k: usize) -> Vec<u64> {
    let mut chosen = HashSet::with_capacity(k);
    let mut order = Vec::with_capacity(k);
    for j in (n - k as u64)..n {
        let t = rng.gen_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick);
    }
    order.shuffle(rng);
    order
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<KnowledgeGraph, SynthError> {
    if spec.class_count == 0 {
        return Err(SynthError::Invalid("class_count must be >= 1".into()));
    }
    if spec.node_count < spec.class_count {
        return Err(SynthError::Invalid(format!(
            "{} nodes cannot realize {} classes",
            spec.node_count, spec.class_count
        )));
    }
    if !spec.target_cd.is_finite() || spec.target_cd < 0.0 {
        return Err(SynthError::Invalid(format!("target CD {} must be >= 0", spec.target_cd)));
    }
    let edge_total = spec.edge_count();
    if edge_total == 0 && spec.reltype_count > 0 {
        return Err(SynthError::Invalid(
            "a graph without edges cannot realize any relationship type".into(),
        ));
    }
    if edge_total > 0 && edge_total < spec.reltype_count.max(1) {
        return Err(SynthError::Invalid(format!(
            "{edge_total} edges cannot realize {} relationship types",
            spec.reltype_count
        )));
    }

    let names = names(spec)?;
    let class_counts = apportion(spec.node_count, &spec.class_distribution.weights(spec.class_count)?);
    let rel_counts = if edge_total == 0 {
        Vec::new()
    } else {
        apportion(edge_total, &spec.reltype_distribution.weights(spec.reltype_count)?)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut nodes = Vec::with_capacity(spec.node_count);
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(spec.class_count);
    for (class, &count) in names.classes.iter().zip(&class_counts) {
        let mut idx = Vec::with_capacity(count);
        for i in 0..count {
            let properties = match spec.vocabulary {
                Vocabulary::Faers => faers_properties(class, i, &mut rng),
                Vocabulary::Generic => Properties::from([
                    ("name".to_string(), PropertyValue::Text(format!("{class}-{i}"))),
                    ("value".to_string(), PropertyValue::Int(rng.gen_range(0..1000))),
                ]),
            };
            idx.push(nodes.len());
            nodes.push(Node {
                id: format!("{class}-{i}"),
                label: class.clone(),
                properties,
            });
        }
        members.push(idx);
    }
    let all: Vec<usize> = (0..nodes.len()).collect();

    let candidates = |r: usize| -> (&[usize], &[usize]) {
        match &names.pairs {
            Some(pairs) => (&members[pairs[r].0], &members[pairs[r].1]),
            None => (&all, &all),
        }
    };
    let mut max_edges: u64 = 0;
    let mut infeasible = false;
    for (r, &count) in rel_counts.iter().enumerate() {
        let (from, to) = candidates(r);
        let cap = from.len() as u64 * to.len() as u64;
        max_edges += cap;
        infeasible |= count as u64 > cap;
    }
    if infeasible {
        return Err(SynthError::InfeasibleDensity {
            requested: edge_total as u64,
            max_edges,
            max_cd: max_edges as f64 / spec.node_count as f64,
        });
    }

    let mut edges = Vec::with_capacity(edge_total);
    for (r, &count) in rel_counts.iter().enumerate() {
        let (from, to) = candidates(r);
        let width = to.len() as u64;
        for slot in sample_distinct(&mut rng, from.len() as u64 * width, count) {
            let head = &nodes[from[(slot / width) as usize]];
            let tail = &nodes[to[(slot % width) as usize]];
            edges.push(Edge {
                id: format!("e{}", edges.len()),
                rel_type: names.rel_types[r].clone(),
                from: head.id.clone(),
                to: tail.id.clone(),
                properties: Properties::new(),
            });
        }
    }

    Ok(KnowledgeGraph::new(nodes, edges))
}
