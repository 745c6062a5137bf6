#![allow(dead_code)]

use kgbench_core::synth::{AGE_GROUP_NAMES, FAERS_CLASSES, FAERS_RELATIONSHIPS};
use kgbench_core::{Edge, KnowledgeGraph, Node, PropertyValue};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const AWKWARD: [&str; 10] = ["/", " ", ",", "\"", "é", "#", "%", ":", "\n", "_"];

fn awkward_id(rng: &mut ChaCha8Rng, prefix: &str, i: usize) -> String {
    if rng.gen_bool(0.3) {
        let a = AWKWARD.choose(rng).unwrap();
        let b = AWKWARD.choose(rng).unwrap();
        format!("{a}{prefix}{b}{i}")
    } else {
        format!("{prefix}{i}")
    }
}

fn random_value(rng: &mut ChaCha8Rng, depth: u32) -> PropertyValue {
    let pick = if depth == 0 { rng.gen_range(0..5) } else { rng.gen_range(0..7) };
    match pick {
        0 => PropertyValue::Null,
        1 => PropertyValue::Bool(rng.gen()),
        2 => PropertyValue::Int(rng.gen_range(-1_000_000..1_000_000)),
        3 => PropertyValue::Float(rng.gen_range(-1e6..1e6)),
        4 => PropertyValue::Text(AWKWARD.choose(rng).unwrap().repeat(rng.gen_range(0..3))),
        5 => PropertyValue::List((0..rng.gen_range(0..3)).map(|_| random_value(rng, depth - 1)).collect()),
        _ => PropertyValue::Map(
            (0..rng.gen_range(0..3))
                .map(|k| (format!("k{k}"), random_value(rng, depth - 1)))
                .collect(),
        ),
    }
}

/// Arbitrary labelled multigraph with awkward ids and nested properties,
/// self-loops and parallel edges. At most `max_elements` nodes plus edges.
pub fn random_graph(seed: u64, max_elements: usize) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.gen_range(0..=max_elements);
    let n = if total == 0 { 0 } else { rng.gen_range(1..=total) };
    let m = if n == 0 { 0 } else { total - n };
    let labels = ["Person", "Place", "Thing_1", "x"];
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let mut node = Node::new(awkward_id(&mut rng, "n", i), *labels.choose(&mut rng).unwrap());
            for k in 0..rng.gen_range(0..4) {
                node = node.with_property(format!("p{k}"), random_value(&mut rng, 2));
            }
            node
        })
        .collect();
    let edges: Vec<Edge> = (0..m)
        .map(|i| {
            let from = nodes.choose(&mut rng).unwrap().id.clone();
            let to = if rng.gen_bool(0.1) { from.clone() } else { nodes.choose(&mut rng).unwrap().id.clone() };
            let mut e = Edge::new(awkward_id(&mut rng, "e", i), ["R", "S_T"][rng.gen_range(0..2)], from, to);
            if rng.gen_bool(0.5) {
                e = e.with_property("w", random_value(&mut rng, 1));
            }
            e
        })
        .collect();
    KnowledgeGraph::new(nodes, edges)
}

/// Graph over the adverse-event vocabulary with random endpoints, so the
/// default workload validates but results include self-loops, parallel
/// edges, mixed int/float ages and missing attributes.
pub fn random_faers_graph(seed: u64, max_elements: usize) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = rng.gen_range(40..=max_elements.max(40));
    let n = rng.gen_range(FAERS_CLASSES.len()..=total / 2);
    let m = (total - n).max(FAERS_RELATIONSHIPS.len());
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            // The first node of each class carries every field the workload reads.
            let full = i < FAERS_CLASSES.len();
            let label = if full { FAERS_CLASSES[i] } else { FAERS_CLASSES.choose(&mut rng).unwrap() };
            let mut node = Node::new(awkward_id(&mut rng, "v", i), label);
            match label {
                "Case" => {
                    if full || rng.gen_bool(0.9) {
                        node = node.with_property(
                            "age",
                            if rng.gen_bool(0.2) {
                                PropertyValue::Float(rng.gen_range(0..120) as f64 + [0.0, 0.5][rng.gen_range(0..2)])
                            } else {
                                PropertyValue::Int(rng.gen_range(0..120))
                            },
                        );
                    }
                    if full || rng.gen_bool(0.9) {
                        node = node.with_property("gender", ["F", "M", "UNK"][rng.gen_range(0..3)]);
                    }
                    if full || rng.gen_bool(0.9) {
                        node = node.with_property("occupation", ["HP", "MD", "CN"][rng.gen_range(0..3)]);
                    }
                    node = node.with_property("primaryid", i as i64);
                }
                "AgeGroup" => {
                    node = node.with_property("name", *AGE_GROUP_NAMES.choose(&mut rng).unwrap());
                }
                _ => {
                    node = node.with_property("name", format!("x{}", rng.gen_range(0..10)));
                }
            }
            node
        })
        .collect();
    let edges: Vec<Edge> = (0..m)
        .map(|i| {
            let rel = if i < FAERS_RELATIONSHIPS.len() {
                FAERS_RELATIONSHIPS[i].0
            } else {
                FAERS_RELATIONSHIPS.choose(&mut rng).unwrap().0
            };
            let from = nodes.choose(&mut rng).unwrap().id.clone();
            let to = if rng.gen_bool(0.05) { from.clone() } else { nodes.choose(&mut rng).unwrap().id.clone() };
            Edge::new(awkward_id(&mut rng, "r", i), rel, from, to)
        })
        .collect();
    KnowledgeGraph::new(nodes, edges)
}

/// `t(0.975, df)` by Simpson integration of the density and bisection,
/// independent of the library quantile.
pub fn reference_t975(df: f64) -> f64 {
    let ln_gamma = |x: f64| statrs::function::gamma::ln_gamma(x);
    let c = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let pdf = |t: f64| c * (1.0 + t * t / df).powf(-(df + 1.0) / 2.0);
    let cdf = |x: f64| {
        let steps = 20_000;
        let h = x / steps as f64;
        let mut s = pdf(0.0) + pdf(x);
        for i in 1..steps {
            s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + s * h / 3.0
    };
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..100 {
        let mid = (lo + hi) / 2.0;
        if cdf(mid) < 0.975 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / 2.0
}
