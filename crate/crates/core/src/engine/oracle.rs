use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use crate::model::{KnowledgeGraph, PropertyValue};
use crate::workload::{
    Catalog, Comparator, Direction, ExecutablePlan, Field, Paradigm, PhysicalStep, Predicate, Stage,
};

use super::{check_plan, Backend, Cell, Counters, EngineError, ResultSet};

/// Reference evaluator. Deliberately shares no evaluation code with the
/// paradigm engines: predicates, joins and traversals are re-derived here
/// from the logical stages.
pub struct OracleEngine {
    graph: KnowledgeGraph,
    position: HashMap<String, usize>,
    catalog: Catalog,
    counters: Counters,
}

fn same_value(a: &PropertyValue, b: &PropertyValue) -> bool {
    use PropertyValue as V;
    match (a, b) {
        (V::Int(x), V::Float(y)) | (V::Float(y), V::Int(x)) => {
            y.trunc() == *y && (*y as i128) == *x as i128
        }
        (V::Float(x), V::Float(y)) => x == y,
        (V::List(x), V::List(y)) => {
            x.len() == y.len() && (0..x.len()).all(|i| same_value(&x[i], &y[i]))
        }
        (V::Map(x), V::Map(y)) => {
            x.len() == y.len()
                && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| same_value(v, w)))
        }
        _ => a == b,
    }
}

fn satisfies(node: &crate::model::Node, predicates: &[Predicate]) -> bool {
    for p in predicates {
        let Some(v) = node.properties.get(&p.field) else {
            return false;
        };
        let ok = match &p.comparator {
            Comparator::Eq { value } => same_value(v, value),
            Comparator::In { values } => values.iter().any(|x| same_value(v, x)),
            Comparator::Range { min, max } => match v {
                PropertyValue::Int(i) => *min <= *i as f64 && *i as f64 <= *max,
                PropertyValue::Float(f) => *min <= *f && *f <= *max,
                _ => false,
            },
        };
        if !ok {
            return false;
        }
    }
    true
}

impl OracleEngine {
    pub fn new(kg: &KnowledgeGraph) -> Self {
        OracleEngine {
            graph: kg.clone(),
            position: kg
                .nodes()
                .iter()
                .enumerate()
                .map(|(i, n)| (n.id.clone(), i))
                .collect(),
            catalog: Catalog::from_graph(kg),
            counters: Counters::default(),
        }
    }

    fn run(&self, stage: &Stage, from: Option<usize>, rows: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        let nodes = self.graph.nodes();
        match stage {
            Stage::NodeScan { label, predicates, .. } => (0..nodes.len())
                .filter(|&i| nodes[i].label == *label && satisfies(&nodes[i], predicates))
                .map(|i| vec![i])
                .collect(),
            Stage::Expand {
                rel_types,
                direction,
                target_label,
                predicates,
                ..
            } => {
                let from = from.expect("expand reads a slot");
                let mut pairs: HashMap<&str, Vec<usize>> = HashMap::new();
                for e in self.graph.edges() {
                    if !rel_types.contains(&e.rel_type) {
                        continue;
                    }
                    let mut ends: Vec<(&str, &str)> = Vec::new();
                    if matches!(direction, Direction::Outbound | Direction::Both) {
                        ends.push((&e.from, &e.to));
                    }
                    if matches!(direction, Direction::Inbound | Direction::Both) {
                        ends.push((&e.to, &e.from));
                    }
                    for (src, dst) in ends {
                        if let Some(&t) = self.position.get(dst) {
                            if nodes[t].label == *target_label && satisfies(&nodes[t], predicates) {
                                pairs.entry(src).or_default().push(t);
                            }
                        }
                    }
                }
                let mut out = Vec::new();
                for row in rows {
                    let id = nodes[row[from]].id.as_str();
                    for &t in pairs.get(id).map(Vec::as_slice).unwrap_or(&[]) {
                        let mut r = row.clone();
                        r.push(t);
                        out.push(r);
                    }
                }
                out
            }
            Stage::NeighborhoodExpand { max_depth, .. } => {
                let from = from.expect("expand reads a slot");
                let mut adjacent: HashMap<usize, Vec<usize>> = HashMap::new();
                for e in self.graph.edges() {
                    if let (Some(&a), Some(&b)) = (self.position.get(&e.from), self.position.get(&e.to)) {
                        adjacent.entry(a).or_default().push(b);
                        adjacent.entry(b).or_default().push(a);
                    }
                }
                let mut out = Vec::new();
                for row in rows {
                    let start = row[from];
                    let mut distance: HashMap<usize, u32> = HashMap::from([(start, 0)]);
                    let mut queue = VecDeque::from([start]);
                    while let Some(n) = queue.pop_front() {
                        let d = distance[&n];
                        if d == *max_depth {
                            continue;
                        }
                        for &m in adjacent.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
                            if let std::collections::hash_map::Entry::Vacant(e) = distance.entry(m) {
                                e.insert(d + 1);
                                queue.push_back(m);
                            }
                        }
                    }
                    let reached: HashSet<usize> = distance.keys().copied().filter(|&m| m != start).collect();
                    for m in reached {
                        let mut r = row.clone();
                        r.push(m);
                        out.push(r);
                    }
                }
                out
            }
            Stage::Project { .. } => rows,
        }
    }
}

impl Backend for OracleEngine {
    fn paradigm(&self) -> Paradigm {
        Paradigm::Oracle
    }

    fn element_counts(&self) -> (usize, usize) {
        (self.graph.node_count(), self.graph.edge_count())
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn clear_caches(&mut self) {
        self.counters.cache_clears += 1;
    }

    fn cached_structures(&self) -> Vec<String> {
        Vec::new()
    }

    fn execute(&mut self, plan: &ExecutablePlan) -> Result<ResultSet, EngineError> {
        check_plan(plan, Paradigm::Oracle, &self.catalog)?;
        self.counters.executions += 1;
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for step in &plan.steps {
            match step {
                PhysicalStep::NestedLoop { from, stage, .. } => rows = self.run(stage, *from, rows),
                PhysicalStep::Project { columns } => {
                    let nodes = self.graph.nodes();
                    let rows = rows
                        .iter()
                        .map(|row| {
                            columns
                                .iter()
                                .map(|c| {
                                    let n = &nodes[row[c.slot]];
                                    match &c.field {
                                        Field::Id => Cell::Id(Arc::from(n.id.as_str())),
                                        Field::Label => Cell::Label(Arc::from(n.label.as_str())),
                                        Field::Property(p) => Cell::Value(
                                            n.properties.get(p).cloned().unwrap_or(PropertyValue::Null),
                                        ),
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    return Ok(ResultSet {
                        columns: plan.column_names(),
                        rows,
                    });
                }
                other => unreachable!("not an oracle operator: {other:?}"),
            }
        }
        unreachable!("validated plans end with a projection")
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PropertyValue as V;

    #[test]
    fn value_equality_edges() {
        assert!(same_value(&V::Int(2), &V::Float(2.0)));
        assert!(!same_value(&V::Int(i64::MAX), &V::Float(9_223_372_036_854_775_808.0)));
        assert!(!same_value(&V::Float(f64::NAN), &V::Float(f64::NAN)));
        assert!(same_value(&V::Float(-0.0), &V::Int(0)));
    }
}
