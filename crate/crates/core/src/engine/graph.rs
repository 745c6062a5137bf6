use std::collections::HashMap;
use std::sync::Arc;

use crate::model::{KnowledgeGraph, Properties};
use crate::workload::{Catalog, Direction, ExecutablePlan, Field, Paradigm, PhysicalStep, Predicate};

use super::eval::props_match;
use super::{check_plan, Backend, Cell, Counters, EngineError, ResultSet, Tuples};

/// Compressed adjacency: the neighbors of node `n` are
/// `targets[offsets[n]..offsets[n + 1]]`, each paired with its relationship type.
struct Csr {
    offsets: Vec<u32>,
    targets: Vec<(u32, u32)>,
}

impl Csr {
    fn build(n: usize, pairs: &[(u32, u32, u32)]) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for &(src, _, _) in pairs {
            offsets[src as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![(0, 0); pairs.len()];
        for &(src, dst, rel) in pairs {
            let at = &mut cursor[src as usize];
            targets[*at as usize] = (dst, rel);
            *at += 1;
        }
        Csr { offsets, targets }
    }

    fn of(&self, n: u32) -> &[(u32, u32)] {
        &self.targets[self.offsets[n as usize] as usize..self.offsets[n as usize + 1] as usize]
    }
}

/// Graph-native store. Adjacency is materialized at ingest; the only lazy
/// structure is the label → nodes index.
pub struct GraphEngine {
    labels: Vec<Arc<str>>,
    label_of: HashMap<String, u32>,
    rel_of: HashMap<String, u32>,
    node_label: Vec<u32>,
    node_id: Vec<Arc<str>>,
    node_props: Vec<Properties>,
    out: Csr,
    inc: Csr,
    label_index: Option<Vec<Vec<u32>>>,
    catalog: Catalog,
    counters: Counters,
}

impl GraphEngine {
    pub fn new(kg: &KnowledgeGraph) -> Self {
        let mut labels: Vec<Arc<str>> = Vec::new();
        let mut label_of: HashMap<String, u32> = HashMap::new();
        let mut node_label = Vec::with_capacity(kg.node_count());
        for n in kg.nodes() {
            let next = labels.len() as u32;
            let l = *label_of.entry(n.label.clone()).or_insert_with(|| {
                labels.push(Arc::from(n.label.as_str()));
                next
            });
            node_label.push(l);
        }
        let index = kg.node_index();
        let mut rel_of: HashMap<String, u32> = HashMap::new();
        let mut forward = Vec::with_capacity(kg.edge_count());
        for e in kg.edges() {
            let (Some(&s), Some(&t)) = (index.get(e.from.as_str()), index.get(e.to.as_str())) else {
                continue;
            };
            let next = rel_of.len() as u32;
            let r = *rel_of.entry(e.rel_type.clone()).or_insert(next);
            forward.push((s as u32, t as u32, r));
        }
        let n = kg.node_count();
        let out = Csr::build(n, &forward);
        let backward: Vec<(u32, u32, u32)> = forward.iter().map(|&(s, t, r)| (t, s, r)).collect();
        let inc = Csr::build(n, &backward);
        GraphEngine {
            labels,
            label_of,
            rel_of,
            node_label,
            node_id: kg.nodes().iter().map(|n| Arc::from(n.id.as_str())).collect(),
            node_props: kg.nodes().iter().map(|n| n.properties.clone()).collect(),
            out,
            inc,
            label_index: None,
            catalog: Catalog::from_graph(kg),
            counters: Counters::default(),
        }
    }

    fn label_scan(&mut self, label: &str, filter: &[Predicate]) -> Vec<u64> {
        let Some(&l) = self.label_of.get(label) else {
            return Vec::new();
        };
        let node_label = &self.node_label;
        let n_labels = self.labels.len();
        let index = self.label_index.get_or_insert_with(|| {
            let mut index = vec![Vec::new(); n_labels];
            for (n, &l) in node_label.iter().enumerate() {
                index[l as usize].push(n as u32);
            }
            index
        });
        index[l as usize]
            .iter()
            .filter(|&&n| props_match(&self.node_props[n as usize], filter))
            .map(|&n| n as u64)
            .collect()
    }

    fn walk(
        &self,
        tuples: &Tuples,
        from: usize,
        rel_types: &[String],
        direction: Direction,
        target: &str,
        filter: &[Predicate],
    ) -> Tuples {
        let mut wanted = vec![false; self.rel_of.len()];
        for r in rel_types {
            if let Some(&r) = self.rel_of.get(r) {
                wanted[r as usize] = true;
            }
        }
        let target = self.label_of.get(target).copied();
        let lists: Vec<&Csr> = match direction {
            Direction::Outbound => vec![&self.out],
            Direction::Inbound => vec![&self.inc],
            Direction::Both => vec![&self.out, &self.inc],
        };
        tuples.extend(from, |src, out| {
            let Some(target) = target else { return };
            for csr in &lists {
                for &(t, r) in csr.of(src as u32) {
                    if wanted[r as usize]
                        && self.node_label[t as usize] == target
                        && props_match(&self.node_props[t as usize], filter)
                    {
                        out.push(t as u64);
                    }
                }
            }
        })
    }

    fn neighborhood(&self, tuples: &Tuples, from: usize, max_depth: u32) -> Tuples {
        let mut seen = vec![0u32; self.node_id.len()];
        let mut generation = 0u32;
        let mut frontier = Vec::new();
        let mut next = Vec::new();
        tuples.extend(from, |src, out| {
            generation += 1;
            let start = src as u32;
            seen[start as usize] = generation;
            frontier.clear();
            frontier.push(start);
            for _ in 0..max_depth {
                next.clear();
                for &n in &frontier {
                    for &(t, _) in self.out.of(n).iter().chain(self.inc.of(n)) {
                        if seen[t as usize] != generation {
                            seen[t as usize] = generation;
                            next.push(t);
                            out.push(t as u64);
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                std::mem::swap(&mut frontier, &mut next);
            }
        })
    }
}

impl Backend for GraphEngine {
    fn paradigm(&self) -> Paradigm {
        Paradigm::Graph
    }

    fn element_counts(&self) -> (usize, usize) {
        (self.node_id.len(), self.out.targets.len())
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn clear_caches(&mut self) {
        self.label_index = None;
        self.counters.cache_clears += 1;
    }

    fn cached_structures(&self) -> Vec<String> {
        match self.label_index {
            Some(_) => vec!["label index".to_string()],
            None => Vec::new(),
        }
    }

    fn execute(&mut self, plan: &ExecutablePlan) -> Result<ResultSet, EngineError> {
        check_plan(plan, Paradigm::Graph, &self.catalog)?;
        self.counters.executions += 1;
        let mut tuples = Tuples::roots(Vec::new());
        for step in &plan.steps {
            tuples = match step {
                PhysicalStep::LabelScan { label, filter, .. } => Tuples::roots(self.label_scan(label, filter)),
                PhysicalStep::AdjacencyWalk {
                    from,
                    rel_types,
                    direction,
                    target_label,
                    filter,
                    ..
                } => self.walk(&tuples, *from, rel_types, *direction, target_label, filter),
                PhysicalStep::NeighborhoodWalk { from, max_depth, .. } => {
                    self.neighborhood(&tuples, *from, *max_depth)
                }
                PhysicalStep::Project { columns } => {
                    return Ok(tuples.project(plan, columns, |r, field| {
                        let n = r as usize;
                        match field {
                            Field::Id => Cell::Id(self.node_id[n].clone()),
                            Field::Label => Cell::Label(self.labels[self.node_label[n] as usize].clone()),
                            Field::Property(name) => {
                                Cell::Value(self.node_props[n].get(name).cloned().unwrap_or_default())
                            }
                        }
                    }));
                }
                other => unreachable!("not a graph operator: {other:?}"),
            };
        }
        unreachable!("validated plans end with a projection")
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}
