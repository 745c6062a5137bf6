use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::ingest::DocumentDump;
use crate::model::Properties;
use crate::workload::{Catalog, Direction, ExecutablePlan, Field, Paradigm, PhysicalStep, Predicate, Seek};

use super::eval::{loose_eq, props_match, ValueIndex};
use super::{check_plan, pack, unpack, Backend, Cell, Counters, EngineError, ResultSet, Tuples};

struct NodeCollection {
    name: Arc<str>,
    ids: Vec<Arc<str>>,
    props: Vec<Properties>,
}

struct RelCollection {
    name: String,
    from: Vec<Arc<str>>,
    to: Vec<Arc<str>>,
}

type Postings = HashMap<Arc<str>, Vec<u32>>;

/// Every structure here is built on first use and dropped by `clear_caches`.
#[derive(Default)]
struct Caches {
    id_index: Vec<Option<HashMap<Arc<str>, u32>>>,
    hash_index: HashMap<(usize, String), ValueIndex>,
    range_index: HashMap<(usize, String), Vec<(f64, u32)>>,
    by_from: Vec<Option<Postings>>,
    by_to: Vec<Option<Postings>>,
}

/// Document store: node documents grouped by label, relationship documents
/// grouped by type, joins resolved through `_id` lookups.
pub struct DocumentEngine {
    nodes: Vec<NodeCollection>,
    rels: Vec<RelCollection>,
    node_by_name: HashMap<String, usize>,
    rel_by_name: HashMap<String, usize>,
    catalog: Catalog,
    caches: Caches,
    counters: Counters,
}

impl DocumentEngine {
    pub fn new(dump: &DocumentDump) -> Self {
        let mut catalog = Catalog::default();
        let nodes: Vec<NodeCollection> = dump
            .node_collections
            .iter()
            .map(|(name, docs)| {
                for d in docs {
                    catalog.add_node(name, d.properties.keys());
                }
                NodeCollection {
                    name: Arc::from(name.as_str()),
                    ids: docs.iter().map(|d| Arc::from(d.id.as_str())).collect(),
                    props: docs.iter().map(|d| d.properties.clone()).collect(),
                }
            })
            .collect();
        let rels: Vec<RelCollection> = dump
            .relationship_collections
            .iter()
            .map(|(name, docs)| {
                catalog.add_edges(name, docs.len());
                RelCollection {
                    name: name.clone(),
                    from: docs.iter().map(|d| Arc::from(d.from.as_str())).collect(),
                    to: docs.iter().map(|d| Arc::from(d.to.as_str())).collect(),
                }
            })
            .collect();
        let node_by_name = nodes.iter().enumerate().map(|(i, c)| (c.name.to_string(), i)).collect();
        let rel_by_name = rels.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        let mut engine = DocumentEngine {
            nodes,
            rels,
            node_by_name,
            rel_by_name,
            catalog,
            caches: Caches::default(),
            counters: Counters::default(),
        };
        engine.reset_caches();
        engine
    }

    fn reset_caches(&mut self) {
        self.caches = Caches {
            id_index: vec![None; self.nodes.len()],
            by_from: vec![None; self.rels.len()],
            by_to: vec![None; self.rels.len()],
            ..Default::default()
        };
    }

    fn ensure_id_index(&mut self, coll: usize) {
        let ids = &self.nodes[coll].ids;
        self.caches.id_index[coll].get_or_insert_with(|| {
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i as u32)).collect()
        });
    }

    fn ensure_rel_index(&mut self, rel: usize, outbound: bool) {
        let (slot, keys) = if outbound {
            (&mut self.caches.by_from[rel], &self.rels[rel].from)
        } else {
            (&mut self.caches.by_to[rel], &self.rels[rel].to)
        };
        slot.get_or_insert_with(|| {
            let mut postings: Postings = HashMap::new();
            for (i, k) in keys.iter().enumerate() {
                postings.entry(k.clone()).or_default().push(i as u32);
            }
            postings
        });
    }

    fn ensure_field_index(&mut self, coll: usize, seek: &Seek) {
        let props = &self.nodes[coll].props;
        match seek {
            Seek::Eq { field, .. } => {
                self.caches
                    .hash_index
                    .entry((coll, field.clone()))
                    .or_insert_with(|| {
                        let mut index = ValueIndex::default();
                        for (i, p) in props.iter().enumerate() {
                            if let Some(v) = p.get(field) {
                                index.insert(i as u32, v);
                            }
                        }
                        index
                    });
            }
            Seek::Range { field, .. } => {
                self.caches
                    .range_index
                    .entry((coll, field.clone()))
                    .or_insert_with(|| {
                        let mut index: Vec<(f64, u32)> = props
                            .iter()
                            .enumerate()
                            .filter_map(|(i, p)| {
                                let x = p.get(field)?.as_f64()?;
                                (!x.is_nan()).then_some((x, i as u32))
                            })
                            .collect();
                        index.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                        index
                    });
            }
        }
    }

    fn seek(&self, coll: usize, seek: &Seek) -> Vec<u32> {
        match seek {
            Seek::Eq { field, value } => {
                let props = &self.nodes[coll].props;
                self.caches.hash_index[&(coll, field.clone())]
                    .lookup(value, |r| props[r as usize].get(field))
            }
            Seek::Range { field, min, max } => {
                if min.partial_cmp(max).map_or(true, |o| o.is_gt()) {
                    return Vec::new();
                }
                let index = &self.caches.range_index[&(coll, field.clone())];
                let lo = index.partition_point(|(x, _)| x < min);
                let hi = index.partition_point(|(x, _)| x <= max);
                index[lo..hi.max(lo)].iter().map(|&(_, i)| i).collect()
            }
        }
    }

    fn seek_matches(props: &Properties, seek: &Seek) -> bool {
        match seek {
            Seek::Eq { field, value } => props
                .get(field)
                .is_some_and(|v| loose_eq(v, value)),
            Seek::Range { field, min, max } => props
                .get(field)
                .and_then(|v| v.as_f64())
                .is_some_and(|x| *min <= x && x <= *max),
        }
    }

    fn scan(&self, coll: usize, filter: &[Predicate]) -> Vec<u64> {
        self.nodes[coll]
            .props
            .iter()
            .enumerate()
            .filter(|(_, p)| props_match(p, filter))
            .map(|(i, _)| pack(coll, i))
            .collect()
    }

    fn rel_indices(&self, names: &[String]) -> Vec<usize> {
        let mut out: Vec<usize> = names.iter().filter_map(|n| self.rel_by_name.get(n).copied()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn hop(
        &mut self,
        tuples: &Tuples,
        from: usize,
        rel_names: &[String],
        direction: Direction,
        target: &str,
        filter: &[Predicate],
    ) -> Tuples {
        let Some(&tcoll) = self.node_by_name.get(target) else {
            return tuples.extend(from, |_, _| {});
        };
        let rels = self.rel_indices(rel_names);
        let (outbound, inbound) = match direction {
            Direction::Outbound => (true, false),
            Direction::Inbound => (false, true),
            Direction::Both => (true, true),
        };
        self.ensure_id_index(tcoll);
        for &r in &rels {
            if outbound {
                self.ensure_rel_index(r, true);
            }
            if inbound {
                self.ensure_rel_index(r, false);
            }
        }
        let this = &*self;
        let target_ids = this.caches.id_index[tcoll].as_ref().expect("built");
        let target_props = &this.nodes[tcoll].props;
        tuples.extend(from, |src, out| {
            let (c, i) = unpack(src);
            let id = &this.nodes[c].ids[i];
            let mut follow = |postings: &Option<Postings>, far: &[Arc<str>]| {
                if let Some(list) = postings.as_ref().expect("built").get(id) {
                    for &e in list {
                        if let Some(&t) = target_ids.get(&far[e as usize]) {
                            if props_match(&target_props[t as usize], filter) {
                                out.push(pack(tcoll, t as usize));
                            }
                        }
                    }
                }
            };
            for &r in &rels {
                if outbound {
                    follow(&this.caches.by_from[r], &this.rels[r].to);
                }
                if inbound {
                    follow(&this.caches.by_to[r], &this.rels[r].from);
                }
            }
        })
    }

    fn neighborhood(&mut self, tuples: &Tuples, from: usize, max_depth: u32) -> Tuples {
        for c in 0..self.nodes.len() {
            self.ensure_id_index(c);
        }
        for r in 0..self.rels.len() {
            self.ensure_rel_index(r, true);
            self.ensure_rel_index(r, false);
        }
        let this = &*self;
        tuples.extend(from, |src, out| {
            let (c, i) = unpack(src);
            let start: &str = &this.nodes[c].ids[i];
            let mut visited: HashSet<&str> = HashSet::new();
            visited.insert(start);
            let mut found: Vec<&str> = Vec::new();
            let mut frontier: Vec<&str> = vec![start];
            for _ in 0..max_depth {
                let mut next = Vec::new();
                for id in frontier {
                    for (r, rel) in this.rels.iter().enumerate() {
                        let sides = [
                            (&this.caches.by_from[r], &rel.to),
                            (&this.caches.by_to[r], &rel.from),
                        ];
                        for (postings, far) in sides {
                            if let Some(list) = postings.as_ref().expect("built").get(id) {
                                for &e in list {
                                    let t: &str = &far[e as usize];
                                    if visited.insert(t) {
                                        next.push(t);
                                        found.push(t);
                                    }
                                }
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                frontier = next;
            }
            for id in found {
                let hit = this
                    .caches
                    .id_index
                    .iter()
                    .enumerate()
                    .find_map(|(c, index)| Some(pack(c, *index.as_ref()?.get(id)? as usize)));
                if let Some(r) = hit {
                    out.push(r);
                }
            }
        })
    }
}

impl Backend for DocumentEngine {
    fn paradigm(&self) -> Paradigm {
        Paradigm::Document
    }

    fn element_counts(&self) -> (usize, usize) {
        (
            self.nodes.iter().map(|c| c.ids.len()).sum(),
            self.rels.iter().map(|r| r.from.len()).sum(),
        )
    }

    fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    fn clear_caches(&mut self) {
        self.reset_caches();
        self.counters.cache_clears += 1;
    }

    fn cached_structures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (c, index) in self.caches.id_index.iter().enumerate() {
            if index.is_some() {
                out.push(format!("{}._id", self.nodes[c].name));
            }
        }
        for (c, field) in self.caches.hash_index.keys() {
            out.push(format!("{}.{field} (hash)", self.nodes[*c].name));
        }
        for (c, field) in self.caches.range_index.keys() {
            out.push(format!("{}.{field} (range)", self.nodes[*c].name));
        }
        for (r, rel) in self.rels.iter().enumerate() {
            if self.caches.by_from[r].is_some() {
                out.push(format!("{}.from", rel.name));
            }
            if self.caches.by_to[r].is_some() {
                out.push(format!("{}.to", rel.name));
            }
        }
        out.sort();
        out
    }

    fn execute(&mut self, plan: &ExecutablePlan) -> Result<ResultSet, EngineError> {
        check_plan(plan, Paradigm::Document, &self.catalog)?;
        self.counters.executions += 1;
        let mut tuples = Tuples::roots(Vec::new());
        for step in &plan.steps {
            tuples = match step {
                PhysicalStep::CollectionScan { collection, filter, .. } => {
                    match self.node_by_name.get(collection) {
                        Some(&c) => Tuples::roots(self.scan(c, filter)),
                        None => Tuples::roots(Vec::new()),
                    }
                }
                PhysicalStep::IndexedScan {
                    collection,
                    seeks,
                    residual,
                    ..
                } => {
                    let Some(&c) = self.node_by_name.get(collection) else {
                        tuples = Tuples::roots(Vec::new());
                        continue;
                    };
                    for s in seeks {
                        self.ensure_field_index(c, s);
                    }
                    let mut probes: Vec<Vec<u32>> = seeks.iter().map(|s| self.seek(c, s)).collect();
                    let best = (0..probes.len())
                        .min_by_key(|&k| probes[k].len())
                        .expect("at least one seek");
                    let candidates = probes.swap_remove(best);
                    let props = &self.nodes[c].props;
                    let refs = candidates
                        .into_iter()
                        .filter(|&i| {
                            let p = &props[i as usize];
                            seeks
                                .iter()
                                .enumerate()
                                .all(|(k, s)| k == best || Self::seek_matches(p, s))
                                && props_match(p, residual)
                        })
                        .map(|i| pack(c, i as usize))
                        .collect();
                    Tuples::roots(refs)
                }
                PhysicalStep::HopLookup {
                    from,
                    rel_collections,
                    direction,
                    target_collection,
                    filter,
                    ..
                } => self.hop(&tuples, *from, rel_collections, *direction, target_collection, filter),
                PhysicalStep::NeighborhoodLookup { from, max_depth, .. } => {
                    self.neighborhood(&tuples, *from, *max_depth)
                }
                PhysicalStep::Project { columns } => {
                    let nodes = &self.nodes;
                    return Ok(tuples.project(plan, columns, |r, field| {
                        let (c, i) = unpack(r);
                        let coll = &nodes[c];
                        match field {
                            Field::Id => Cell::Id(coll.ids[i].clone()),
                            Field::Label => Cell::Label(coll.name.clone()),
                            Field::Property(name) => {
                                Cell::Value(coll.props[i].get(name).cloned().unwrap_or_default())
                            }
                        }
                    }));
                }
                other => unreachable!("not a document operator: {other:?}"),
            };
        }
        unreachable!("validated plans end with a projection")
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}

