use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::ingest::{split_handle, unescape_key, MultiModelDump};
use crate::model::Properties;
use crate::workload::{Catalog, Direction, ExecutablePlan, Field, Paradigm, PhysicalStep, Predicate};

use super::eval::props_match;
use super::{check_plan, pack, unpack, Backend, Cell, Counters, EngineError, ResultSet, Tuples};

struct VertexCollection {
    name: Arc<str>,
    ids: Vec<Arc<str>>,
    handles: Vec<Arc<str>>,
    props: Vec<Properties>,
    /// `_key` → position; part of the collection, never dropped.
    primary: HashMap<Arc<str>, u32>,
}

struct EdgeCollection {
    name: String,
    from: Vec<Arc<str>>,
    to: Vec<Arc<str>>,
}

type EdgeIndex = HashMap<Arc<str>, Vec<u32>>;

#[derive(Default)]
struct Caches {
    by_from: Vec<Option<EdgeIndex>>,
    by_to: Vec<Option<EdgeIndex>>,
    /// Vertex handle → `(edge collection, edge, handle at the far end)`.
    any: Option<AnyIndex>,
}

type AnyIndex = HashMap<Arc<str>, Vec<(u32, u32, Arc<str>)>>;

/// Multi-model store: vertex and edge collections addressed by
/// `<collection>/<_key>` handles.
pub struct MultiModelEngine {
    vertices: Vec<VertexCollection>,
    edges: Vec<EdgeCollection>,
    vertex_by_name: HashMap<String, usize>,
    edge_by_name: HashMap<String, usize>,
    catalog: Catalog,
    caches: Caches,
    counters: Counters,
}

impl MultiModelEngine {
    pub fn new(dump: &MultiModelDump) -> Self {
        let mut catalog = Catalog::default();
        let vertices: Vec<VertexCollection> = dump
            .vertex_collections
            .iter()
            .map(|(name, docs)| {
                for d in docs {
                    catalog.add_node(name, d.properties.keys());
                }
                let keys: Vec<Arc<str>> = docs.iter().map(|d| Arc::from(d.key.as_str())).collect();
                VertexCollection {
                    name: Arc::from(name.as_str()),
                    ids: docs.iter().map(|d| Arc::from(unescape_key(&d.key))).collect(),
                    handles: docs.iter().map(|d| Arc::from(format!("{name}/{}", d.key))).collect(),
                    props: docs.iter().map(|d| d.properties.clone()).collect(),
                    primary: keys.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect(),
                }
            })
            .collect();
        let edges: Vec<EdgeCollection> = dump
            .edge_collections
            .iter()
            .map(|(name, docs)| {
                catalog.add_edges(name, docs.len());
                EdgeCollection {
                    name: name.clone(),
                    from: docs.iter().map(|d| Arc::from(d.from.as_str())).collect(),
                    to: docs.iter().map(|d| Arc::from(d.to.as_str())).collect(),
                }
            })
            .collect();
        let vertex_by_name = vertices.iter().enumerate().map(|(i, c)| (c.name.to_string(), i)).collect();
        let edge_by_name = edges.iter().enumerate().map(|(i, c)| (c.name.clone(), i)).collect();
        let mut engine = MultiModelEngine {
            vertices,
            edges,
            vertex_by_name,
            edge_by_name,
            catalog,
            caches: Caches::default(),
            counters: Counters::default(),
        };
        engine.reset_caches();
        engine
    }

    fn reset_caches(&mut self) {
        self.caches = Caches {
            by_from: vec![None; self.edges.len()],
            by_to: vec![None; self.edges.len()],
            any: None,
        };
    }

    fn resolve(&self, handle: &str) -> Option<u64> {
        let (collection, key) = split_handle(handle)?;
        let c = *self.vertex_by_name.get(collection)?;
        let i = *self.vertices[c].primary.get(key)?;
        Some(pack(c, i as usize))
    }

    fn ensure_edge_index(&mut self, coll: usize, outbound: bool) {
        let (slot, keys) = if outbound {
            (&mut self.caches.by_from[coll], &self.edges[coll].from)
        } else {
            (&mut self.caches.by_to[coll], &self.edges[coll].to)
        };
        slot.get_or_insert_with(|| {
            let mut index: EdgeIndex = HashMap::new();
            for (i, h) in keys.iter().enumerate() {
                index.entry(h.clone()).or_default().push(i as u32);
            }
            index
        });
    }

    fn ensure_traversal_index(&mut self) {
        let edges = &self.edges;
        self.caches.any.get_or_insert_with(|| {
            let mut index: AnyIndex = HashMap::new();
            for (c, coll) in edges.iter().enumerate() {
                for (i, (f, t)) in coll.from.iter().zip(&coll.to).enumerate() {
                    index.entry(f.clone()).or_default().push((c as u32, i as u32, t.clone()));
                    index.entry(t.clone()).or_default().push((c as u32, i as u32, f.clone()));
                }
            }
            index
        });
    }

    fn scan(&self, collection: &str, filter: &[Predicate]) -> Vec<u64> {
        let Some(&c) = self.vertex_by_name.get(collection) else {
            return Vec::new();
        };
        self.vertices[c]
            .props
            .iter()
            .enumerate()
            .filter(|(_, p)| props_match(p, filter))
            .map(|(i, _)| pack(c, i))
            .collect()
    }

    fn hop(
        &mut self,
        tuples: &Tuples,
        from: usize,
        edge_names: &[String],
        direction: Direction,
        target: &str,
        filter: &[Predicate],
    ) -> Tuples {
        let Some(&tcoll) = self.vertex_by_name.get(target) else {
            return tuples.extend(from, |_, _| {});
        };
        let mut colls: Vec<usize> = edge_names
            .iter()
            .filter_map(|n| self.edge_by_name.get(n).copied())
            .collect();
        colls.sort_unstable();
        colls.dedup();
        let (outbound, inbound) = match direction {
            Direction::Outbound => (true, false),
            Direction::Inbound => (false, true),
            Direction::Both => (true, true),
        };
        for &c in &colls {
            if outbound {
                self.ensure_edge_index(c, true);
            }
            if inbound {
                self.ensure_edge_index(c, false);
            }
        }
        let this = &*self;
        tuples.extend(from, |src, out| {
            let (c, i) = unpack(src);
            let handle = &this.vertices[c].handles[i];
            let mut follow = |index: &Option<EdgeIndex>, far: &[Arc<str>]| {
                if let Some(list) = index.as_ref().expect("built").get(handle) {
                    for &e in list {
                        if let Some(r) = this.resolve(&far[e as usize]) {
                            let (vc, vi) = unpack(r);
                            if vc == tcoll && props_match(&this.vertices[vc].props[vi], filter) {
                                out.push(r);
                            }
                        }
                    }
                }
            };
            for &ec in &colls {
                if outbound {
                    follow(&this.caches.by_from[ec], &this.edges[ec].to);
                }
                if inbound {
                    follow(&this.caches.by_to[ec], &this.edges[ec].from);
                }
            }
        })
    }

    fn traverse(&mut self, tuples: &Tuples, from: usize, max_depth: u32) -> Tuples {
        self.ensure_traversal_index();
        let this = &*self;
        let index = this.caches.any.as_ref().expect("built");
        tuples.extend(from, |src, out| {
            let (c, i) = unpack(src);
            let start: &str = &this.vertices[c].handles[i];
            let mut visited: HashSet<&str> = HashSet::new();
            visited.insert(start);
            let mut frontier = vec![start];
            for _ in 0..max_depth {
                let mut next = Vec::new();
                for h in frontier {
                    for (_, _, far) in index.get(h).map(Vec::as_slice).unwrap_or_default() {
                        if visited.insert(far.as_ref()) {
                            next.push(far.as_ref());
                            if let Some(r) = this.resolve(far) {
                                out.push(r);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                frontier = next;
            }
        })
    }
}

impl Backend for MultiModelEngine {
    fn paradigm(&self) -> Paradigm {
        Paradigm::MultiModel
    }

    fn element_counts(&self) -> (usize, usize) {
        (
            self.vertices.iter().map(|c| c.ids.len()).sum(),
            self.edges.iter().map(|c| c.from.len()).sum(),
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
        for (c, coll) in self.edges.iter().enumerate() {
            if self.caches.by_from[c].is_some() {
                out.push(format!("{}._from", coll.name));
            }
            if self.caches.by_to[c].is_some() {
                out.push(format!("{}._to", coll.name));
            }
        }
        if self.caches.any.is_some() {
            out.push("traversal edge index".to_string());
        }
        out
    }

    fn execute(&mut self, plan: &ExecutablePlan) -> Result<ResultSet, EngineError> {
        check_plan(plan, Paradigm::MultiModel, &self.catalog)?;
        self.counters.executions += 1;
        let mut tuples = Tuples::roots(Vec::new());
        for step in &plan.steps {
            tuples = match step {
                PhysicalStep::CollectionScan { collection, filter, .. } => {
                    Tuples::roots(self.scan(collection, filter))
                }
                PhysicalStep::EdgeHop {
                    from,
                    edge_collections,
                    direction,
                    target_collection,
                    filter,
                    ..
                } => self.hop(&tuples, *from, edge_collections, *direction, target_collection, filter),
                PhysicalStep::Traverse { from, max_depth, .. } => self.traverse(&tuples, *from, *max_depth),
                PhysicalStep::Project { columns } => {
                    let vertices = &self.vertices;
                    return Ok(tuples.project(plan, columns, |r, field| {
                        let (c, i) = unpack(r);
                        let coll = &vertices[c];
                        match field {
                            Field::Id => Cell::Id(coll.ids[i].clone()),
                            Field::Label => Cell::Label(coll.name.clone()),
                            Field::Property(name) => {
                                Cell::Value(coll.props[i].get(name).cloned().unwrap_or_default())
                            }
                        }
                    }));
                }
                other => unreachable!("not a multi-model operator: {other:?}"),
            };
        }
        unreachable!("validated plans end with a projection")
    }

    fn counters(&self) -> Counters {
        self.counters
    }
}
