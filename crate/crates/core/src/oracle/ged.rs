//! Exact graph edit distance by best-first search over vertex mappings.
//!
//! Vertices of the first graph are mapped one at a time, in descending degree
//! order, to an unused vertex of the second graph or to nothing (deletion).
//! Edge costs are charged as soon as both endpoints are decided. The
//! heuristic is the label-multiset mismatch of the undecided vertices plus that
//! of the edges with an undecided endpoint, which never overestimates.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Largest vertex count either graph may have.
pub const MAX_VERTICES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOp {
    AddVertex { label: String },
    /// Only isolated vertices can be deleted. Higher indices shift down by one.
    DeleteVertex { v: usize },
    RelabelVertex { v: usize, label: String },
    AddEdge { u: usize, v: usize, label: String },
    DeleteEdge { u: usize, v: usize },
    RelabelEdge { u: usize, v: usize, label: String },
}

/// Applies one edit operation, returning the edited graph.
pub fn apply_edit(g: &Graph, op: &EditOp) -> Result<Graph> {
    let mut labels = g.vertex_labels().to_vec();
    let mut edges: Vec<(usize, usize, String)> = g.edges().iter().map(|e| (e.u, e.v, e.label.clone())).collect();
    let same = |a: &(usize, usize, String), u: usize, v: usize| (a.0 == u && a.1 == v) || (a.0 == v && a.1 == u);
    let missing = |u: usize, v: usize| Error::InvalidArgument(format!("no edge ({u},{v}) in `{}`", g.id()));
    match op {
        EditOp::AddVertex { label } => labels.push(label.clone()),
        EditOp::DeleteVertex { v } => {
            if *v >= labels.len() {
                return Err(Error::InvalidArgument(format!("no vertex {v}")));
            }
            if g.degree(*v) > 0 {
                return Err(Error::InvalidArgument(format!("vertex {v} is not isolated")));
            }
            labels.remove(*v);
            for e in &mut edges {
                if e.0 > *v {
                    e.0 -= 1;
                }
                if e.1 > *v {
                    e.1 -= 1;
                }
            }
        }
        EditOp::RelabelVertex { v, label } => {
            *labels
                .get_mut(*v)
                .ok_or_else(|| Error::InvalidArgument(format!("no vertex {v}")))? = label.clone();
        }
        EditOp::AddEdge { u, v, label } => edges.push((*u, *v, label.clone())),
        EditOp::DeleteEdge { u, v } => {
            let i = edges.iter().position(|e| same(e, *u, *v)).ok_or_else(|| missing(*u, *v))?;
            edges.remove(i);
        }
        EditOp::RelabelEdge { u, v, label } => {
            let e = edges.iter_mut().find(|e| same(e, *u, *v)).ok_or_else(|| missing(*u, *v))?;
            e.2 = label.clone();
        }
    }
    Graph::new(g.id(), labels, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GedOutcome {
    Exact(u32),
    /// The expansion budget ran out before optimality was proved.
    Exceeded,
}

impl GedOutcome {
    pub fn value(self) -> Option<u32> {
        match self {
            GedOutcome::Exact(d) => Some(d),
            GedOutcome::Exceeded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedGed {
    /// The distance, known to be at most the bound.
    Within(u32),
    /// The distance is greater than the bound.
    Above,
    Exceeded,
}

/// Exact GED, or [`GedOutcome::Exceeded`] after `budget` node expansions.
pub fn exact_ged(g1: &Graph, g2: &Graph, budget: u64) -> GedOutcome {
    match Search::new(g1, g2).run(None, budget) {
        SearchResult::Found(d) => GedOutcome::Exact(d),
        SearchResult::Pruned => unreachable!("an unbounded search always finds a mapping"),
        SearchResult::Exceeded => GedOutcome::Exceeded,
    }
}

/// Decides whether `GED ≤ bound`, returning the exact value when it is. Much
/// cheaper than [`exact_ged`] for small bounds because every partial mapping
/// with estimated cost above the bound is dropped.
pub fn ged_within(g1: &Graph, g2: &Graph, bound: u32, budget: u64) -> BoundedGed {
    match Search::new(g1, g2).run(Some(bound), budget) {
        SearchResult::Found(d) => BoundedGed::Within(d),
        SearchResult::Pruned => BoundedGed::Above,
        SearchResult::Exceeded => BoundedGed::Exceeded,
    }
}

enum SearchResult {
    Found(u32),
    Pruned,
    Exceeded,
}

const NONE: u8 = u8::MAX;

struct Search {
    n1: usize,
    n2: usize,
    /// Order in which first-graph vertices are decided.
    order: Vec<usize>,
    labels1: Vec<u32>,
    labels2: Vec<u32>,
    /// Edge label ids by vertex pair, `u32::MAX` for no edge.
    adj1: Vec<u32>,
    adj2: Vec<u32>,
    n_vertex_labels: usize,
    n_edge_labels: usize,
    edges1: Vec<(usize, usize, u32)>,
    edges2: Vec<(usize, usize, u32)>,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    f: Reverse<u32>,
    depth: usize,
    g: u32,
    map: Vec<u8>,
    used: u64,
}

impl Search {
    fn new(g1: &Graph, g2: &Graph) -> Self {
        assert!(
            g1.vertex_count() <= MAX_VERTICES && g2.vertex_count() <= MAX_VERTICES,
            "exact GED supports at most {MAX_VERTICES} vertices"
        );
        let mut vertex_ids = HashMap::new();
        let mut edge_ids = HashMap::new();
        let intern = |map: &mut HashMap<String, u32>, s: &str| {
            let next = map.len() as u32;
            *map.entry(s.to_string()).or_insert(next)
        };
        let labels1 = g1.vertex_labels().iter().map(|l| intern(&mut vertex_ids, l)).collect();
        let labels2 = g2.vertex_labels().iter().map(|l| intern(&mut vertex_ids, l)).collect();
        let mut edge_list = |g: &Graph| -> (Vec<u32>, Vec<(usize, usize, u32)>) {
            let n = g.vertex_count();
            let mut adj = vec![u32::MAX; n * n];
            let mut list = Vec::new();
            for e in g.edges() {
                let id = intern(&mut edge_ids, &e.label);
                adj[e.u * n + e.v] = id;
                adj[e.v * n + e.u] = id;
                list.push((e.u, e.v, id));
            }
            (adj, list)
        };
        let (adj1, edges1) = edge_list(g1);
        let (adj2, edges2) = edge_list(g2);
        let mut order: Vec<usize> = (0..g1.vertex_count()).collect();
        order.sort_by_key(|&u| (Reverse(g1.degree(u)), u));
        Self {
            n1: g1.vertex_count(),
            n2: g2.vertex_count(),
            order,
            labels1,
            labels2,
            adj1,
            adj2,
            n_vertex_labels: vertex_ids.len(),
            n_edge_labels: edge_ids.len(),
            edges1,
            edges2,
        }
    }

    fn edge1(&self, a: usize, b: usize) -> u32 {
        self.adj1[a * self.n1 + b]
    }

    fn edge2(&self, a: usize, b: usize) -> u32 {
        self.adj2[a * self.n2 + b]
    }

    /// Cost of deciding `order[depth] -> target` given the earlier decisions.
    fn step_cost(&self, map: &[u8], depth: usize, target: u8) -> u32 {
        let u = self.order[depth];
        let mut cost = match target {
            NONE => 1,
            t => (self.labels1[u] != self.labels2[t as usize]) as u32,
        };
        for (j, &mapped) in map.iter().enumerate().take(depth) {
            let w = self.order[j];
            let e1 = self.edge1(u, w);
            let e2 = if target == NONE || mapped == NONE {
                u32::MAX
            } else {
                self.edge2(target as usize, mapped as usize)
            };
            cost += (e1 != e2) as u32;
        }
        cost
    }

    /// Insertion of every unused second-graph vertex and every edge touching one.
    fn completion_cost(&self, used: u64) -> u32 {
        let free = |v: usize| used >> v & 1 == 0;
        let vertices = (0..self.n2).filter(|&v| free(v)).count() as u32;
        let edges = self.edges2.iter().filter(|&&(a, b, _)| free(a) || free(b)).count() as u32;
        vertices + edges
    }

    fn heuristic(&self, depth: usize, used: u64) -> u32 {
        let mut vcount = vec![0i32; self.n_vertex_labels];
        let mut pending1 = 0;
        for &u in &self.order[depth..] {
            vcount[self.labels1[u] as usize] += 1;
            pending1 += 1;
        }
        let mut pending2 = 0;
        let mut common = 0;
        for v in (0..self.n2).filter(|&v| used >> v & 1 == 0) {
            pending2 += 1;
            let c = &mut vcount[self.labels2[v] as usize];
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
        let vertex_part = pending1.max(pending2) - common;

        let mut decided = vec![false; self.n1];
        for &u in &self.order[..depth] {
            decided[u] = true;
        }
        let mut ecount = vec![0i32; self.n_edge_labels];
        let mut e_pending1 = 0;
        for &(a, b, l) in &self.edges1 {
            if !decided[a] || !decided[b] {
                ecount[l as usize] += 1;
                e_pending1 += 1;
            }
        }
        let mut e_pending2 = 0;
        let mut e_common = 0;
        for &(a, b, l) in &self.edges2 {
            if used >> a & 1 == 0 || used >> b & 1 == 0 {
                e_pending2 += 1;
                let c = &mut ecount[l as usize];
                if *c > 0 {
                    *c -= 1;
                    e_common += 1;
                }
            }
        }
        vertex_part + e_pending1.max(e_pending2) - e_common
    }

    /// Cost of a full greedy mapping: each vertex takes the cheapest option.
    fn greedy_upper_bound(&self) -> u32 {
        let mut map = Vec::with_capacity(self.n1);
        let mut used = 0u64;
        let mut g = 0;
        for depth in 0..self.n1 {
            let (cost, target) = (0..self.n2)
                .filter(|&t| used >> t & 1 == 0)
                .map(|t| t as u8)
                .chain(std::iter::once(NONE))
                .map(|t| (self.step_cost(&map, depth, t), t))
                .min()
                .expect("deletion is always available");
            g += cost;
            if target != NONE {
                used |= 1 << target;
            }
            map.push(target);
        }
        g + self.completion_cost(used)
    }

    fn run(&self, bound: Option<u32>, budget: u64) -> SearchResult {
        let upper = self.greedy_upper_bound();
        // A solution costing `best` is known unless `best` came from the bound.
        let (mut best, mut have_solution) = match bound {
            Some(b) if b < upper => (b + 1, false),
            _ => (upper, true),
        };
        let mut heap = BinaryHeap::new();
        let h0 = self.heuristic(0, 0);
        if h0 < best {
            heap.push(Node {
                f: Reverse(h0),
                depth: 0,
                g: 0,
                map: Vec::new(),
                used: 0,
            });
        }
        let mut expansions = 0u64;
        while let Some(node) = heap.pop() {
            if node.f.0 >= best {
                break;
            }
            if node.depth == self.n1 {
                best = node.g + self.completion_cost(node.used);
                have_solution = true;
                continue;
            }
            expansions += 1;
            if expansions > budget {
                return SearchResult::Exceeded;
            }
            let targets = (0..self.n2)
                .filter(|&t| node.used >> t & 1 == 0)
                .map(|t| t as u8)
                .chain(std::iter::once(NONE));
            for t in targets {
                let g = node.g + self.step_cost(&node.map, node.depth, t);
                let used = if t == NONE { node.used } else { node.used | 1 << t };
                let depth = node.depth + 1;
                let f = if depth == self.n1 {
                    g + self.completion_cost(used)
                } else {
                    g + self.heuristic(depth, used)
                };
                if f >= best {
                    continue;
                }
                let mut map = node.map.clone();
                map.push(t);
                heap.push(Node {
                    f: Reverse(f),
                    depth,
                    g,
                    map,
                    used,
                });
            }
        }
        if have_solution {
            SearchResult::Found(best)
        } else {
            SearchResult::Pruned
        }
    }
}
