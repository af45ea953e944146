//! Synthetic corpora with known edit distances.
//!
//! A connected template is grown vertex by vertex, each new vertex attaching to
//! earlier ones (preferentially by degree for scale-free graphs, uniformly
//! otherwise). A *modification center* is a vertex of degree at least `d` whose
//! neighbors have pairwise different signatures. Variant `k` changes exactly
//! `k` edges at the center: each is deleted, or relabeled to one fixed label
//! `b` that none of the changed edges carried before. Vertex labels and the
//! other edges are untouched, so `k` edits suffice, and the edge count plus the
//! edge-label multiset already need `k` edits; the distance is exactly `k`.

use std::collections::{BTreeMap, VecDeque};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::graph::Graph;

pub const DEFAULT_SIGNATURE_DEPTH: usize = 2;
pub const DEFAULT_RETRIES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Random,
    ScaleFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n_vertices: usize,
    /// Minimum center degree, and the largest variant distance.
    pub target_degree: usize,
    pub kind: GraphKind,
    pub vertex_labels: usize,
    pub edge_labels: usize,
    /// Edges added per new vertex; random graphs get the same total.
    pub edges_per_vertex: usize,
    pub signature_depth: usize,
    pub max_retries: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n_vertices: usize, target_degree: usize, kind: GraphKind, seed: u64) -> Self {
        Self {
            n_vertices,
            target_degree,
            kind,
            vertex_labels: 4,
            edge_labels: 3,
            edges_per_vertex: 2,
            signature_depth: DEFAULT_SIGNATURE_DEPTH,
            max_retries: DEFAULT_RETRIES,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_vertices < self.target_degree + 1 {
            return Err(invalid_arg(format!(
                "{} vertices cannot host a center of degree {}",
                self.n_vertices, self.target_degree
            )));
        }
        if self.vertex_labels < 2 || self.edge_labels < 2 {
            return Err(invalid_arg("alphabets need at least 2 labels each"));
        }
        if self.edges_per_vertex == 0 {
            return Err(invalid_arg("edges_per_vertex must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub base: Graph,
    pub variant: Graph,
    pub true_ged: u32,
}

/// `s_0` is the vertex's own label; ring `k` lists `(label of w, label of
/// (p, w))` for every vertex `w` at distance `k` and every edge reaching it
/// from distance `k - 1`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NeighborSignature {
    pub label: String,
    pub rings: Vec<Vec<(String, String)>>,
}

/// Signature of `v` up to `hops` rings. `center` only documents the call
/// site: the signature is taken in the unmodified graph, center edges
/// included.
pub fn neighbor_signature(g: &Graph, center: usize, v: usize, hops: usize) -> NeighborSignature {
    debug_assert!(g.has_edge(center, v), "signature of a non-neighbor");
    signature_with(&g.adjacency(), g.vertex_labels(), v, hops)
}

fn signature_with(adj: &[Vec<(usize, &str)>], labels: &[String], v: usize, hops: usize) -> NeighborSignature {
    let mut dist = BTreeMap::new();
    dist.insert(v, 0usize);
    let mut frontier = vec![v];
    let mut rings = Vec::with_capacity(hops);
    for k in 1..=hops {
        let mut ring = Vec::new();
        let mut next = Vec::new();
        for &p in &frontier {
            for &(w, l) in &adj[p] {
                match dist.get(&w) {
                    None => {
                        dist.insert(w, k);
                        next.push(w);
                        ring.push((labels[w].clone(), l.to_string()));
                    }
                    Some(&dw) if dw == k => ring.push((labels[w].clone(), l.to_string())),
                    _ => {}
                }
            }
        }
        ring.sort_unstable();
        rings.push(ring);
        frontier = next;
    }
    NeighborSignature {
        label: labels[v].clone(),
        rings,
    }
}

/// Highest-degree vertex (lowest index on ties) of degree at least
/// `min_degree` whose neighbors have pairwise different signatures.
pub fn find_modification_center(g: &Graph, min_degree: usize) -> Option<usize> {
    find_center_with(g, min_degree, DEFAULT_SIGNATURE_DEPTH, |_| true)
}

fn find_center_with(g: &Graph, min_degree: usize, hops: usize, mut accept: impl FnMut(usize) -> bool) -> Option<usize> {
    let adj = g.adjacency();
    let mut candidates: Vec<usize> = (0..g.vertex_count()).filter(|&v| adj[v].len() >= min_degree).collect();
    candidates.sort_by_key(|&v| (std::cmp::Reverse(adj[v].len()), v));
    candidates.into_iter().find(|&c| {
        let mut sigs: Vec<NeighborSignature> =
            adj[c].iter().map(|&(w, _)| signature_with(&adj, g.vertex_labels(), w, hops)).collect();
        sigs.sort_unstable();
        sigs.windows(2).all(|w| w[0] != w[1]) && accept(c)
    })
}

fn vertex_label(i: usize) -> String {
    format!("V{i}")
}

fn edge_label(i: usize) -> String {
    format!("E{i}")
}

fn grow_template(spec: &GenSpec, rng: &mut ChaCha8Rng, id: &str) -> Graph {
    let n = spec.n_vertices;
    let m = spec.edges_per_vertex;
    let labels: Vec<String> = (0..n).map(|_| vertex_label(rng.gen_range(0..spec.vertex_labels))).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut present = std::collections::HashSet::new();
    match spec.kind {
        GraphKind::ScaleFree => {
            // Every endpoint occurrence, so a uniform pick is degree-proportional.
            let mut ends: Vec<usize> = Vec::new();
            for i in 1..n {
                let want = m.min(i);
                let mut targets = Vec::with_capacity(want);
                while targets.len() < want {
                    let j = if ends.is_empty() { 0 } else { ends[rng.gen_range(0..ends.len())] };
                    if !targets.contains(&j) {
                        targets.push(j);
                    }
                }
                for j in targets {
                    edges.push((j, i));
                    present.insert((j, i));
                    ends.push(j);
                    ends.push(i);
                }
            }
        }
        GraphKind::Random => {
            for i in 1..n {
                let j = rng.gen_range(0..i);
                edges.push((j, i));
                present.insert((j, i));
            }
            let max_edges = n * (n - 1) / 2;
            let target = (m * n).saturating_sub(m * (m + 1) / 2).clamp(n - 1, max_edges);
            while edges.len() < target {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let (a, b) = (a.min(b), a.max(b));
                if a != b && present.insert((a, b)) {
                    edges.push((a, b));
                }
            }
        }
    }
    let edges = edges
        .into_iter()
        .map(|(a, b)| (a, b, edge_label(rng.gen_range(0..spec.edge_labels))))
        .collect();
    Graph::new(id, labels, edges).expect("generated graphs are simple")
}

/// The relabel target `b` for a center: a label absent from its edges if one
/// exists, else its least frequent one. Returns `b` and the center edges not
/// labeled `b`.
fn relabel_target(g: &Graph, center: usize, n_edge_labels: usize) -> (String, Vec<usize>) {
    let incident: Vec<usize> = (0..g.edge_count())
        .filter(|&i| g.edges()[i].u == center || g.edges()[i].v == center)
        .collect();
    let b = (0..n_edge_labels)
        .map(edge_label)
        .min_by_key(|l| (incident.iter().filter(|&&i| &g.edges()[i].label == l).count(), l.clone()))
        .expect("at least two edge labels");
    let eligible = incident.into_iter().filter(|&i| g.edges()[i].label != b).collect();
    (b, eligible)
}

fn is_connected(n: usize, edges: &[(usize, usize, String)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for (a, b, _) in edges {
        adj[*a].push(*b);
        adj[*b].push(*a);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

/// Applies `k` center edits. Deletions that would disconnect the graph are
/// turned into relabels.
fn make_variant(base: &Graph, eligible: &[usize], b: &str, k: usize, rng: &mut ChaCha8Rng, id: &str) -> Graph {
    let chosen: Vec<usize> = eligible.choose_multiple(rng, k).copied().collect();
    let mut edges: Vec<(usize, usize, String)> = base.edges().iter().map(|e| (e.u, e.v, e.label.clone())).collect();
    let mut deleted = vec![false; edges.len()];
    for &i in &chosen {
        if rng.gen_bool(0.5) {
            deleted[i] = true;
            let kept: Vec<_> = edges
                .iter()
                .zip(&deleted)
                .filter(|(_, &d)| !d)
                .map(|(e, _)| e.clone())
                .collect();
            if is_connected(base.vertex_count(), &kept) {
                continue;
            }
            deleted[i] = false;
        }
        edges[i].2 = b.to_string();
    }
    let edges = edges.into_iter().zip(deleted).filter(|(_, d)| !d).map(|(e, _)| e).collect();
    Graph::new(id, base.vertex_labels().to_vec(), edges).expect("variants stay simple")
}

/// Number of center edges that differ between `base` and `variant`, or `None`
/// if anything else differs.
pub fn center_edit_count(base: &Graph, variant: &Graph, center: usize) -> Option<u32> {
    if base.vertex_labels() != variant.vertex_labels() {
        return None;
    }
    let mut count = 0;
    for e in base.edges() {
        let touches = e.u == center || e.v == center;
        match variant.edge_label(e.u, e.v) {
            Some(l) if l == e.label => {}
            _ if touches => count += 1,
            _ => return None,
        }
    }
    if variant.edges().iter().any(|e| !base.has_edge(e.u, e.v)) {
        return None;
    }
    Some(count)
}

/// One template and its variants at distances `0..=d`.
#[derive(Debug, Clone)]
pub struct TemplateFamily {
    pub base: Graph,
    pub center: usize,
    /// `variants[k]` is at distance `k`; `variants[0]` equals the base.
    pub variants: Vec<Graph>,
}

fn generate_family(spec: &GenSpec, template: usize) -> Result<TemplateFamily> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(template as u64));
    let prefix = format!("t{template}");
    for _ in 0..spec.max_retries {
        let base = grow_template(spec, &mut rng, &format!("{prefix}_k0"));
        let mut target = None;
        let center = find_center_with(&base, spec.target_degree, spec.signature_depth, |c| {
            let (b, eligible) = relabel_target(&base, c, spec.edge_labels);
            let ok = eligible.len() >= spec.target_degree;
            if ok {
                target = Some((b, eligible));
            }
            ok
        });
        let (Some(center), Some((b, eligible))) = (center, target) else {
            continue;
        };
        let variants = (0..=spec.target_degree)
            .map(|k| make_variant(&base, &eligible, &b, k, &mut rng, &format!("{prefix}_k{k}")))
            .collect::<Vec<_>>();
        for (k, v) in variants.iter().enumerate() {
            debug_assert_eq!(center_edit_count(&base, v, center), Some(k as u32));
        }
        return Ok(TemplateFamily { base, center, variants });
    }
    Err(Error::RetriesExhausted(spec.max_retries))
}

/// Base/variant pairs of one template, `k = 0..=d`.
pub fn generate_pairs(spec: &GenSpec) -> Result<Vec<LabeledPair>> {
    let family = generate_family(spec, 0)?;
    Ok(family
        .variants
        .into_iter()
        .enumerate()
        .map(|(k, variant)| LabeledPair {
            base: family.base.clone(),
            variant,
            true_ged: k as u32,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub base_id: String,
    pub variant_id: String,
    pub ged: u32,
}

#[derive(Debug, Clone)]
pub struct SynCorpus {
    /// All variants of every template, the `k = 0` copy standing for the base.
    pub graphs: Vec<Graph>,
    pub truth: Vec<TruthRecord>,
    pub centers: Vec<usize>,
}

/// `n_templates` families; template `t` is generated from seed `seed + t`, so
/// families are independent of each other and of the thread count.
pub fn generate_corpus(spec: &GenSpec, n_templates: usize) -> Result<SynCorpus> {
    let families: Vec<TemplateFamily> = (0..n_templates)
        .into_par_iter()
        .map(|t| generate_family(spec, t))
        .collect::<Result<_>>()?;
    let mut corpus = SynCorpus {
        graphs: Vec::new(),
        truth: Vec::new(),
        centers: Vec::new(),
    };
    for fam in families {
        for (k, v) in fam.variants.iter().enumerate() {
            corpus.truth.push(TruthRecord {
                base_id: fam.base.id().to_string(),
                variant_id: v.id().to_string(),
                ged: k as u32,
            });
        }
        corpus.centers.push(fam.center);
        corpus.graphs.extend(fam.variants);
    }
    Ok(corpus)
}

pub fn write_truth(path: impl AsRef<Path>, truth: &[TruthRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for t in truth {
        writeln!(w, "{}", serde_json::to_string(t)?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<Vec<TruthRecord>> {
    let path = path.as_ref();
    std::fs::read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
