//! Labeled simple undirected graphs, branches and the graph branch distance.
//!
//! A *branch* is a vertex label together with the sorted multiset of the labels
//! of its incident edges. A graph's [`BranchIndex`] is the sorted multiset of
//! all its branches, and the branch distance between two graphs is
//! `max(|V_a|, |V_b|) - |B_a ∩ B_b|`, computed with one merge walk over the two
//! sorted lists.
//!
//! Labels are ordered by byte value; branches by root label, then by their edge
//! labels compared lexicographically as sequences.

use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved label of virtual vertices and edges in extended graphs. It is not a
/// legal label in any input file.
pub const VIRTUAL_LABEL: &str = "\u{0000}EPS";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub label: String,
}

/// Labeled simple undirected graph. Vertex `i` carries `vertex_labels[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    id: String,
    vertex_labels: Vec<String>,
    edges: Vec<Edge>,
    extended: bool,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges, out-of-range
    /// endpoints and the reserved virtual label.
    pub fn new(
        id: impl Into<String>,
        vertex_labels: Vec<String>,
        edges: Vec<(usize, usize, String)>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::InvalidGraph {
            id: id.clone(),
            reason,
        };
        if let Some(i) = vertex_labels.iter().position(|l| l == VIRTUAL_LABEL) {
            return Err(invalid(format!("vertex {i} uses the reserved virtual label")));
        }
        let n = vertex_labels.len();
        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (u, v, label) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) references a vertex >= {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop on vertex {u}")));
            }
            if label == VIRTUAL_LABEL {
                return Err(invalid(format!("edge ({u},{v}) uses the reserved virtual label")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(invalid(format!("duplicate edge ({u},{v}); multigraphs are not supported")));
            }
            out.push(Edge { u, v, label });
        }
        Ok(Self {
            id,
            vertex_labels,
            edges: out,
            extended: false,
        })
    }

    /// Convenience constructor for tests and examples.
    pub fn from_parts(id: &str, vertex_labels: &[&str], edges: &[(usize, usize, &str)]) -> Result<Self> {
        Self::new(
            id,
            vertex_labels.iter().map(|s| s.to_string()).collect(),
            edges.iter().map(|&(u, v, l)| (u, v, l.to_string())).collect(),
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_labels(&self) -> &[String] {
        &self.vertex_labels
    }

    pub fn vertex_label(&self, v: usize) -> &str {
        &self.vertex_labels[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// True for graphs produced by [`materialize_extended`].
    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.u == v || e.v == v).count()
    }

    /// Adjacency lists of `(neighbor, edge label)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, &str)>> {
        let mut adj = vec![Vec::new(); self.vertex_count()];
        for e in &self.edges {
            adj[e.u].push((e.v, e.label.as_str()));
            adj[e.v].push((e.u, e.label.as_str()));
        }
        adj
    }

    pub fn edge_label(&self, u: usize, v: usize) -> Option<&str> {
        self.edges
            .iter()
            .find(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
            .map(|e| e.label.as_str())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_label(u, v).is_some()
    }
}

/// A vertex label plus the ascending multiset of its incident edge labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub root_label: String,
    pub edge_labels: Vec<String>,
}

impl Branch {
    pub fn new(root_label: impl Into<String>, mut edge_labels: Vec<String>) -> Self {
        edge_labels.sort_unstable();
        Self {
            root_label: root_label.into(),
            edge_labels,
        }
    }

    pub fn degree(&self) -> usize {
        self.edge_labels.len()
    }
}

/// The sorted multiset of all branches of one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchIndex {
    graph_id: String,
    branches: Vec<Branch>,
    keys: BranchKeys,
}

/// Every branch flattened to a length-prefixed byte string, sorted, in one
/// buffer. Equal keys mean equal branches, and the merge over compact keys
/// stays cache friendly on large graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BranchKeys {
    bytes: Vec<u8>,
    ends: Vec<usize>,
}

impl BranchKeys {
    fn new(branches: &[Branch]) -> Self {
        let mut keys: Vec<Vec<u8>> = branches
            .iter()
            .map(|b| {
                let mut key = Vec::new();
                for label in std::iter::once(&b.root_label).chain(&b.edge_labels) {
                    key.extend_from_slice(&(label.len() as u32).to_le_bytes());
                    key.extend_from_slice(label.as_bytes());
                }
                key
            })
            .collect();
        keys.sort_unstable();
        let mut bytes = Vec::with_capacity(keys.iter().map(Vec::len).sum());
        let mut ends = Vec::with_capacity(keys.len());
        for k in keys {
            bytes.extend_from_slice(&k);
            ends.push(bytes.len());
        }
        Self { bytes, ends }
    }

    fn get(&self, i: usize) -> &[u8] {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        &self.bytes[start..self.ends[i]]
    }
}

impl BranchIndex {
    fn from_sorted(graph_id: String, branches: Vec<Branch>) -> Self {
        let keys = BranchKeys::new(&branches);
        Self {
            graph_id,
            branches,
            keys,
        }
    }

    /// Rebuilds an index from possibly unsorted branches, e.g. one read from a
    /// file written by another implementation.
    pub fn from_branches(graph_id: impl Into<String>, mut branches: Vec<Branch>) -> Self {
        for b in &mut branches {
            b.edge_labels.sort_unstable();
        }
        branches.sort_unstable();
        Self::from_sorted(graph_id.into(), branches)
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    /// Branches in ascending order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn vertex_count(&self) -> usize {
        self.branches.len()
    }
}

/// The vertex and edge label sets of a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAlphabet {
    pub vertex_labels: BTreeSet<String>,
    pub edge_labels: BTreeSet<String>,
}

impl LabelAlphabet {
    pub fn from_graphs<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> Self {
        let mut alphabet = Self::default();
        for g in graphs {
            alphabet.extend(g);
        }
        alphabet
    }

    pub fn extend(&mut self, g: &Graph) {
        self.vertex_labels.extend(g.vertex_labels.iter().cloned());
        self.edge_labels.extend(g.edges.iter().map(|e| e.label.clone()));
    }

    /// Alphabet with `n_vertex` and `n_edge` synthetic labels; only the sizes
    /// matter to the probability model.
    pub fn with_sizes(n_vertex: usize, n_edge: usize) -> Self {
        Self {
            vertex_labels: (0..n_vertex).map(|i| format!("V{i}")).collect(),
            edge_labels: (0..n_edge).map(|i| format!("E{i}")).collect(),
        }
    }

    pub fn vertex_label_count(&self) -> usize {
        self.vertex_labels.len()
    }

    pub fn edge_label_count(&self) -> usize {
        self.edge_labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertex_labels.contains(VIRTUAL_LABEL) || self.edge_labels.contains(VIRTUAL_LABEL) {
            return Err(Error::InvalidArgument(
                "label alphabet contains the reserved virtual label".into(),
            ));
        }
        Ok(())
    }
}

/// One branch per vertex, sorted.
pub fn compute_branches(g: &Graph) -> BranchIndex {
    let mut incident: Vec<Vec<String>> = vec![Vec::new(); g.vertex_count()];
    for e in &g.edges {
        incident[e.u].push(e.label.clone());
        incident[e.v].push(e.label.clone());
    }
    let mut branches: Vec<Branch> = g
        .vertex_labels
        .iter()
        .zip(incident)
        .map(|(label, edges)| Branch::new(label.clone(), edges))
        .collect();
    branches.sort_unstable();
    BranchIndex::from_sorted(g.id.clone(), branches)
}

/// Two branches are isomorphic iff their root labels and edge-label multisets
/// agree. With edge labels kept sorted this is plain equality.
pub fn branch_isomorphic(b1: &Branch, b2: &Branch) -> bool {
    b1 == b2
}

/// Size of the multiset intersection of two sorted branch lists.
pub fn branch_intersection_size(a: &BranchIndex, b: &BranchIndex) -> usize {
    let (xs, ys) = (&a.keys, &b.keys);
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < xs.ends.len() && j < ys.ends.len() {
        match xs.get(i).cmp(ys.get(j)) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common
}

/// Graph branch distance.
pub fn gbd(a: &BranchIndex, b: &BranchIndex) -> usize {
    a.vertex_count().max(b.vertex_count()) - branch_intersection_size(a, b)
}

/// `|V_1'| = |V_2'|` for the extended pair, without building either graph.
pub fn extended_vertex_count(g1: &Graph, g2: &Graph) -> usize {
    g1.vertex_count().max(g2.vertex_count())
}

/// Builds `G^{k}`: `k` isolated virtual vertices are added, then every
/// non-adjacent pair is joined by a virtual edge. Only used to check
/// extension invariance; the search never materializes extended graphs.
pub fn materialize_extended(g: &Graph, k: usize) -> Graph {
    let n = g.vertex_count() + k;
    let mut vertex_labels = g.vertex_labels.clone();
    vertex_labels.extend(std::iter::repeat_n(VIRTUAL_LABEL.to_string(), k));
    let mut adjacent = vec![false; n * n];
    for e in &g.edges {
        adjacent[e.u * n + e.v] = true;
        adjacent[e.v * n + e.u] = true;
    }
    let mut edges = g.edges.clone();
    for u in 0..n {
        for v in u + 1..n {
            if !adjacent[u * n + v] {
                edges.push(Edge {
                    u,
                    v,
                    label: VIRTUAL_LABEL.to_string(),
                });
            }
        }
    }
    Graph {
        id: g.id.clone(),
        vertex_labels,
        edges,
        extended: true,
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphRecord {
    id: String,
    vertices: Vec<String>,
    edges: Vec<(usize, usize, String)>,
}

impl From<&Graph> for GraphRecord {
    fn from(g: &Graph) -> Self {
        Self {
            id: g.id.clone(),
            vertices: g.vertex_labels.clone(),
            edges: g.edges.iter().map(|e| (e.u, e.v, e.label.clone())).collect(),
        }
    }
}

/// Parses one JSON Lines record.
pub fn parse_graph_line(line: &str) -> Result<Graph> {
    let rec: GraphRecord = serde_json::from_str(line)?;
    Graph::new(rec.id, rec.vertices, rec.edges)
}

pub fn graph_to_json_line(g: &Graph) -> String {
    serde_json::to_string(&GraphRecord::from(g)).expect("graph records always serialize")
}

/// Reads a JSON Lines corpus. Blank lines are skipped.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Graph>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut graphs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let g = parse_graph_line(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        graphs.push(g);
    }
    Ok(graphs)
}

pub fn write_corpus<'a>(path: impl AsRef<Path>, graphs: impl IntoIterator<Item = &'a Graph>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for g in graphs {
        writeln!(w, "{}", graph_to_json_line(g))?;
    }
    w.flush()?;
    Ok(())
}

/// Resolves a `PATH#ID` reference against a corpus file.
pub fn load_graph_ref(reference: &str) -> Result<Graph> {
    let (path, id) = reference
        .rsplit_once('#')
        .ok_or_else(|| Error::InvalidArgument(format!("expected PATH#ID, got `{reference}`")))?;
    read_corpus(path)?
        .into_iter()
        .find(|g| g.id() == id)
        .ok_or_else(|| Error::GraphNotFound(id.to_string()))
}

#[derive(Serialize, Deserialize)]
struct IndexRecord {
    id: String,
    vertex_count: usize,
    branches: Vec<(String, Vec<String>)>,
}

/// Writes branch indexes as JSON Lines:
/// `{"id","vertex_count","branches":[[root,[edge labels]],...]}`.
pub fn write_indexes<'a>(path: impl AsRef<Path>, indexes: impl IntoIterator<Item = &'a BranchIndex>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for idx in indexes {
        let rec = IndexRecord {
            id: idx.graph_id.clone(),
            vertex_count: idx.vertex_count(),
            branches: idx
                .branches
                .iter()
                .map(|b| (b.root_label.clone(), b.edge_labels.clone()))
                .collect(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec)?)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an index file; branches are re-sorted on load.
pub fn read_indexes(path: impl AsRef<Path>) -> Result<Vec<BranchIndex>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let rec: IndexRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if rec.branches.len() != rec.vertex_count {
            return Err(parse_err(format!(
                "vertex_count {} but {} branches",
                rec.vertex_count,
                rec.branches.len()
            )));
        }
        let branches = rec
            .branches
            .into_iter()
            .map(|(root, edges)| Branch::new(root, edges))
            .collect();
        out.push(BranchIndex::from_branches(rec.id, branches));
    }
    Ok(out)
}


#[cfg(test)]
pub(crate) mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn branch(root: &str, edges: &[&str]) -> Branch {
        Branch::new(root, edges.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn example_branches() {
        let idx = compute_branches(&example_g1());
        assert_eq!(
            idx.branches,
            vec![branch("A", &["y", "y"]), branch("B", &["y", "z"]), branch("C", &["y", "z"])]
        );
        let idx2 = compute_branches(&example_g2());
        assert_eq!(
            idx2.branches,
            vec![branch("A", &["x"]), branch("A", &["y"]), branch("B", &["x", "z"]), branch("C", &["y", "z"])]
        );
    }

    #[test]
    fn isolated_vertex_branch() {
        let g = Graph::from_parts("s", &["A"], &[]).unwrap();
        assert_eq!(compute_branches(&g).branches, vec![branch("A", &[])]);
    }

    #[test]
    fn path_middle_branch_is_sorted() {
        let g = Graph::from_parts("p", &["a", "b", "c"], &[(0, 1, "y"), (1, 2, "x")]).unwrap();
        let idx = compute_branches(&g);
        let middle = idx.branches.iter().find(|b| b.root_label == "b").unwrap();
        assert_eq!(middle.edge_labels, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn isomorphism_cases() {
        let b = branch("C", &["y", "z"]);
        assert!(branch_isomorphic(&b, &branch("C", &["z", "y"])));
        assert!(branch_isomorphic(&b, &b));
        assert!(!branch_isomorphic(&branch("A", &["x"]), &branch("A", &["x", "x"])));
    }

    #[test]
    fn example_gbd_is_three() {
        let a = compute_branches(&example_g1());
        let b = compute_branches(&example_g2());
        assert_eq!(branch_intersection_size(&a, &b), 1);
        assert_eq!(gbd(&a, &b), 3);
        assert_eq!(gbd(&a, &a), 0);
    }

    #[test]
    fn relabel_isolated_vertex_gives_one() {
        let g = Graph::from_parts("g", &["A", "B", "C"], &[(0, 1, "x")]).unwrap();
        let h = Graph::from_parts("h", &["A", "B", "D"], &[(0, 1, "x")]).unwrap();
        assert_eq!(gbd(&compute_branches(&g), &compute_branches(&h)), 1);
    }

    #[test]
    fn extended_counts() {
        let g3 = example_g1();
        let g4 = example_g2();
        assert_eq!(extended_vertex_count(&g3, &g4), 4);
        assert_eq!(extended_vertex_count(&g3, &g3), 3);
        let one = Graph::from_parts("1", &["A"], &[]).unwrap();
        let big = Graph::new("100", vec!["A".into(); 100], vec![]).unwrap();
        assert_eq!(extended_vertex_count(&one, &big), 100);
    }

    #[test]
    fn materialize_example() {
        let ext = materialize_extended(&example_g1(), 1);
        assert!(ext.is_extended());
        assert_eq!(ext.vertex_count(), 4);
        assert_eq!(ext.edge_count(), 6);
        assert_eq!(ext.edges().iter().filter(|e| e.label == VIRTUAL_LABEL).count(), 3);

        let complete = example_g1();
        assert_eq!(materialize_extended(&complete, 0).edges(), complete.edges());

        let empty = Graph::from_parts("e", &[], &[]).unwrap();
        let ext = materialize_extended(&empty, 2);
        assert_eq!(ext.vertex_count(), 2);
        assert_eq!(ext.edge_count(), 1);
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(Graph::from_parts("g", &["A"], &[(0, 0, "x")]).is_err());
        assert!(Graph::from_parts("g", &["A", "B"], &[(0, 1, "x"), (1, 0, "y")]).is_err());
        assert!(Graph::from_parts("g", &["A", "B"], &[(0, 2, "x")]).is_err());
        assert!(Graph::from_parts("g", &[VIRTUAL_LABEL], &[]).is_err());
        assert!(Graph::from_parts("g", &["A", "B"], &[(0, 1, VIRTUAL_LABEL)]).is_err());
    }

    #[test]
    fn json_line_round_trip() {
        let g = example_g2();
        let line = graph_to_json_line(&g);
        assert_eq!(line, r#"{"id":"g2","vertices":["B","A","A","C"],"edges":[[0,2,"x"],[0,3,"z"],[1,3,"y"]]}"#);
        assert_eq!(parse_graph_line(&line).unwrap(), g);
        assert!(parse_graph_line(r#"{"id":"m","vertices":["A","B"],"edges":[[0,1,"x"],[0,1,"x"]]}"#).is_err());
    }

    #[test]
    fn index_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.jsonl");
        let idx = vec![compute_branches(&example_g1()), compute_branches(&example_g2())];
        write_indexes(&path, &idx).unwrap();
        assert_eq!(read_indexes(&path).unwrap(), idx);
    }

    fn brute_force_intersection(a: &[Branch], b: &[Branch]) -> usize {
        let mut used = vec![false; b.len()];
        let mut count = 0;
        for x in a {
            if let Some(j) = (0..b.len()).find(|&j| !used[j] && b[j] == *x) {
                used[j] = true;
                count += 1;
            }
        }
        count
    }

    pub(crate) fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            let m = pairs.len();
            (
                proptest::collection::vec(prop_oneof!["A", "B", "C"], n),
                proptest::collection::vec(proptest::option::of(prop_oneof!["x", "y"]), m),
            )
                .prop_map(move |(labels, edge_choice)| {
                    let edges = pairs
                        .iter()
                        .zip(edge_choice)
                        .filter_map(|(&(u, v), l)| l.map(|l| (u, v, l)))
                        .collect();
                    Graph::new("r", labels, edges).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn gbd_symmetric_and_bounded(g in arb_graph(7), h in arb_graph(7)) {
            let (a, b) = (compute_branches(&g), compute_branches(&h));
            let d = gbd(&a, &b);
            prop_assert_eq!(d, gbd(&b, &a));
            prop_assert!(d <= g.vertex_count().max(h.vertex_count()));
        }

        #[test]
        fn merge_walk_matches_brute_force(g in arb_graph(8), h in arb_graph(8)) {
            let (a, b) = (compute_branches(&g), compute_branches(&h));
            prop_assert_eq!(branch_intersection_size(&a, &b), brute_force_intersection(&a.branches, &b.branches));
        }

        #[test]
        fn extension_preserves_gbd(g in arb_graph(6), h in arb_graph(6)) {
            let (small, large) = if g.vertex_count() <= h.vertex_count() { (&g, &h) } else { (&h, &g) };
            let k = large.vertex_count() - small.vertex_count();
            let e1 = compute_branches(&materialize_extended(small, k));
            let e2 = compute_branches(&materialize_extended(large, 0));
            prop_assert_eq!(gbd(&compute_branches(small), &compute_branches(large)), gbd(&e1, &e2));
        }
    }
}
