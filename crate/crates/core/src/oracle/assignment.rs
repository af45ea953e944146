//! Assignment baselines over a branch-edit cost matrix.
//!
//! Costs are kept in half-units so they stay integral. Matching `u` to `v`
//! costs `2·[labels differ] + max(deg u, deg v) - |N(u) ∩ N(v)|`, where `N` is
//! the multiset of incident edge labels; deleting or inserting a vertex of
//! degree `k` costs `2 + k`. Every edge edit touches two branches, so an
//! optimal edit path induces an assignment of cost at most `2·GED`, and half of
//! the optimal assignment cost rounded up is a lower bound on GED.

use crate::graph::Graph;

/// Square cost matrix in half-units; the smaller graph is padded with dummy
/// vertices.
pub fn branch_cost_matrix(g1: &Graph, g2: &Graph) -> Vec<Vec<i64>> {
    let n = g1.vertex_count().max(g2.vertex_count());
    let n1 = incident_labels(g1);
    let n2 = incident_labels(g2);
    let mut cost = vec![vec![0i64; n]; n];
    for (i, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = match (n1.get(i), n2.get(j)) {
                (Some(a), Some(b)) => {
                    let relabel = (g1.vertex_label(i) != g2.vertex_label(j)) as i64;
                    2 * relabel + (a.len().max(b.len()) - sorted_intersection(a, b)) as i64
                }
                (Some(a), None) => 2 + a.len() as i64,
                (None, Some(b)) => 2 + b.len() as i64,
                (None, None) => 0,
            };
        }
    }
    cost
}

fn incident_labels(g: &Graph) -> Vec<Vec<&str>> {
    let mut out = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        out[e.u].push(e.label.as_str());
        out[e.v].push(e.label.as_str());
    }
    for labels in &mut out {
        labels.sort_unstable();
    }
    out
}

fn sorted_intersection(a: &[&str], b: &[&str]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Minimum-cost perfect assignment of a square matrix by the Hungarian method
/// with potentials, `O(n³)`. Returns the cost and the column of each row.
pub fn hungarian(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0, Vec::new());
    }
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0 holding the row being inserted.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (total, assignment)
}

/// Rows in order, each taking its cheapest free column (lowest index on ties).
pub fn greedy_assignment(cost: &[Vec<i64>]) -> (i64, Vec<usize>) {
    let n = cost.len();
    let mut taken = vec![false; n];
    let mut total = 0;
    let mut assignment = Vec::with_capacity(n);
    for row in cost {
        let j = (0..n)
            .filter(|&j| !taken[j])
            .min_by_key(|&j| (row[j], j))
            .expect("square matrix has a free column for every row");
        taken[j] = true;
        total += row[j];
        assignment.push(j);
    }
    (total, assignment)
}

fn half_ceil(x: i64) -> u32 {
    ((x + 1) / 2) as u32
}

/// Lower bound on GED from the optimal branch assignment.
pub fn lsap_lower_bound(g1: &Graph, g2: &Graph) -> u32 {
    half_ceil(hungarian(&branch_cost_matrix(g1, g2)).0)
}

/// GED estimate from a greedy branch assignment; no bound guarantee either way.
pub fn greedy_assignment_estimate(g1: &Graph, g2: &Graph) -> u32 {
    half_ceil(greedy_assignment(&branch_cost_matrix(g1, g2)).0)
}
