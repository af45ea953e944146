// Exact edit distance by best-first search, and a bounded check.

use gbda::graph::Graph;
use gbda::oracle::ged::DEFAULT_BUDGET;
use gbda::oracle::{apply_edit, exact_ged, ged_within, EditOp};

fn main() {
    let g1 = Graph::from_parts("g1", &["A", "C", "B"], &[(0, 1, "y"), (0, 2, "y"), (1, 2, "z")]).unwrap();
    let g2 = Graph::from_parts("g2", &["B", "A", "A", "C"], &[(0, 2, "x"), (0, 3, "z"), (1, 3, "y")]).unwrap();
    println!("GED(g1, g2) = {:?}", exact_ged(&g1, &g2, DEFAULT_BUDGET));

    let mut g = g1.clone();
    for op in [
        EditOp::RelabelVertex { v: 0, label: "B".into() },
        EditOp::DeleteEdge { u: 1, v: 2 },
        EditOp::AddVertex { label: "D".into() },
    ] {
        g = apply_edit(&g, &op).unwrap();
    }
    println!("after three edits: {:?}", exact_ged(&g1, &g, DEFAULT_BUDGET));
    for bound in [1, 2, 3] {
        println!("within {bound}? {:?}", ged_within(&g1, &g, bound, DEFAULT_BUDGET));
    }
}
