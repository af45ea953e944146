// Branch distance of two small graphs, and its invariance under extension.

use gbda::graph::{compute_branches, gbd, materialize_extended, Graph};

fn main() {
    let g1 = Graph::from_parts("g1", &["A", "C", "B"], &[(0, 1, "y"), (0, 2, "y"), (1, 2, "z")]).unwrap();
    let g2 = Graph::from_parts("g2", &["B", "A", "A", "C"], &[(0, 2, "x"), (0, 3, "z"), (1, 3, "y")]).unwrap();

    let (b1, b2) = (compute_branches(&g1), compute_branches(&g2));
    for idx in [&b1, &b2] {
        println!("{}:", idx.graph_id());
        for b in idx.branches() {
            println!("  {} {:?}", b.root_label, b.edge_labels);
        }
    }
    println!("GBD = {}", gbd(&b1, &b2));

    let e1 = compute_branches(&materialize_extended(&g1, 1));
    let e2 = compute_branches(&materialize_extended(&g2, 0));
    println!("GBD of the extended pair = {}", gbd(&e1, &e2));
}
