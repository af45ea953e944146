// Assignment-based baselines next to the exact distance.

use gbda::oracle::ged::DEFAULT_BUDGET;
use gbda::oracle::{exact_ged, greedy_assignment_estimate, lsap_lower_bound};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let corpus = generate_corpus(&GenSpec::new(7, 3, GraphKind::Random, 2), 2)?;
    let g = &corpus.graphs;
    println!("{:>6} {:>6} {:>5} {:>5} {:>6}", "a", "b", "lsap", "exact", "greedy");
    for b in g {
        let exact = exact_ged(&g[0], b, DEFAULT_BUDGET).value().unwrap();
        println!(
            "{:>6} {:>6} {:>5} {:>5} {:>6}",
            g[0].id(),
            b.id(),
            lsap_lower_bound(&g[0], b),
            exact,
            greedy_assignment_estimate(&g[0], b)
        );
    }
    Ok(())
}
