// Precision, recall and F1 of the search against exact ground truth, next to
// the greedy assignment baseline.

use std::collections::BTreeSet;
use std::time::Instant;

use gbda::graph::{compute_branches, LabelAlphabet};
use gbda::metrics::{evaluate, EvalReport};
use gbda::oracle::ged::DEFAULT_BUDGET;
use gbda::oracle::{ged_within, greedy_assignment_estimate, BoundedGed};
use gbda::priors::{PriorOptions, PriorStore};
use gbda::search::{SearchConfig, SearchEngine, Variant};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let tau_hat = 2;
    let corpus = generate_corpus(&GenSpec::new(8, 4, GraphKind::Random, 21), 12)?;
    let graphs = &corpus.graphs;
    let indexes: Vec<_> = graphs.iter().map(compute_branches).collect();
    let opts = PriorOptions {
        tau_hat,
        n_pairs: 10_000,
        ..PriorOptions::default()
    };
    let priors = PriorStore::build(&indexes, &LabelAlphabet::from_graphs(graphs), &opts)?;
    let engine = SearchEngine::new(SearchConfig::new(tau_hat, 0.7, Variant::Standard)?, &priors)?;

    let (mut ours, mut greedy) = (EvalReport::default(), EvalReport::default());
    for q in (0..graphs.len()).step_by(5) {
        let truth: BTreeSet<&str> = graphs
            .iter()
            .filter(|g| matches!(ged_within(&graphs[q], g, tau_hat as u32, DEFAULT_BUDGET), BoundedGed::Within(_)))
            .map(|g| g.id())
            .collect();

        let start = Instant::now();
        let results = engine.search(&indexes[q], &indexes);
        let elapsed = start.elapsed();
        let accepted: BTreeSet<&str> = results.iter().filter(|r| r.accepted).map(|r| r.graph_id.as_str()).collect();
        ours = ours.merge(&evaluate(&accepted, &truth).with_latency(elapsed));

        let start = Instant::now();
        let accepted: BTreeSet<&str> = graphs
            .iter()
            .filter(|g| greedy_assignment_estimate(&graphs[q], g) as usize <= tau_hat)
            .map(|g| g.id())
            .collect();
        greedy = greedy.merge(&evaluate(&accepted, &truth).with_latency(start.elapsed()));
    }
    println!("search\n{}", ours.to_table());
    println!("greedy\n{}", greedy.to_table());
    Ok(())
}
