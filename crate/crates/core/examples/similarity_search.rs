// Online stage: rank a corpus by the posterior probability of lying within
// the edit threshold of a query.

use gbda::graph::{compute_branches, LabelAlphabet};
use gbda::priors::{PriorOptions, PriorStore};
use gbda::search::{SearchConfig, SearchEngine, Variant};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let corpus = generate_corpus(&GenSpec::new(8, 4, GraphKind::Random, 3), 10)?;
    let indexes: Vec<_> = corpus.graphs.iter().map(compute_branches).collect();
    let alphabet = LabelAlphabet::from_graphs(&corpus.graphs);
    let opts = PriorOptions {
        tau_hat: 2,
        n_pairs: 5_000,
        ..PriorOptions::default()
    };
    let priors = PriorStore::build(&indexes, &alphabet, &opts)?;

    let engine = SearchEngine::new(SearchConfig::new(2, 0.8, Variant::Standard)?, &priors)?;
    let results = engine.search(&indexes[0], &indexes);
    for r in results.iter().take(8) {
        println!("{:8} gbd {:2} phi {:10.4} accepted {}", r.graph_id, r.gbd, r.phi, r.accepted);
    }
    let accepted: Vec<_> = results.iter().filter(|r| r.accepted).map(|r| r.graph_id.as_str()).collect();
    println!("accepted: {accepted:?}");
    Ok(())
}
