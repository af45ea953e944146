// The two search variants: a sampled corpus-wide vertex count, and a
// weighted branch-intersection distance.

use gbda::graph::{compute_branches, LabelAlphabet};
use gbda::priors::{PriorOptions, PriorStore};
use gbda::search::{v1_effective_v, vgbd, SearchConfig, SearchEngine, Variant};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let corpus = generate_corpus(&GenSpec::new(9, 3, GraphKind::Random, 5), 8)?;
    let indexes: Vec<_> = corpus.graphs.iter().map(compute_branches).collect();
    let opts = PriorOptions {
        tau_hat: 3,
        n_pairs: 2_000,
        ..PriorOptions::default()
    };
    let priors = PriorStore::build(&indexes, &LabelAlphabet::from_graphs(&corpus.graphs), &opts)?;

    let counts: Vec<usize> = indexes.iter().map(|i| i.vertex_count()).collect();
    let effective_v = v1_effective_v(&counts, 10, 0)?;
    println!("sampled vertex count: {effective_v}");
    println!("VGBD(q, g1) at w = 0.8: {:.2}", vgbd(&indexes[0], &indexes[1], 0.8));

    for variant in [Variant::Standard, Variant::V1 { effective_v }, Variant::V2 { w: 0.8 }] {
        let engine = SearchEngine::new(SearchConfig::new(3, 0.8, variant)?, &priors)?;
        let hits = engine.search(&indexes[0], &indexes).iter().filter(|r| r.accepted).count();
        println!("{variant:?}: {hits} accepted");
    }
    Ok(())
}
