// Offline stage: fit the branch-distance prior, tabulate the edit-distance
// prior and round-trip both through a file.

use gbda::graph::{compute_branches, LabelAlphabet};
use gbda::priors::{load_priors, save_priors, PriorOptions, PriorStore};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let corpus = generate_corpus(&GenSpec::new(8, 3, GraphKind::Random, 1), 20)?;
    let indexes: Vec<_> = corpus.graphs.iter().map(compute_branches).collect();
    let opts = PriorOptions {
        tau_hat: 4,
        n_pairs: 5_000,
        ..PriorOptions::default()
    };
    let store = PriorStore::build(&indexes, &LabelAlphabet::from_graphs(&corpus.graphs), &opts)?;

    for c in &store.gmm.components {
        println!("weight {:.3} mean {:.3} sd {:.3}", c.weight, c.mean, c.stddev);
    }
    for phi in 0..=8 {
        println!("Pr[GBD = {phi}] = {:.4e}", store.gbd_prior(phi));
    }
    for tau in 0..=4 {
        println!("Pr[GED = {tau}], v = 8: {:.4}", store.ged_prior(tau, 8)?);
    }

    let path = std::env::temp_dir().join("gbda-priors.json");
    save_priors(&store, &path)?;
    assert_eq!(load_priors(&path)?, store);
    println!("saved to {}", path.display());
    Ok(())
}
