// Generates template families whose variants sit at known edit distances
// and writes the corpus and truth files.

use gbda::graph::write_corpus;
use gbda::syngen::{generate_corpus, write_truth, GenSpec, GraphKind};

fn main() -> gbda::Result<()> {
    let spec = GenSpec::new(10, 4, GraphKind::ScaleFree, 7);
    let corpus = generate_corpus(&spec, 3)?;
    for t in &corpus.truth {
        println!("{} -> {}: {}", t.base_id, t.variant_id, t.ged);
    }
    println!("modification centers: {:?}", corpus.centers);

    let dir = std::env::temp_dir().join("gbda-synthetic");
    std::fs::create_dir_all(&dir)?;
    write_corpus(dir.join("corpus.jsonl"), &corpus.graphs)?;
    write_truth(dir.join("truth.jsonl"), &corpus.truth)?;
    println!("wrote {}", dir.display());
    Ok(())
}
