//! The `gbda` command line. [`run`] parses arguments, dispatches and returns
//! the process exit code: 0 on success, 1 on usage errors, 2 on data errors.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::graph::{compute_branches, gbd, load_graph_ref, read_corpus, read_indexes, write_indexes, BranchIndex, LabelAlphabet};
use crate::metrics::{evaluate, EvalReport};
use crate::oracle::{exact_ged, ged_within, greedy_assignment_estimate, mc_omega, random_query, BoundedGed, GedOutcome};
use crate::priors::{load_priors, save_priors, GmmOptions, PriorOptions, PriorStore};
use crate::search::{v1_effective_v, SearchConfig, SearchEngine, Variant};
use crate::syngen::{generate_corpus, read_truth, write_truth, GenSpec, GraphKind};
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "gbda", version, about = "Graph similarity search via branch distance")]
struct Cli {
    /// Worker threads for corpus evaluation (default: available parallelism).
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with known edit distances.
    Gen(GenArgs),
    /// Compute branch indexes of a corpus.
    Index(IndexArgs),
    /// Fit the branch-distance prior and tabulate the edit-distance prior.
    Precompute(PrecomputeArgs),
    /// Score every corpus graph against a query.
    Search(SearchArgs),
    /// Branch distance of two graphs.
    Gbd(PairArgs),
    /// Exact edit distance of two graphs.
    GedExact(GedArgs),
    /// Precision, recall and F1 of the search and of a greedy baseline.
    Bench(BenchArgs),
    /// Compare closed-form probabilities with simulations.
    OmegaCheck(OmegaArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    ScaleFree,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    V1,
    V2,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Vertices per graph.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Center degree, also the largest variant distance.
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Random)]
    kind: KindArg,
    #[arg(long, default_value_t = 10)]
    templates: usize,
    #[arg(long, default_value_t = 4)]
    vertex_labels: usize,
    #[arg(long, default_value_t = 3)]
    edge_labels: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Corpus output (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Optional truth output (JSON Lines of base_id, variant_id, ged).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PriorArgs {
    #[arg(long, default_value_t = 10)]
    tau_hat: usize,
    /// Sampled graph pairs for the mixture fit.
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    gmm_k: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PriorArgs {
    fn options(&self) -> PriorOptions {
        PriorOptions {
            tau_hat: self.tau_hat,
            n_max: None,
            n_pairs: self.pairs,
            gmm: GmmOptions {
                k: self.gmm_k as usize,
                seed: self.seed,
                ..GmmOptions::default()
            },
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct PrecomputeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    prior: PriorArgs,
    /// Largest extended vertex count the table covers (default: largest graph).
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ScoringArgs {
    #[arg(long, default_value_t = 10)]
    tau_hat: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    /// Branch-intersection weight of the v2 variant.
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Graphs sampled for the v1 variant's vertex count.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    alpha: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ScoringArgs {
    /// Checks flags before any I/O; the v1 vertex count is filled in later.
    fn config(&self, gamma: f64) -> Result<SearchConfig, CliError> {
        let variant = match self.variant {
            VariantArg::Standard => Variant::Standard,
            VariantArg::V1 => Variant::V1 { effective_v: 1 },
            VariantArg::V2 => Variant::V2 { w: self.w },
        };
        SearchConfig::new(self.tau_hat, gamma, variant).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn resolve(&self, mut cfg: SearchConfig, corpus: &[BranchIndex]) -> crate::Result<SearchConfig> {
        if let Variant::V1 { .. } = cfg.variant {
            let counts: Vec<usize> = corpus.iter().map(BranchIndex::vertex_count).collect();
            cfg.variant = Variant::V1 {
                effective_v: v1_effective_v(&counts, self.alpha as usize, self.seed)?,
            };
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Corpus graphs (JSON Lines).
    #[arg(long, required_unless_present = "index")]
    corpus: Option<PathBuf>,
    /// Precomputed branch indexes, used instead of --corpus.
    #[arg(long, conflicts_with = "corpus")]
    index: Option<PathBuf>,
    /// Query graph as PATH#ID.
    #[arg(long)]
    query: String,
    #[arg(long)]
    priors: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    gamma: f64,
    #[command(flatten)]
    scoring: ScoringArgs,
    /// Results file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    /// First graph as PATH#ID.
    #[arg(long)]
    a: String,
    /// Second graph as PATH#ID.
    #[arg(long)]
    b: String,
}

#[derive(Debug, Args)]
struct GedArgs {
    #[command(flatten)]
    pair: PairArgs,
    /// Search expansions before giving up.
    #[arg(long, default_value_t = crate::oracle::ged::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Syngen truth file: its base graphs become the queries and its
    /// distances are trusted; all other pairs are solved exactly.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Prior file; fitted on the corpus when absent.
    #[arg(long)]
    priors: Option<PathBuf>,
    /// Thresholds to evaluate.
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.7, 0.9])]
    gamma: Vec<f64>,
    #[command(flatten)]
    scoring: ScoringArgs,
    #[arg(long, default_value_t = 100_000)]
    pairs: usize,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u32).range(1..))]
    gmm_k: u32,
    /// Expansion budget of each exact distance.
    #[arg(long, default_value_t = crate::oracle::ged::DEFAULT_BUDGET)]
    budget: u64,
    /// Emit JSON Lines instead of tables.
    #[arg(long)]
    json: bool,
    /// Include per-query latencies, which makes output vary between runs.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OmegaArgs {
    #[arg(long, default_value_t = 10)]
    points: usize,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..=128))]
    max_v: u64,
    #[arg(long, default_value_t = 4)]
    max_tau: usize,
    /// Branch-type counts to cycle through.
    #[arg(long, value_delimiter = ',', default_values_t = [4u64, 60])]
    d_types: Vec<u64>,
    /// Allowed distance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult = Result<(), CliError>;

/// Runs the command line and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return 1;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Gen(a) => gen(a),
        Command::Index(a) => index(a),
        Command::Precompute(a) => precompute(a),
        Command::Search(a) => search(a),
        Command::Gbd(a) => pair_gbd(a),
        Command::GedExact(a) => ged_exact(a),
        Command::Bench(a) => bench(a),
        Command::OmegaCheck(a) => omega_check(a),
    }
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen(a: GenArgs) -> CliResult {
    let kind = match a.kind {
        KindArg::Random => GraphKind::Random,
        KindArg::ScaleFree => GraphKind::ScaleFree,
    };
    let spec = GenSpec {
        vertex_labels: a.vertex_labels,
        edge_labels: a.edge_labels,
        ..GenSpec::new(a.n, a.d, kind, a.seed)
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let corpus = generate_corpus(&spec, a.templates)?;
    crate::graph::write_corpus(&a.out, &corpus.graphs)?;
    if let Some(path) = &a.truth {
        write_truth(path, &corpus.truth)?;
    }
    Ok(())
}

fn index(a: IndexArgs) -> CliResult {
    let graphs = read_corpus(&a.corpus)?;
    let indexes: Vec<BranchIndex> = graphs.par_iter().map(compute_branches).collect();
    write_indexes(&a.out, &indexes)?;
    Ok(())
}

fn precompute(a: PrecomputeArgs) -> CliResult {
    if a.n_max == Some(0) {
        return Err(CliError::Usage("--n-max must be positive".into()));
    }
    let graphs = read_corpus(&a.corpus)?;
    let alphabet = LabelAlphabet::from_graphs(&graphs);
    let indexes: Vec<BranchIndex> = graphs.par_iter().map(compute_branches).collect();
    let opts = PriorOptions {
        n_max: a.n_max,
        ..a.prior.options()
    };
    let store = PriorStore::build(&indexes, &alphabet, &opts)?;
    save_priors(&store, &a.out)?;
    Ok(())
}

fn search(a: SearchArgs) -> CliResult {
    let cfg = a.scoring.config(a.gamma)?;
    let corpus = match (&a.index, &a.corpus) {
        (Some(path), _) => read_indexes(path)?,
        (None, Some(path)) => read_corpus(path)?.par_iter().map(compute_branches).collect(),
        (None, None) => unreachable!("clap requires one of --corpus and --index"),
    };
    let query = compute_branches(&load_graph_ref(&a.query)?);
    let priors = load_priors(&a.priors)?;
    let cfg = a.scoring.resolve(cfg, &corpus)?;
    let engine = SearchEngine::new(cfg, &priors)?;
    let mut w = sink(a.out.as_deref())?;
    for r in engine.search(&query, &corpus) {
        writeln!(w, "{}", serde_json::to_string(&r).map_err(Error::from)?)?;
    }
    w.flush()?;
    Ok(())
}

fn pair_gbd(a: PairArgs) -> CliResult {
    let g1 = load_graph_ref(&a.a)?;
    let g2 = load_graph_ref(&a.b)?;
    println!("{}", gbd(&compute_branches(&g1), &compute_branches(&g2)));
    Ok(())
}

fn ged_exact(a: GedArgs) -> CliResult {
    let g1 = load_graph_ref(&a.pair.a)?;
    let g2 = load_graph_ref(&a.pair.b)?;
    match exact_ged(&g1, &g2, a.budget) {
        GedOutcome::Exact(d) => {
            println!("{d}");
            Ok(())
        }
        GedOutcome::Exceeded => Err(CliError::Data(Error::Undefined {
            what: "exact GED",
            reason: format!("search budget of {} expansions exhausted", a.budget),
        })),
    }
}

fn bench(a: BenchArgs) -> CliResult {
    let configs = a
        .gamma
        .iter()
        .map(|&g| a.scoring.config(g))
        .collect::<Result<Vec<_>, _>>()?;
    if configs.is_empty() {
        return Err(CliError::Usage("--gamma needs at least one value".into()));
    }
    let graphs = read_corpus(&a.corpus)?;
    let indexes: Vec<BranchIndex> = graphs.par_iter().map(compute_branches).collect();
    let position: BTreeMap<&str, usize> = graphs.iter().enumerate().map(|(i, g)| (g.id(), i)).collect();
    if position.len() != graphs.len() {
        return Err(CliError::Data(Error::InvalidArgument("corpus ids must be unique".into())));
    }

    let mut known: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let queries: Vec<usize> = match &a.truth {
        Some(path) => {
            let mut queries = Vec::new();
            for rec in read_truth(path)? {
                let find = |id: &str| position.get(id).copied().ok_or_else(|| Error::GraphNotFound(id.to_string()));
                let (b, v) = (find(&rec.base_id)?, find(&rec.variant_id)?);
                if !queries.contains(&b) {
                    queries.push(b);
                }
                known.insert((b, v), rec.ged);
            }
            queries
        }
        None => (0..graphs.len()).collect(),
    };

    let priors = match &a.priors {
        Some(path) => load_priors(path)?,
        None => {
            let opts = PriorArgs {
                tau_hat: a.scoring.tau_hat,
                pairs: a.pairs,
                gmm_k: a.gmm_k,
                seed: a.scoring.seed,
            }
            .options();
            PriorStore::build(&indexes, &LabelAlphabet::from_graphs(&graphs), &opts)?
        }
    };

    let tau_hat = a.scoring.tau_hat;
    let truth: Vec<(BTreeSet<usize>, usize)> = queries
        .par_iter()
        .map(|&q| {
            let mut similar = BTreeSet::new();
            let mut unresolved = 0;
            for g in 0..graphs.len() {
                let within = match known.get(&(q, g)) {
                    Some(&d) => d as usize <= tau_hat,
                    None => match ged_within(&graphs[q], &graphs[g], tau_hat as u32, a.budget) {
                        BoundedGed::Within(_) => true,
                        BoundedGed::Above => false,
                        BoundedGed::Exceeded => {
                            unresolved += 1;
                            false
                        }
                    },
                };
                if within {
                    similar.insert(g);
                }
            }
            (similar, unresolved)
        })
        .collect();
    let unresolved: usize = truth.iter().map(|t| t.1).sum();
    if unresolved > 0 {
        eprintln!("warning: {unresolved} pairs exceeded the exact-distance budget and count as dissimilar");
    }

    let mut rows: Vec<(String, EvalReport)> = Vec::new();
    for cfg in configs {
        let cfg = a.scoring.resolve(cfg, &indexes)?;
        let engine = SearchEngine::new(cfg, &priors)?;
        let mut total = EvalReport::default();
        for (qi, &q) in queries.iter().enumerate() {
            let start = Instant::now();
            let results = engine.search(&indexes[q], &indexes);
            let elapsed = start.elapsed();
            let accepted: BTreeSet<usize> = results
                .iter()
                .filter(|r| r.accepted)
                .map(|r| position[r.graph_id.as_str()])
                .collect();
            let report = evaluate(&accepted, &truth[qi].0);
            total = total.merge(&if a.timings { report.with_latency(elapsed) } else { report });
        }
        rows.push((format!("gbda gamma={}", cfg.gamma), total));
    }

    let mut total = EvalReport::default();
    for (qi, &q) in queries.iter().enumerate() {
        let start = Instant::now();
        let accepted: BTreeSet<usize> = (0..graphs.len())
            .into_par_iter()
            .filter(|&g| greedy_assignment_estimate(&graphs[q], &graphs[g]) as usize <= tau_hat)
            .collect();
        let elapsed = start.elapsed();
        let report = evaluate(&accepted, &truth[qi].0);
        total = total.merge(&if a.timings { report.with_latency(elapsed) } else { report });
    }
    rows.push(("greedy".to_string(), total));

    let mut w = sink(a.out.as_deref())?;
    for (i, (name, report)) in rows.iter().enumerate() {
        if a.json {
            let mut value = serde_json::to_value(report).map_err(Error::from)?;
            value["method"] = json!(name);
            writeln!(w, "{value}")?;
        } else {
            if i > 0 {
                writeln!(w)?;
            }
            writeln!(w, "{name}")?;
            write!(w, "{}", report.to_table())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn omega_check(a: OmegaArgs) -> CliResult {
    if a.d_types.iter().any(|&d| d < 2) {
        return Err(CliError::Usage("--d-types values must be at least 2".into()));
    }
    let max_v = a.max_v as usize;
    let rows: Vec<_> = (0..a.points)
        .into_par_iter()
        .map(|i| {
            let seed = a.seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_query(&mut rng, i, max_v, a.max_tau, a.d_types[i % a.d_types.len()]);
            let closed = q.closed_form()?;
            let mc = mc_omega(q, a.trials, seed);
            let z = mc.z_score(closed);
            Ok((q, closed, mc, z, z.abs() <= a.sigmas))
        })
        .collect::<crate::Result<_>>()?;
    let mut w = sink(a.out.as_deref())?;
    let mut failed = 0;
    for (q, closed, mc, z, pass) in rows {
        failed += usize::from(!pass);
        let line = json!({
            "query": q,
            "closed_form": closed,
            "estimate": mc.estimate,
            "stderr": mc.stderr,
            "z": if z.is_finite() { json!(z) } else { json!(null) },
            "pass": pass,
        });
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    if failed > 0 {
        return Err(CliError::Data(Error::InvalidArgument(format!(
            "{failed} of {} points differ by more than {} standard errors",
            a.points, a.sigmas
        ))));
    }
    Ok(())
}
