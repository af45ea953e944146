use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gbda::graph::{compute_branches, extended_vertex_count, gbd, materialize_extended, BranchIndex, Graph, LabelAlphabet};
use gbda::metrics::{evaluate, EvalReport};
use gbda::model::{lambda1, lambda1_batch, omega1, omega2, omega3, omega4, z_function, ModelParams};
use gbda::oracle::ged::DEFAULT_BUDGET;
use gbda::oracle::{exact_ged, ged_within, greedy_assignment_estimate, lsap_lower_bound, mc_omega, random_query, BoundedGed};
use gbda::priors::{PriorOptions, PriorStore};
use gbda::search::{accepts, combine_posterior, SearchConfig, SearchEngine, Variant};
use gbda::syngen::{generate_corpus, GenSpec, GraphKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn running_example() -> (Graph, Graph) {
    let g1 = Graph::from_parts("g1", &["A", "C", "B"], &[(0, 1, "y"), (0, 2, "y"), (1, 2, "z")]).unwrap();
    let g2 = Graph::from_parts("g2", &["B", "A", "A", "C"], &[(0, 2, "x"), (0, 3, "z"), (1, 3, "y")]).unwrap();
    (g1, g2)
}

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize, id: &str) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let vertex_labels = ["A", "B", "C"];
    let edge_labels = ["x", "y"];
    let labels: Vec<&str> = (0..n).map(|_| vertex_labels[rng.gen_range(0..3)]).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.4) {
                edges.push((u, v, edge_labels[rng.gen_range(0..2)]));
            }
        }
    }
    Graph::from_parts(id, &labels, &edges).unwrap()
}

fn random_pairs(seed: u64, count: usize, max_n: usize) -> Vec<(Graph, Graph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| (random_graph(&mut rng, max_n, &format!("a{i}")), random_graph(&mut rng, max_n, &format!("b{i}"))))
        .collect()
}

fn c1_gbd_example() -> Outcome {
    let (g1, g2) = running_example();
    let value = gbd(&compute_branches(&g1), &compute_branches(&g2));
    let mut best = Duration::MAX;
    for _ in 0..100 {
        let start = Instant::now();
        std::hint::black_box(gbd(&compute_branches(&g1), &compute_branches(&g2)));
        best = best.min(start.elapsed());
    }
    outcome(value == 3 && best < Duration::from_millis(1), format!("gbd = {value}, {best:?}"))
}

fn c2_ged_example() -> Outcome {
    let (g1, g2) = running_example();
    let start = Instant::now();
    let value = exact_ged(&g1, &g2, DEFAULT_BUDGET).value();
    let elapsed = start.elapsed();
    outcome(value == Some(3) && elapsed < Duration::from_secs(1), format!("ged = {value:?}, {elapsed:?}"))
}

fn c3_posterior_arithmetic() -> Outcome {
    let column = [0.0, 0.0, 0.5113, 0.5631];
    let gbd_prior = 0.05;
    let ged_prior = [0.8 * gbd_prior; 4];
    let phi = combine_posterior(&column, &ged_prior, gbd_prior);
    let accepted = accepts(phi, 0.8);
    outcome((phi - 0.8595).abs() <= 5e-4 && accepted, format!("posterior = {phi:.6}, accepted = {accepted}"))
}

fn c4_example_lambda1() -> Outcome {
    let p = ModelParams::from_sizes(4, 3, 3).unwrap();
    let got = [lambda1(2, 3, &p), lambda1(3, 3, &p)];
    let alt = ModelParams::from_sizes(4, 4, 3).unwrap();
    let alt_got = [lambda1(2, 3, &alt), lambda1(3, 3, &alt)];
    let pass = (got[0] - 0.5113).abs() <= 1e-3 && (got[1] - 0.5631).abs() <= 1e-3;
    outcome(
        pass,
        format!(
            "|L_V|=|L_E|=3 (D={}): {:.4}, {:.4}; D with |L_V|+1 ({}): {:.4}, {:.4}",
            p.d_types(),
            got[0],
            got[1],
            alt.d_types(),
            alt_got[0],
            alt_got[1]
        ),
    )
}

fn c5_monte_carlo() -> Outcome {
    let start = Instant::now();
    let trials = 1_000_000;
    let rows: Vec<_> = (0..10usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let d = if i % 2 == 0 { 4 } else { 60 };
            let q = random_query(&mut rng, i, 8, 4, d);
            let closed = q.closed_form().unwrap();
            let z = mc_omega(q, trials, 2000 + i as u64).z_score(closed);
            (q, closed, z)
        })
        .collect();
    let elapsed = start.elapsed();
    let worst = rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
    let failures: Vec<String> = rows
        .iter()
        .filter(|r| r.2.abs() > 3.0)
        .map(|r| format!("{:?} p={} z={:.2}", r.0, r.1, r.2))
        .collect();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(120),
        format!("max |z| = {worst:.2} over 10 points, {elapsed:.1?} {}", failures.join("; ")),
    )
}

fn c6_normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let v = rng.gen_range(1..=12usize);
        let b = v * (v - 1) / 2;
        let d: u64 = [4, 60, rng.gen_range(2..1000)][rng.gen_range(0..3)];
        let p = ModelParams::from_sizes(v, 3, 3).unwrap().with_d_types(d).unwrap();
        let tau = rng.gen_range(0..=v + b);
        let s1: f64 = (0..=tau.min(v)).map(|x| omega1(x, tau, &p)).sum();
        let x = rng.gen_range(tau.saturating_sub(b)..=tau.min(v));
        let s2: f64 = (0..=v).map(|m| omega2(m, x, tau, &p)).sum();
        let r = rng.gen_range(0..=v);
        let s3: f64 = (0..=r).map(|phi| omega3(r, phi, &p)).sum();
        let (x, m) = (rng.gen_range(0..=v), rng.gen_range(0..=v));
        let s4: f64 = (0..=v).map(|r| omega4(x, r, m, &p)).sum();
        for s in [s1, s2, s3, s4] {
            worst = worst.max((s - 1.0).abs());
        }
    }
    for v in 1..=8usize {
        let p = ModelParams::from_sizes(v, 3, 3).unwrap();
        for tau in 0..=4usize.min(v * (v + 1) / 2) {
            let s: f64 = (0..=v).map(|phi| lambda1(tau, phi, &p)).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |sum - 1| = {worst:.2e}"))
}

fn c7_batch_equals_pointwise() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for v in 1..=10usize {
        let p = ModelParams::from_sizes(v, 3, 3).unwrap();
        for tau_hat in 0..=6usize {
            for phi in 0..=18usize {
                let batch = lambda1_batch(tau_hat, phi, &p);
                for (tau, &b) in batch.iter().enumerate() {
                    checked += 1;
                    let single = lambda1(tau, phi, &p);
                    if b.to_bits() != single.to_bits() {
                        mismatches.push(format!("v={v} τ={tau} φ={phi}: {b} vs {single}"));
                    }
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("{checked} values, {} mismatches {}", mismatches.len(), mismatches.iter().take(3).cloned().collect::<Vec<_>>().join("; ")),
    )
}

fn rgamma(z: f64) -> f64 {
    if z > 0.5 {
        1.0 / gamma(z)
    } else {
        let n = z.round();
        let sign = if n as i64 % 2 == 0 { 1.0 } else { -1.0 };
        sign * (PI * (z - n)).sin() * gamma(1.0 - z) / PI
    }
}

fn gbinom(a: f64, b: f64) -> f64 {
    gamma(a + 1.0) * rgamma(b + 1.0) * rgamma(a - b + 1.0)
}

fn ibinom(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        gbinom(n as f64, k as f64).round()
    }
}

/// `Λ₁` with the summation ranges fixed at the integer `tau0` and every
/// binomial in `tau` continued through the Gamma function. The factor
/// `C(B, τ - x)` shared by the first two terms is cancelled by hand.
fn lambda1_continuous(v: usize, d: f64, tau0: usize, tau: f64, phi: usize) -> f64 {
    let a = (v * (v + 1) / 2) as f64;
    let mut total = 0.0;
    for x in 0..=tau0.min(v) {
        let y = tau - x as f64;
        let y0 = tau0 - x;
        for m in 0..=v.min(2 * y0) {
            let cover: f64 = (0..=m)
                .map(|t| {
                    let sign = if (m - t) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * ibinom(m, t) * gbinom((t * t.saturating_sub(1) / 2) as f64, y)
                })
                .sum();
            for r in phi.max(m).max(x)..=(x + m).min(v) {
                let changed = ibinom(r, phi) * ((d - 1.0) / d).powi(phi as i32) * (1.0 / d).powi((r - phi) as i32);
                let union = ibinom(m, x + m - r) * ibinom(v - m, r - m);
                total += ibinom(v, m) * cover * changed * union / gbinom(a, tau);
            }
        }
    }
    total
}

fn c8_score_finite_difference() -> Outcome {
    let mut cells = Vec::new();
    for v in 2..=8usize {
        let p = ModelParams::from_sizes(v, 3, 3).unwrap();
        for tau in 1..=4usize.min(v * (v + 1) / 2) {
            for phi in 0..=(2 * tau).min(v) {
                if lambda1(tau, phi, &p) > 1e-6 {
                    cells.push((v, tau, phi));
                }
            }
        }
    }
    let grid: Vec<_> = (0..20).map(|i| cells[i * cells.len() / 20]).collect();
    let h = 1e-4;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for &(v, tau, phi) in &grid {
        let p = ModelParams::from_sizes(v, 3, 3).unwrap();
        let d = p.d_types().to_string().parse::<f64>().unwrap();
        let fd = (lambda1_continuous(v, d, tau, tau as f64 + h, phi).ln()
            - lambda1_continuous(v, d, tau, tau as f64 - h, phi).ln())
            / (2.0 * h);
        let z = z_function(tau, phi, &p).unwrap();
        let rel = (z - fd).abs() / fd.abs();
        worst = worst.max(rel);
        if !(rel <= 1e-3) {
            failures.push(format!("v={v} τ={tau} φ={phi}: {z} vs {fd}"));
        }
    }
    outcome(failures.is_empty(), format!("20 cells, max relative error {worst:.2e} {}", failures.join("; ")))
}

fn c9_extension_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pairs = random_pairs(9, 200, 8);
    let broken = pairs
        .iter()
        .filter(|(a, b)| {
            let n = extended_vertex_count(a, b) + rng.gen_range(0..=2);
            let ea = materialize_extended(a, n - a.vertex_count());
            let eb = materialize_extended(b, n - b.vertex_count());
            gbd(&compute_branches(a), &compute_branches(b)) != gbd(&compute_branches(&ea), &compute_branches(&eb))
        })
        .count();
    outcome(broken == 0, format!("{broken} of 200 pairs differ"))
}

fn exact_pairs(seed: u64) -> Vec<(Graph, Graph, u32)> {
    random_pairs(seed, 200, 6)
        .into_par_iter()
        .map(|(a, b)| {
            let d = exact_ged(&a, &b, DEFAULT_BUDGET).value().expect("6-vertex pairs fit the budget");
            (a, b, d)
        })
        .collect()
}

fn c10_coupling_bound() -> Outcome {
    let broken = exact_pairs(10)
        .iter()
        .filter(|(a, b, d)| gbd(&compute_branches(a), &compute_branches(b)) as u32 > 2 * d)
        .count();
    outcome(broken == 0, format!("{broken} of 200 pairs exceed 2·GED"))
}

fn c11_generator_truth() -> Outcome {
    let mut checked = 0;
    let mut wrong = Vec::new();
    for (i, (n, kind)) in [(8, GraphKind::Random), (7, GraphKind::ScaleFree), (8, GraphKind::ScaleFree), (6, GraphKind::Random)]
        .into_iter()
        .enumerate()
    {
        let spec = GenSpec::new(n, 4, kind, 11 + i as u64);
        let corpus = generate_corpus(&spec, 5).unwrap();
        let by_id = |id: &str| corpus.graphs.iter().find(|g| g.id() == id).unwrap();
        for t in &corpus.truth {
            checked += 1;
            let got = exact_ged(by_id(&t.base_id), by_id(&t.variant_id), DEFAULT_BUDGET).value();
            if got != Some(t.ged) {
                wrong.push(format!("{} vs {}: {got:?} != {}", t.base_id, t.variant_id, t.ged));
            }
        }
    }
    outcome(checked == 100 && wrong.is_empty(), format!("{checked} pairs, {} wrong {}", wrong.len(), wrong.join("; ")))
}

fn c12_lsap_bound() -> Outcome {
    let broken = exact_pairs(12).iter().filter(|(a, b, d)| lsap_lower_bound(a, b) > *d).count();
    outcome(broken == 0, format!("{broken} of 200 pairs have LSAP > GED"))
}

fn c13_end_to_end() -> Outcome {
    let start = Instant::now();
    let tau_hat = 2;
    let spec = GenSpec::new(8, 4, GraphKind::Random, 13);
    let corpus = generate_corpus(&spec, 60).unwrap();
    let graphs = &corpus.graphs;
    let indexes: Vec<BranchIndex> = graphs.iter().map(compute_branches).collect();
    let queries: Vec<usize> = (0..graphs.len()).step_by(spec.target_degree + 1).collect();
    let truth: Vec<BTreeSet<usize>> = queries
        .par_iter()
        .map(|&q| {
            (0..graphs.len())
                .filter(|&g| match ged_within(&graphs[q], &graphs[g], tau_hat as u32, DEFAULT_BUDGET) {
                    BoundedGed::Within(_) => true,
                    BoundedGed::Above => false,
                    BoundedGed::Exceeded => panic!("8-vertex pairs fit the budget"),
                })
                .collect()
        })
        .collect();
    let opts = PriorOptions {
        tau_hat,
        ..PriorOptions::default()
    };
    let priors = PriorStore::build(&indexes, &LabelAlphabet::from_graphs(graphs), &opts).unwrap();

    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut scores = Vec::new();
    for gamma in [0.5, 0.7, 0.9] {
        let engine = SearchEngine::new(SearchConfig::new(tau_hat, gamma, Variant::Standard).unwrap(), &priors).unwrap();
        let mut report = EvalReport::default();
        for (qi, &q) in queries.iter().enumerate() {
            let accepted: BTreeSet<usize> = engine
                .search(&indexes[q], &indexes)
                .iter()
                .filter(|r| r.accepted)
                .map(|r| graphs.iter().position(|g| g.id() == r.graph_id).unwrap())
                .collect();
            report = report.merge(&evaluate(&accepted, &truth[qi]));
        }
        scores.push(format!("γ={gamma}: F1 {:.4} (p {:.4}, r {:.4})", report.f1, report.precision, report.recall));
        if report.f1 > best.0 {
            best = (report.f1, gamma);
        }
    }
    let mut greedy = EvalReport::default();
    for (qi, &q) in queries.iter().enumerate() {
        let accepted: BTreeSet<usize> = (0..graphs.len())
            .filter(|&g| greedy_assignment_estimate(&graphs[q], &graphs[g]) as usize <= tau_hat)
            .collect();
        greedy = greedy.merge(&evaluate(&accepted, &truth[qi]));
    }
    let elapsed = start.elapsed();
    outcome(
        best.0 > greedy.f1 && elapsed < Duration::from_secs(60),
        format!(
            "{} graphs, {} queries; {}; greedy F1 {:.4} (p {:.4}, r {:.4}); {elapsed:.1?}",
            graphs.len(),
            queries.len(),
            scores.join(", "),
            greedy.f1,
            greedy.precision,
            greedy.recall
        ),
    )
}

fn c14_scaling() -> Outcome {
    let tau_hat = 10;
    let sizes = [1000usize, 2000, 4000];
    let mut points = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let spec = GenSpec::new(n, 5, GraphKind::ScaleFree, 140 + i as u64);
        let corpus = generate_corpus(&spec, 2).unwrap();
        let indexes: Vec<BranchIndex> = corpus.graphs.iter().map(compute_branches).collect();
        let alphabet = LabelAlphabet::from_graphs(&corpus.graphs);
        let opts = PriorOptions {
            tau_hat,
            n_max: Some(n),
            n_pairs: 1000,
            ..PriorOptions::default()
        };
        let priors = PriorStore::build(&indexes, &alphabet, &opts).unwrap();
        let cfg = SearchConfig::new(tau_hat, 0.8, Variant::Standard).unwrap();
        let mut best = Duration::MAX;
        for _ in 0..5 {
            let start = Instant::now();
            let engine = SearchEngine::new(cfg, &priors).unwrap();
            for g in &indexes {
                std::hint::black_box(engine.posterior(&indexes[0], g).unwrap());
            }
            best = best.min(start.elapsed() / indexes.len() as u32);
        }
        points.push((n as f64, best.as_secs_f64()));
    }
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / k, sy / k);
    let slope = points.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum::<f64>()
        / points.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum::<f64>();
    let timings: Vec<String> = points.iter().map(|(n, t)| format!("n={n}: {:.3} ms", t * 1e3)).collect();
    outcome(slope < 1.5, format!("{}; log-log slope {slope:.3}", timings.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("C1 GBD of the running example", c1_gbd_example),
        ("C2 exact GED of the running example", c2_ged_example),
        ("C3 posterior arithmetic", c3_posterior_arithmetic),
        ("C4 likelihood values of the worked example", c4_example_lambda1),
        ("C5 closed forms against Monte Carlo", c5_monte_carlo),
        ("C6 normalization", c6_normalization),
        ("C7 batch equals pointwise", c7_batch_equals_pointwise),
        ("C8 score against finite differences", c8_score_finite_difference),
        ("C9 extension invariance", c9_extension_invariance),
        ("C10 GBD at most twice GED", c10_coupling_bound),
        ("C11 generator ground truth", c11_generator_truth),
        ("C12 LSAP lower bound", c12_lsap_bound),
        ("C13 end-to-end F1 against greedy", c13_end_to_end),
        ("C14 query time scaling", c14_scaling),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "[{}] {name}: {} ({:.1?})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed()
        );
    }
    println!("{} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
