//! Offline priors: a Gaussian mixture over sampled branch distances and the
//! Jeffreys-style GED prior table, plus their on-disk format.

use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{gbd, BranchIndex, LabelAlphabet};
use crate::model::{Lambda1Table, ModelParams, Precision};

pub const PRIOR_FILE_VERSION: u64 = 1;
pub const SIGMA_FLOOR: f64 = 1e-3;

/// Draws `n_pairs` pairs of distinct graphs uniformly with replacement and
/// returns their branch distances.
pub fn sample_gbd_pairs(corpus: &[BranchIndex], n_pairs: usize, seed: u64) -> Result<Vec<u32>> {
    if corpus.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "sampling pairs needs at least 2 graphs, corpus has {}",
            corpus.len()
        )));
    }
    if n_pairs == 0 {
        return Err(Error::InvalidArgument("n_pairs must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = corpus.len();
    Ok((0..n_pairs)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            gbd(&corpus[i], &corpus[j]) as u32
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub components: Vec<GmmComponent>,
}

impl GmmModel {
    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Mean log-density of weighted points.
    fn mean_log_likelihood(&self, points: &[(f64, f64)], total: f64) -> f64 {
        points
            .iter()
            .map(|&(x, c)| c * log_sum_exp(self.components.iter().map(|comp| log_weighted_density(comp, x))))
            .sum::<f64>()
            / total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmOptions {
    pub k: usize,
    pub max_iter: usize,
    /// Stop once the mean log-likelihood per sample moves by less than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        Self {
            k: 3,
            max_iter: 100,
            tol: 1e-6,
            seed: 0,
        }
    }
}

fn log_weighted_density(c: &GmmComponent, x: f64) -> f64 {
    let z = (x - c.mean) / c.stddev;
    c.weight.ln() - c.stddev.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Fits a one-dimensional Gaussian mixture by EM.
pub fn fit_gmm(samples: &[f64], opts: &GmmOptions) -> Result<GmmModel> {
    fit_gmm_with_trace(samples, opts).map(|(model, _)| model)
}

/// As [`fit_gmm`], also returning the mean log-likelihood after seeding and
/// after every iteration.
pub fn fit_gmm_with_trace(samples: &[f64], opts: &GmmOptions) -> Result<(GmmModel, Vec<f64>)> {
    if opts.k == 0 || samples.len() < opts.k {
        return Err(Error::InvalidArgument(format!(
            "fitting {} components needs at least that many samples, got {}",
            opts.k,
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    // Repeated values collapse into weighted points; branch distances are
    // integers, so this turns 10^5 samples into a few dozen points.
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut points: Vec<(f64, f64)> = Vec::new();
    for x in sorted {
        match points.last_mut() {
            Some((v, c)) if *v == x => *c += 1.0,
            _ => points.push((x, 1.0)),
        }
    }
    let total = samples.len() as f64;

    let mut model = seed_components(&points, total, opts);
    let mut trace = vec![model.mean_log_likelihood(&points, total)];
    let mut resp = vec![0.0; opts.k];
    for _ in 0..opts.max_iter {
        let mut n_k = vec![0.0; opts.k];
        let mut sum_x = vec![0.0; opts.k];
        let mut sum_xx = vec![0.0; opts.k];
        for &(x, c) in &points {
            let logs: Vec<f64> = model.components.iter().map(|comp| log_weighted_density(comp, x)).collect();
            let norm = log_sum_exp(logs.iter().copied());
            for (r, l) in resp.iter_mut().zip(&logs) {
                *r = (l - norm).exp() * c;
            }
            for j in 0..opts.k {
                n_k[j] += resp[j];
                sum_x[j] += resp[j] * x;
            }
        }
        let means: Vec<f64> = (0..opts.k)
            .map(|j| if n_k[j] > 0.0 { sum_x[j] / n_k[j] } else { model.components[j].mean })
            .collect();
        for &(x, c) in &points {
            let logs: Vec<f64> = model.components.iter().map(|comp| log_weighted_density(comp, x)).collect();
            let norm = log_sum_exp(logs.iter().copied());
            for j in 0..opts.k {
                let d = x - means[j];
                sum_xx[j] += (logs[j] - norm).exp() * c * d * d;
            }
        }
        for j in 0..opts.k {
            let comp = &mut model.components[j];
            comp.weight = n_k[j] / total;
            if n_k[j] > 0.0 {
                comp.mean = means[j];
                comp.stddev = (sum_xx[j] / n_k[j]).sqrt().max(SIGMA_FLOOR);
            }
        }
        let ll = model.mean_log_likelihood(&points, total);
        let delta = ll - trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(ll);
        if delta.abs() < opts.tol {
            break;
        }
    }
    Ok((model, trace))
}

/// k-means++ seeding on the weighted points; every component starts with the
/// overall standard deviation and equal weight.
fn seed_components(points: &[(f64, f64)], total: f64, opts: &GmmOptions) -> GmmModel {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mean = points.iter().map(|&(x, c)| x * c).sum::<f64>() / total;
    let var = points.iter().map(|&(x, c)| c * (x - mean).powi(2)).sum::<f64>() / total;
    let sigma = var.sqrt().max(SIGMA_FLOOR);

    let first = WeightedIndex::new(points.iter().map(|p| p.1)).expect("positive counts");
    let mut centers = vec![points[first.sample(&mut rng)].0];
    while centers.len() < opts.k {
        let d2: Vec<f64> = points
            .iter()
            .map(|&(x, c)| c * centers.iter().map(|m| (x - m).powi(2)).fold(f64::INFINITY, f64::min))
            .collect();
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => points[dist.sample(&mut rng)].0,
            // Every point is already a center.
            Err(_) => centers[centers.len() - 1],
        };
        centers.push(next);
    }
    GmmModel {
        components: centers
            .into_iter()
            .map(|mean| GmmComponent {
                weight: 1.0 / opts.k as f64,
                mean,
                stddev: sigma,
            })
            .collect(),
    }
}

/// Probability mass of `[a, b]` under `N(μ, σ)`, using whichever tail keeps
/// the subtraction accurate.
fn normal_interval(mean: f64, stddev: f64, a: f64, b: f64) -> f64 {
    let (za, zb) = ((a - mean) / stddev, (b - mean) / stddev);
    let s = std::f64::consts::SQRT_2;
    if za > 0.0 {
        0.5 * (erfc(za / s) - erfc(zb / s))
    } else {
        0.5 * (erfc(-zb / s) - erfc(-za / s))
    }
}

/// `Pr[GBD = φ]` as the mixture mass on `[φ - 0.5, φ + 0.5]`.
pub fn gbd_prior_prob(model: &GmmModel, phi: u32) -> f64 {
    let phi = phi as f64;
    model
        .components
        .iter()
        .map(|c| c.weight * normal_interval(c.mean, c.stddev, phi - 0.5, phi + 0.5))
        .sum()
}

/// The GED prior on `τ ∈ 0..=τ̂` and `v ∈ 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GedPriorTable {
    pub tau_hat: usize,
    pub n_max: usize,
    pub norm_c: f64,
    /// `values[τ][v - 1]`.
    pub values: Vec<Vec<f64>>,
}

impl GedPriorTable {
    pub fn get(&self, tau: usize, v: usize) -> Result<f64> {
        if v == 0 || v > self.n_max {
            return Err(Error::OutOfPriorRange { v, n_max: self.n_max });
        }
        if tau > self.tau_hat {
            return Err(Error::InvalidArgument(format!(
                "τ = {tau} is beyond the prior table's τ̂ = {}",
                self.tau_hat
            )));
        }
        Ok(self.values[tau][v - 1])
    }
}

/// Entry `(τ, v)` is `C · sqrt(Σ_{φ=0}^{2τ} Λ₁(τ,φ)·𝒵(τ,φ)²)` with
/// `C = 1/((τ̂+1)·n_max)`. Cells where `Λ₁` vanishes are skipped, and a `v`
/// whose alphabet gives fewer than two branch types contributes zeros.
pub fn build_ged_prior(tau_hat: usize, n_max: usize, alphabet: &LabelAlphabet) -> Result<GedPriorTable> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let norm_c = 1.0 / ((tau_hat + 1) as f64 * n_max as f64);
    let columns: Vec<Vec<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|v| ged_prior_column(v, tau_hat, alphabet, norm_c))
        .collect();
    let values = (0..=tau_hat).map(|tau| columns.iter().map(|col| col[tau]).collect()).collect();
    Ok(GedPriorTable {
        tau_hat,
        n_max,
        norm_c,
        values,
    })
}

fn ged_prior_column(v: usize, tau_hat: usize, alphabet: &LabelAlphabet, norm_c: f64) -> Vec<f64> {
    let Ok(p) = ModelParams::new(v, alphabet) else {
        return vec![0.0; tau_hat + 1];
    };
    let table = Lambda1Table::build_with_scores(&p, tau_hat, Precision::Auto);
    (0..=tau_hat)
        .map(|tau| {
            let sum: f64 = (0..=2 * tau)
                .filter_map(|phi| table.score(tau, phi).map(|z| table.lambda1(tau, phi) * z * z))
                .sum();
            norm_c * sum.sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorStore {
    pub gmm: GmmModel,
    pub ged_table: GedPriorTable,
    pub alphabet: LabelAlphabet,
    pub n_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorOptions {
    pub tau_hat: usize,
    /// Largest `|V'|` covered; defaults to the corpus's largest graph.
    pub n_max: Option<usize>,
    pub n_pairs: usize,
    pub gmm: GmmOptions,
    pub seed: u64,
}

impl Default for PriorOptions {
    fn default() -> Self {
        Self {
            tau_hat: 10,
            n_max: None,
            n_pairs: 100_000,
            gmm: GmmOptions::default(),
            seed: 0,
        }
    }
}

impl PriorStore {
    /// Samples branch distances, fits the mixture and builds the GED table.
    pub fn build(corpus: &[BranchIndex], alphabet: &LabelAlphabet, opts: &PriorOptions) -> Result<Self> {
        alphabet.validate()?;
        let samples = sample_gbd_pairs(corpus, opts.n_pairs, opts.seed)?;
        let samples: Vec<f64> = samples.into_iter().map(f64::from).collect();
        let gmm = fit_gmm(&samples, &opts.gmm)?;
        let n_max = opts
            .n_max
            .unwrap_or_else(|| corpus.iter().map(BranchIndex::vertex_count).max().unwrap_or(1))
            .max(1);
        let ged_table = build_ged_prior(opts.tau_hat, n_max, alphabet)?;
        Ok(Self {
            gmm,
            ged_table,
            alphabet: alphabet.clone(),
            n_pairs: opts.n_pairs,
        })
    }

    pub fn gbd_prior(&self, phi: u32) -> f64 {
        gbd_prior_prob(&self.gmm, phi)
    }

    pub fn ged_prior(&self, tau: usize, v: usize) -> Result<f64> {
        self.ged_table.get(tau, v)
    }
}

#[derive(Serialize, Deserialize)]
struct PriorFile {
    version: u64,
    gmm: GmmModel,
    ged_table: GedPriorTable,
    alphabet: LabelAlphabet,
    n_pairs: usize,
}

pub fn save_priors(store: &PriorStore, path: impl AsRef<Path>) -> Result<()> {
    let file = PriorFile {
        version: PRIOR_FILE_VERSION,
        gmm: store.gmm.clone(),
        ged_table: store.ged_table.clone(),
        alphabet: store.alphabet.clone(),
        n_pairs: store.n_pairs,
    };
    fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_priors(path: impl AsRef<Path>) -> Result<PriorStore> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let version = value
        .get("version")
        .ok_or_else(|| Error::Schema("missing `version`".into()))?
        .as_u64()
        .ok_or_else(|| Error::Schema("`version` is not an unsigned integer".into()))?;
    if version != PRIOR_FILE_VERSION {
        return Err(Error::Version {
            found: version,
            expected: PRIOR_FILE_VERSION,
        });
    }
    let file: PriorFile = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    let t = &file.ged_table;
    if t.values.len() != t.tau_hat + 1 || t.values.iter().any(|row| row.len() != t.n_max) {
        return Err(Error::Schema(format!(
            "ged_table.values must be {} rows of {} entries",
            t.tau_hat + 1,
            t.n_max
        )));
    }
    if t.values.iter().flatten().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Schema("ged_table.values must be finite and non-negative".into()));
    }
    if file.gmm.components.is_empty() || file.gmm.components.iter().any(|c| !(c.stddev > 0.0)) {
        return Err(Error::Schema("gmm needs components with positive stddev".into()));
    }
    Ok(PriorStore {
        gmm: file.gmm,
        ged_table: file.ged_table,
        alphabet: file.alphabet,
        n_pairs: file.n_pairs,
    })
}
