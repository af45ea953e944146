//! Online similarity search: the posterior
//! `Φ = Σ_{τ ≤ τ̂} Λ₁(τ, φ) · Λ₃(τ, v) / Λ₂(φ)` for every corpus graph, accepted
//! when `Φ ≥ γ`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};
use crate::graph::{branch_intersection_size, compute_branches, gbd, BranchIndex, Graph};
use crate::model::{Lambda1Table, ModelParams, Precision};
use crate::priors::PriorStore;

/// Smallest GBD prior used as a divisor.
pub const GBD_PRIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Variant {
    #[default]
    Standard,
    /// Uses one corpus-wide `|V'|` for every pair instead of the pair's own.
    V1 { effective_v: usize },
    /// Replaces GBD by `max(|V_a|,|V_b|) - w·|B_a ∩ B_b|`, rounded.
    V2 { w: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub tau_hat: usize,
    pub gamma: f64,
    pub variant: Variant,
}

impl SearchConfig {
    pub fn new(tau_hat: usize, gamma: f64, variant: Variant) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(invalid_arg(format!("γ must lie in [0, 1], got {gamma}")));
        }
        match variant {
            Variant::V1 { effective_v: 0 } => return Err(invalid_arg("effective |V'| must be positive")),
            Variant::V2 { w } if !(w > 0.0 && w.is_finite()) => {
                return Err(invalid_arg(format!("w must be positive and finite, got {w}")))
            }
            _ => {}
        }
        Ok(Self {
            tau_hat,
            gamma,
            variant,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    #[serde(rename = "id")]
    pub graph_id: String,
    pub gbd: u32,
    /// Raw posterior; only its clamp to `[0, 1]` is compared against `γ`.
    pub phi: f64,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `max(|V_a|,|V_b|) - w·|B_a ∩ B_b|`.
pub fn vgbd(a: &BranchIndex, b: &BranchIndex, w: f64) -> f64 {
    a.vertex_count().max(b.vertex_count()) as f64 - w * branch_intersection_size(a, b) as f64
}

/// Rounded mean vertex count of `alpha` graphs drawn without replacement
/// (all of them when `alpha` exceeds the corpus).
pub fn v1_effective_v(vertex_counts: &[usize], alpha: usize, seed: u64) -> Result<usize> {
    if vertex_counts.is_empty() {
        return Err(invalid_arg("cannot sample vertex counts from an empty corpus"));
    }
    if alpha == 0 {
        return Err(invalid_arg("α must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, vertex_counts.len(), alpha.min(vertex_counts.len()));
    let total: usize = picks.iter().map(|i| vertex_counts[i]).sum();
    Ok((total as f64 / picks.len() as f64).round() as usize)
}

/// `Σ_τ Λ₁[τ]·Λ₃[τ] / max(Λ₂, floor)`.
pub fn combine_posterior(lambda1_column: &[f64], ged_prior: &[f64], gbd_prior: f64) -> f64 {
    let denom = gbd_prior.max(GBD_PRIOR_FLOOR);
    lambda1_column.iter().zip(ged_prior).map(|(l1, l3)| l1 * l3).sum::<f64>() / denom
}

/// Accept test on the clamped posterior.
pub fn accepts(phi: f64, gamma: f64) -> bool {
    phi.clamp(0.0, 1.0) >= gamma
}

/// Search state for one configuration and prior store. Likelihood tables are
/// built on first use per `|V'|` and shared across queries.
pub struct SearchEngine<'a> {
    cfg: SearchConfig,
    priors: &'a PriorStore,
    tables: RwLock<HashMap<usize, Arc<Lambda1Table>>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub gbd: u32,
    /// The distance fed to the model: GBD, or rounded VGBD under V2.
    pub phi_input: u32,
    pub v: usize,
    pub phi: f64,
}

impl<'a> SearchEngine<'a> {
    pub fn new(cfg: SearchConfig, priors: &'a PriorStore) -> Result<Self> {
        if cfg.tau_hat > priors.ged_table.tau_hat {
            return Err(invalid_arg(format!(
                "τ̂ = {} exceeds the prior table's τ̂ = {}",
                cfg.tau_hat, priors.ged_table.tau_hat
            )));
        }
        Ok(Self {
            cfg,
            priors,
            tables: RwLock::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    fn table(&self, v: usize) -> Result<Arc<Lambda1Table>> {
        if let Some(t) = self.tables.read().expect("table cache poisoned").get(&v) {
            return Ok(t.clone());
        }
        let p = ModelParams::new(v, &self.priors.alphabet)?;
        let table = Arc::new(Lambda1Table::build(&p, self.cfg.tau_hat, Precision::Auto));
        Ok(self
            .tables
            .write()
            .expect("table cache poisoned")
            .entry(v)
            .or_insert(table)
            .clone())
    }

    pub fn posterior(&self, q: &BranchIndex, g: &BranchIndex) -> Result<Posterior> {
        let distance = gbd(q, g) as u32;
        let phi_input = match self.cfg.variant {
            Variant::V2 { w } => vgbd(q, g, w).round().max(0.0) as u32,
            _ => distance,
        };
        let v = match self.cfg.variant {
            Variant::V1 { effective_v } => effective_v,
            _ => q.vertex_count().max(g.vertex_count()),
        };
        if v == 0 || v > self.priors.ged_table.n_max {
            return Err(Error::OutOfPriorRange {
                v,
                n_max: self.priors.ged_table.n_max,
            });
        }
        let table = self.table(v)?;
        let column = table.column(phi_input as usize);
        let ged_prior: Vec<f64> = (0..=self.cfg.tau_hat)
            .map(|tau| self.priors.ged_prior(tau, v))
            .collect::<Result<_>>()?;
        Ok(Posterior {
            gbd: distance,
            phi_input,
            v,
            phi: combine_posterior(&column, &ged_prior, self.priors.gbd_prior(phi_input)),
        })
    }

    /// One result per corpus graph, by descending posterior then id.
    pub fn search(&self, q: &BranchIndex, corpus: &[BranchIndex]) -> Vec<QueryResult> {
        let mut results: Vec<QueryResult> = corpus
            .par_iter()
            .map(|g| match self.posterior(q, g) {
                Ok(p) => QueryResult {
                    graph_id: g.graph_id().to_string(),
                    gbd: p.gbd,
                    phi: p.phi,
                    accepted: accepts(p.phi, self.cfg.gamma),
                    error: None,
                },
                Err(e) => QueryResult {
                    graph_id: g.graph_id().to_string(),
                    gbd: gbd(q, g) as u32,
                    phi: 0.0,
                    accepted: false,
                    error: Some(e.to_string()),
                },
            })
            .collect();
        results.sort_by(|a, b| b.phi.total_cmp(&a.phi).then_with(|| a.graph_id.cmp(&b.graph_id)));
        results
    }
}

/// Posterior of a single pair.
pub fn posterior(q: &BranchIndex, g: &BranchIndex, cfg: &SearchConfig, priors: &PriorStore) -> Result<f64> {
    Ok(SearchEngine::new(*cfg, priors)?.posterior(q, g)?.phi)
}

/// Runs a query graph against an indexed corpus.
pub fn search(q: &Graph, corpus: &[BranchIndex], cfg: &SearchConfig, priors: &PriorStore) -> Result<Vec<QueryResult>> {
    Ok(SearchEngine::new(*cfg, priors)?.search(&compute_branches(q), corpus))
}
