//! Monte Carlo simulations of the sampling processes behind `Ω₁`–`Ω₄` and `Λ₁`.
//!
//! Each simulation draws the random objects directly (subsets of slots, edge
//! sets of `K_v`, coloured balls) and never evaluates a binomial, so agreement
//! with the closed forms is evidence that the formulas describe the processes.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{lambda1, omega1, omega2, omega3, omega4, ModelParams};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "omega", rename_all = "snake_case")]
pub enum OmegaQuery {
    /// A uniform `tau`-subset of the `v + C(v,2)` vertex and edge slots
    /// contains exactly `x` vertices.
    Omega1 { v: usize, tau: usize, x: usize },
    /// `y` distinct uniform edges of `K_v` cover exactly `m` vertices.
    Omega2 { v: usize, y: usize, m: usize },
    /// Of `r` ball pairs coloured uniformly with `d` colours, exactly `phi`
    /// pairs disagree.
    Omega3 { d: u64, r: usize, phi: usize },
    /// Independent uniform `x`- and `m`-subsets of `v` vertices have a union of
    /// size exactly `r`.
    Omega4 { v: usize, x: usize, m: usize, r: usize },
    /// The whole edit process: `tau` distinct relabels on `K_v`, every touched
    /// branch redrawn from `d` types, and exactly `phi` branches changed.
    Lambda1 { v: usize, d: u64, tau: usize, phi: usize },
}

impl OmegaQuery {
    /// The closed-form probability of the same event.
    pub fn closed_form(&self) -> Result<f64> {
        let params = |v: usize, d: u64| ModelParams::from_sizes(v, 2, 2)?.with_d_types(d);
        Ok(match *self {
            OmegaQuery::Omega1 { v, tau, x } => omega1(x, tau, &params(v, 2)?),
            OmegaQuery::Omega2 { v, y, m } => omega2(m, 0, y, &params(v, 2)?),
            OmegaQuery::Omega3 { d, r, phi } => omega3(r, phi, &params(1, d)?),
            OmegaQuery::Omega4 { v, x, m, r } => omega4(x, r, m, &params(v, 2)?),
            OmegaQuery::Lambda1 { v, d, tau, phi } => lambda1(tau, phi, &params(v, d)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Binomial standard error of the estimate, `sqrt(p̂(1-p̂)/trials)`.
    pub stderr: f64,
    pub trials: u64,
}

/// Estimates the probability of the event described by `query`.
///
/// # Panics
/// If `trials` is zero or the query describes an impossible draw, such as
/// more slots than exist.
pub fn mc_omega(query: OmegaQuery, trials: u64, seed: u64) -> McEstimate {
    assert!(trials >= 1, "trials must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = match query {
        OmegaQuery::Omega1 { v, tau, x } => {
            let slots = v + v * v.saturating_sub(1) / 2;
            count(trials, || sample(&mut rng, slots, tau).iter().filter(|&i| i < v).count() == x)
        }
        OmegaQuery::Omega2 { v, y, m } => {
            let edges = complete_edges(v);
            count(trials, || {
                let mut covered = 0u128;
                for i in sample(&mut rng, edges.len(), y) {
                    let (a, b) = edges[i];
                    covered |= 1 << a | 1 << b;
                }
                covered.count_ones() as usize == m
            })
        }
        OmegaQuery::Omega3 { d, r, phi } => count(trials, || changed_branches(&mut rng, d, r) == phi),
        OmegaQuery::Omega4 { v, x, m, r } => count(trials, || {
            let mut union = 0u128;
            for i in sample(&mut rng, v, x) {
                union |= 1 << i;
            }
            for i in sample(&mut rng, v, m) {
                union |= 1 << i;
            }
            union.count_ones() as usize == r
        }),
        OmegaQuery::Lambda1 { v, d, tau, phi } => {
            let edges = complete_edges(v);
            count(trials, || {
                let mut touched = 0u128;
                for i in sample(&mut rng, v + edges.len(), tau) {
                    touched |= if i < v {
                        1 << i
                    } else {
                        let (a, b) = edges[i - v];
                        1 << a | 1 << b
                    };
                }
                changed_branches(&mut rng, d, touched.count_ones() as usize) == phi
            })
        }
    };
    let p = hits as f64 / trials as f64;
    McEstimate {
        estimate: p,
        stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    }
}

impl McEstimate {
    /// Distance of the estimate from `p` in binomial standard errors of `p`
    /// itself. Infinite when `p` is 0 or 1 and the estimate differs.
    pub fn z_score(&self, p: f64) -> f64 {
        let diff = self.estimate - p;
        let sigma = (p * (1.0 - p) / self.trials as f64).sqrt();
        if diff == 0.0 {
            0.0
        } else if sigma == 0.0 {
            f64::INFINITY
        } else {
            diff / sigma
        }
    }
}

/// A random valid query of kind `kind % 5` (in declaration order) with
/// `v <= max_v` and edit counts up to `max_tau`.
pub fn random_query<R: Rng>(rng: &mut R, kind: usize, max_v: usize, max_tau: usize, d: u64) -> OmegaQuery {
    let pairs = |v: usize| v * v.saturating_sub(1) / 2;
    match kind % 5 {
        0 => {
            let v = rng.gen_range(1..=max_v);
            let tau = rng.gen_range(0..=max_tau.min(v + pairs(v)));
            let x = rng.gen_range(tau.saturating_sub(pairs(v))..=tau.min(v));
            OmegaQuery::Omega1 { v, tau, x }
        }
        1 => {
            let v = rng.gen_range(2..=max_v.max(2));
            let y = rng.gen_range(0..=max_tau.min(pairs(v)));
            let m = rng.gen_range(0..=(2 * y).min(v));
            OmegaQuery::Omega2 { v, y, m }
        }
        2 => {
            let r = rng.gen_range(0..=max_v);
            OmegaQuery::Omega3 { d, r, phi: rng.gen_range(0..=r) }
        }
        3 => {
            let v = rng.gen_range(1..=max_v);
            let x = rng.gen_range(0..=max_tau.min(v));
            let m = rng.gen_range(0..=(2 * max_tau).min(v));
            let r = rng.gen_range(x.max(m)..=(x + m).min(v));
            OmegaQuery::Omega4 { v, x, m, r }
        }
        _ => {
            let v = rng.gen_range(1..=max_v);
            let tau = rng.gen_range(0..=max_tau.min(v + pairs(v)));
            OmegaQuery::Lambda1 { v, d, tau, phi: rng.gen_range(0..=(2 * tau).min(v)) }
        }
    }
}

fn count(trials: u64, mut event: impl FnMut() -> bool) -> u64 {
    (0..trials).filter(|_| event()).count() as u64
}

fn complete_edges(v: usize) -> Vec<(usize, usize)> {
    assert!(v <= 128, "simulations track vertices in a 128-bit set");
    (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect()
}

fn changed_branches(rng: &mut ChaCha8Rng, d: u64, r: usize) -> usize {
    (0..r).filter(|_| rng.gen_range(0..d) != rng.gen_range(0..d)).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{lambda1, omega1, omega2, omega3, omega4, ModelParams};

    fn within(q: OmegaQuery, expect: f64, trials: u64, seed: u64) {
        let est = mc_omega(q, trials, seed);
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!(
            (est.estimate - expect).abs() <= 3.0 * sigma + 1e-12,
            "{q:?}: {} vs {expect} (σ={sigma})",
            est.estimate
        );
    }

    #[test]
    fn deterministic_cases() {
        assert_eq!(mc_omega(OmegaQuery::Omega2 { v: 3, y: 1, m: 2 }, 1000, 1).estimate, 1.0);
        assert_eq!(mc_omega(OmegaQuery::Omega1 { v: 5, tau: 0, x: 0 }, 1000, 1).estimate, 1.0);
        assert_eq!(mc_omega(OmegaQuery::Omega4 { v: 5, x: 0, m: 3, r: 3 }, 1000, 1).estimate, 1.0);
        let once = mc_omega(OmegaQuery::Omega3 { d: 2, r: 1, phi: 1 }, 1000, 9);
        assert_eq!(once, mc_omega(OmegaQuery::Omega3 { d: 2, r: 1, phi: 1 }, 1000, 9));
    }

    #[test]
    fn ball_pairs_with_two_colours() {
        within(OmegaQuery::Omega3 { d: 2, r: 1, phi: 1 }, 0.5, 1_000_000, 7);
    }

    #[test]
    fn closed_forms_agree_with_simulation() {
        let p = ModelParams::from_sizes(5, 2, 2).unwrap();
        let d = 2 * 15;
        within(OmegaQuery::Omega1 { v: 5, tau: 3, x: 1 }, omega1(1, 3, &p), 200_000, 1);
        within(OmegaQuery::Omega2 { v: 5, y: 3, m: 4 }, omega2(4, 1, 4, &p), 200_000, 2);
        within(OmegaQuery::Omega3 { d, r: 4, phi: 3 }, omega3(4, 3, &p), 200_000, 3);
        within(OmegaQuery::Omega4 { v: 5, x: 2, m: 3, r: 4 }, omega4(2, 4, 3, &p), 200_000, 4);
    }

    #[test]
    fn random_queries_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..500 {
            let q = random_query(&mut rng, i, 8, 4, 60);
            assert!(q.closed_form().unwrap().is_finite(), "{q:?}");
            mc_omega(q, 10, i as u64);
        }
    }

    #[test]
    fn z_scores() {
        let e = McEstimate { estimate: 0.5, stderr: 0.0, trials: 100 };
        assert_eq!(e.z_score(0.5), 0.0);
        assert_eq!(e.z_score(0.0), f64::INFINITY);
        assert!((e.z_score(0.4) - 0.1 / (0.24f64 / 100.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_dispatch() {
        let p = ModelParams::from_sizes(4, 3, 3).unwrap();
        let q = OmegaQuery::Lambda1 { v: 4, d: 60, tau: 2, phi: 3 };
        assert_eq!(q.closed_form().unwrap(), lambda1(2, 3, &p));
        let q = OmegaQuery::Omega2 { v: 5, y: 3, m: 4 };
        assert_eq!(q.closed_form().unwrap(), omega2(4, 1, 4, &ModelParams::from_sizes(5, 2, 2).unwrap()));
        assert!(OmegaQuery::Omega3 { d: 1, r: 2, phi: 0 }.closed_form().is_err());
    }

    #[test]
    fn edit_process_matches_lambda1() {
        let p = ModelParams::from_sizes(4, 3, 3).unwrap();
        within(OmegaQuery::Lambda1 { v: 4, d: 60, tau: 2, phi: 3 }, lambda1(2, 3, &p), 1_000_000, 5);
    }
}
