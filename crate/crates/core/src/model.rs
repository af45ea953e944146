//! The likelihood `Λ₁(τ, φ) = Pr[GBD = φ | GED = τ]` and its score.
//!
//! `Λ₁` factors as `Σ_x Ω₁ Σ_m Ω₂ Σ_r Ω₃·Ω₄` where, for `v = |V'|`,
//! `B = C(v,2)` and `A = v + B`:
//!
//! * `Ω₁(x; τ)`: a uniform `τ`-subset of the `A` vertex and edge slots hits
//!   exactly `x` vertices (hypergeometric).
//! * `Ω₂(m; x, τ)`: `y = τ - x` distinct edges of `K_v` cover exactly `m`
//!   vertices, `C(v,m)·k(y,m)/C(B,y)` with the inclusion-exclusion count
//!   `k(y,m) = Σ_t (-1)^(m-t) C(m,t) C(C(t,2), y)`.
//! * `Ω₃(φ; r)`: `r` relabeled branches end up with exactly `φ` differences
//!   when each of `𝔻` branch types is equally likely.
//! * `Ω₄(r; x, m)`: an `x`-subset and an `m`-subset of the vertices have a
//!   union of size `r` (hypergeometric in the overlap `x + m - r`).
//!
//! [`Lambda1Table`] evaluates every `τ ≤ τ̂` and every `φ` in one pass: the
//! inner sums over `r` depend on `(x, m, φ)` only, so they are built once and
//! shared by all `τ`. Pointwise [`lambda1`] builds a table with `τ̂ = τ`, so the
//! two always agree bit for bit.
//!
//! Up to `v = 200` the table is computed with exact integers and rounded once
//! per cell; larger `v` switches to log-space floating point. Terms whose
//! binomials vanish are skipped, so the summation ranges are the supports of
//! the four distributions.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::combinatorics::{
    binom, harmonic_diff, harmonic_exact, hypergeom_pmf_exact, ln_binom, rational_to_f64,
    ratio_to_f64,
};
use crate::error::{Error, Result};
use crate::graph::LabelAlphabet;

/// Largest `v` evaluated exactly under [`Precision::Auto`].
pub const EXACT_VERTEX_LIMIT: usize = 200;

/// Cells with `Λ₁` at or below this are treated as zero by the score.
pub const LAMBDA1_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelParams {
    v: usize,
    vertex_labels: usize,
    edge_labels: usize,
    d_types: BigUint,
}

impl ModelParams {
    pub fn new(v: usize, alphabet: &LabelAlphabet) -> Result<Self> {
        Self::from_sizes(v, alphabet.vertex_label_count(), alphabet.edge_label_count())
    }

    /// Uses `𝔻 = |L_V| · C(v + |L_E| - 1, |L_E|)` branch types.
    pub fn from_sizes(v: usize, vertex_labels: usize, edge_labels: usize) -> Result<Self> {
        let d = BigUint::from(vertex_labels)
            * binom((v + edge_labels).saturating_sub(1) as u64, edge_labels as i64);
        Self::with_parts(v, vertex_labels, edge_labels, d)
    }

    /// Replaces `𝔻` by an explicit value, e.g. to count the virtual label too.
    pub fn with_d_types(self, d_types: impl Into<BigUint>) -> Result<Self> {
        Self::with_parts(self.v, self.vertex_labels, self.edge_labels, d_types.into())
    }

    fn with_parts(v: usize, vertex_labels: usize, edge_labels: usize, d_types: BigUint) -> Result<Self> {
        if v == 0 {
            return Err(Error::Undefined {
                what: "likelihood",
                reason: "extended graphs have no vertices".into(),
            });
        }
        if d_types < BigUint::from(2u32) {
            return Err(Error::Undefined {
                what: "likelihood",
                reason: format!("branch-type count {d_types} is below 2"),
            });
        }
        Ok(Self {
            v,
            vertex_labels,
            edge_labels,
            d_types,
        })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn d_types(&self) -> &BigUint {
        &self.d_types
    }

    pub fn vertex_label_count(&self) -> usize {
        self.vertex_labels
    }

    pub fn edge_label_count(&self) -> usize {
        self.edge_labels
    }

    /// `C(v, 2)`, the edge slots of `K_v`.
    pub fn edge_slots(&self) -> u64 {
        let v = self.v as u64;
        v * (v - 1) / 2
    }

    /// `v + C(v, 2)`, all slots a relabel can touch.
    pub fn slots(&self) -> u64 {
        self.v as u64 + self.edge_slots()
    }
}

/// Exact edge-cover count `k(y, m)` and its derivative in `y`.
#[derive(Debug)]
pub struct CoverCount {
    pub count: BigUint,
    pub count_f64: f64,
    /// `d/dy` of the count under the Gamma extension of `C(T, y)` in `y`.
    pub derivative: f64,
}

fn cover_cache() -> &'static RwLock<HashMap<(usize, usize), Arc<CoverCount>>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<CoverCount>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Number of `y`-edge subsets of `K_m` that cover all `m` vertices.
/// Depends on `(y, m)` only and is cached process-wide.
pub fn cover_count(y: usize, m: usize) -> Arc<CoverCount> {
    if let Some(hit) = cover_cache().read().expect("cover cache poisoned").get(&(y, m)) {
        return hit.clone();
    }
    let entry = Arc::new(compute_cover_count(y, m));
    cover_cache()
        .write()
        .expect("cover cache poisoned")
        .entry((y, m))
        .or_insert(entry)
        .clone()
}

fn compute_cover_count(y: usize, m: usize) -> CoverCount {
    let mut count = BigInt::zero();
    let mut derivative = BigRational::zero();
    let h_y = harmonic_exact(y as u64);
    for t in 0..=m {
        let sign_neg = (m - t) % 2 == 1;
        let c_mt = BigInt::from(binom(m as u64, t as i64));
        let big_t = t * t.saturating_sub(1) / 2;
        let term_d = if big_t >= y {
            let c = BigInt::from(binom(big_t as u64, y as i64));
            let term = &c_mt * &c;
            if sign_neg {
                count -= &term;
            } else {
                count += &term;
            }
            BigRational::from_integer(term) * (harmonic_exact((big_t - y) as u64) - &h_y)
        } else {
            // Limit of d/dy C(T, y) at an integer y > T, where C(T, y) has a zero.
            let denom = BigInt::from(y) * BigInt::from(binom(y as u64 - 1, big_t as i64));
            let sign = if (y - big_t) % 2 == 1 { -1 } else { 1 };
            BigRational::new(c_mt * sign, denom)
        };
        if sign_neg {
            derivative -= term_d;
        } else {
            derivative += term_d;
        }
    }
    let count = count.to_biguint().expect("cover counts are non-negative");
    let count_f64 = ratio_to_f64(&count, &BigUint::one());
    CoverCount {
        count,
        count_f64,
        derivative: rational_to_f64(&derivative),
    }
}

pub fn omega1_exact(x: usize, tau: usize, p: &ModelParams) -> BigRational {
    hypergeom_pmf_exact(x as i64, p.slots(), p.v as u64, tau as u64)
}

/// Probability that `τ - x` random edges of `K_v` cover exactly `m` vertices;
/// zero when there are fewer than `τ - x` edges or `x > τ`.
pub fn omega2_exact(m: usize, x: usize, tau: usize, p: &ModelParams) -> BigRational {
    if x > tau || m > p.v {
        return BigRational::zero();
    }
    let y = tau - x;
    let total = binom(p.edge_slots(), y as i64);
    if total.is_zero() {
        return BigRational::zero();
    }
    let num = binom(p.v as u64, m as i64) * &cover_count(y, m).count;
    BigRational::new(num.into(), total.into())
}

pub fn omega3_exact(r: usize, phi: usize, p: &ModelParams) -> BigRational {
    if phi > r {
        return BigRational::zero();
    }
    let d = &p.d_types;
    let num = binom(r as u64, phi as i64) * num_traits::pow(d - 1u32, phi);
    BigRational::new(num.into(), num_traits::pow(d.clone(), r).into())
}

pub fn omega4_exact(x: usize, r: usize, m: usize, p: &ModelParams) -> BigRational {
    if x > p.v || m > p.v {
        return BigRational::zero();
    }
    hypergeom_pmf_exact(x as i64 + m as i64 - r as i64, p.v as u64, m as u64, x as u64)
}

pub fn omega1(x: usize, tau: usize, p: &ModelParams) -> f64 {
    rational_to_f64(&omega1_exact(x, tau, p))
}

pub fn omega2(m: usize, x: usize, tau: usize, p: &ModelParams) -> f64 {
    rational_to_f64(&omega2_exact(m, x, tau, p))
}

pub fn omega3(r: usize, phi: usize, p: &ModelParams) -> f64 {
    rational_to_f64(&omega3_exact(r, phi, p))
}

pub fn omega4(x: usize, r: usize, m: usize, p: &ModelParams) -> f64 {
    rational_to_f64(&omega4_exact(x, r, m, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    Exact,
    Float,
    /// Exact up to [`EXACT_VERTEX_LIMIT`], float above.
    #[default]
    Auto,
}

impl Precision {
    fn is_exact(self, v: usize) -> bool {
        match self {
            Precision::Exact => true,
            Precision::Float => false,
            Precision::Auto => v <= EXACT_VERTEX_LIMIT,
        }
    }
}

/// `Λ₁(τ, φ)` for all `τ ≤ τ̂` and `φ ≤ min(2τ̂, v)`, optionally with the score
/// `𝒵(τ, φ) = ∂ ln Λ₁ / ∂τ`.
#[derive(Debug, Clone)]
pub struct Lambda1Table {
    v: usize,
    tau_hat: usize,
    values: Vec<Vec<f64>>,
    scores: Option<Vec<Vec<f64>>>,
}

impl Lambda1Table {
    pub fn build(p: &ModelParams, tau_hat: usize, precision: Precision) -> Self {
        Self::build_inner(p, tau_hat, precision, false)
    }

    /// Also computes `𝒵` for every cell with `Λ₁ > LAMBDA1_FLOOR`.
    pub fn build_with_scores(p: &ModelParams, tau_hat: usize, precision: Precision) -> Self {
        Self::build_inner(p, tau_hat, precision, true)
    }

    fn build_inner(p: &ModelParams, tau_hat: usize, precision: Precision, with_scores: bool) -> Self {
        let v = p.v;
        let phi_len = v.min(2 * tau_hat) + 1;
        let exact = precision.is_exact(v);
        let float_parts = (!exact || with_scores).then(|| FloatParts::new(p, tau_hat, phi_len));
        let values = if exact {
            exact_values(p, tau_hat, phi_len)
        } else {
            float_parts.as_ref().unwrap().lambda(p, tau_hat, phi_len)
        };
        let scores = with_scores.then(|| float_parts.as_ref().unwrap().scores(p, tau_hat, phi_len, &values));
        Self {
            v,
            tau_hat,
            values,
            scores,
        }
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn tau_hat(&self) -> usize {
        self.tau_hat
    }

    /// `Λ₁(τ, φ)`, zero outside the support.
    ///
    /// # Panics
    /// If `tau > tau_hat`.
    pub fn lambda1(&self, tau: usize, phi: usize) -> f64 {
        assert!(tau <= self.tau_hat, "tau {tau} beyond table range {}", self.tau_hat);
        self.values[tau].get(phi).copied().unwrap_or(0.0)
    }

    /// `[Λ₁(0, φ), …, Λ₁(τ̂, φ)]`.
    pub fn column(&self, phi: usize) -> Vec<f64> {
        (0..=self.tau_hat).map(|t| self.lambda1(t, phi)).collect()
    }

    /// `𝒵(τ, φ)` if the table was built with scores and `Λ₁(τ, φ)` is above the
    /// floor.
    pub fn score(&self, tau: usize, phi: usize) -> Option<f64> {
        let scores = self.scores.as_ref()?;
        if self.lambda1(tau, phi) <= LAMBDA1_FLOOR {
            return None;
        }
        scores[tau].get(phi).copied()
    }
}

/// Every summation term needs `x ≤ v` and `m ≤ min(v, 2(τ - x))`.
fn m_max(v: usize, tau_hat: usize, x: usize) -> usize {
    v.min(2 * (tau_hat - x))
}

/// `Σ_x Σ_m C(v,m)·k(y,m)·(D-1)^φ·S[x][m][φ] / (C(A,τ)·D^R)` with
/// `S[x][m][φ] = Σ_r C(m,t)·C(v-m,x-t)·C(r,φ)·D^(R-r)` and `t = x+m-r`.
/// The `C(v,x)` of `Ω₁` cancels the denominator of `Ω₄`.
fn exact_values(p: &ModelParams, tau_hat: usize, phi_len: usize) -> Vec<Vec<f64>> {
    let v = p.v;
    let r_top = v.min(2 * tau_hat);
    let d = &p.d_types;
    let d_pow: Vec<BigUint> = std::iter::successors(Some(BigUint::one()), |acc| Some(acc * d))
        .take(r_top + 1)
        .collect();
    let dm1 = d - 1u32;
    let dm1_pow: Vec<BigUint> = std::iter::successors(Some(BigUint::one()), |acc| Some(acc * &dm1))
        .take(phi_len)
        .collect();

    let x_top = tau_hat.min(v);
    let mut s: Vec<Vec<Vec<BigUint>>> = Vec::with_capacity(x_top + 1);
    for x in 0..=x_top {
        let mut row = Vec::new();
        for m in 0..=m_max(v, tau_hat, x) {
            let mut cell = vec![BigUint::zero(); phi_len];
            for r in x.max(m)..=v.min(x + m) {
                let t = x + m - r;
                let c = binom(m as u64, t as i64) * binom((v - m) as u64, (x - t) as i64);
                if c.is_zero() {
                    continue;
                }
                let weighted = c * &d_pow[r_top - r];
                for (phi, slot) in cell.iter_mut().enumerate().take(r + 1) {
                    *slot += &weighted * binom(r as u64, phi as i64);
                }
            }
            row.push(cell);
        }
        s.push(row);
    }

    let a = p.slots();
    (0..=tau_hat)
        .map(|tau| {
            let c_a = binom(a, tau as i64);
            if c_a.is_zero() {
                return vec![0.0; phi_len];
            }
            let mut num = vec![BigUint::zero(); phi_len];
            for (x, row) in s.iter().enumerate().take(tau.min(v) + 1) {
                let y = tau - x;
                for (m, cell) in row.iter().enumerate().take(v.min(2 * y) + 1) {
                    let k = cover_count(y, m);
                    if k.count.is_zero() {
                        continue;
                    }
                    let w = binom(v as u64, m as i64) * &k.count;
                    for (acc, sv) in num.iter_mut().zip(cell) {
                        if !sv.is_zero() {
                            *acc += &w * sv;
                        }
                    }
                }
            }
            let den = c_a * &d_pow[r_top];
            num.into_iter()
                .zip(&dm1_pow)
                .map(|(n, dp)| {
                    if n.is_zero() {
                        return 0.0;
                    }
                    // Reduced so the rounding is independent of `τ̂`.
                    let n = n * dp;
                    let g = n.gcd(&den);
                    ratio_to_f64(&(n / &g), &(&den / &g))
                })
                .collect()
        })
        .collect()
}

/// Log-space pieces: `u[x][m][φ] = Σ_r Ω₃(r,φ)·Ω₄(x,r,m)` and
/// `Ω₁·Ω₂ / k(y,m) = C(v,x)·C(v,m) / C(A,τ)`.
struct FloatParts {
    u: Vec<Vec<Vec<f64>>>,
}

fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    (n >> shift as usize).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

impl FloatParts {
    fn new(p: &ModelParams, tau_hat: usize, phi_len: usize) -> Self {
        let v = p.v;
        let ln_d = ln_biguint(&p.d_types);
        let ln_keep = (-ratio_to_f64(&BigUint::one(), &p.d_types)).ln_1p();
        let x_top = tau_hat.min(v);
        let u = (0..=x_top)
            .map(|x| {
                let ln_cvx = ln_binom(v as u64, x as i64);
                (0..=m_max(v, tau_hat, x))
                    .map(|m| {
                        let mut cell = vec![0.0; phi_len];
                        for r in x.max(m)..=v.min(x + m) {
                            let t = x + m - r;
                            let ln_o4 = ln_binom(m as u64, t as i64)
                                + ln_binom((v - m) as u64, (x - t) as i64)
                                - ln_cvx;
                            if ln_o4 == f64::NEG_INFINITY {
                                continue;
                            }
                            for (phi, slot) in cell.iter_mut().enumerate().take(r + 1) {
                                let ln_o3 = ln_binom(r as u64, phi as i64) + phi as f64 * ln_keep
                                    - (r - phi) as f64 * ln_d;
                                *slot += (ln_o3 + ln_o4).exp();
                            }
                        }
                        cell
                    })
                    .collect()
            })
            .collect();
        Self { u }
    }

    /// Visits every `(τ, x, m)` term with its `C(v,x)·C(v,m)/C(A,τ)` weight.
    fn for_each_term(&self, p: &ModelParams, tau: usize, mut f: impl FnMut(f64, &CoverCount, &[f64])) {
        let v = p.v;
        let ln_ca = ln_binom(p.slots(), tau as i64);
        if ln_ca == f64::NEG_INFINITY {
            return;
        }
        for (x, row) in self.u.iter().enumerate().take(tau.min(v) + 1) {
            let y = tau - x;
            let ln_cvx = ln_binom(v as u64, x as i64);
            for (m, cell) in row.iter().enumerate().take(v.min(2 * y) + 1) {
                let base = (ln_cvx + ln_binom(v as u64, m as i64) - ln_ca).exp();
                f(base, &cover_count(y, m), cell);
            }
        }
    }

    fn lambda(&self, p: &ModelParams, tau_hat: usize, phi_len: usize) -> Vec<Vec<f64>> {
        (0..=tau_hat)
            .map(|tau| {
                let mut out = vec![0.0; phi_len];
                self.for_each_term(p, tau, |base, k, cell| {
                    if k.count_f64 == 0.0 {
                        return;
                    }
                    for (acc, u) in out.iter_mut().zip(cell) {
                        *acc += base * k.count_f64 * u;
                    }
                });
                out
            })
            .collect()
    }

    /// `𝒵 = H(τ) - H(A-τ) + Σ C(v,x)C(v,m)k'(y,m)u / Σ C(v,x)C(v,m)k(y,m)u`.
    fn scores(&self, p: &ModelParams, tau_hat: usize, phi_len: usize, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let a = p.slots();
        (0..=tau_hat)
            .map(|tau| {
                if tau as u64 > a {
                    return vec![f64::NAN; phi_len];
                }
                let mut num = vec![0.0; phi_len];
                let mut den = vec![0.0; phi_len];
                self.for_each_term(p, tau, |base, k, cell| {
                    for ((n, d), u) in num.iter_mut().zip(den.iter_mut()).zip(cell) {
                        *n += base * k.derivative * u;
                        *d += base * k.count_f64 * u;
                    }
                });
                let h = harmonic_diff(tau as u64, a - tau as u64);
                (0..phi_len)
                    .map(|phi| {
                        if values[tau][phi] <= LAMBDA1_FLOOR || den[phi] <= 0.0 {
                            f64::NAN
                        } else {
                            h + num[phi] / den[phi]
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `Pr[GBD = φ | GED = τ]`.
pub fn lambda1(tau: usize, phi: usize, p: &ModelParams) -> f64 {
    Lambda1Table::build(p, tau, Precision::Auto).lambda1(tau, phi)
}

/// `[Λ₁(0, φ), …, Λ₁(τ̂, φ)]` from a single shared table.
pub fn lambda1_batch(tau_hat: usize, phi: usize, p: &ModelParams) -> Vec<f64> {
    Lambda1Table::build(p, tau_hat, Precision::Auto).column(phi)
}

/// The score `𝒵(τ, φ) = ∂ ln Λ₁(τ, φ) / ∂τ`, with binomials extended to real
/// `τ` through the Gamma function.
pub fn z_function(tau: usize, phi: usize, p: &ModelParams) -> Result<f64> {
    let table = Lambda1Table::build_with_scores(p, tau, Precision::Auto);
    table.score(tau, phi).ok_or_else(|| Error::Undefined {
        what: "score",
        reason: format!("Λ₁(τ={tau}, φ={phi}) is zero for v={}", p.v),
    })
}
