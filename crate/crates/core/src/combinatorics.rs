//! Binomials, hypergeometric probabilities and harmonic numbers.
//!
//! Exact values use arbitrary-precision integers and rationals. The `_f64`
//! and `ln_` variants are products over the smaller of `k` and `n - k` and are
//! only accurate when that is small, which is the regime the model needs.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut small: u128 = 1;
    let mut i = 0;
    while i < k {
        // small * (n - i) / (i + 1) is exact at every step.
        match small.checked_mul((n - i) as u128) {
            Some(p) => {
                small = p / (i as u128 + 1);
                i += 1;
            }
            None => break,
        }
    }
    if i == k {
        return BigUint::from(small);
    }
    let mut big = BigUint::from(small);
    while i < k {
        big *= n - i;
        big /= i + 1;
        i += 1;
    }
    big
}

/// `ln C(n, k)`; negative infinity outside the support.
pub fn ln_binom(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return f64::NEG_INFINITY;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// `C(n, k)` as a float, accurate to a few ulps per factor.
pub fn binom_f64(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let k = (k as u64).min(n - k as u64);
    if k <= 20 {
        let mut acc = 1.0;
        for i in 0..k {
            acc = acc * (n - i) as f64 / (i + 1) as f64;
        }
        acc
    } else {
        ln_binom(n, k as i64).exp()
    }
}

/// Hypergeometric probability of `x` marked items in an `n`-draw from `m`
/// items of which `k` are marked. Zero outside the support.
pub fn hypergeom_pmf_exact(x: i64, m: u64, k: u64, n: u64) -> BigRational {
    let total = binom(m, n as i64);
    if total.is_zero() || k > m {
        return BigRational::zero();
    }
    let num = binom(k, x) * binom(m - k, n as i64 - x);
    BigRational::new(BigInt::from(num), BigInt::from(total))
}

pub fn hypergeom_pmf(x: i64, m: u64, k: u64, n: u64) -> f64 {
    if k > m || n > m {
        return 0.0;
    }
    let num = binom(k, x) * binom(m - k, n as i64 - x);
    ratio_to_f64(&num, &binom(m, n as i64))
}

/// Nearest-ish `f64` to `num / den`, computed from a 64-bit scaled quotient so
/// that neither operand has to fit in a float.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio_to_f64: zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits() as i64 - num.bits() as i64 + 66;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    scale_pow2(q.to_f64().expect("quotient has ~66 bits"), -shift)
}

/// Signed variant of [`ratio_to_f64`].
pub fn signed_ratio_to_f64(num: &BigInt, den: &BigUint) -> f64 {
    let mag = ratio_to_f64(num.magnitude(), den);
    if num.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    let den = r.denom();
    let flip = den.sign() == Sign::Minus;
    let v = signed_ratio_to_f64(r.numer(), den.magnitude());
    if flip {
        -v
    } else {
        v
    }
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

const HARMONIC_DIRECT_LIMIT: u64 = 1024;

/// `H(n) = 1 + 1/2 + … + 1/n`, with `H(0) = 0`.
pub fn harmonic(n: u64) -> f64 {
    if n <= HARMONIC_DIRECT_LIMIT {
        // Summing smallest terms first keeps the rounding error near one ulp.
        return (1..=n).rev().map(|i| 1.0 / i as f64).sum();
    }
    let x = n as f64;
    let x2 = x * x;
    x.ln() + EULER_GAMMA + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2) - 1.0 / (252.0 * x2 * x2 * x2)
}

/// `H(a) - H(b)` without the cancellation of two large harmonic numbers when
/// `a` and `b` are close.
pub fn harmonic_diff(a: u64, b: u64) -> f64 {
    let (hi, lo, sign) = if a >= b { (a, b, 1.0) } else { (b, a, -1.0) };
    if hi - lo <= HARMONIC_DIRECT_LIMIT {
        sign * (lo + 1..=hi).rev().map(|i| 1.0 / i as f64).sum::<f64>()
    } else {
        sign * (harmonic(hi) - harmonic(lo))
    }
}

pub fn harmonic_exact(n: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 1..=n {
        acc += BigRational::new(BigInt::one(), BigInt::from(i));
    }
    acc
}

/// Digamma at a positive integer, `ψ(n) = H(n - 1) - γ`.
pub fn digamma_int(n: i64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Undefined {
            what: "digamma",
            reason: format!("argument {n} is not a positive integer"),
        });
    }
    Ok(harmonic(n as u64 - 1) - EULER_GAMMA)
}
