//! Sieve constants: occupied residue classes, infinite prime products, and
//! the large-sieve style upper bounds built from them.

use std::collections::HashSet;

use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use super::{ln_factorial, BoundsConfig, Evaluated};
use crate::membership::{build_prime_oracle_with, is_prime_u64, OracleBudget};
use crate::numeral::checked_pow;
use crate::{Error, Result, Scalar};

/// `r_k = rho * k^2 * ln(k + 1)`.
pub fn r_k<T: Scalar>(k: u32, config: &BoundsConfig<T>) -> T {
    let kf = T::from_count(k as u64);
    config.rho * kf * kf * (kf + T::one()).ln()
}

fn check_words(words: &[u64], q: u64, n: u32, m: u32) -> Result<()> {
    if words.len() < 2 {
        return Err(Error::Argument(format!("need at least two words, got {}", words.len())));
    }
    if m == 0 || m >= n {
        return Err(Error::Argument(format!("need 0 < m < n, got n={n}, m={m}")));
    }
    let limit = checked_pow(q, n - m)?;
    if let Some(w) = words.iter().find(|&&w| w >= limit) {
        return Err(Error::Range(format!("word value {w} is not below {q}^{}", n - m)));
    }
    let distinct: HashSet<_> = words.iter().collect();
    if distinct.len() != words.len() {
        return Err(Error::Argument("words must be distinct".into()));
    }
    Ok(())
}

fn omega_unchecked(words: &[u64], q: u64, p: u64) -> u64 {
    if q.is_multiple_of(p) {
        return 0;
    }
    let residues: HashSet<u64> = words.iter().map(|w| w % p).collect();
    residues.len() as u64
}

/// Number of residue classes mod `p` hit by the words; 0 when `p | q`.
pub fn omega_profile(words: &[u64], q: u64, n: u32, m: u32, p: u64) -> Result<u64> {
    check_words(words, q, n, m)?;
    if !is_prime_u64(p) {
        return Err(Error::Argument(format!("{p} is not prime")));
    }
    Ok(omega_unchecked(words, q, p))
}

/// `prod_p (1 - omega(p)/p) (1 - 1/p)^(-k)`, exact for `p <= exact_upto` and
/// with `omega(p) = k` beyond, truncated at `cutoff`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveProduct<T> {
    pub value: T,
    pub exact_upto: u64,
    pub cutoff: u64,
    /// Cutoff the tolerance asked for, before applying `prime_cutoff_cap`.
    pub requested_cutoff: u64,
    /// Bound on the relative size of the omitted tail.
    pub tail_bound: T,
    pub tolerance_met: bool,
}

/// Computes the product. Beyond `exact_upto` every factor is
/// `(1 - k/p)(1 - 1/p)^(-k) < 1`, and its log is at most `k^2/p^2` in size
/// once `p >= 2k`, so the tail past `P` is below `k^2 / (2(P - 1))`.
pub fn sieve_product<T: Scalar>(
    k: u32,
    omega: impl Fn(u64) -> u64,
    exact_upto: u64,
    config: &BoundsConfig<T>,
) -> Result<SieveProduct<T>> {
    let kf = T::from_count(k as u64);
    let needed = (kf * kf / (T::lit(2.0) * config.product_tolerance)).ceil() + T::one();
    let needed = needed.to_u64().unwrap_or(u64::MAX);
    let requested_cutoff = needed.max(exact_upto).max(2 * k as u64).max(2);
    let cutoff = requested_cutoff.min(config.prime_cutoff_cap);
    let sieve = build_prime_oracle_with(
        cutoff + 1,
        OracleBudget {
            max_limit: config.prime_cutoff_cap + 1,
        },
    )?;

    let mut ln_sum = T::zero();
    let mut zero = false;
    for p in sieve.members() {
        let w = if p <= exact_upto { omega(p) } else { k as u64 };
        if w >= p {
            zero = true;
            break;
        }
        let pf = T::from_count(p);
        ln_sum = ln_sum + (-T::from_count(w) / pf).ln_1p() - kf * (-pf.recip()).ln_1p();
    }
    let tail_bound = kf * kf / (T::lit(2.0) * T::from_count(cutoff - 1));
    Ok(SieveProduct {
        value: if zero { T::zero() } else { ln_sum.exp() },
        exact_upto,
        cutoff,
        requested_cutoff,
        tail_bound,
        tolerance_met: cutoff == requested_cutoff && tail_bound <= config.product_tolerance,
    })
}

/// `2^k k! W x / ln^k x * (1 - r_k/ln x)^(-1)` for a sieve product `W`.
/// Out of domain unless `x > e^(r_k)` and `k >= 2`.
pub fn lemma1_rhs<T: Scalar>(k: u32, x: T, product: T, config: &BoundsConfig<T>) -> Evaluated<T> {
    if k < 2 {
        return Evaluated::out_of_domain("k >= 2 required");
    }
    let ln_x = x.ln();
    let rk = r_k(k, config);
    if !(ln_x > rk) {
        return Evaluated::out_of_domain("x > e^(r_k) required");
    }
    let kf = T::from_count(k as u64);
    let ln_coeff = kf * T::LN_2() + ln_factorial::<T>(k);
    let value = (ln_coeff + ln_x - kf * ln_x.ln()).exp() * product / (T::one() - rk / ln_x);
    Evaluated::Value(value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2Report<T> {
    pub k: u32,
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub y: T,
    pub ln_y: T,
    pub r_k: T,
    pub product: SieveProduct<T>,
    /// `None` when `1 - r_k/ln y <= 0`.
    pub value: Option<T>,
    pub vacuous: bool,
    /// `y > e^(2 r_k)`; depends on the `r_k` model.
    pub hypothesis_holds: bool,
    /// Every word is coprime to `q`.
    pub coprime_words: bool,
}

/// `3 * 2^k k! * prod_p (1 - omega(p)/p)(1 - 1/p)^(-k) * y/ln^k y * (1 - r_k/ln y)^(-1)`
/// with `y = q^m` and `omega` from the word tuple.
pub fn lemma2_rhs<T: Scalar>(
    words: &[u64],
    q: u64,
    n: u32,
    m: u32,
    config: &BoundsConfig<T>,
) -> Result<Lemma2Report<T>> {
    check_words(words, q, n, m)?;
    config.validate()?;
    let k = words.len() as u32;
    let kf = T::from_count(k as u64);
    let exact_upto = checked_pow(q, n - m)?;
    let product = sieve_product(k, |p| omega_unchecked(words, q, p), exact_upto, config)?;
    let ln_y = T::from_count(m as u64) * T::from_count(q).ln();
    let rk = r_k(k, config);
    let vacuous = !(T::one() - rk / ln_y > T::zero());
    let value = (!vacuous).then(|| {
        let ln_coeff = T::lit(3.0).ln() + kf * T::LN_2() + ln_factorial::<T>(k);
        (ln_coeff + ln_y - kf * ln_y.ln()).exp() * product.value / (T::one() - rk / ln_y)
    });
    let coprime_words = words.iter().all(|&w| {
        let (mut a, mut b) = (w, q);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a == 1
    });
    Ok(Lemma2Report {
        k,
        q,
        n,
        m,
        y: ln_y.exp(),
        ln_y,
        r_k: rk,
        product,
        value,
        vacuous,
        hypothesis_holds: ln_y > T::lit(2.0) * rk,
        coprime_words,
    })
}

/// `prod_{p <= z} (1 - 1/p)^(-1)` in any field with integer literals.
pub fn mertens_product<T: Num + FromPrimitive + Clone>(z: u64) -> Result<T> {
    if z < 2 {
        return Ok(T::one());
    }
    let sieve = build_prime_oracle_with(
        z + 1,
        OracleBudget {
            max_limit: z.max(crate::membership::DEFAULT_MAX_LIMIT) + 1,
        },
    )?;
    let mut acc = T::one();
    for p in sieve.members() {
        let num = T::from_u64(p).ok_or_else(|| Error::Range(format!("{p} not representable")))?;
        let den = T::from_u64(p - 1).ok_or_else(|| Error::Range(format!("{} not representable", p - 1)))?;
        acc = acc * num / den;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;

    #[test]
    fn omega_examples() {
        assert_eq!(omega_profile(&[1, 3], 2, 12, 6, 2).unwrap(), 0);
        assert_eq!(omega_profile(&[1, 3], 2, 12, 6, 3).unwrap(), 2);
        assert_eq!(omega_profile(&[1, 4], 2, 12, 6, 3).unwrap(), 1);
        assert!(omega_profile(&[1, 1], 2, 12, 6, 3).is_err());
        assert!(omega_profile(&[1, 3], 2, 12, 6, 4).is_err());
        assert!(omega_profile(&[1, 64], 2, 12, 6, 3).is_err());
        assert!(omega_profile(&[1], 2, 12, 6, 3).is_err());
    }

    #[test]
    fn mertens_small_values() {
        let two: f64 = mertens_product(2).unwrap();
        assert_eq!(two, 2.0);
        let ten: Rational = mertens_product(10).unwrap();
        assert_eq!(ten, Rational::new(BigInt::from(35), BigInt::from(8)));
        let ten_f: f64 = mertens_product(10).unwrap();
        assert_eq!(ten_f, 4.375);
        let ten_f32: f32 = mertens_product(10).unwrap();
        assert_eq!(ten_f32, 4.375);
    }

    #[test]
    fn mertens_ratio_near_exp_gamma() {
        let z = 1_000_000u64;
        let v: f64 = mertens_product(z).unwrap();
        let ratio = v / (z as f64).ln();
        assert!((ratio / 1.781 - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn lemma2_is_finite_and_self_consistent() {
        // with rho = 1, r_2 = 4 ln 3 exceeds ln 2^6 and the bound is vacuous
        let vacuous = lemma2_rhs(&[1, 3], 2, 12, 6, &BoundsConfig::<f64>::default()).unwrap();
        assert!(vacuous.vacuous && vacuous.value.is_none());

        let cfg = BoundsConfig::<f64> {
            rho: 0.5,
            ..Default::default()
        };
        let coarse = lemma2_rhs(&[1, 3], 2, 12, 6, &cfg).unwrap();
        let v = coarse.value.unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(coarse.product.tolerance_met);
        let fine_cfg = BoundsConfig {
            product_tolerance: cfg.product_tolerance / 10.0,
            ..cfg
        };
        let fine = lemma2_rhs(&[1, 3], 2, 12, 6, &fine_cfg).unwrap();
        let rel = (fine.value.unwrap() - v).abs() / v;
        assert!(rel < cfg.product_tolerance, "relative change {rel}");
        assert!(fine.value.unwrap() <= v);
    }

    #[test]
    fn tail_factors_decrease_monotonically() {
        // q = 2, so omega(2) = 0; past 2 every prime has omega = k = 2
        let omega = |p: u64| if p == 2 { 0 } else { 2 };
        let mut last = f64::INFINITY;
        for tol in [1e-6, 5e-7, 2e-7, 1e-7] {
            let cfg = BoundsConfig::<f64> {
                product_tolerance: tol,
                ..Default::default()
            };
            let p = sieve_product(2, omega, 2, &cfg).unwrap();
            assert!(p.value < last);
            assert!(p.tail_bound <= tol);
            last = p.value;
        }
        let cfg = BoundsConfig::<f64>::default();
        assert_eq!(sieve_product(2, |_| 2, 2, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn twin_prime_constant() {
        // omega(2) = 1, omega(p) = 2 otherwise: W = 2 prod_{p>2} p(p-2)/(p-1)^2 = 2 C2
        let cfg = BoundsConfig::<f64> {
            product_tolerance: 1e-7,
            ..Default::default()
        };
        let w = sieve_product(2, |p| if p == 2 { 1 } else { 2 }, 2, &cfg).unwrap();
        let c2 = 0.660_161_815_846_869_6;
        assert!((w.value / 2.0 - c2).abs() / c2 < 1e-6, "{}", w.value);
    }

    #[test]
    fn capped_cutoff_is_reported() {
        let cfg = BoundsConfig::<f64> {
            prime_cutoff_cap: 1000,
            ..Default::default()
        };
        let p = sieve_product(3, |_| 3, 10, &cfg).unwrap();
        assert_eq!(p.cutoff, 1000);
        assert!(!p.tolerance_met);
    }

    #[test]
    fn vacuous_when_rk_exceeds_log_y() {
        // k = 3: r_3 = 9 ln 4 = 12.48 > ln 2^6
        let cfg = BoundsConfig::<f64>::default();
        let r = lemma2_rhs(&[1, 3, 5], 2, 12, 6, &cfg).unwrap();
        assert!(r.vacuous);
        assert!(r.value.is_none());
        assert!(!r.hypothesis_holds);
    }

    #[test]
    fn lemma1_domain() {
        let cfg = BoundsConfig::<f64>::default();
        assert!(lemma1_rhs(2, 10.0, 1.0, &cfg).value().is_none());
        assert!(lemma1_rhs(1, 1e10, 1.0, &cfg).value().is_none());
        let v = lemma1_rhs(2, 1e10, 1.0, &cfg).value().unwrap();
        let ln_x = 1e10f64.ln();
        let expected = 8.0 * 1e10 / ln_x.powi(2) / (1.0 - 4.0 * 3f64.ln() / ln_x);
        assert!((v / expected - 1.0).abs() < 1e-12);
    }
}
