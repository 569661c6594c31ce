//! Closed-form evaluators: `C_k`, `E(k)`, parameter choice, the two lower
//! bounds for `N`, and the census-side inequality.

use serde::Serialize;

use super::{r_k, BoundsConfig, Evaluated, LOG_BASE};
use crate::membership::euler_phi;
use crate::residuals::{ResidualCensus, ResidualMode, WordFilter};
use crate::{Error, Result, Scalar};

/// `E(k) = D1 (C0 D2 k ln(k + 1))^k`.
pub fn e_constant<T: Scalar>(k: u32, config: &BoundsConfig<T>) -> T {
    let kf = T::from_count(k as u64);
    config.d1 * (config.c0 * config.d2 * kf * (kf + T::one()).ln()).powi(k as i32)
}

fn totient_ratio<T: Scalar>(q: u64) -> T {
    T::from_count(q) / T::from_count(euler_phi(q))
}

fn ck_formula<T: Scalar>(k: u32, q: u64, ln_ratio: T, config: &BoundsConfig<T>) -> T {
    let kf = T::from_count(k as u64);
    config.d1
        * totient_ratio::<T>(q)
        * (config.d2 * kf * kf.ln()).powi(k as i32)
        * ln_ratio.ln().powi(k as i32 - 1)
}

fn ck_domain<T: Scalar>(k: u32, q: u64, ln_ratio: T) -> Option<&'static str> {
    let e = T::E();
    if k < 2 {
        Some("k >= 2 required")
    } else if !(ln_ratio > T::from_count(k as u64).ln().max(e)) {
        Some("x/y > max(k, e^e) required")
    } else if !(ln_ratio > T::from_count(q)) {
        Some("ln(x/y) > q required")
    } else {
        None
    }
}

/// `D1 (q/phi(q)) (D2 k ln k)^k (ln ln(x/y))^(k-1)`.
pub fn ck_bound<T: Scalar>(k: u32, q: u64, x: T, y: T, config: &BoundsConfig<T>) -> Evaluated<T> {
    if q < 2 {
        return Evaluated::out_of_domain("q >= 2 required");
    }
    let ln_ratio = (x / y).ln();
    match ck_domain(k, q, ln_ratio) {
        Some(reason) => Evaluated::out_of_domain(reason),
        None => Evaluated::Value(ck_formula(k, q, ln_ratio, config)),
    }
}

/// `ln` of [`theorem1_lower`], taking `ln x` so that huge `x` stays representable.
pub fn ln_theorem1_lower<T: Scalar>(ln_x: T, config: &BoundsConfig<T>) -> Evaluated<T> {
    if !(ln_x > T::E()) {
        return Evaluated::out_of_domain("x > e^e required");
    }
    let ll = ln_x.ln();
    Evaluated::Value(ln_x - config.c * ll * ll * ll.ln())
}

/// `x exp(-c (ln ln x)^2 ln ln ln x)`.
pub fn theorem1_lower<T: Scalar>(x: T, config: &BoundsConfig<T>) -> Evaluated<T> {
    if !(x > T::one() && x.ln() > T::E()) {
        return Evaluated::out_of_domain("x > e^e required");
    }
    let ll = x.ln().ln();
    let a = config.c * ll * ll * ll.ln();
    let direct = x * (-a).exp();
    // exp(-a) underflows long before the product does
    Evaluated::Value(if direct.is_normal() { direct } else { (x.ln() - a).exp() })
}

/// The four side conditions on `(x, y, K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Conditions {
    /// `y > e^(2 r_K)`; depends on the `r_k` model.
    pub y_above_exp_2rk: bool,
    /// `y > ln x`.
    pub y_above_ln_x: bool,
    /// `x/y > max(K, e^e)`.
    pub ratio_above_max_k_ee: bool,
    /// `ln(x/y) > q`.
    pub ln_ratio_above_q: bool,
}

impl Conditions {
    pub fn all(&self) -> bool {
        self.y_above_exp_2rk && self.y_above_ln_x && self.ratio_above_max_k_ee && self.ln_ratio_above_q
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParameterReport<T> {
    pub x: T,
    pub q: u64,
    pub ln_x: T,
    pub lnln_x: T,
    pub log_base: &'static str,
    #[serde(rename = "K")]
    pub k: u32,
    /// `E(1), ..., E(K)`.
    pub e_values: Vec<T>,
    #[serde(rename = "E_K")]
    pub e_k: T,
    pub ln_y0: T,
    pub m: u32,
    pub ln_y: T,
    /// `q^m`; infinite when it overflows the scalar.
    pub y: T,
    #[serde(rename = "r_K")]
    pub r_k: T,
    pub conditions: Conditions,
    pub all_hold: bool,
    /// Conditions that depend on the configured `r_k` model.
    pub depends_on_r_k: Vec<&'static str>,
    /// `q y0 > y >= y0`.
    pub y_bracket_holds: bool,
    /// `ln^K y >= 4 E(K) ln x (ln ln x)^(K-1)`.
    pub defining_inequality_holds: bool,
}

/// Chooses `K`, `y0`, `m` and `y = q^m` for a given `x`, and evaluates the
/// side conditions. Failed conditions are reported, not raised.
pub fn select_parameters<T: Scalar>(x: T, q: u64, config: &BoundsConfig<T>) -> Result<ParameterReport<T>> {
    config.validate()?;
    if q < 2 {
        return Err(Error::Argument(format!("base must be at least 2, got {q}")));
    }
    if !(x.is_finite() && x >= T::E().exp()) {
        return Err(Error::Argument(format!("x must be finite and at least e^e, got {x}")));
    }
    let ln_x = x.ln();
    let lnln_x = ln_x.ln();
    let k = lnln_x.ceil().to_u32().unwrap_or(u32::MAX).max(2);
    let kf = T::from_count(k as u64);
    let e_values: Vec<T> = (1..=k).map(|j| e_constant(j, config)).collect();
    let e_k = e_values[k as usize - 1];

    // ln^K y0 = 4 E(K) ln x (ln ln x)^(K-1), solved in logs
    let ln_rhs = T::lit(4.0).ln() + e_k.ln() + lnln_x + (kf - T::one()) * lnln_x.ln();
    let ln_y0 = (ln_rhs / kf).exp();
    let ln_q = T::from_count(q).ln();
    let mut m = (ln_y0 / ln_q).ceil().to_u32().unwrap_or(u32::MAX).max(1);
    while T::from_count(m as u64) * ln_q < ln_y0 {
        m += 1;
    }
    let ln_y = T::from_count(m as u64) * ln_q;
    let rk = r_k(k, config);
    let ln_ratio = ln_x - ln_y;
    let conditions = Conditions {
        y_above_exp_2rk: ln_y > T::lit(2.0) * rk,
        y_above_ln_x: ln_y > lnln_x,
        ratio_above_max_k_ee: ln_ratio > kf.ln().max(T::E()),
        ln_ratio_above_q: ln_ratio > T::from_count(q),
    };
    let slack = T::epsilon() * T::lit(16.0) * ln_rhs.abs().max(T::one());
    Ok(ParameterReport {
        x,
        q,
        ln_x,
        lnln_x,
        log_base: LOG_BASE,
        k,
        e_values,
        e_k,
        ln_y0,
        m,
        ln_y,
        y: ln_y.exp(),
        r_k: rk,
        all_hold: conditions.all(),
        conditions,
        depends_on_r_k: vec!["y > e^(2 r_K)"],
        y_bracket_holds: ln_q + ln_y0 > ln_y && ln_y >= ln_y0,
        defining_inequality_holds: kf * ln_y.ln() >= ln_rhs - slack,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LastEqReport<T> {
    pub parameters: ParameterReport<T>,
    #[serde(rename = "E_0")]
    pub e0: T,
    pub value: T,
    pub ln_value: T,
    /// Set when any side condition fails.
    pub formal_only: bool,
    pub label: &'static str,
    pub at_most_x: bool,
}

/// `(q/(E0 K)) (ln ln x/ln x)^(1-1/K) x exp(-(E(K) ln x/ln ln x)^(1/K) ln ln x)`
/// with `E0 = 4 D1` and `K` from [`select_parameters`].
pub fn lasteq_lower<T: Scalar>(x: T, q: u64, config: &BoundsConfig<T>) -> Result<LastEqReport<T>> {
    let parameters = select_parameters(x, q, config)?;
    let (ln_x, ll) = (parameters.ln_x, parameters.lnln_x);
    let kf = T::from_count(parameters.k as u64);
    let e0 = T::lit(4.0) * config.d1;
    let ln_value = T::from_count(q).ln() - (e0 * kf).ln() + (T::one() - kf.recip()) * (ll.ln() - ll) + ln_x
        - (parameters.e_k * ln_x / ll).powf(kf.recip()) * ll;
    let formal_only = !parameters.all_hold;
    Ok(LastEqReport {
        e0,
        value: ln_value.exp(),
        ln_value,
        formal_only,
        label: if formal_only {
            "formal evaluation only"
        } else {
            "conditions hold"
        },
        at_most_x: ln_value <= ln_x,
        parameters,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Eq1Report<T> {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    #[serde(rename = "K")]
    pub k: u32,
    pub x: T,
    pub y: T,
    /// `x / (2 ln x)`.
    pub left: T,
    /// `C_1, ..., C_K`.
    pub c_values: Vec<T>,
    /// `C_k N_k y / ln^k y` for `1 <= k < K`.
    pub terms: Vec<T>,
    pub census_part: T,
    /// `C_K x / ln^K y`.
    pub tail_part: T,
    pub right: T,
    /// Census part plus `C_K R_K y / ln^K y`.
    pub right_with_r_k: T,
    pub holds: bool,
    /// Set when some `C_k` was evaluated outside its stated domain.
    pub formal_only: bool,
    pub domain: Option<String>,
}

/// Both sides of the census inequality for a prime census.
pub fn eq1_check<T: Scalar>(census: &ResidualCensus, config: &BoundsConfig<T>) -> Result<Eq1Report<T>> {
    if census.filter != WordFilter::Coprime || census.mode != ResidualMode::Paper {
        return Err(Error::Argument(
            "the census inequality needs a coprime-filtered paper-mode census".into(),
        ));
    }
    eq1_from_counts(census.q, census.n, census.m, &census.n_k, census.r_k, census.threshold, config)
}

/// [`eq1_check`] on raw counts; `n_k[k-1]` is `N_k`.
pub fn eq1_from_counts<T: Scalar>(
    q: u64,
    n: u32,
    m: u32,
    n_k: &[u64],
    r_count: u64,
    threshold: u32,
    config: &BoundsConfig<T>,
) -> Result<Eq1Report<T>> {
    config.validate()?;
    if q < 2 || m == 0 || m >= n || threshold < 2 {
        return Err(Error::Argument(format!("need q >= 2, 0 < m < n, K >= 2; got q={q} n={n} m={m} K={threshold}")));
    }
    let ln_q = T::from_count(q).ln();
    let ln_x = T::from_count(n as u64) * ln_q;
    let ln_y = T::from_count(m as u64) * ln_q;
    let (x, y) = (ln_x.exp(), ln_y.exp());
    let ln_ratio = ln_x - ln_y;

    let mut domain = None;
    let mut c_values = vec![T::lit(2.0) * totient_ratio::<T>(q)];
    for k in 2..=threshold {
        if let (Some(reason), None) = (ck_domain(k, q, ln_ratio), &domain) {
            domain = Some(format!("C_{k}: {reason}"));
        }
        c_values.push(ck_formula(k, q, ln_ratio, config));
    }
    let y_over = |k: u32| (ln_y - T::from_count(k as u64) * ln_y.ln()).exp();
    let terms: Vec<T> = (1..threshold)
        .map(|k| {
            let count = n_k.get(k as usize - 1).copied().unwrap_or(0);
            c_values[k as usize - 1] * T::from_count(count) * y_over(k)
        })
        .collect();
    let census_part = terms.iter().fold(T::zero(), |a, &b| a + b);
    let c_big = c_values[threshold as usize - 1];
    let tail_part = c_big * (ln_x - T::from_count(threshold as u64) * ln_y.ln()).exp();
    let right = census_part + tail_part;
    let left = x / (T::lit(2.0) * ln_x);
    Ok(Eq1Report {
        q,
        n,
        m,
        k: threshold,
        x,
        y,
        left,
        right_with_r_k: census_part + c_big * T::from_count(r_count) * y_over(threshold),
        c_values,
        terms,
        census_part,
        tail_part,
        right,
        holds: left <= right,
        formal_only: domain.is_some(),
        domain,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ck_matches_hand_formula_and_is_linear_in_d1() {
        let cfg = BoundsConfig::<f64>::default();
        let v = ck_bound(2, 2, 2f64.powi(64), 2f64.powi(16), &cfg).value().unwrap();
        let hand = 2.0 * (2.0 * 2f64.ln()).powi(2) * (48.0 * 2f64.ln()).ln();
        assert!(rel(v, hand) < 1e-14);
        let doubled = BoundsConfig { d1: 2.0, ..cfg };
        let w = ck_bound(2, 2, 2f64.powi(64), 2f64.powi(16), &doubled).value().unwrap();
        assert!(rel(w, 2.0 * v) < 1e-15);
    }

    #[test]
    fn ck_domain_guards() {
        let cfg = BoundsConfig::<f64>::default();
        let e2 = std::f64::consts::E.powi(2);
        assert!(ck_bound(2, 2, e2, 1.0, &cfg).value().is_none());
        // x/y > e^e but ln(x/y) <= q
        assert!(ck_bound(2, 30, 1e10, 1.0, &cfg).value().is_none());
        assert!(ck_bound(1, 2, 1e10, 1.0, &cfg).value().is_none());
    }

    #[test]
    fn theorem1_limits_and_monotonicity() {
        let tiny = BoundsConfig {
            c: 1e-300,
            ..BoundsConfig::<f64>::default()
        };
        assert_eq!(theorem1_lower(1e6, &tiny).value().unwrap(), 1e6);
        let mut last = f64::INFINITY;
        for c in [0.1, 0.5, 1.0, 2.0] {
            let cfg = BoundsConfig {
                c,
                ..BoundsConfig::<f64>::default()
            };
            let v = theorem1_lower(1e6, &cfg).value().unwrap();
            assert!(v < last && v < 1e6);
            last = v;
        }
        assert!(theorem1_lower(15.0, &BoundsConfig::default()).value().is_none());
    }

    #[test]
    fn select_parameters_for_two_to_the_64() {
        let r = select_parameters(2f64.powi(64), 2, &BoundsConfig::default()).unwrap();
        assert_eq!(r.k, 4);
        assert_eq!(r.log_base, "natural");
        assert!(r.y_bracket_holds && r.defining_inequality_holds);
        // y is forced above x itself, so the ratio conditions fail
        assert!(r.ln_y > r.ln_x);
        assert!(!r.conditions.ratio_above_max_k_ee && !r.conditions.ln_ratio_above_q);
        assert!(!r.all_hold);
        assert_eq!(r.e_values.len(), 4);
        assert!(rel(r.ln_y, r.m as f64 * 2f64.ln()) < 1e-15);
    }

    #[test]
    fn select_parameters_rejects_small_x() {
        assert!(select_parameters(10.0, 2, &BoundsConfig::default()).is_err());
    }

    #[test]
    fn lasteq_flags_and_monotonicity() {
        let cfg = BoundsConfig::<f64>::default();
        let r = lasteq_lower(1e12, 2, &cfg).unwrap();
        assert!(r.formal_only);
        assert_eq!(r.label, "formal evaluation only");
        assert!(r.at_most_x);
        let bigger_c0 = BoundsConfig { c0: 2.0, ..cfg };
        assert!(lasteq_lower(1e12, 2, &bigger_c0).unwrap().value <= r.value);
    }

    #[test]
    fn eq1_collapses_and_scales() {
        let cfg = BoundsConfig::<f64>::default();
        let only_one = eq1_from_counts(2, 16, 8, &[5, 0, 0], 0, 4, &cfg).unwrap();
        let y = 256f64;
        let expected = 4.0 * 5.0 * y / y.ln();
        assert!(rel(only_one.census_part, expected) < 1e-13);
        assert!(rel(only_one.right, expected + only_one.tail_part) < 1e-15);

        let base = eq1_from_counts(2, 16, 8, &[5, 3, 1], 2, 4, &cfg).unwrap();
        let doubled = eq1_from_counts(2, 16, 8, &[10, 6, 2], 2, 4, &cfg).unwrap();
        assert!(rel(doubled.census_part, 2.0 * base.census_part) < 1e-14);
        assert_eq!(doubled.tail_part, base.tail_part);
    }
}
