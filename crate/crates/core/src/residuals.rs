//! Residual sets `A_w` and their census.
//!
//! For a word `w` of length `n - m`, the residual set is
//! `A_w = { a < q^m : a*q^(n-m) + value(w) is in the set }`. Two words with
//! different residual sets must lead any correct automaton into different
//! states, so the number of distinct residual sets lower-bounds automaton size.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::membership::{euler_phi, MembershipOracle, SetKind};
use crate::numeral::{check_base, checked_pow, DigitWord};
use crate::{Error, Result};

/// Which continuations `a` are admitted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualMode {
    /// `1 <= a < q^m`.
    #[default]
    Paper,
    /// `0 <= a < q^m`; what an automaton must actually distinguish.
    Full,
}

impl fmt::Display for ResidualMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualMode::Paper => "paper",
            ResidualMode::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordFilter {
    #[default]
    All,
    /// Only words with `gcd(value(w), q) = 1`.
    Coprime,
}

impl fmt::Display for WordFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordFilter::All => "all",
            WordFilter::Coprime => "coprime",
        })
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl WordFilter {
    pub fn admits(self, word_value: u64, q: u64) -> bool {
        match self {
            WordFilter::All => true,
            WordFilter::Coprime => gcd(word_value, q) == 1,
        }
    }
}

/// `A_w` as a bitset over `a in [0, q^m)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidualSet {
    m: u32,
    mode: ResidualMode,
    bits: Bitset,
}

impl fmt::Debug for ResidualSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A[m={}, {}]{:?}", self.m, self.mode, self.bits)
    }
}

impl ResidualSet {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn mode(&self) -> ResidualMode {
        self.mode
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, a: u64) -> bool {
        (a as usize) < self.bits.len() && self.bits.get(a as usize)
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|a| a as u64)
    }

    pub fn bits(&self) -> &Bitset {
        &self.bits
    }

    /// The same set with `a = 0` dropped.
    pub fn to_paper_mode(&self) -> ResidualSet {
        let mut bits = self.bits.clone();
        if !bits.is_empty() {
            bits.remove(0);
        }
        ResidualSet {
            m: self.m,
            mode: ResidualMode::Paper,
            bits,
        }
    }
}

fn residual_bits(
    word_value: u64,
    shift: u64,
    span: u64,
    oracle: &MembershipOracle,
    mode: ResidualMode,
) -> Bitset {
    let mut bits = Bitset::new(span as usize);
    let start = match mode {
        ResidualMode::Paper => 1,
        ResidualMode::Full => 0,
    };
    for a in start..span {
        if oracle.answer(a * shift + word_value) {
            bits.insert(a as usize);
        }
    }
    bits
}

/// `A_w` for a word `w` of length `n - m`.
pub fn residual_of(
    w: &DigitWord,
    m: u32,
    oracle: &MembershipOracle,
    mode: ResidualMode,
) -> Result<ResidualSet> {
    let q = w.base();
    let low_len = w.len() as u32;
    let n = low_len
        .checked_add(m)
        .ok_or_else(|| Error::Argument("word length overflow".into()))?;
    if m == 0 {
        return Err(Error::Argument("residual needs m >= 1".into()));
    }
    oracle.require_limit(checked_pow(q, n)?)?;
    let shift = checked_pow(q, low_len)?;
    let span = checked_pow(q, m)?;
    Ok(ResidualSet {
        m,
        mode,
        bits: residual_bits(w.value(), shift, span, oracle, mode),
    })
}

/// `K` default: `ceil(ln ln q^n)`, clamped to at least 2.
pub fn default_threshold(q: u64, n: u32) -> u32 {
    let ln_x = n as f64 * (q as f64).ln();
    let k = if ln_x > 1.0 { ln_x.ln().ceil() } else { 2.0 };
    (k as u32).max(2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusParams {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub mode: ResidualMode,
    pub filter: WordFilter,
    /// Multiplicity threshold `K`; `None` uses [`default_threshold`].
    pub threshold: Option<u32>,
}

impl CensusParams {
    pub fn new(q: u64, n: u32, m: u32) -> Self {
        CensusParams {
            q,
            n,
            m,
            mode: ResidualMode::Paper,
            filter: WordFilter::All,
            threshold: None,
        }
    }

    pub fn mode(mut self, mode: ResidualMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn filter(mut self, filter: WordFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn threshold(mut self, k: u32) -> Self {
        self.threshold = Some(k);
        self
    }
}

#[derive(Clone, Debug)]
pub struct ResidualClass {
    pub set: ResidualSet,
    /// Number of words sharing this residual.
    pub multiplicity: u64,
    /// Smallest word value in the class.
    pub first_word: u64,
}

#[derive(Clone, Debug)]
pub struct ResidualCensus {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub mode: ResidualMode,
    pub filter: WordFilter,
    /// Multiplicity threshold `K`.
    pub threshold: u32,
    /// Classes in order of first appearance by word value; the index is the class id.
    pub classes: Vec<ResidualClass>,
    /// `(word value, class id)` for every admitted word, in increasing word order.
    pub word_classes: Vec<(u64, u32)>,
    /// `n_k[k-1]` is the number of classes of multiplicity exactly `k`, for `1 <= k < K`.
    pub n_k: Vec<u64>,
    /// Number of classes of multiplicity `>= K`.
    pub r_k: u64,
    pub sum_sizes: u64,
    pub max_size: u64,
}

/// Summary record; field names are the stable JSON schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub q: u64,
    pub n: u32,
    pub m: u32,
    pub mode: ResidualMode,
    pub filter: WordFilter,
    #[serde(rename = "K")]
    pub threshold: u32,
    #[serde(rename = "N")]
    pub distinct: u64,
    #[serde(rename = "N_k")]
    pub n_k: Vec<u64>,
    #[serde(rename = "R_K")]
    pub r_k: u64,
    pub sum_sizes: u64,
    pub max_size: u64,
}

pub fn census(params: CensusParams, oracle: &MembershipOracle) -> Result<ResidualCensus> {
    let CensusParams { q, n, m, mode, filter, .. } = params;
    check_base(q)?;
    if m == 0 || m >= n {
        return Err(Error::Argument(format!("census requires 0 < m < n, got n={n}, m={m}")));
    }
    let threshold = params.threshold.unwrap_or_else(|| default_threshold(q, n));
    if threshold < 2 {
        return Err(Error::Argument(format!("threshold K must be at least 2, got {threshold}")));
    }
    oracle.require_limit(checked_pow(q, n)?)?;
    let words = checked_pow(q, n - m)?;
    let span = checked_pow(q, m)?;

    let admitted: Vec<u64> = (0..words).filter(|&w| filter.admits(w, q)).collect();
    let residuals: Vec<Bitset> = admitted
        .par_iter()
        .map(|&w| residual_bits(w, words, span, oracle, mode))
        .collect();

    let mut index: HashMap<Bitset, u32> = HashMap::new();
    let mut classes: Vec<ResidualClass> = Vec::new();
    let mut word_classes = Vec::with_capacity(admitted.len());
    let mut sum_sizes = 0u64;
    let mut max_size = 0u64;
    for (&w, bits) in admitted.iter().zip(residuals) {
        let size = bits.count_ones() as u64;
        sum_sizes += size;
        max_size = max_size.max(size);
        let id = match index.get(&bits) {
            Some(&id) => id,
            None => {
                let id = classes.len() as u32;
                index.insert(bits.clone(), id);
                classes.push(ResidualClass {
                    set: ResidualSet { m, mode, bits },
                    multiplicity: 0,
                    first_word: w,
                });
                id
            }
        };
        classes[id as usize].multiplicity += 1;
        word_classes.push((w, id));
    }

    let mut n_k = vec![0u64; threshold as usize - 1];
    let mut r_k = 0;
    for class in &classes {
        match n_k.get_mut(class.multiplicity as usize - 1) {
            Some(slot) => *slot += 1,
            None => r_k += 1,
        }
    }

    Ok(ResidualCensus {
        q,
        n,
        m,
        mode,
        filter,
        threshold,
        classes,
        word_classes,
        n_k,
        r_k,
        sum_sizes,
        max_size,
    })
}

impl ResidualCensus {
    /// Number of distinct residual sets, `N`.
    pub fn distinct(&self) -> u64 {
        self.classes.len() as u64
    }

    pub fn word_count(&self) -> u64 {
        self.word_classes.len() as u64
    }

    pub fn summary(&self) -> CensusSummary {
        CensusSummary {
            q: self.q,
            n: self.n,
            m: self.m,
            mode: self.mode,
            filter: self.filter,
            threshold: self.threshold,
            distinct: self.distinct(),
            n_k: self.n_k.clone(),
            r_k: self.r_k,
            sum_sizes: self.sum_sizes,
            max_size: self.max_size,
        }
    }

    /// Residual set of the class containing word value `w`, if `w` was admitted.
    pub fn residual_for(&self, w: u64) -> Option<&ResidualSet> {
        self.word_classes
            .binary_search_by_key(&w, |&(v, _)| v)
            .ok()
            .map(|i| &self.classes[self.word_classes[i].1 as usize].set)
    }

    /// Columns `w_value,w_digits,class_id,residual_cardinality`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "w_value,w_digits,class_id,residual_cardinality")?;
        let len = self.n - self.m;
        for &(w, id) in &self.word_classes {
            let digits = DigitWord::from_value(w, self.q, len)
                .expect("admitted words fit their length")
                .to_string();
            let digits = if digits.contains(',') {
                format!("\"{digits}\"")
            } else {
                digits
            };
            let card = self.classes[id as usize].set.cardinality();
            writeln!(out, "{w},{digits},{id},{card}")?;
        }
        Ok(())
    }

    /// `N * max_size >= sum_sizes`. Not a theorem for arbitrary sets (one
    /// residual shared by many words breaks it); for primes, equal nonempty
    /// residuals are rare enough that it holds.
    pub fn pigeonhole_holds(&self) -> bool {
        self.distinct() as u128 * self.max_size as u128 >= self.sum_sizes as u128
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub sum_sizes: u64,
    /// Number of primes `p` with `q^(n-m) <= p < q^n`.
    pub primes_in_range: u64,
    pub range_start: u64,
    pub range_end: u64,
    pub pass: bool,
}

/// Every prime in `[q^(n-m), q^n)` is `a*q^(n-m) + w` for exactly one word
/// `w` and one `a >= 1`, so the residual sizes sum to the prime count there.
pub fn check_partition_identity(
    census: &ResidualCensus,
    oracle: &MembershipOracle,
) -> Result<PartitionReport> {
    if oracle.kind() != &SetKind::Primes {
        return Err(Error::Argument("partition identity needs the primes oracle".into()));
    }
    if census.filter != WordFilter::All || census.mode != ResidualMode::Paper {
        return Err(Error::Argument(
            "partition identity needs a paper-mode census over all words".into(),
        ));
    }
    let range_start = checked_pow(census.q, census.n - census.m)?;
    let range_end = checked_pow(census.q, census.n)?;
    let primes_in_range = oracle.count_range(range_start, range_end);
    Ok(PartitionReport {
        sum_sizes: census.sum_sizes,
        primes_in_range,
        range_start,
        range_end,
        pass: census.sum_sizes == primes_in_range,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrunTitchmarshReport {
    pub max_size: u64,
    /// `2 (q/phi(q)) q^m / ln(q^m)`.
    pub bound: f64,
    /// `bound - max_size`.
    pub margin: f64,
    /// Number of words whose residual reaches the bound.
    pub violations: u64,
    pub pass: bool,
}

/// Checks `|A_w| < 2 (q/phi(q)) y / ln y` with `y = q^m` for every coprime word.
pub fn check_brun_titchmarsh(census: &ResidualCensus) -> Result<BrunTitchmarshReport> {
    if census.filter != WordFilter::Coprime || census.mode != ResidualMode::Paper {
        return Err(Error::Argument(
            "Brun-Titchmarsh check needs a paper-mode census over coprime words".into(),
        ));
    }
    let q = census.q as f64;
    let y = q.powi(census.m as i32);
    let bound = 2.0 * (q / euler_phi(census.q) as f64) * y / y.ln();
    let violations = census
        .classes
        .iter()
        .filter(|c| c.set.cardinality() as f64 >= bound)
        .map(|c| c.multiplicity)
        .sum();
    Ok(BrunTitchmarshReport {
        max_size: census.max_size,
        bound,
        margin: bound - census.max_size as f64,
        violations,
        pass: violations == 0,
    })
}
