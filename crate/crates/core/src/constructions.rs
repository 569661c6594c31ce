//! Explicit automata for the squares and the primes, each checked against
//! its oracle before being returned, and the subset-count estimate.

use serde::Serialize;

use crate::automata::{verify, LayeredDfa};
use crate::membership::{build_prime_oracle, build_square_oracle, is_prime_u64, MembershipOracle};
use crate::numeral::checked_pow;
use crate::residuals::{census, CensusParams, CensusSummary, ResidualMode};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructionReport {
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub census: Option<CensusSummary>,
    pub construction: &'static str,
    pub parameters: ConstructionParameters,
    pub state_count: u64,
    pub verified: bool,
    pub words_checked: u64,
    /// Distinct residual sets used, when the construction shares acceptors.
    pub acceptors: Option<u64>,
    /// Reference size the state count is compared against.
    pub bound: f64,
    pub bound_log2: f64,
    pub ratio_to_bound: f64,
    /// Whether the state count respects a guaranteed upper bound; `None` when
    /// the reference value is only a growth rate.
    pub within_bound: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionParameters {
    pub q: u64,
    pub n: u32,
    pub m: u32,
}

fn verified(
    dfa: LayeredDfa,
    oracle: &MembershipOracle,
    n: u32,
    what: &str,
) -> Result<(LayeredDfa, u64)> {
    let report = verify(&dfa, oracle, n)?;
    if !report.pass {
        let m = report.mismatch.expect("failed verification carries a witness");
        return Err(Error::ContractViolation(format!(
            "{what} automaton misclassifies word {} (value {}): expected {}, got {}",
            m.word, m.value, m.expected, m.accepted
        )));
    }
    Ok((dfa, report.words_checked))
}

fn offset(q: u64, len: u32) -> u64 {
    (q.pow(len) - 1) / (q - 1)
}

/// Automaton for the squares on words of length `<= n`, `q` an odd prime and
/// `n = 2m` even.
///
/// Words whose first digit is nonzero run through a trie of depth `m + 1`;
/// each depth-`(m + 1)` word `w` admits at most one continuation `a`, and is
/// sent to the state of a second tree that reads exactly the digits of `a`.
/// Words starting `00` return to the start state, `0d` with `d != 0` is dead.
pub fn build_squares_automaton(q: u64, n: u32) -> Result<(LayeredDfa, ConstructionReport)> {
    if q == 2 || !is_prime_u64(q) {
        return Err(Error::Argument(format!("the squares construction needs an odd prime base, got {q}")));
    }
    if n == 0 || n % 2 == 1 {
        return Err(Error::Argument(format!("the squares construction needs a positive even length, got {n}")));
    }
    let m = n / 2;
    let limit = checked_pow(q, n)?;
    let oracle = build_square_oracle(limit)?;

    const START: u32 = 0;
    const ZERO: u32 = 1;
    const DEAD: u32 = 2;
    let tree_base = 3u64;
    let second_base = tree_base + offset(q, m + 1);
    let second_size = q.pow(m - 1);
    let states = (second_base + second_size) as usize;
    let qs = q as usize;
    if states > u32::MAX as usize {
        return Err(Error::Resource(format!("{states} states do not fit the state index")));
    }

    let shift = q.pow(m + 1);
    // continuation of each length-(m+1) word, or None when nothing extends it
    let mut link = vec![None; shift as usize];
    for w in (0..shift).filter(|w| w % q != 0) {
        let mut found = None;
        for a in 0..second_size {
            if oracle.answer(w + a * shift) {
                if found.is_some() {
                    return Err(Error::ContractViolation(format!(
                        "word of value {w} has more than one continuation"
                    )));
                }
                found = Some(a);
            }
        }
        link[w as usize] = found;
    }
    // live[L][v]: some square has low-order digits v of length L
    let mut live: Vec<Vec<bool>> = vec![Vec::new(); m as usize + 2];
    live[m as usize + 1] = link.iter().map(Option::is_some).collect();
    for len in (1..=m).rev() {
        let width = q.pow(len);
        live[len as usize] = (0..width)
            .map(|v| {
                v % q != 0
                    && (oracle.answer(v) || (0..q).any(|d| live[len as usize + 1][(v + d * width) as usize]))
            })
            .collect();
    }

    let mut accepting = vec![false; states];
    let mut transitions = vec![DEAD; states * qs];
    let node = |len: u32, v: u64| -> u32 {
        if len == m + 1 {
            match link[v as usize] {
                Some(a) => (second_base + a) as u32,
                None => DEAD,
            }
        } else if live[len as usize][v as usize] {
            (tree_base + offset(q, len) + v) as u32
        } else {
            DEAD
        }
    };

    accepting[START as usize] = true;
    accepting[ZERO as usize] = true;
    transitions[START as usize * qs] = ZERO;
    for d in 1..q {
        transitions[START as usize * qs + d as usize] = node(1, d);
    }
    transitions[ZERO as usize * qs] = START;
    for len in 1..=m {
        let width = q.pow(len);
        for v in (0..width).filter(|v| v % q != 0) {
            let id = (tree_base + offset(q, len) + v) as usize;
            accepting[id] = oracle.answer(v);
            for d in 0..q {
                transitions[id * qs + d as usize] = node(len + 1, v + d * width);
            }
        }
    }
    for a in 0..second_size {
        let id = (second_base + a) as usize;
        if a == 0 {
            accepting[id] = true;
            transitions[id * qs] = id as u32;
        } else {
            transitions[id * qs + (a % q) as usize] = (second_base + a / q) as u32;
        }
    }

    let dfa = LayeredDfa::new(q as u32, n, START, accepting, transitions)?;
    let (dfa, words_checked) = verified(dfa, &oracle, n, "squares")?;
    let bound_log2 = m as f64 * (q as f64).log2();
    let state_count = dfa.state_count() as u64;
    let report = ConstructionReport {
        census: None,
        construction: "squares",
        parameters: ConstructionParameters { q, n, m },
        state_count,
        verified: true,
        words_checked,
        acceptors: None,
        bound: 2f64.powf(bound_log2),
        bound_log2,
        ratio_to_bound: state_count as f64 / 2f64.powf(bound_log2),
        within_bound: None,
    };
    Ok((dfa, report))
}

/// Automaton for the primes on words of length `<= n`: a trie over the first
/// `n - m` digits whose leaves enter one shared acceptor per distinct
/// residual set; an acceptor reads the remaining `m` digits.
pub fn build_primes_automaton(q: u64, n: u32, m: u32) -> Result<(LayeredDfa, ConstructionReport)> {
    let oracle = build_prime_oracle(checked_pow(q, n)?)?;
    build_primes_automaton_with(&oracle, q, n, m)
}

/// [`build_primes_automaton`] over an existing prime oracle.
pub fn build_primes_automaton_with(
    oracle: &MembershipOracle,
    q: u64,
    n: u32,
    m: u32,
) -> Result<(LayeredDfa, ConstructionReport)> {
    let census = census(CensusParams::new(q, n, m).mode(ResidualMode::Full), oracle)?;
    let qs = q as usize;
    let low = n - m;
    let acceptors = census.classes.len() as u64;
    let trie_states = offset(q, low);
    let acceptor_states = offset(q, m);
    let acc_sink = trie_states + acceptors * acceptor_states;
    let rej_sink = acc_sink + 1;
    let states = rej_sink + 1;
    if states > u32::MAX as u64 {
        return Err(Error::Resource(format!("{states} states do not fit the state index")));
    }
    let states = states as usize;
    let mut accepting = vec![false; states];
    let mut transitions = vec![0u32; states * qs];

    let class_of: Vec<u32> = census.word_classes.iter().map(|&(_, c)| c).collect();
    let root = |class: u32| (trie_states + class as u64 * acceptor_states) as u32;
    for len in 0..low {
        let width = q.pow(len);
        for v in 0..width {
            let id = (offset(q, len) + v) as usize;
            accepting[id] = oracle.answer(v);
            for d in 0..q {
                let child = v + d * width;
                transitions[id * qs + d as usize] = if len + 1 < low {
                    (offset(q, len + 1) + child) as u32
                } else {
                    root(class_of[child as usize])
                };
            }
        }
    }
    for (c, class) in census.classes.iter().enumerate() {
        let base = root(c as u32) as u64;
        for depth in 0..m {
            let width = q.pow(depth);
            for a in 0..width {
                let id = (base + offset(q, depth) + a) as usize;
                accepting[id] = class.set.contains(a);
                for d in 0..q {
                    let next = a + d * width;
                    transitions[id * qs + d as usize] = if depth + 1 < m {
                        (base + offset(q, depth + 1) + next) as u32
                    } else if class.set.contains(next) {
                        acc_sink as u32
                    } else {
                        rej_sink as u32
                    };
                }
            }
        }
    }
    accepting[acc_sink as usize] = true;
    for sink in [acc_sink, rej_sink] {
        for d in 0..qs {
            transitions[sink as usize * qs + d] = sink as u32;
        }
    }

    let dfa = LayeredDfa::new(q as u32, n, 0, accepting, transitions)?;
    let (dfa, words_checked) = verified(dfa, oracle, n, "primes")?;
    let bound = offset(q, low + 1) as u128 + q.pow(m) as u128 * acceptors as u128;
    let state_count = dfa.state_count() as u64;
    let report = ConstructionReport {
        census: Some(census.summary()),
        construction: "primes",
        parameters: ConstructionParameters { q, n, m },
        state_count,
        verified: true,
        words_checked,
        acceptors: Some(acceptors),
        bound: bound as f64,
        bound_log2: (bound as f64).log2(),
        ratio_to_bound: state_count as f64 / bound as f64,
        within_bound: Some(state_count as u128 <= bound),
    };
    Ok((dfa, report))
}

/// The product `Q` of the primes below `y` not dividing `q`, with `y` maximal
/// subject to `Q < q^m`, and the resulting count of candidate residual sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubsetCountReport {
    pub q: u64,
    pub m: u32,
    pub y: u64,
    #[serde(rename = "Q")]
    pub big_q: u128,
    pub primes: Vec<u64>,
    pub phi_q: u128,
    /// `(floor(q^m / Q) + 1) * phi(Q)`, the base-2 logarithm of the bound.
    pub bound_log2: u128,
    /// `Q > q^(m/2)`; expected to fail for very small `m`.
    pub q_above_sqrt: bool,
}

pub fn subset_count_bound(q: u64, m: u32) -> Result<SubsetCountReport> {
    if q < 2 || m < 1 {
        return Err(Error::Argument(format!("need q >= 2 and m >= 1, got q={q}, m={m}")));
    }
    let power = (q as u128)
        .checked_pow(m)
        .ok_or_else(|| Error::Range(format!("{q}^{m} does not fit in 128 bits")))?;
    let mut big_q: u128 = 1;
    let mut phi: u128 = 1;
    let mut primes = Vec::new();
    let mut p = 2u64;
    let y = loop {
        if is_prime_u64(p) && !q.is_multiple_of(p) {
            match big_q.checked_mul(p as u128) {
                Some(next) if next < power => {
                    big_q = next;
                    phi *= (p - 1) as u128;
                    primes.push(p);
                }
                _ => break p,
            }
        }
        p += 1;
    };
    let bound_log2 = (power / big_q + 1)
        .checked_mul(phi)
        .ok_or_else(|| Error::Range("bound exponent overflows 128 bits".into()))?;
    Ok(SubsetCountReport {
        q,
        m,
        y,
        big_q,
        primes,
        phi_q: phi,
        bound_log2,
        q_above_sqrt: big_q.checked_mul(big_q).is_none_or(|sq| sq > power),
    })
}
