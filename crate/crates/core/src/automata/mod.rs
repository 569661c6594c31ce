//! Deterministic automata whose correctness is only required on words of
//! length at most a budget `N`.
//!
//! A [`LayeredDfa`] is correct for a set `X` at budget `N` when every word of
//! length `<= N` ends in an accepting state exactly when its value is in `X`.
//! Longer words are unconstrained. Because zero-padded words share a value,
//! every representation of an integer gets the same verdict.
//!
//! State ids are contiguous. Automata produced here keep the relative order
//! of the states they were derived from; for tries and greedy merges that is
//! breadth-first by depth, then by smallest word value.

mod exact;
mod greedy;
mod lower;
mod table;

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::membership::MembershipOracle;
use crate::numeral::{check_base, checked_pow, words_up_to, DigitWord};
use crate::{Error, Result};

pub use exact::{exact_minimal_size, ExactGuard, ExactOutcome, EXACT_MAX_STATES, EXACT_MAX_WORDS};
pub use greedy::greedy_minimize;
pub use lower::{distinguishability_lower_bound, LowerBound, LowerBoundMethod};

/// Default cap on the number of states or prefixes materialized.
pub const DEFAULT_MAX_STATES: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredDfa {
    q: u32,
    budget: u32,
    start: u32,
    accepting: Vec<bool>,
    /// Row-major: `transitions[s * q + d]`.
    transitions: Vec<u32>,
    depth: Vec<u32>,
}

/// Serialized automaton: `{q, N, start, accepting, transitions}` with one
/// transition row per state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaJson {
    pub q: u32,
    #[serde(rename = "N")]
    pub budget: u32,
    pub start: u32,
    pub accepting: Vec<u32>,
    pub transitions: Vec<Vec<u32>>,
}

impl LayeredDfa {
    /// Builds an automaton from a full transition table, dropping states not
    /// reachable from `start`. Surviving states keep their relative order.
    pub fn new(
        q: u32,
        budget: u32,
        start: u32,
        accepting: Vec<bool>,
        transitions: Vec<u32>,
    ) -> Result<Self> {
        check_base(q as u64)?;
        let states = accepting.len();
        if states == 0 || transitions.len() != states * q as usize {
            return Err(Error::Argument(format!(
                "transition table has {} entries, expected {} states x {q} digits",
                transitions.len(),
                states
            )));
        }
        if start as usize >= states {
            return Err(Error::Argument(format!("start state {start} out of range")));
        }
        if let Some(&t) = transitions.iter().find(|&&t| t as usize >= states) {
            return Err(Error::Argument(format!("transition target {t} out of range")));
        }
        Ok(Self::compacted(q, budget, start, accepting, transitions))
    }

    fn compacted(q: u32, budget: u32, start: u32, accepting: Vec<bool>, transitions: Vec<u32>) -> Self {
        let qs = q as usize;
        let states = accepting.len();
        let mut depth = vec![u32::MAX; states];
        depth[start as usize] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            for &t in &transitions[s as usize * qs..(s as usize + 1) * qs] {
                if depth[t as usize] == u32::MAX {
                    depth[t as usize] = depth[s as usize] + 1;
                    queue.push_back(t);
                }
            }
        }
        if depth.iter().all(|&d| d != u32::MAX) {
            return LayeredDfa {
                q,
                budget,
                start,
                accepting,
                transitions,
                depth,
            };
        }
        let mut remap = vec![u32::MAX; states];
        let mut next = 0u32;
        for (s, &d) in depth.iter().enumerate() {
            if d != u32::MAX {
                remap[s] = next;
                next += 1;
            }
        }
        let keep: Vec<usize> = (0..states).filter(|&s| depth[s] != u32::MAX).collect();
        LayeredDfa {
            q,
            budget,
            start: remap[start as usize],
            accepting: keep.iter().map(|&s| accepting[s]).collect(),
            transitions: keep
                .iter()
                .flat_map(|&s| transitions[s * qs..(s + 1) * qs].iter().map(|&t| remap[t as usize]))
                .collect(),
            depth: keep.iter().map(|&s| depth[s]).collect(),
        }
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Length budget `N`.
    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    /// Number of reachable states.
    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    /// Minimal number of digits read to reach `state`.
    pub fn depth(&self, state: u32) -> u32 {
        self.depth[state as usize]
    }

    #[inline]
    pub fn next(&self, state: u32, digit: u32) -> u32 {
        self.transitions[state as usize * self.q as usize + digit as usize]
    }

    pub fn run(&self, digits: &[u32]) -> u32 {
        digits.iter().fold(self.start, |s, &d| self.next(s, d))
    }

    pub fn accepts(&self, word: &DigitWord) -> bool {
        self.is_accepting(self.run(word.digits()))
    }

    pub fn to_json(&self) -> DfaJson {
        let qs = self.q as usize;
        DfaJson {
            q: self.q,
            budget: self.budget,
            start: self.start,
            accepting: (0..self.state_count() as u32).filter(|&s| self.is_accepting(s)).collect(),
            transitions: self.transitions.chunks(qs).map(|row| row.to_vec()).collect(),
        }
    }

    pub fn from_json(json: &DfaJson) -> Result<Self> {
        let states = json.transitions.len();
        let mut accepting = vec![false; states];
        for &s in &json.accepting {
            *accepting
                .get_mut(s as usize)
                .ok_or_else(|| Error::Argument(format!("accepting state {s} out of range")))? = true;
        }
        if json.transitions.iter().any(|row| row.len() != json.q as usize) {
            return Err(Error::Argument("every transition row needs q entries".into()));
        }
        let transitions = json.transitions.iter().flatten().copied().collect();
        Self::new(json.q, json.budget, json.start, accepting, transitions)
    }

    /// Returns a copy with the accept flag of `state` flipped.
    pub fn with_flipped_state(&self, state: u32) -> Self {
        let mut out = self.clone();
        out.accepting[state as usize] ^= true;
        out
    }
}

/// The prefix tree of all words of length `<= N`, accepting exactly the
/// words whose value is in the set. State `(q^L - 1)/(q - 1) + v` is the
/// length-`L` word of value `v`; depth-`N` states loop on themselves.
pub fn build_trie(oracle: &MembershipOracle, q: u64, budget: u32) -> Result<LayeredDfa> {
    build_trie_with(oracle, q, budget, DEFAULT_MAX_STATES)
}

pub fn build_trie_with(
    oracle: &MembershipOracle,
    q: u64,
    budget: u32,
    max_states: u64,
) -> Result<LayeredDfa> {
    let table = table::PrefixTable::from_oracle(oracle, q, budget, max_states)?;
    let qs = q as usize;
    let total = table.total();
    let mut transitions = vec![0u32; total * qs];
    for layer in 0..=budget {
        for v in 0..table.layer_size(layer) {
            let id = table.id(layer, v);
            for d in 0..qs {
                transitions[id * qs + d] = if layer < budget {
                    table.child(layer, v, d as u64) as u32
                } else {
                    id as u32
                };
            }
        }
    }
    LayeredDfa::new(q as u32, budget, 0, table.accept().to_vec(), transitions)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    /// LSB-first digits of the offending word.
    pub word: String,
    pub length: u32,
    pub value: u64,
    pub expected: bool,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub words_checked: u64,
    pub mismatch: Option<Mismatch>,
}

/// Runs every word of length `<= budget` and compares with the oracle. The
/// reported mismatch is the first one in breadth-first order.
pub fn verify(dfa: &LayeredDfa, oracle: &MembershipOracle, budget: u32) -> Result<VerifyReport> {
    let q = dfa.q() as u64;
    oracle.require_limit(checked_pow(q, budget)?)?;
    words_up_to(q, budget)?;
    let mut layer_states = vec![dfa.start()];
    let mut checked = 0u64;
    for layer in 0..=budget {
        let bad = layer_states
            .par_iter()
            .enumerate()
            .position_first(|(v, &s)| dfa.is_accepting(s) != oracle.answer(v as u64));
        checked += layer_states.len() as u64;
        if let Some(v) = bad {
            let value = v as u64;
            let expected = oracle.answer(value);
            return Ok(VerifyReport {
                pass: false,
                words_checked: checked,
                mismatch: Some(Mismatch {
                    word: DigitWord::from_value(value, q, layer)?.to_string(),
                    length: layer,
                    value,
                    expected,
                    accepted: !expected,
                }),
            });
        }
        if layer < budget {
            let width = layer_states.len();
            let mut next = vec![0u32; width * q as usize];
            next.par_chunks_mut(width).enumerate().for_each(|(d, chunk)| {
                for (slot, &s) in chunk.iter_mut().zip(&layer_states) {
                    *slot = dfa.next(s, d as u32);
                }
            });
            layer_states = next;
        }
    }
    Ok(VerifyReport {
        pass: true,
        words_checked: checked,
        mismatch: None,
    })
}

/// Lower bound, exact size when computed, and greedy upper bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SizeSandwich {
    pub q: u64,
    #[serde(rename = "N")]
    pub budget: u32,
    pub lower: u64,
    pub lower_method: LowerBoundMethod,
    pub upper: u64,
    pub exact: Option<u64>,
    pub exact_status: String,
    pub trie_size: u64,
}

impl SizeSandwich {
    pub fn is_consistent(&self) -> bool {
        let inner = match self.exact {
            Some(e) => self.lower <= e && e <= self.upper,
            None => self.lower <= self.upper,
        };
        inner && self.upper <= self.trie_size
    }
}

/// Computes the sandwich; the exact search runs only when `guard` is given.
pub fn size_sandwich(
    oracle: &MembershipOracle,
    q: u64,
    budget: u32,
    guard: Option<ExactGuard>,
) -> Result<(SizeSandwich, LayeredDfa)> {
    let trie = build_trie(oracle, q, budget)?;
    let merged = greedy_minimize(&trie)?;
    let lower = distinguishability_lower_bound(oracle, q, budget)?;
    let (exact, exact_status) = match guard {
        Some(guard) => {
            let outcome = exact_minimal_size(oracle, q, budget, guard)?;
            (outcome.size(), outcome.status())
        }
        None => (None, "not attempted: no guard given".to_string()),
    };
    let sandwich = SizeSandwich {
        q,
        budget,
        lower: lower.bound,
        lower_method: lower.method,
        upper: merged.state_count() as u64,
        exact,
        exact_status,
        trie_size: trie.state_count() as u64,
    };
    Ok((sandwich, merged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::{build_prime_oracle, build_square_oracle, oracle_from_members};

    #[test]
    fn trie_examples() {
        let primes = build_prime_oracle(4).unwrap();
        let t1 = build_trie(&primes, 2, 1).unwrap();
        assert_eq!(t1.state_count(), 3);
        assert!((0..3).all(|s| !t1.is_accepting(s)));

        let t2 = build_trie(&primes, 2, 2).unwrap();
        assert_eq!(t2.state_count(), 7);
        let accepting: Vec<u32> = (0..7).filter(|&s| t2.is_accepting(s)).collect();
        // ids 3..7 are the length-2 words of value 0..4
        assert_eq!(accepting, vec![5, 6]);
        assert_eq!(t2.run(&[0, 1]), 5);
        assert_eq!(t2.run(&[1, 1]), 6);

        let squares = build_square_oracle(1).unwrap();
        let t0 = build_trie(&squares, 3, 0).unwrap();
        assert_eq!(t0.state_count(), 1);
        assert!(t0.is_accepting(0));
    }

    #[test]
    fn trie_size_formula_and_budget() {
        let o = build_prime_oracle(3u64.pow(5)).unwrap();
        assert_eq!(build_trie(&o, 3, 5).unwrap().state_count(), (3usize.pow(6) - 1) / 2);
        assert!(matches!(build_trie_with(&o, 3, 5, 100), Err(Error::Resource(_))));
        assert!(matches!(build_trie(&o, 3, 6), Err(Error::Argument(_))));
    }

    #[test]
    fn verify_trie_and_negative_control() {
        let primes = build_prime_oracle(1 << 10).unwrap();
        let trie = build_trie(&primes, 2, 10).unwrap();
        let report = verify(&trie, &primes, 10).unwrap();
        assert!(report.pass);
        assert_eq!(report.words_checked, 2047);

        // state for the length-3 word "111" (value 7) is 7 + 7 = 14
        let broken = trie.with_flipped_state(14);
        let report = verify(&broken, &primes, 10).unwrap();
        assert!(!report.pass);
        let m = report.mismatch.unwrap();
        assert_eq!((m.word.as_str(), m.value, m.expected, m.accepted), ("111", 7, true, false));
    }

    #[test]
    fn json_round_trip() {
        let o = oracle_from_members(9, [1, 4]).unwrap();
        let trie = build_trie(&o, 3, 2).unwrap();
        let json = trie.to_json();
        assert_eq!(json.transitions.len(), 13);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.starts_with("{\"q\":3,\"N\":2,\"start\":0,\"accepting\":["));
        let back = LayeredDfa::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, trie);
    }

    #[test]
    fn constructor_validation_and_compaction() {
        assert!(LayeredDfa::new(2, 1, 0, vec![false], vec![0]).is_err());
        assert!(LayeredDfa::new(2, 1, 1, vec![false], vec![0, 0]).is_err());
        assert!(LayeredDfa::new(2, 1, 0, vec![false], vec![0, 3]).is_err());
        // state 1 unreachable
        let dfa = LayeredDfa::new(2, 1, 0, vec![true, false, false], vec![2, 2, 1, 1, 2, 2]).unwrap();
        assert_eq!(dfa.state_count(), 2);
        assert_eq!(dfa.next(0, 0), 1);
        assert!(dfa.is_accepting(0));
        assert_eq!(dfa.depth(1), 1);
    }
}
