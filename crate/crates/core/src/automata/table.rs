//! The prefix tree of all words of length `<= N` and per-budget signatures.
//!
//! Prefix ids are breadth-first: the length-`L` word of value `v` has id
//! `offset(L) + v` with `offset(L) = (q^L - 1)/(q - 1)`.
//!
//! `label(b, u)` identifies the function `s -> [u s in X]` on suffixes `s` of
//! length `<= b`. It is defined for prefixes of length `<= N - b` and two
//! prefixes get the same label at budget `b` iff those functions agree.
//! Labels at budget `b + 1` are built from the accept bit and the children's
//! labels at budget `b`.

use std::collections::HashMap;

use super::LayeredDfa;
use crate::membership::MembershipOracle;
use crate::numeral::{check_base, checked_pow, words_up_to};
use crate::{Error, Result};

pub(crate) struct PrefixTable {
    q: u64,
    budget: u32,
    /// `offsets[L]` for `L in 0..=N+1`.
    offsets: Vec<usize>,
    /// `powers[L] = q^L` for `L in 0..=N`.
    powers: Vec<u64>,
    accept: Vec<bool>,
}

impl PrefixTable {
    fn layout(q: u64, budget: u32, max_words: u64) -> Result<(Vec<usize>, Vec<u64>)> {
        check_base(q)?;
        let total = words_up_to(q, budget)?;
        if total > max_words {
            return Err(Error::Resource(format!(
                "{total} words of length <= {budget} exceed the budget of {max_words}"
            )));
        }
        let powers: Vec<u64> = (0..=budget).map(|l| q.pow(l)).collect();
        let mut offsets = vec![0usize];
        for &p in &powers {
            offsets.push(offsets.last().unwrap() + p as usize);
        }
        Ok((offsets, powers))
    }

    pub fn from_oracle(oracle: &MembershipOracle, q: u64, budget: u32, max_words: u64) -> Result<Self> {
        let (offsets, powers) = Self::layout(q, budget, max_words)?;
        oracle.require_limit(checked_pow(q, budget)?)?;
        let mut accept = Vec::with_capacity(offsets[budget as usize + 1]);
        for &p in &powers {
            accept.extend((0..p).map(|v| oracle.answer(v)));
        }
        Ok(PrefixTable {
            q,
            budget,
            offsets,
            powers,
            accept,
        })
    }

    /// Unrolls `dfa` on every word of length `<= N`.
    pub fn from_dfa(dfa: &LayeredDfa, max_words: u64) -> Result<Self> {
        let q = dfa.q() as u64;
        let budget = dfa.budget();
        let (offsets, powers) = Self::layout(q, budget, max_words)?;
        let mut accept = Vec::with_capacity(offsets[budget as usize + 1]);
        let mut layer = vec![dfa.start()];
        for l in 0..=budget {
            accept.extend(layer.iter().map(|&s| dfa.is_accepting(s)));
            if l < budget {
                let width = layer.len();
                let mut next = vec![0u32; width * q as usize];
                for d in 0..q as usize {
                    for (v, &s) in layer.iter().enumerate() {
                        next[d * width + v] = dfa.next(s, d as u32);
                    }
                }
                layer = next;
            }
        }
        Ok(PrefixTable {
            q,
            budget,
            offsets,
            powers,
            accept,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn budget(&self) -> u32 {
        self.budget
    }

    pub fn total(&self) -> usize {
        self.offsets[self.budget as usize + 1]
    }

    pub fn accept(&self) -> &[bool] {
        &self.accept
    }

    pub fn layer_size(&self, layer: u32) -> u64 {
        self.powers[layer as usize]
    }

    /// Number of prefixes of length `<= layer`.
    pub fn prefixes_up_to(&self, layer: u32) -> usize {
        self.offsets[layer as usize + 1]
    }

    #[inline]
    pub fn id(&self, layer: u32, value: u64) -> usize {
        self.offsets[layer as usize] + value as usize
    }

    #[inline]
    pub fn child(&self, layer: u32, value: u64, digit: u64) -> usize {
        self.offsets[layer as usize + 1] + (value + digit * self.powers[layer as usize]) as usize
    }

    /// `(layer, value)` of a prefix id.
    pub fn locate(&self, id: usize) -> (u32, u64) {
        let layer = self.offsets.partition_point(|&o| o <= id) - 1;
        (layer as u32, (id - self.offsets[layer]) as u64)
    }

    /// `(parent id, digit)` of a nonempty prefix.
    pub fn parent(&self, id: usize) -> (usize, u32) {
        let (layer, value) = self.locate(id);
        debug_assert!(layer > 0);
        let below = self.powers[layer as usize - 1];
        (self.id(layer - 1, value % below), (value / below) as u32)
    }
}

pub(crate) struct Signatures {
    budget: u32,
    /// `labels[b][id]` for prefixes of length `<= N - b`.
    labels: Vec<Vec<u32>>,
}

impl Signatures {
    pub fn compute(table: &PrefixTable) -> Self {
        let n = table.budget();
        let q = table.q();
        let mut labels: Vec<Vec<u32>> = Vec::with_capacity(n as usize + 1);
        labels.push(table.accept().iter().map(|&a| a as u32).collect());
        let mut key = Vec::with_capacity(q as usize + 1);
        for b in 1..=n {
            let prev = &labels[b as usize - 1];
            let top = n - b;
            let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
            let mut current = Vec::with_capacity(table.prefixes_up_to(top));
            for layer in 0..=top {
                for v in 0..table.layer_size(layer) {
                    key.clear();
                    key.push(table.accept()[table.id(layer, v)] as u32);
                    key.extend((0..q).map(|d| prev[table.child(layer, v, d)]));
                    let fresh = index.len() as u32;
                    let label = *index.entry(key.clone()).or_insert(fresh);
                    current.push(label);
                }
            }
            labels.push(current);
        }
        Signatures { budget: n, labels }
    }

    #[inline]
    pub fn label(&self, budget: u32, id: usize) -> u32 {
        self.labels[budget as usize][id]
    }

    /// Whether some suffix admissible for both prefixes separates them.
    #[inline]
    pub fn distinguishable(&self, u: (u32, usize), v: (u32, usize)) -> bool {
        let b = self.budget - u.0.max(v.0);
        self.label(b, u.1) != self.label(b, v.1)
    }
}
