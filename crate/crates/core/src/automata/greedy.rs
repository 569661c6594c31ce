//! Greedy merging of a length-bounded automaton.
//!
//! Every prefix `t` of length `L` only has to behave correctly on suffixes of
//! length `<= N - L`. Walking prefixes breadth-first, `t` is redirected to the
//! first surviving prefix `s` (necessarily of length `<= L`) whose behaviour
//! restricted to suffixes of length `<= N - L` equals that of `t`. Survivors
//! keep their own behaviour up to their own, larger, budget, so by induction
//! on the suffix length every redirected edge still leads to correct verdicts.

use std::collections::HashMap;

use super::table::{PrefixTable, Signatures};
use super::{LayeredDfa, DEFAULT_MAX_STATES};
use crate::{Error, Result};

/// Merges states of `dfa` while preserving its verdict on every word of
/// length `<= N`. Deterministic: merge order is breadth-first by depth, then
/// by word value.
pub fn greedy_minimize(dfa: &LayeredDfa) -> Result<LayeredDfa> {
    let table = PrefixTable::from_dfa(dfa, DEFAULT_MAX_STATES)?;
    let merged = merge(&table)?;
    let check = PrefixTable::from_dfa(&merged, DEFAULT_MAX_STATES)?;
    if let Some(id) = (0..table.total()).find(|&id| check.accept()[id] != table.accept()[id]) {
        let (layer, value) = table.locate(id);
        return Err(Error::ContractViolation(format!(
            "greedy merge changed the verdict on the length-{layer} word of value {value}"
        )));
    }
    Ok(merged)
}

pub(crate) fn merge(table: &PrefixTable) -> Result<LayeredDfa> {
    let n = table.budget();
    let q = table.q();
    let sig = Signatures::compute(table);
    let total = table.total();

    // first surviving prefix with a given label, per budget
    let mut first: Vec<HashMap<u32, u32>> = vec![HashMap::new(); n as usize + 1];
    let mut representative = vec![0u32; total];
    let mut survivors: Vec<usize> = Vec::new();
    for layer in 0..=n {
        let budget = n - layer;
        for v in 0..table.layer_size(layer) {
            let id = table.id(layer, v);
            if let Some(&s) = first[budget as usize].get(&sig.label(budget, id)) {
                representative[id] = representative[s as usize];
                continue;
            }
            let state = survivors.len() as u32;
            survivors.push(id);
            representative[id] = state;
            for b in 0..=budget {
                first[b as usize].entry(sig.label(b, id)).or_insert(id as u32);
            }
        }
    }

    let qs = q as usize;
    let mut transitions = vec![0u32; survivors.len() * qs];
    let mut accepting = vec![false; survivors.len()];
    for (state, &id) in survivors.iter().enumerate() {
        accepting[state] = table.accept()[id];
        let (layer, value) = table.locate(id);
        for d in 0..qs {
            transitions[state * qs + d] = if layer < n {
                representative[table.child(layer, value, d as u64)]
            } else {
                state as u32
            };
        }
    }
    LayeredDfa::new(q as u32, n, 0, accepting, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{build_trie, distinguishability_lower_bound, verify};
    use crate::membership::{build_prime_oracle, build_square_oracle, oracle_from_members};

    #[test]
    fn all_false_collapses_to_one_state() {
        for (q, n) in [(2u64, 5u32), (3, 3), (7, 2)] {
            let o = oracle_from_members(q.pow(n), []).unwrap();
            let merged = greedy_minimize(&build_trie(&o, q, n).unwrap()).unwrap();
            assert_eq!(merged.state_count(), 1);
            assert!(verify(&merged, &o, n).unwrap().pass);
        }
    }

    #[test]
    fn primes_budget_two() {
        let o = build_prime_oracle(4).unwrap();
        let merged = greedy_minimize(&build_trie(&o, 2, 2).unwrap()).unwrap();
        let lower = distinguishability_lower_bound(&o, 2, 2).unwrap().bound;
        assert!(merged.state_count() <= 7);
        assert!(merged.state_count() as u64 >= lower);
        assert!(verify(&merged, &o, 2).unwrap().pass);
    }

    #[test]
    fn squares_share_subtrees() {
        let o = build_square_oracle(81).unwrap();
        let trie = build_trie(&o, 3, 4).unwrap();
        let merged = greedy_minimize(&trie).unwrap();
        assert!(merged.state_count() < trie.state_count());
        assert!(verify(&merged, &o, 4).unwrap().pass);
    }

    #[test]
    fn deterministic_and_idempotent_verdicts() {
        let o = build_prime_oracle(3u64.pow(6)).unwrap();
        let trie = build_trie(&o, 3, 6).unwrap();
        let a = greedy_minimize(&trie).unwrap();
        let b = greedy_minimize(&trie).unwrap();
        assert_eq!(a, b);
        let again = greedy_minimize(&a).unwrap();
        assert!(again.state_count() <= a.state_count());
        assert!(verify(&again, &o, 6).unwrap().pass);
    }

    #[test]
    fn verified_over_many_sets() {
        for n in 1..=10u32 {
            let o = build_prime_oracle(1 << n).unwrap();
            let merged = greedy_minimize(&build_trie(&o, 2, n).unwrap()).unwrap();
            assert!(verify(&merged, &o, n).unwrap().pass, "n = {n}");
        }
        let o = oracle_from_members(625, (0..625).filter(|v| v % 7 == 3 || v % 11 == 0)).unwrap();
        let merged = greedy_minimize(&build_trie(&o, 5, 4).unwrap()).unwrap();
        assert!(verify(&merged, &o, 4).unwrap().pass);
    }
}
