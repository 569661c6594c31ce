//! Distinguishability lower bound.
//!
//! Prefixes `u`, `v` are distinguishable when some suffix `s` with
//! `|us|, |vs| <= N` separates them. Distinguishable prefixes reach distinct
//! states in every correct automaton, so any set of pairwise distinguishable
//! prefixes lower-bounds the automaton size.
//!
//! Prefixes of one length with the same signature are twins: they relate to
//! every other prefix identically. The search therefore runs on the quotient
//! whose vertices are `(length, signature class)` pairs. Within one length
//! distinguishability is an equivalence, so the largest class count over all
//! lengths is always reached; cross-length additions are greedy, followed by
//! an exact branch-and-bound on small quotients.

use std::collections::HashSet;

use serde::Serialize;

use super::table::{PrefixTable, Signatures};
use super::DEFAULT_MAX_STATES;
use crate::membership::MembershipOracle;
use crate::Result;

/// Quotients up to this many vertices get the exact clique search.
const EXACT_CLIQUE_MAX_VERTICES: usize = 1024;
const EXACT_CLIQUE_MAX_NODES: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundMethod {
    /// Maximum clique of the quotient, proven optimal.
    ExactClique,
    /// Best of the greedy orders (and any partial exact search).
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LowerBound {
    pub bound: u64,
    pub method: LowerBoundMethod,
    /// Pairwise distinguishable prefixes as `(length, value)`.
    pub witnesses: Vec<(u32, u64)>,
    /// Number of signature classes among the prefixes of each length.
    pub classes_per_length: Vec<u64>,
}

struct Quotient {
    /// `(layer, representative prefix id)` per vertex, in breadth-first order.
    vertices: Vec<(u32, usize)>,
    classes_per_length: Vec<u64>,
}

fn quotient(table: &PrefixTable, sig: &Signatures) -> Quotient {
    let n = table.budget();
    let mut vertices = Vec::new();
    let mut classes_per_length = Vec::new();
    for layer in 0..=n {
        let mut seen = HashSet::new();
        for v in 0..table.layer_size(layer) {
            let id = table.id(layer, v);
            if seen.insert(sig.label(n - layer, id)) {
                vertices.push((layer, id));
            }
        }
        classes_per_length.push(seen.len() as u64);
    }
    Quotient {
        vertices,
        classes_per_length,
    }
}

/// Greedy clique growth in the given vertex order, with per-budget label
/// sets so each candidate costs `O(N)` lookups.
fn greedy_clique(order: &[usize], q: &Quotient, sig: &Signatures, n: u32) -> Vec<usize> {
    // by_budget[b]: labels at budget b of members with layer <= N - b
    let mut by_budget: Vec<HashSet<u32>> = vec![HashSet::new(); n as usize + 1];
    // by_layer[l]: labels at budget N - l of members at layer l
    let mut by_layer: Vec<HashSet<u32>> = vec![HashSet::new(); n as usize + 1];
    let mut clique = Vec::new();
    for &vx in order {
        let (layer, id) = q.vertices[vx];
        if by_budget[(n - layer) as usize].contains(&sig.label(n - layer, id)) {
            continue;
        }
        let clash = (layer + 1..=n).any(|upper| by_layer[upper as usize].contains(&sig.label(n - upper, id)));
        if clash {
            continue;
        }
        by_layer[layer as usize].insert(sig.label(n - layer, id));
        for b in 0..=n - layer {
            by_budget[b as usize].insert(sig.label(b, id));
        }
        clique.push(vx);
    }
    clique
}

struct CliqueSearch<'a> {
    adjacent: &'a [Vec<bool>],
    best: Vec<usize>,
    nodes: u64,
    aborted: bool,
}

impl CliqueSearch<'_> {
    /// Greedy colouring of `cand`; returns vertices sorted by colour and the colours.
    fn colour(&self, cand: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &v in cand {
            match classes
                .iter_mut()
                .find(|class| class.iter().all(|&u| !self.adjacent[u][v]))
            {
                Some(class) => class.push(v),
                None => classes.push(vec![v]),
            }
        }
        let mut order = Vec::with_capacity(cand.len());
        let mut colours = Vec::with_capacity(cand.len());
        for (c, class) in classes.into_iter().enumerate() {
            for v in class {
                order.push(v);
                colours.push(c + 1);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, clique: &mut Vec<usize>, cand: &[usize]) {
        self.nodes += 1;
        if self.nodes > EXACT_CLIQUE_MAX_NODES {
            self.aborted = true;
            return;
        }
        let (order, colours) = self.colour(cand);
        for i in (0..order.len()).rev() {
            if clique.len() + colours[i] <= self.best.len() || self.aborted {
                return;
            }
            let v = order[i];
            clique.push(v);
            let next: Vec<usize> = order[..i].iter().copied().filter(|&u| self.adjacent[v][u]).collect();
            if next.is_empty() {
                if clique.len() > self.best.len() {
                    self.best = clique.clone();
                }
            } else {
                self.expand(clique, &next);
            }
            clique.pop();
        }
    }
}

pub(crate) fn lower_bound_from_table(table: &PrefixTable) -> LowerBound {
    let n = table.budget();
    let sig = Signatures::compute(table);
    let quotient = quotient(table, &sig);
    let count = quotient.vertices.len();

    let bfs: Vec<usize> = (0..count).collect();
    let best_layer = (0..=n)
        .max_by_key(|&l| (quotient.classes_per_length[l as usize], std::cmp::Reverse(l)))
        .unwrap();
    let layer_first: Vec<usize> = bfs
        .iter()
        .copied()
        .filter(|&v| quotient.vertices[v].0 == best_layer)
        .chain(bfs.iter().copied().filter(|&v| quotient.vertices[v].0 != best_layer))
        .collect();
    let deepest_first: Vec<usize> = {
        let mut order = bfs.clone();
        order.sort_by_key(|&v| std::cmp::Reverse(quotient.vertices[v].0));
        order
    };
    let mut best = [bfs, layer_first, deepest_first]
        .iter()
        .map(|order| greedy_clique(order, &quotient, &sig, n))
        .max_by_key(|c| c.len())
        .unwrap();
    let mut method = LowerBoundMethod::Greedy;

    if count <= EXACT_CLIQUE_MAX_VERTICES {
        let adjacent: Vec<Vec<bool>> = quotient
            .vertices
            .iter()
            .map(|&u| quotient.vertices.iter().map(|&v| sig.distinguishable(u, v)).collect())
            .collect();
        let mut search = CliqueSearch {
            adjacent: &adjacent,
            best: best.clone(),
            nodes: 0,
            aborted: false,
        };
        let all: Vec<usize> = (0..count).collect();
        search.expand(&mut Vec::new(), &all);
        if search.best.len() > best.len() {
            best = search.best;
        }
        if !search.aborted {
            method = LowerBoundMethod::ExactClique;
        }
    }

    let mut witnesses: Vec<(u32, u64)> = best
        .iter()
        .map(|&v| table.locate(quotient.vertices[v].1))
        .collect();
    witnesses.sort_unstable();
    LowerBound {
        bound: witnesses.len() as u64,
        method,
        witnesses,
        classes_per_length: quotient.classes_per_length,
    }
}

/// Lower bound on the size of every automaton correct for the oracle's set
/// on words of length `<= budget`.
pub fn distinguishability_lower_bound(
    oracle: &MembershipOracle,
    q: u64,
    budget: u32,
) -> Result<LowerBound> {
    let table = PrefixTable::from_oracle(oracle, q, budget, DEFAULT_MAX_STATES)?;
    Ok(lower_bound_from_table(&table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::{build_prime_oracle, oracle_from_members};
    use crate::residuals::{census, CensusParams, ResidualMode};

    /// All words of length <= n as (length, value).
    fn words(q: u64, n: u32) -> Vec<(u32, u64)> {
        (0..=n).flat_map(|l| (0..q.pow(l)).map(move |v| (l, v))).collect()
    }

    /// Direct definition: enumerate every admissible suffix.
    fn brute_distinguishable(o: &MembershipOracle, q: u64, n: u32, u: (u32, u64), v: (u32, u64)) -> bool {
        let room = n - u.0.max(v.0);
        (0..=room).any(|len| {
            (0..q.pow(len)).any(|s| o.answer(u.1 + s * q.pow(u.0)) != o.answer(v.1 + s * q.pow(v.0)))
        })
    }

    /// Maximum clique by exhaustive subset enumeration.
    fn brute_max_clique(o: &MembershipOracle, q: u64, n: u32) -> usize {
        let ws = words(q, n);
        assert!(ws.len() <= 16);
        let mut best = 0;
        for mask in 0u32..(1 << ws.len()) {
            let members: Vec<_> = (0..ws.len()).filter(|&i| mask >> i & 1 == 1).collect();
            if members.len() <= best {
                continue;
            }
            let ok = members.iter().enumerate().all(|(i, &a)| {
                members[i + 1..].iter().all(|&b| brute_distinguishable(o, q, n, ws[a], ws[b]))
            });
            if ok {
                best = members.len();
            }
        }
        best
    }

    #[test]
    fn primes_base_two_budget_two_matches_brute_force() {
        let o = build_prime_oracle(4).unwrap();
        let lb = distinguishability_lower_bound(&o, 2, 2).unwrap();
        let brute = brute_max_clique(&o, 2, 2);
        assert_eq!(brute, 3);
        assert_eq!(lb.bound, brute as u64);
        assert_eq!(lb.method, LowerBoundMethod::ExactClique);
    }

    #[test]
    fn brute_force_agreement_on_small_sets() {
        for (q, n, members) in [
            (2u64, 3u32, vec![1u64, 2, 4]),
            (2, 3, vec![0, 7]),
            (3, 2, vec![1, 4]),
            (3, 2, vec![0, 2, 3, 5, 7, 8]),
            (2, 3, vec![2, 3, 5, 7]),
        ] {
            let o = oracle_from_members(q.pow(n), members.clone()).unwrap();
            let lb = distinguishability_lower_bound(&o, q, n).unwrap();
            assert_eq!(lb.bound as usize, brute_max_clique(&o, q, n), "q={q} n={n} {members:?}");
        }
    }

    #[test]
    fn witnesses_are_pairwise_distinguishable() {
        let o = build_prime_oracle(1 << 9).unwrap();
        let lb = distinguishability_lower_bound(&o, 2, 9).unwrap();
        for (i, &a) in lb.witnesses.iter().enumerate() {
            for &b in &lb.witnesses[i + 1..] {
                assert!(brute_distinguishable(&o, 2, 9, a, b), "{a:?} {b:?}");
            }
        }
        assert_eq!(lb.bound, lb.witnesses.len() as u64);
    }

    #[test]
    fn uniform_false_gives_one() {
        for (q, n) in [(2u64, 6u32), (3, 4), (5, 2)] {
            let o = oracle_from_members(q.pow(n), []).unwrap();
            assert_eq!(distinguishability_lower_bound(&o, q, n).unwrap().bound, 1);
        }
    }

    #[test]
    fn dominates_residual_class_counts() {
        let o = build_prime_oracle(16).unwrap();
        let lb = distinguishability_lower_bound(&o, 2, 4).unwrap();
        for m in 1..4 {
            let c = census(CensusParams::new(2, 4, m).mode(ResidualMode::Full), &o).unwrap();
            assert!(lb.bound >= c.distinct(), "m={m}");
            assert_eq!(lb.classes_per_length[(4 - m) as usize], c.distinct());
        }
    }
}
