//! Exact minimal automaton size by backtracking, for tiny instances only.
//!
//! Words are assigned states in breadth-first order. A word's state is forced
//! once the transition from its parent's state is defined; otherwise the
//! search branches over the existing states plus one fresh state (fresh
//! states are numbered in order of first use, which removes relabelings).
//! A word may join a state only if it is indistinguishable from every word
//! already there, which covers the accept/reject constraint.

use serde::Serialize;

use super::table::{PrefixTable, Signatures};
use super::LayeredDfa;
use crate::membership::MembershipOracle;
use crate::{Error, Result};

/// Largest word count the exact search accepts.
pub const EXACT_MAX_WORDS: u64 = 4096;
/// Largest state count the exact search accepts.
pub const EXACT_MAX_STATES: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExactGuard {
    pub max_states: u32,
    /// Search nodes allowed before giving up.
    pub max_nodes: u64,
}

impl Default for ExactGuard {
    fn default() -> Self {
        ExactGuard {
            max_states: EXACT_MAX_STATES,
            max_nodes: 50_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactOutcome {
    Solved {
        size: u32,
        nodes: u64,
        automaton: LayeredDfa,
    },
    /// The guard refused the instance before searching.
    Refused { reason: String },
    /// No automaton with at most `max_states` states exists.
    AboveGuard { max_states: u32, nodes: u64 },
    /// The node budget ran out while searching `states`.
    Inconclusive { states: u32, nodes: u64 },
}

impl ExactOutcome {
    pub fn size(&self) -> Option<u64> {
        match self {
            ExactOutcome::Solved { size, .. } => Some(*size as u64),
            _ => None,
        }
    }

    pub fn status(&self) -> String {
        match self {
            ExactOutcome::Solved { nodes, .. } => format!("solved in {nodes} nodes"),
            ExactOutcome::Refused { reason } => format!("not attempted: {reason}"),
            ExactOutcome::AboveGuard { max_states, .. } => {
                format!("not attempted beyond guard: no automaton with <= {max_states} states")
            }
            ExactOutcome::Inconclusive { states, nodes } => {
                format!("inconclusive: node budget spent at {states} states after {nodes} nodes")
            }
        }
    }
}

struct Search<'a> {
    table: &'a PrefixTable,
    sig: &'a Signatures,
    q: usize,
    states: u32,
    used: u32,
    transitions: Vec<Option<u32>>,
    state_of: Vec<u32>,
    /// Words already placed in each state, one per distinct (layer, label).
    members: Vec<Vec<(u32, usize)>>,
    /// Pre-computed `(parent id, digit, layer)` of every word.
    parents: Vec<(usize, u32, u32)>,
    nodes: u64,
    max_nodes: u64,
    out_of_budget: bool,
}

impl Search<'_> {
    /// Places `word` in `state`; returns whether a member was added.
    fn place(&mut self, word: usize, state: u32) -> Option<bool> {
        let me = (self.parents[word].2, word);
        let members = &self.members[state as usize];
        let mut twin = false;
        for &other in members {
            if self.sig.distinguishable(me, other) {
                return None;
            }
            if other.0 == me.0 {
                twin = true;
            }
        }
        self.state_of[word] = state;
        if !twin {
            self.members[state as usize].push(me);
        }
        Some(!twin)
    }

    fn unplace(&mut self, state: u32, added: bool) {
        if added {
            self.members[state as usize].pop();
        }
    }

    fn search(&mut self, start: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.out_of_budget = true;
            return false;
        }
        let total = self.table.total();
        let mut trail: Vec<(u32, bool)> = Vec::new();
        let mut word = start;
        let undo = |s: &mut Self, trail: &[(u32, bool)]| {
            for &(state, added) in trail.iter().rev() {
                s.unplace(state, added);
            }
        };
        while word < total {
            let (parent, digit, _) = self.parents[word];
            let slot = self.state_of[parent] as usize * self.q + digit as usize;
            match self.transitions[slot] {
                Some(target) => match self.place(word, target) {
                    Some(added) => trail.push((target, added)),
                    None => {
                        undo(self, &trail);
                        return false;
                    }
                },
                None => break,
            }
            word += 1;
        }
        if word == total {
            return true;
        }

        let (parent, digit, _) = self.parents[word];
        let slot = self.state_of[parent] as usize * self.q + digit as usize;
        let options = (self.used + 1).min(self.states);
        for target in 0..options {
            let fresh = target == self.used;
            if fresh {
                self.used += 1;
            }
            self.transitions[slot] = Some(target);
            if let Some(added) = self.place(word, target) {
                if self.search(word + 1) {
                    return true;
                }
                self.unplace(target, added);
            }
            self.transitions[slot] = None;
            if fresh {
                self.used -= 1;
            }
            if self.out_of_budget {
                break;
            }
        }
        undo(self, &trail);
        false
    }

    fn automaton(&self) -> Result<LayeredDfa> {
        let states = self.used as usize;
        let mut accepting = vec![false; states];
        for (state, members) in self.members.iter().enumerate().take(states) {
            if let Some(&(_, word)) = members.first() {
                accepting[state] = self.table.accept()[word];
            }
        }
        let transitions = self.transitions[..states * self.q]
            .iter()
            .map(|t| t.unwrap_or(0))
            .collect();
        LayeredDfa::new(self.q as u32, self.table.budget(), 0, accepting, transitions)
    }
}

/// Smallest number of states of an automaton correct on all words of length
/// `<= budget`, or an explicit reason why no number is returned.
pub fn exact_minimal_size(
    oracle: &MembershipOracle,
    q: u64,
    budget: u32,
    guard: ExactGuard,
) -> Result<ExactOutcome> {
    if guard.max_states > EXACT_MAX_STATES {
        return Ok(ExactOutcome::Refused {
            reason: format!("max_states {} exceeds {EXACT_MAX_STATES}", guard.max_states),
        });
    }
    let table = match PrefixTable::from_oracle(oracle, q, budget, EXACT_MAX_WORDS) {
        Ok(t) => t,
        Err(Error::Resource(reason)) => return Ok(ExactOutcome::Refused { reason }),
        Err(e) => return Err(e),
    };
    let sig = Signatures::compute(&table);
    let total = table.total();
    let parents: Vec<(usize, u32, u32)> = (0..total)
        .map(|id| {
            let (layer, _) = table.locate(id);
            if id == 0 {
                (0, 0, 0)
            } else {
                let (p, d) = table.parent(id);
                (p, d, layer)
            }
        })
        .collect();

    let mut nodes = 0;
    for states in 1..=guard.max_states {
        let mut search = Search {
            table: &table,
            sig: &sig,
            q: q as usize,
            states,
            used: 1,
            transitions: vec![None; states as usize * q as usize],
            state_of: vec![0; total],
            members: vec![Vec::new(); states as usize],
            parents: parents.clone(),
            nodes: 0,
            max_nodes: guard.max_nodes.saturating_sub(nodes),
            out_of_budget: false,
        };
        search.members[0].push((0, 0));
        let found = search.search(1);
        nodes += search.nodes;
        if found {
            return Ok(ExactOutcome::Solved {
                size: states,
                nodes,
                automaton: search.automaton()?,
            });
        }
        if search.out_of_budget {
            return Ok(ExactOutcome::Inconclusive { states, nodes });
        }
    }
    Ok(ExactOutcome::AboveGuard {
        max_states: guard.max_states,
        nodes,
    })
}
