//! Canonical state keys and bounded exploration of the reachable LTS.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::causality::{successors, Label};
use crate::engine::{check_conservation, History, Projection, State};
use crate::error::{Error, Result};
use crate::marking::{Marking, Stamp, TokenId};
use crate::net::Net;
use crate::Transition;

/// How states are identified when they are merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum KeyMode {
    /// Structural identity of `⟨M, H⟩`.
    #[default]
    Exact,
    /// Occurrence keys of each transition renumbered `1..n` preserving their
    /// relative order.
    Normalized,
    /// Identity up to any per-transition bijection on occurrence keys. This
    /// is the state identity underlying causal equivalence.
    Quotient,
}

impl fmt::Display for KeyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KeyMode::Exact => "exact",
            KeyMode::Normalized => "normalized",
            KeyMode::Quotient => "quotient",
        })
    }
}

/// An opaque, injective text encoding of a (possibly renumbered) state.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey(String);

impl StateKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Per-transition renaming of occurrence keys.
pub type KeyRenaming = BTreeMap<Transition, BTreeMap<u32, u32>>;

/// Applies `renaming` consistently to the history and to every path entry.
/// Keys without an entry are kept.
pub fn rename_keys(s: &State, renaming: &KeyRenaming) -> State {
    let map_key = |t: &Transition, k: u32| {
        renaming
            .get(t)
            .and_then(|m| m.get(&k))
            .copied()
            .unwrap_or(k)
    };
    let marking = s.marking.map_tokens(|tok| {
        let mut next = tok.clone();
        for e in &mut next.path {
            e.key = map_key(&e.transition, e.key);
        }
        next
    });
    let mut history = History::new();
    for (t, recs) in s.history.transitions() {
        for (k, b) in recs {
            history.insert(
                t.clone(),
                crate::engine::HistoryRecord {
                    key: map_key(t, *k),
                    binding: b.clone(),
                },
            );
        }
    }
    State { marking, history }
}

/// Order-preserving renumbering of each transition's live keys to `1..n`.
pub fn normalizing_renaming(s: &State) -> KeyRenaming {
    s.history
        .transitions()
        .map(|(t, recs)| {
            (
                t.clone(),
                recs.keys()
                    .enumerate()
                    .map(|(n, k)| (*k, n as u32 + 1))
                    .collect(),
            )
        })
        .collect()
}

/// Renumbering that depends only on what each occurrence stamped: the
/// occurrences of a transition are ordered by the sorted list of
/// `(token, path position, stamp)` they left, then by binding.
pub fn quotient_renaming(s: &State) -> KeyRenaming {
    let mut sigs: BTreeMap<(&Transition, u32), Vec<(&TokenId, usize, &Stamp)>> = BTreeMap::new();
    for (_, tok) in s.marking.tokens() {
        for (pos, e) in tok.path.iter().enumerate() {
            sigs.entry((&e.transition, e.key))
                .or_default()
                .push((&tok.id, pos, &e.stamp));
        }
    }
    for sig in sigs.values_mut() {
        sig.sort();
    }
    let empty = Vec::new();
    s.history
        .transitions()
        .map(|(t, recs)| {
            let mut order: Vec<(&Vec<(&TokenId, usize, &Stamp)>, &Projection, u32)> = recs
                .iter()
                .map(|(k, b)| (sigs.get(&(t, *k)).unwrap_or(&empty), b, *k))
                .collect();
            order.sort();
            (
                t.clone(),
                order
                    .iter()
                    .enumerate()
                    .map(|(n, (_, _, k))| (*k, n as u32 + 1))
                    .collect(),
            )
        })
        .collect()
}

/// The state under `mode`'s renumbering.
pub fn canonical_state(s: &State, mode: KeyMode) -> State {
    match mode {
        KeyMode::Exact => s.clone(),
        KeyMode::Normalized => rename_keys(s, &normalizing_renaming(s)),
        KeyMode::Quotient => rename_keys(s, &quotient_renaming(s)),
    }
}

pub fn canonical_key(s: &State, mode: KeyMode) -> StateKey {
    StateKey(encode(&canonical_state(s, mode)))
}

fn encode(s: &State) -> String {
    let mut out = String::new();
    write_marking(&mut out, &s.marking);
    out.push('|');
    for (n, (t, recs)) in s.history.transitions().enumerate() {
        if n > 0 {
            out.push(';');
        }
        let _ = write!(out, "{t}:");
        for (i, (k, b)) in recs.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{k}({b})");
        }
    }
    out
}

fn write_marking(out: &mut String, m: &Marking) {
    for (n, (p, pool)) in m.places().enumerate() {
        if n > 0 {
            out.push(';');
        }
        let _ = write!(out, "{p}:");
        for (i, tok) in pool.tokens.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{tok}");
        }
        out.push('/');
        for (i, b) in pool.bonds.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{b}");
        }
    }
}

/// Exploration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExploreConfig {
    /// Maximum trace length from the initial state.
    pub depth: usize,
    /// Maximum number of distinct states.
    pub state_cap: usize,
    pub key_mode: KeyMode,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            depth: 4,
            state_cap: 100_000,
            key_mode: KeyMode::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LtsState {
    pub key: StateKey,
    /// The first state reached with this key.
    pub state: State,
    /// BFS distance from the initial state.
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub label: Label,
    pub to: usize,
}

/// A depth-bounded ball of the reachable LTS. State 0 is the initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<LtsState>,
    pub edges: Vec<Edge>,
    pub key_mode: KeyMode,
    pub depth: usize,
    /// Set when the state cap stopped exploration early.
    pub truncated: bool,
    index: BTreeMap<StateKey, usize>,
}

impl Lts {
    pub fn initial(&self) -> usize {
        0
    }

    pub fn find(&self, key: &StateKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn out_edges(&self, from: usize) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == from)
    }

    /// States whose every successor was explored (distance below the bound).
    pub fn is_interior(&self, i: usize) -> bool {
        !self.truncated && self.states[i].depth < self.depth
    }

    pub fn forward_edge_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|e| e.label.direction.is_forward())
            .count()
    }

    pub fn reverse_edge_count(&self) -> usize {
        self.edges.len() - self.forward_edge_count()
    }
}

/// Breadth-first exploration from `s0`, following every forward and reverse
/// action up to `cfg.depth` steps and merging states by `cfg.key_mode`.
///
/// Every new state is checked for token and bond conservation against the
/// identities of `s0`.
pub fn explore(net: &Net, s0: &State, cfg: &ExploreConfig) -> Result<Lts> {
    let ids: BTreeSet<TokenId> = s0.marking.token_ids();
    check_conservation(&ids, &s0.marking)?;
    let key0 = canonical_key(s0, cfg.key_mode);
    let mut lts = Lts {
        states: alloc::vec![LtsState {
            key: key0.clone(),
            state: s0.clone(),
            depth: 0
        }],
        edges: Vec::new(),
        key_mode: cfg.key_mode,
        depth: cfg.depth,
        truncated: false,
        index: BTreeMap::from([(key0, 0)]),
    };
    let mut queue = VecDeque::from([0usize]);
    'bfs: while let Some(i) = queue.pop_front() {
        let depth = lts.states[i].depth;
        if depth >= cfg.depth {
            continue;
        }
        let here = lts.states[i].state.clone();
        for (action, next) in successors(net, &here)? {
            let key = canonical_key(&next, cfg.key_mode);
            let to = match lts.index.get(&key) {
                Some(&j) => j,
                None => {
                    if lts.states.len() >= cfg.state_cap {
                        lts.truncated = true;
                        break 'bfs;
                    }
                    check_conservation(&ids, &next.marking).map_err(|e| {
                        Error::Conservation(format!("after {} from state {i}: {e}", action.label()))
                    })?;
                    let j = lts.states.len();
                    lts.index.insert(key.clone(), j);
                    lts.states.push(LtsState {
                        key,
                        state: next,
                        depth: depth + 1,
                    });
                    queue.push_back(j);
                    j
                }
            };
            lts.edges.push(Edge {
                from: i,
                label: action.label(),
                to,
            });
        }
    }
    Ok(lts)
}
