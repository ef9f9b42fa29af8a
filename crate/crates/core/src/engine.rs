//! Dynamic semantics: assignment enumeration, forward firing with causal-path
//! stamping, co-enabledness and causal-order reversal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::marking::{BondInstance, Marking, PathEntry, Pool, Stamp, TokenId, TokenInstance};
use crate::net::{Net, VarBond};
use crate::{Transition, Var};

/// An injective, type-respecting map from variables to token instances.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Assignment(BTreeMap<Var, TokenInstance>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<V: Into<Var>>(pairs: impl IntoIterator<Item = (V, TokenInstance)>) -> Self {
        Self(pairs.into_iter().map(|(v, t)| (v.into(), t)).collect())
    }

    pub fn get(&self, v: &Var) -> Option<&TokenInstance> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &TokenInstance)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `𝒲↓`: the assignment with causal paths dropped.
    pub fn projection(&self) -> Projection {
        Projection(
            self.0
                .iter()
                .map(|(v, t)| (v.clone(), t.id.clone()))
                .collect(),
        )
    }

    /// `𝒲⁻¹(token)`.
    pub fn var_of(&self, token: &TokenInstance) -> Option<&Var> {
        self.0.iter().find(|(_, t)| *t == token).map(|(v, _)| v)
    }

    /// Type-respecting and injective with respect to `net`.
    pub fn is_type_respecting(&self, net: &Net) -> bool {
        let distinct: BTreeSet<&TokenId> = self.0.values().map(|t| &t.id).collect();
        distinct.len() == self.0.len()
            && self.0.iter().all(|(v, t)| net.var_type(v) == Some(t.ty()))
    }

    fn bond(&self, b: &VarBond) -> Result<BondInstance> {
        let (a, c) = b.ends();
        let ta = self
            .0
            .get(a)
            .ok_or_else(|| Error::UnboundVariable(a.clone()))?;
        let tc = self
            .0
            .get(c)
            .ok_or_else(|| Error::UnboundVariable(c.clone()))?;
        Ok(BondInstance::new(ta.clone(), tc.clone()))
    }

    fn token(&self, v: &Var) -> Result<&TokenInstance> {
        self.0
            .get(v)
            .ok_or_else(|| Error::UnboundVariable(v.clone()))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (v, t)) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// An assignment with paths dropped: variable → `(type, index)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Projection(pub BTreeMap<Var, TokenId>);

impl Projection {
    pub fn from_pairs<V: Into<Var>>(pairs: impl IntoIterator<Item = (V, TokenId)>) -> Self {
        Self(pairs.into_iter().map(|(v, t)| (v.into(), t)).collect())
    }

    pub fn get(&self, v: &Var) -> Option<&TokenId> {
        self.0.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &TokenId)> {
        self.0.iter()
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, (v, t)) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}={t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// One live occurrence of a transition: its key and enabling assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HistoryRecord {
    pub key: u32,
    pub binding: Projection,
}

/// Per-transition memory of occurrences that have not been reversed.
///
/// Transitions without live occurrences are not stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct History(BTreeMap<Transition, BTreeMap<u32, Projection>>);

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    /// Live keys of `t`, ascending.
    pub fn keys(&self, t: &Transition) -> impl Iterator<Item = u32> + '_ {
        self.0.get(t).into_iter().flat_map(|m| m.keys().copied())
    }

    pub fn records(&self, t: &Transition) -> impl Iterator<Item = HistoryRecord> + '_ {
        self.0.get(t).into_iter().flat_map(|m| {
            m.iter().map(|(k, b)| HistoryRecord {
                key: *k,
                binding: b.clone(),
            })
        })
    }

    pub fn binding(&self, t: &Transition, key: u32) -> Option<&Projection> {
        self.0.get(t).and_then(|m| m.get(&key))
    }

    pub fn contains(&self, t: &Transition, key: u32) -> bool {
        self.binding(t, key).is_some()
    }

    pub fn insert(&mut self, t: Transition, record: HistoryRecord) {
        self.0
            .entry(t)
            .or_default()
            .insert(record.key, record.binding);
    }

    pub fn remove(&mut self, t: &Transition, key: u32) -> Option<Projection> {
        let m = self.0.get_mut(t)?;
        let out = m.remove(&key);
        if m.is_empty() {
            self.0.remove(t);
        }
        out
    }

    /// `max({0} ∪ H(t)) + 1`.
    pub fn next_key(&self, t: &Transition) -> u32 {
        self.keys(t).max().unwrap_or(0) + 1
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&Transition, &BTreeMap<u32, Projection>)> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

/// A state `⟨M, H⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State {
    pub marking: Marking,
    pub history: History,
}

impl State {
    /// `⟨M₀, H₀⟩` with every history empty.
    pub fn initial(marking: Marking) -> Self {
        Self {
            marking,
            history: History::new(),
        }
    }

    /// Checks that path stamps and history records agree: every stamp
    /// `(k, t, v)` has `k ∈ H(t)` with `v` bound to that token, and every
    /// recorded occurrence with a non-empty binding is carried by a token.
    pub fn check_consistency(&self) -> Result<()> {
        let mut carried: BTreeSet<(&Transition, u32)> = BTreeSet::new();
        for (_, tok) in self.marking.tokens() {
            for e in &tok.path {
                let Some(binding) = self.history.binding(&e.transition, e.key) else {
                    return Err(Error::Invalid(format!(
                        "token {tok} carries {e} but {} has no occurrence {}",
                        e.transition, e.key
                    )));
                };
                if let Stamp::Var(v) = &e.stamp {
                    if binding.get(v) != Some(&tok.id) {
                        return Err(Error::Invalid(format!(
                            "token {tok} carries {e} but the occurrence binds {v} elsewhere"
                        )));
                    }
                }
                carried.insert((&e.transition, e.key));
            }
        }
        for (t, recs) in self.history.transitions() {
            for (k, b) in recs {
                if !b.0.is_empty() && !carried.contains(&(t, *k)) {
                    return Err(Error::Invalid(format!(
                        "occurrence {k} of {t} is carried by no token"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A co-reversal enabling assignment for the `key`-th occurrence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReverseCandidate {
    pub key: u32,
    pub assignment: Assignment,
}

/// Every forward-enabling assignment of `t` in `s`, in canonical order
/// (lexicographic over variables sorted by name, tokens in canonical order).
pub fn enumerate_forward(net: &Net, s: &State, t: &Transition) -> Result<Vec<Assignment>> {
    let inputs = net.inputs(t)?;
    let mut slots: Vec<(Var, Vec<&TokenInstance>)> = Vec::new();
    for v in net.guard_vars(t)? {
        let Some(place) = net.input_place_of(t, v)? else {
            continue;
        };
        let ty = net.var_type(v);
        let cands = s
            .marking
            .get(place)
            .tokens
            .iter()
            .filter(|tok| Some(tok.ty()) == ty)
            .collect();
        slots.push((v.clone(), cands));
    }
    let mut out = Vec::new();
    let mut chosen: Vec<&TokenInstance> = Vec::new();
    choose(&slots, &mut chosen, &mut |picked| {
        let a = Assignment(
            slots
                .iter()
                .map(|(v, _)| v.clone())
                .zip(picked.iter().map(|t| (*t).clone()))
                .collect(),
        );
        if forward_clauses_hold(net, &s.marking, t, inputs, &a)? {
            out.push(a);
        }
        Ok(())
    })?;
    Ok(out)
}

fn choose<'a>(
    slots: &[(Var, Vec<&'a TokenInstance>)],
    chosen: &mut Vec<&'a TokenInstance>,
    visit: &mut dyn FnMut(&[&'a TokenInstance]) -> Result<()>,
) -> Result<()> {
    let depth = chosen.len();
    if depth == slots.len() {
        return visit(chosen);
    }
    for cand in &slots[depth].1 {
        if chosen.iter().any(|c| c.id == cand.id) {
            continue;
        }
        chosen.push(cand);
        choose(slots, chosen, visit)?;
        chosen.pop();
    }
    Ok(())
}

fn forward_clauses_hold(
    net: &Net,
    m: &Marking,
    t: &Transition,
    inputs: &[(crate::Place, crate::ArcLabel)],
    a: &Assignment,
) -> Result<bool> {
    let (plus, _) = net.transition_effects(t)?;
    for (x, label) in inputs {
        let pool = m.get(x);
        for v in &label.vars {
            if !pool.contains_token(a.token(v)?) {
                return Ok(false);
            }
        }
        for b in &label.bonds {
            if !pool.contains_bond(&a.bond(b)?) {
                return Ok(false);
            }
        }
        for b in &plus {
            let (p, q) = b.ends();
            if label.vars.contains(p) && label.vars.contains(q) && pool.contains_bond(&a.bond(b)?) {
                return Ok(false);
            }
        }
    }
    let after = compute_after(net, m, t, a)?;
    let outputs = net.outputs(t)?;
    for (i, (_, lx)) in outputs.iter().enumerate() {
        for (_, ly) in &outputs[i + 1..] {
            for va in &lx.vars {
                let ca = after.connected(a.token(va)?);
                for vb in &ly.vars {
                    if ca == after.connected(a.token(vb)?) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// `after(t, 𝒮, M)`: the contents of the in-places with the bonds created by
/// `t` added and the bonds it destroys removed.
pub fn compute_after(net: &Net, m: &Marking, t: &Transition, s: &Assignment) -> Result<Pool> {
    let (plus, minus) = net.transition_effects(t)?;
    let mut pool = Pool::new();
    for (x, _) in net.inputs(t)? {
        pool.extend(m.get(x));
    }
    for b in &plus {
        pool.bonds.insert(s.bond(b)?);
    }
    for b in &minus {
        pool.bonds.remove(&s.bond(b)?);
    }
    Ok(pool)
}

/// `before(t, ℛ, M)`: the contents of the out-places with the bonds destroyed
/// by `t` restored and the bonds it created removed.
pub fn compute_before(net: &Net, m: &Marking, t: &Transition, r: &Assignment) -> Result<Pool> {
    let (plus, minus) = net.transition_effects(t)?;
    let mut pool = Pool::new();
    for (x, _) in net.outputs(t)? {
        pool.extend(m.get(x));
    }
    for b in &minus {
        pool.bonds.insert(r.bond(b)?);
    }
    for b in &plus {
        pool.bonds.remove(&r.bond(b)?);
    }
    Ok(pool)
}

/// Fires `t` forward under `a`.
///
/// The component of every out-arc variable (within `after`) moves to its
/// out-place; each moved token gains `(k, t, v)` if it is bound to `v` and
/// `(k, t, *)` otherwise, where `k = max({0} ∪ H(t)) + 1`.
pub fn fire_forward(net: &Net, s: &State, t: &Transition, a: &Assignment) -> Result<State> {
    if !enumerate_forward(net, s, t)?.contains(a) {
        return Err(Error::NotEnabled {
            transition: t.clone(),
            reason: format!("{{{a}}} is not a forward-enabling assignment"),
        });
    }
    let key = s.history.next_key(t);
    let after = compute_after(net, &s.marking, t, a)?;
    let stamp = |tok: &TokenInstance| {
        let mark = match a.var_of(tok) {
            Some(v) => Stamp::Var(v.clone()),
            None => Stamp::Bystander,
        };
        tok.extended(PathEntry {
            key,
            transition: t.clone(),
            stamp: mark,
        })
    };

    let mut marking = s.marking.clone();
    for (x, label) in net.inputs(t)? {
        let mut pool = marking.get(x).clone();
        for v in &label.vars {
            pool.remove_all(&s.marking.get(x).connected(a.token(v)?));
        }
        marking.set(x.clone(), pool);
    }
    for (x, label) in net.outputs(t)? {
        let mut pool = marking.get(x).clone();
        for v in &label.vars {
            pool.extend(&after.connected(a.token(v)?).map_tokens(stamp));
        }
        marking.set(x.clone(), pool);
    }

    let mut history = s.history.clone();
    history.insert(
        t.clone(),
        HistoryRecord {
            key,
            binding: a.projection(),
        },
    );
    Ok(State { marking, history })
}

/// Every co-reversal enabling assignment of `t` in `s`, ordered by key.
///
/// Besides the availability and last-stamp conditions, each bound token must
/// carry `(k, t, v)` for its own variable `v` as its last entry, so only the
/// tokens that took part in occurrence `k` can be selected.
pub fn enumerate_reverse(net: &Net, s: &State, t: &Transition) -> Result<Vec<ReverseCandidate>> {
    let outputs = net.outputs(t)?;
    let mut out = Vec::new();
    for key in s.history.keys(t) {
        let blocked = s.marking.tokens().any(|(_, tok)| {
            tok.has_occurrence(key, t)
                && tok
                    .last()
                    .map(|e| e.key != key || &e.transition != t)
                    .unwrap_or(true)
        });
        if blocked {
            continue;
        }
        let mut slots: Vec<(Var, Vec<&TokenInstance>)> = Vec::new();
        for (y, label) in outputs {
            for v in &label.vars {
                let ty = net.var_type(v);
                let cands = s
                    .marking
                    .get(y)
                    .tokens
                    .iter()
                    .filter(|tok| {
                        Some(tok.ty()) == ty
                            && tok.last().is_some_and(|e| {
                                e.key == key
                                    && &e.transition == t
                                    && e.stamp == Stamp::Var(v.clone())
                            })
                    })
                    .collect();
                slots.push((v.clone(), cands));
            }
        }
        slots.sort_by(|l, r| l.0.cmp(&r.0));
        let mut chosen = Vec::new();
        choose(&slots, &mut chosen, &mut |picked| {
            let r = Assignment(
                slots
                    .iter()
                    .map(|(v, _)| v.clone())
                    .zip(picked.iter().map(|t| (*t).clone()))
                    .collect(),
            );
            let bonds_present = outputs.iter().all(|(y, label)| {
                label.bonds.iter().all(|b| {
                    r.bond(b)
                        .map(|bi| s.marking.get(y).contains_bond(&bi))
                        .unwrap_or(false)
                })
            });
            if bonds_present {
                out.push(ReverseCandidate { key, assignment: r });
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Reverses the occurrence `c.key` of `t`: components leave the out-places,
/// lose their last path entry and return to the in-places, and the key is
/// removed from `H(t)`.
pub fn fire_reverse(net: &Net, s: &State, t: &Transition, c: &ReverseCandidate) -> Result<State> {
    if !enumerate_reverse(net, s, t)?.contains(c) {
        return Err(Error::NotEnabled {
            transition: t.clone(),
            reason: format!(
                "occurrence {} with {{{}}} is not co-enabled",
                c.key, c.assignment
            ),
        });
    }
    let r = &c.assignment;
    let before = compute_before(net, &s.marking, t, r)?;
    let mut bad: Option<String> = None;
    let mut unstamp = |tok: &TokenInstance| match tok.init() {
        Some(prev) => {
            if tok
                .last()
                .is_some_and(|e| e.key != c.key || &e.transition != t)
            {
                bad.get_or_insert_with(|| {
                    format!("{tok} does not end with occurrence {} of {t}", c.key)
                });
            }
            prev
        }
        None => {
            bad.get_or_insert_with(|| format!("{tok} has an empty path"));
            tok.clone()
        }
    };

    let mut marking = s.marking.clone();
    for (x, label) in net.outputs(t)? {
        let mut pool = marking.get(x).clone();
        for v in &label.vars {
            pool.remove_all(&s.marking.get(x).connected(r.token(v)?));
        }
        marking.set(x.clone(), pool);
    }
    for (x, label) in net.inputs(t)? {
        let mut pool = marking.get(x).clone();
        for v in &label.vars {
            pool.extend(&before.connected(r.token(v)?).map_tokens(&mut unstamp));
        }
        marking.set(x.clone(), pool);
    }
    if let Some(reason) = bad {
        return Err(Error::Conservation(reason));
    }

    let mut history = s.history.clone();
    history.remove(t, c.key);
    Ok(State { marking, history })
}

/// Token conservation: every identity in `ids` occurs exactly once and no
/// other identity occurs; every bond instance occurs in at most one place.
pub fn check_conservation(ids: &BTreeSet<TokenId>, m: &Marking) -> Result<()> {
    let mut counts: BTreeMap<&TokenId, usize> = BTreeMap::new();
    for (_, tok) in m.tokens() {
        *counts.entry(&tok.id).or_default() += 1;
    }
    for id in ids {
        let n = counts.get(id).copied().unwrap_or(0);
        if n != 1 {
            return Err(Error::Conservation(format!("{id} occurs {n} times")));
        }
    }
    if let Some(id) = counts.keys().find(|id| !ids.contains(**id)) {
        return Err(Error::Conservation(format!("unexpected instance {id}")));
    }
    for (p, b) in m.bonds() {
        if m.count_bond(b) > 1 {
            return Err(Error::Conservation(format!(
                "bond {b} occurs in several places (one is {p})"
            )));
        }
        let (x, y) = b.endpoints();
        if !m.get(p).contains_token(x) || !m.get(p).contains_token(y) {
            return Err(Error::Conservation(format!(
                "bond {b} in {p} has an endpoint elsewhere"
            )));
        }
    }
    Ok(())
}

/// Bond bookkeeping of a single step, on identities: bonds in the created set
/// are present afterwards, bonds in the destroyed set are absent, and every
/// other bond is present afterwards exactly when it was present before.
pub fn check_bond_effects(
    prev: &Marking,
    next: &Marking,
    created: &BTreeSet<(TokenId, TokenId)>,
    destroyed: &BTreeSet<(TokenId, TokenId)>,
) -> Result<()> {
    let ids = |m: &Marking| -> BTreeSet<(TokenId, TokenId)> {
        m.bonds()
            .map(|(_, b)| (b.ids().0.clone(), b.ids().1.clone()))
            .map(order)
            .collect()
    };
    let (before, after) = (ids(prev), ids(next));
    for b in created {
        if !after.contains(&order(b.clone())) {
            return Err(Error::Conservation(format!(
                "bond {}-{} should exist after the step",
                b.0, b.1
            )));
        }
    }
    for b in destroyed {
        if after.contains(&order(b.clone())) {
            return Err(Error::Conservation(format!(
                "bond {}-{} should be gone after the step",
                b.0, b.1
            )));
        }
    }
    for b in before.symmetric_difference(&after) {
        if !created
            .iter()
            .chain(destroyed)
            .any(|c| order(c.clone()) == *b)
        {
            return Err(Error::Conservation(format!(
                "bond {}-{} changed without being an effect",
                b.0, b.1
            )));
        }
    }
    Ok(())
}

fn order((a, b): (TokenId, TokenId)) -> (TokenId, TokenId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bond identities `𝒲(effect⁺(t))` and `𝒲(effect⁻(t))`.
pub fn effect_bond_ids(
    net: &Net,
    t: &Transition,
    w: &Projection,
) -> Result<(BTreeSet<(TokenId, TokenId)>, BTreeSet<(TokenId, TokenId)>)> {
    let (plus, minus) = net.transition_effects(t)?;
    let inst = |set: BTreeSet<VarBond>| -> Result<BTreeSet<(TokenId, TokenId)>> {
        set.iter()
            .map(|b| {
                let (x, y) = b.ends();
                let a = w.get(x).ok_or_else(|| Error::UnboundVariable(x.clone()))?;
                let c = w.get(y).ok_or_else(|| Error::UnboundVariable(y.clone()))?;
                Ok(order((a.clone(), c.clone())))
            })
            .collect()
    };
    Ok((inst(plus)?, inst(minus)?))
}
