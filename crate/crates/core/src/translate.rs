//! Translation of a multi-token net into an equivalent single-token net,
//! the induced maps on states and actions, and a check that the two
//! reachable transition systems are isomorphic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::causality::{Action, Direction, Label, Verdict};
use crate::engine::{Assignment, History, HistoryRecord, Projection, State};
use crate::error::{Error, Result};
use crate::marking::{Marking, PathEntry, Stamp, TokenId, TokenInstance};
use crate::net::{ArcLabel, DiagnosticCode, Net};
use crate::space::{canonical_key, explore, ExploreConfig, KeyMode};
use crate::{Transition, TypeName, Var};

/// A net whose initial marking holds exactly one instance of every type,
/// with index 1 and an empty path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrpnNet {
    pub net: Net,
    pub initial: Marking,
}

impl SrpnNet {
    /// Checks the single-instance restriction.
    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (p, tok) in self.initial.tokens() {
            if tok.id.index != 1 || !tok.path.is_empty() {
                return Err(Error::Invalid(format!(
                    "{tok} in {p} is not a single initial instance"
                )));
            }
            if !seen.insert(tok.ty()) {
                return Err(Error::Invalid(format!(
                    "type {} has more than one instance",
                    tok.ty()
                )));
            }
        }
        if let Some(ty) = self.net.types().iter().find(|ty| !seen.contains(ty)) {
            return Err(Error::Invalid(format!("type {ty} has no instance")));
        }
        Ok(())
    }
}

/// Name maps between a net and its single-token translation.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TranslationMaps {
    /// Instance identity `(A, i)` to its single type `A_i`.
    pub type_map: BTreeMap<TokenId, TypeName>,
    /// Transition and projected assignment to the instantiated transition.
    pub trans_map: BTreeMap<(Transition, Projection), Transition>,
    /// Variable and the instance it is bound to, to the instantiated variable.
    pub var_map: BTreeMap<(Var, TokenId), Var>,
}

impl TranslationMaps {
    /// Maps of a net that already holds a single instance per type: every
    /// name maps to itself.
    pub fn identity(net: &Net, m0: &Marking) -> Result<Self> {
        let mut maps = Self::default();
        for (_, tok) in m0.tokens() {
            if tok.id.index != 1
                || maps
                    .type_map
                    .insert(tok.id.clone(), tok.ty().clone())
                    .is_some()
            {
                return Err(Error::Precondition(format!(
                    "{} is not the single instance of its type",
                    tok.id
                )));
            }
        }
        let ids: Vec<TokenId> = maps.type_map.keys().cloned().collect();
        for (v, ty) in net.variables() {
            for id in ids.iter().filter(|id| &id.ty == ty) {
                maps.var_map.insert((v.clone(), id.clone()), v.clone());
            }
        }
        for t in net.transitions() {
            for f in projections(net, t, &ids)? {
                maps.trans_map.insert((t.clone(), f), t.clone());
            }
        }
        Ok(maps)
    }

    pub fn ty(&self, id: &TokenId) -> Result<&TypeName> {
        self.type_map
            .get(id)
            .ok_or_else(|| Error::Unmapped(format!("instance {id}")))
    }

    pub fn var(&self, v: &Var, id: &TokenId) -> Result<&Var> {
        self.var_map
            .get(&(v.clone(), id.clone()))
            .ok_or_else(|| Error::Unmapped(format!("variable {v} bound to {id}")))
    }

    pub fn transition(&self, t: &Transition, f: &Projection) -> Result<&Transition> {
        self.trans_map
            .get(&(t.clone(), f.clone()))
            .ok_or_else(|| Error::Unmapped(format!("transition {t} with ({f})")))
    }

    /// `f′`: the image of a projected assignment, `a_i ↦ (A_i, 1)`.
    pub fn projection(&self, f: &Projection) -> Result<Projection> {
        let mut out = BTreeMap::new();
        for (v, id) in f.iter() {
            out.insert(
                self.var(v, id)?.clone(),
                TokenId::new(self.ty(id)?.clone(), 1),
            );
        }
        Ok(Projection(out))
    }

    /// `st`: the image of a token instance of state `s`.
    pub fn token(&self, s: &State, tok: &TokenInstance) -> Result<TokenInstance> {
        let mut path = Vec::with_capacity(tok.path.len());
        for e in &tok.path {
            let f = s.history.binding(&e.transition, e.key).ok_or_else(|| {
                Error::Unmapped(format!("occurrence {} of {}", e.key, e.transition))
            })?;
            let stamp = match &e.stamp {
                Stamp::Var(v) => {
                    let id = f
                        .get(v)
                        .ok_or_else(|| Error::Unmapped(format!("{e} of {tok}")))?;
                    Stamp::Var(self.var(v, id)?.clone())
                }
                Stamp::Bystander => Stamp::Bystander,
            };
            path.push(PathEntry::new(
                rank(&s.history, &e.transition, e.key, f),
                self.transition(&e.transition, f)?.clone(),
                stamp,
            ));
        }
        Ok(TokenInstance::with_path(self.ty(&tok.id)?.clone(), 1, path))
    }

    /// `γ`: the image of a state.
    pub fn state(&self, s: &State) -> Result<State> {
        let mut failure = None;
        let marking = s.marking.map_tokens(|tok| match self.token(s, tok) {
            Ok(t) => t,
            Err(e) => {
                failure.get_or_insert(e);
                tok.clone()
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let mut history = History::new();
        for (t, recs) in s.history.transitions() {
            let mut counts: BTreeMap<&Projection, u32> = BTreeMap::new();
            for f in recs.values() {
                let n = counts.entry(f).or_default();
                *n += 1;
                history.insert(
                    self.transition(t, f)?.clone(),
                    HistoryRecord {
                        key: *n,
                        binding: self.projection(f)?,
                    },
                );
            }
        }
        Ok(State { marking, history })
    }

    /// `η` on key-free labels.
    pub fn label(&self, l: &Label) -> Result<Label> {
        Ok(Label::new(
            l.direction,
            self.transition(&l.transition, &l.binding)?.clone(),
            self.projection(&l.binding)?,
        ))
    }

    /// `η` on a concrete action enabled in `s`.
    pub fn action(&self, s: &State, a: &Action) -> Result<Action> {
        let f = a.assignment.projection();
        let mut pairs = Vec::with_capacity(a.assignment.len());
        for (v, tok) in a.assignment.iter() {
            pairs.push((self.var(v, &tok.id)?.clone(), self.token(s, tok)?));
        }
        let key = match a.key {
            Some(k) => {
                let recorded = s.history.binding(&a.transition, k).ok_or_else(|| {
                    Error::Unmapped(format!("occurrence {k} of {}", a.transition))
                })?;
                Some(rank(&s.history, &a.transition, k, recorded))
            }
            None => None,
        };
        Ok(Action {
            direction: a.direction,
            transition: self.transition(&a.transition, &f)?.clone(),
            assignment: Assignment::from_pairs(pairs),
            key,
        })
    }
}

/// Position (from 1) of occurrence `k` among the live occurrences of `t`
/// recorded with projection `f`.
fn rank(h: &History, t: &Transition, k: u32, f: &Projection) -> u32 {
    let below = h
        .records(t)
        .filter(|r| r.key < k && &r.binding == f)
        .count();
    below as u32 + 1
}

/// Injective, type-respecting maps from the guard variables of `t` to
/// instance identities, in canonical order.
fn projections(net: &Net, t: &Transition, ids: &[TokenId]) -> Result<Vec<Projection>> {
    let vars: Vec<&Var> = net.guard_vars(t)?.iter().collect();
    let mut out = Vec::new();
    let mut chosen: Vec<&TokenId> = Vec::new();
    fn go<'a>(
        net: &Net,
        vars: &[&Var],
        ids: &'a [TokenId],
        chosen: &mut Vec<&'a TokenId>,
        out: &mut Vec<Projection>,
    ) {
        let Some(v) = vars.get(chosen.len()) else {
            out.push(Projection(
                vars.iter()
                    .map(|v| (*v).clone())
                    .zip(chosen.iter().map(|id| (*id).clone()))
                    .collect(),
            ));
            return;
        };
        let ty = net.var_type(v);
        for id in ids {
            if Some(&id.ty) == ty && !chosen.contains(&id) {
                chosen.push(id);
                go(net, vars, ids, chosen, out);
                chosen.pop();
            }
        }
    }
    go(net, &vars, ids, &mut chosen, &mut out);
    Ok(out)
}

fn instance_name(base: &str, index: u32) -> String {
    format!("{base}_{index}")
}

fn transition_name(t: &Transition, f: &Projection) -> Transition {
    if f.0.is_empty() {
        return t.clone();
    }
    let mut name = format!("{t}_");
    for (v, id) in f.iter() {
        name.push('_');
        name.push_str(v.as_str());
        name.push_str(&format!("{}", id.index));
    }
    Transition::new(name)
}

fn map_arc(maps: &TranslationMaps, label: &ArcLabel, f: &Projection) -> Result<ArcLabel> {
    let bound = |v: &Var| -> Result<Var> {
        let id = f
            .get(v)
            .ok_or_else(|| Error::Unmapped(format!("variable {v} is not in the guard")))?;
        Ok(maps.var(v, id)?.clone())
    };
    let mut out = ArcLabel::new(label.vars.iter().map(bound).collect::<Result<Vec<_>>>()?);
    for b in &label.bonds {
        let (x, y) = b.ends();
        out = out.bond(bound(x)?, bound(y)?);
    }
    Ok(out)
}

/// Builds the single-token net: one type `A_i` per initial instance, one
/// variable `a_i` per variable and instance of its type, one transition
/// per transition and injective projected assignment of its guard, with arcs
/// instantiated through that assignment.
pub fn to_srpn(net: &Net, m0: &Marking) -> Result<(SrpnNet, TranslationMaps)> {
    let wf = net.validate_well_formed();
    if let Some(d) = wf.first() {
        return Err(Error::Precondition(format!(
            "net is not well formed: {}",
            d.message
        )));
    }
    let diags = net.validate_initial_marking(m0);
    if let Some(d) = diags.first() {
        let msg = format!("invalid initial marking: {}", d.message);
        return Err(if d.code == DiagnosticCode::PathNotEmpty {
            Error::Precondition(msg)
        } else {
            Error::Invalid(msg)
        });
    }
    let mut maps = TranslationMaps::default();
    let ids: Vec<TokenId> = m0.token_ids().into_iter().collect();
    let mut b = Net::builder();
    for id in &ids {
        let ty = TypeName::new(instance_name(id.ty.as_str(), id.index));
        b = b.ty(ty.clone());
        maps.type_map.insert(id.clone(), ty);
    }
    for bt in net.bond_types() {
        let (x, y) = bt.ends();
        for i in ids.iter().filter(|i| &i.ty == x) {
            for j in ids.iter().filter(|j| &j.ty == y && *j != i) {
                b = b.bond_type(maps.type_map[i].clone(), maps.type_map[j].clone());
            }
        }
    }
    for (v, ty) in net.variables() {
        for id in ids.iter().filter(|id| &id.ty == ty) {
            let name = Var::new(instance_name(v.as_str(), id.index));
            b = b.variable(name.clone(), maps.type_map[id].clone());
            maps.var_map.insert((v.clone(), id.clone()), name);
        }
    }
    for p in net.places() {
        b = b.place(p.clone());
    }
    for t in net.transitions() {
        for f in projections(net, t, &ids)? {
            let tf = transition_name(t, &f);
            if maps.trans_map.values().any(|x| x == &tf) || net.has_transition(&tf) && tf != *t {
                return Err(Error::Invalid(format!(
                    "instantiated transition name {tf} clashes"
                )));
            }
            b = b.transition(tf.clone());
            for (x, label) in net.inputs(t)? {
                b = b.arc_in(x.clone(), tf.clone(), map_arc(&maps, label, &f)?);
            }
            for (x, label) in net.outputs(t)? {
                b = b.arc_out(tf.clone(), x.clone(), map_arc(&maps, label, &f)?);
            }
            maps.trans_map.insert((t.clone(), f), tf);
        }
    }
    let initial = m0.map_tokens(|tok| TokenInstance::initial(maps.type_map[&tok.id].clone(), 1));
    let srpn = SrpnNet {
        net: b.build(),
        initial,
    };
    srpn.check()?;
    Ok((srpn, maps))
}

pub fn map_state(maps: &TranslationMaps, s: &State) -> Result<State> {
    maps.state(s)
}

pub fn map_action(maps: &TranslationMaps, s: &State, a: &Action) -> Result<Action> {
    maps.action(s, a)
}

pub fn map_label(maps: &TranslationMaps, l: &Label) -> Result<Label> {
    maps.label(l)
}

/// Explores both nets to `depth` and checks that `γ` is a bijection between
/// the explored states that maps the initial state to the initial state and,
/// on interior states, source edges to target edges through `η` and back.
///
/// Source states are identified up to occurrence-key renaming; target states
/// exactly.
pub fn verify_iso(
    net: &Net,
    s0: &State,
    target: &SrpnNet,
    maps: &TranslationMaps,
    depth: usize,
) -> Result<Verdict> {
    if let Some(d) = target.net.validate_well_formed().first() {
        return Ok(Verdict::fail(
            format!(
                "target is not well formed: {}: {}",
                d.code.as_str(),
                d.message
            ),
            Vec::new(),
        ));
    }
    let src = explore(
        net,
        s0,
        &ExploreConfig {
            depth,
            key_mode: KeyMode::Quotient,
            ..Default::default()
        },
    )?;
    let dst = explore(
        &target.net,
        &State::initial(target.initial.clone()),
        &ExploreConfig {
            depth,
            key_mode: KeyMode::Exact,
            ..Default::default()
        },
    )?;
    if src.truncated || dst.truncated {
        return Err(Error::BudgetExceeded(format!(
            "state cap reached at depth {depth}"
        )));
    }
    let mut gamma = Vec::with_capacity(src.states.len());
    let mut hit = BTreeMap::new();
    for (i, st) in src.states.iter().enumerate() {
        let image = map_state(maps, &st.state)?;
        let Some(j) = dst.find(&canonical_key(&image, KeyMode::Exact)) else {
            return Ok(Verdict::fail(
                format!("image of source state {i} is not reachable in the target"),
                witness(&src, i),
            ));
        };
        if let Some(prev) = hit.insert(j, i) {
            return Ok(Verdict::fail(
                format!("source states {prev} and {i} have the same image"),
                witness(&src, i),
            ));
        }
        gamma.push(j);
    }
    if gamma[src.initial()] != dst.initial() {
        return Ok(Verdict::fail(
            "initial states do not correspond".into(),
            Vec::new(),
        ));
    }
    if let Some(j) = (0..dst.states.len()).find(|j| !hit.contains_key(j)) {
        return Ok(Verdict::fail(
            format!("target state {j} has no preimage"),
            Vec::new(),
        ));
    }
    for i in (0..src.states.len()).filter(|&i| src.is_interior(i)) {
        let mut want = BTreeSet::new();
        for e in src.out_edges(i) {
            want.insert((map_label(maps, &e.label)?, gamma[e.to], e.label.clone()));
        }
        let have: BTreeSet<(Label, usize)> = dst
            .out_edges(gamma[i])
            .map(|e| (e.label.clone(), e.to))
            .collect();
        for (l, to, orig) in &want {
            if !have.contains(&(l.clone(), *to)) {
                let mut w = witness(&src, i).pop().unwrap_or_default();
                w.push(orig.clone());
                return Ok(Verdict::fail(
                    format!("source edge {orig} has no image {l} in the target"),
                    alloc::vec![w],
                ));
            }
        }
        let images: BTreeSet<(Label, usize)> = want.into_iter().map(|(l, to, _)| (l, to)).collect();
        if let Some((l, _)) = have.iter().find(|e| !images.contains(e)) {
            let dir = if l.direction == Direction::Forward {
                "forward"
            } else {
                "reverse"
            };
            return Ok(Verdict::fail(
                format!("target {dir} edge {l} from the image of source state {i} has no preimage"),
                witness(&src, i),
            ));
        }
    }
    Ok(Verdict::Pass)
}

/// A shortest label path from the initial state to state `i`.
fn witness(lts: &crate::Lts, i: usize) -> Vec<Vec<Label>> {
    let mut parent: BTreeMap<usize, (usize, &Label)> = BTreeMap::new();
    let mut frontier = alloc::vec![lts.initial()];
    let mut seen = BTreeSet::from([lts.initial()]);
    while !frontier.is_empty() && !seen.contains(&i) {
        let mut next = Vec::new();
        for &u in &frontier {
            for e in lts.out_edges(u) {
                if seen.insert(e.to) {
                    parent.insert(e.to, (u, &e.label));
                    next.push(e.to);
                }
            }
        }
        frontier = next;
    }
    let mut path = Vec::new();
    let mut at = i;
    while let Some((u, l)) = parent.get(&at) {
        path.push((*l).clone());
        at = *u;
    }
    path.reverse();
    alloc::vec![path]
}
