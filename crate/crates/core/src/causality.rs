//! Actions and traces, causal equivalence of states and traces, and
//! executable checks of the loop, square, reverse-independence, parabolic and
//! causal-consistency properties.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::engine::{
    enumerate_forward, enumerate_reverse, fire_forward, fire_reverse, Assignment, Projection,
    ReverseCandidate, State,
};
use crate::error::{Error, Result};
use crate::marking::{Stamp, TokenId, TokenInstance};
use crate::net::Net;
use crate::space::{canonical_key, KeyMode, StateKey};
use crate::{Transition, TypeName};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn is_forward(self) -> bool {
        self == Direction::Forward
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Reverse => "rev",
        }
    }
}

/// An executed step `(t, 𝒲)` or `(t̲, ℛ)` with full token instances; reverse
/// steps also carry the occurrence key they undo.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub direction: Direction,
    pub transition: Transition,
    pub assignment: Assignment,
    pub key: Option<u32>,
}

impl Action {
    pub fn forward(transition: impl Into<Transition>, assignment: Assignment) -> Self {
        Self {
            direction: Direction::Forward,
            transition: transition.into(),
            assignment,
            key: None,
        }
    }

    pub fn reverse(transition: impl Into<Transition>, candidate: ReverseCandidate) -> Self {
        Self {
            direction: Direction::Reverse,
            transition: transition.into(),
            assignment: candidate.assignment,
            key: Some(candidate.key),
        }
    }

    /// The key-free label of the step.
    pub fn label(&self) -> Label {
        Label {
            direction: self.direction,
            transition: self.transition.clone(),
            binding: self.assignment.projection(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.key {
            Some(k) => write!(f, "~{}#{}({})", self.transition, k, self.assignment),
            None => write!(f, "{}({})", self.transition, self.assignment),
        }
    }
}

/// An action identified by direction, transition and the token identities it
/// binds. Within a state this determines the concrete action: forward
/// assignments pick tokens by identity, and a reverse label picks the unique
/// occurrence whose tokens carry its stamp last.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub direction: Direction,
    pub transition: Transition,
    pub binding: Projection,
}

impl Label {
    pub fn new(
        direction: Direction,
        transition: impl Into<Transition>,
        binding: Projection,
    ) -> Self {
        Self {
            direction,
            transition: transition.into(),
            binding,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tilde = if self.direction.is_forward() { "" } else { "~" };
        write!(f, "{tilde}{}({})", self.transition, self.binding)
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A sequence of executed steps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Trace {
    pub steps: Vec<Action>,
}

impl Trace {
    pub fn new(steps: Vec<Action>) -> Self {
        Self { steps }
    }

    pub fn labels(&self) -> Vec<Label> {
        self.steps.iter().map(Action::label).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Outcome of a property check; failures carry a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(Counterexample),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub(crate) fn fail(message: String, traces: Vec<Vec<Label>>) -> Self {
        Verdict::Fail(Counterexample { message, traces })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub message: String,
    /// Offending interleavings or trace pairs, as labels.
    pub traces: Vec<Vec<Label>>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)?;
        for t in &self.traces {
            f.write_str("\n  <")?;
            for (n, l) in t.iter().enumerate() {
                if n > 0 {
                    f.write_str("; ")?;
                }
                write!(f, "{l}")?;
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}

/// Every enabled action in `s` with its resulting state: forward actions of
/// each transition (canonical order) first, then reverse actions.
pub fn successors(net: &Net, s: &State) -> Result<Vec<(Action, State)>> {
    let mut out = Vec::new();
    for t in net.transitions() {
        for a in enumerate_forward(net, s, t)? {
            let next = fire_forward(net, s, t, &a)?;
            out.push((Action::forward(t.clone(), a), next));
        }
    }
    for t in net.transitions() {
        for c in enumerate_reverse(net, s, t)? {
            let next = fire_reverse(net, s, t, &c)?;
            out.push((Action::reverse(t.clone(), c), next));
        }
    }
    Ok(out)
}

/// Enabled actions without firing them.
pub fn enabled_actions(net: &Net, s: &State) -> Result<Vec<Action>> {
    let mut out = Vec::new();
    for t in net.transitions() {
        out.extend(
            enumerate_forward(net, s, t)?
                .into_iter()
                .map(|a| Action::forward(t.clone(), a)),
        );
    }
    for t in net.transitions() {
        out.extend(
            enumerate_reverse(net, s, t)?
                .into_iter()
                .map(|c| Action::reverse(t.clone(), c)),
        );
    }
    Ok(out)
}

/// The enabled action of `s` carrying `label`, if any.
pub fn resolve(net: &Net, s: &State, label: &Label) -> Result<Option<Action>> {
    let t = &label.transition;
    Ok(match label.direction {
        Direction::Forward => enumerate_forward(net, s, t)?
            .into_iter()
            .find(|a| a.projection() == label.binding)
            .map(|a| Action::forward(t.clone(), a)),
        Direction::Reverse => enumerate_reverse(net, s, t)?
            .into_iter()
            .find(|c| c.assignment.projection() == label.binding)
            .map(|c| Action::reverse(t.clone(), c)),
    })
}

/// Executes a concrete action.
pub fn apply(net: &Net, s: &State, action: &Action) -> Result<State> {
    match (action.direction, action.key) {
        (Direction::Forward, _) => fire_forward(net, s, &action.transition, &action.assignment),
        (Direction::Reverse, Some(key)) => fire_reverse(
            net,
            s,
            &action.transition,
            &ReverseCandidate {
                key,
                assignment: action.assignment.clone(),
            },
        ),
        (Direction::Reverse, None) => Err(Error::Precondition(format!(
            "reverse action {action} has no key"
        ))),
    }
}

/// Replays labels from `s0`, returning the visited states (`len + 1` of them)
/// and the concrete actions.
pub fn replay_labels(net: &Net, s0: &State, labels: &[Label]) -> Result<(Vec<State>, Vec<Action>)> {
    let mut states = alloc::vec![s0.clone()];
    let mut actions = Vec::with_capacity(labels.len());
    for (step, l) in labels.iter().enumerate() {
        let here = states.last().expect("non-empty");
        let a = resolve(net, here, l)?.ok_or_else(|| Error::NotExecutable {
            step,
            reason: format!("{l} is not enabled"),
        })?;
        let next = apply(net, here, &a)?;
        actions.push(a);
        states.push(next);
    }
    Ok((states, actions))
}

/// Replays a concrete trace, checking that every step is enabled as given.
pub fn replay(net: &Net, s0: &State, trace: &Trace) -> Result<Vec<State>> {
    let mut states = alloc::vec![s0.clone()];
    for (step, a) in trace.steps.iter().enumerate() {
        let here = states.last().expect("non-empty");
        let next = apply(net, here, a).map_err(|e| Error::NotExecutable {
            step,
            reason: format!("{e}"),
        })?;
        states.push(next);
    }
    Ok(states)
}

/// Causal equivalence of states: equal up to a per-transition renaming of
/// occurrence keys (so the same tokens sit in the same places with the same
/// causal paths and bonds, and the live occurrences match).
pub fn states_equivalent(s1: &State, s2: &State) -> bool {
    canonical_key(s1, KeyMode::Quotient) == canonical_key(s2, KeyMode::Quotient)
}

/// The coarser relation that matches, per place, token types with causal
/// paths only (ignoring instance indices, bonds and keys).
pub fn cpath_equivalent(s1: &State, s2: &State) -> bool {
    type Profile = BTreeMap<(TypeName, Vec<(Transition, Stamp)>), usize>;
    let profile = |s: &State| -> BTreeMap<crate::Place, Profile> {
        let mut out: BTreeMap<crate::Place, Profile> = BTreeMap::new();
        for (p, tok) in s.marking.tokens() {
            *out.entry(p.clone())
                .or_default()
                .entry((tok.ty().clone(), tok.cpath()))
                .or_default() += 1;
        }
        out
    };
    // Matching in either direction only needs the same set of (type, cpath)
    // per place; multiplicities are irrelevant to the existential clauses.
    let shape =
        |s: &State| -> BTreeMap<crate::Place, BTreeSet<(TypeName, Vec<(Transition, Stamp)>)>> {
            profile(s)
                .into_iter()
                .map(|(p, m)| (p, m.into_keys().collect()))
                .collect()
        };
    shape(s1) == shape(s2)
}

/// Two actions are concurrent in `s` when every token they bind is present
/// in `s` and no token bound by one lies in the same connected component (of
/// its place) as a token bound by the other.
pub fn actions_concurrent(s: &State, a1: &Action, a2: &Action) -> bool {
    let mut comp: BTreeMap<&TokenId, (&crate::Place, usize)> = BTreeMap::new();
    for (p, pool) in s.marking.places() {
        for (id, c) in pool.component_ids() {
            comp.insert(id, (p, c));
        }
    }
    let find = |tok: &TokenInstance| -> Option<(&crate::Place, usize)> {
        let (p, c) = comp.get(&tok.id).copied()?;
        s.marking.get(p).contains_token(tok).then_some((p, c))
    };
    let mut sides = [Vec::new(), Vec::new()];
    for (side, a) in sides.iter_mut().zip([a1, a2]) {
        for (_, tok) in a.assignment.iter() {
            match find(tok) {
                Some(c) => side.push(c),
                None => return false,
            }
        }
    }
    sides[0].iter().all(|c| !sides[1].contains(c))
}

/// Forward and reverse actions of the same transition where the reverse
/// assignment, with each token's last entry removed, is the forward one.
pub fn actions_opposite(a1: &Action, a2: &Action) -> bool {
    let (fwd, rev) = match (a1.direction, a2.direction) {
        (Direction::Forward, Direction::Reverse) => (a1, a2),
        (Direction::Reverse, Direction::Forward) => (a2, a1),
        _ => return false,
    };
    if fwd.transition != rev.transition || fwd.assignment.len() != rev.assignment.len() {
        return false;
    }
    fwd.assignment
        .iter()
        .all(|(v, tok)| rev.assignment.get(v).and_then(TokenInstance::init).as_ref() == Some(tok))
}

const CLOSURE_BUDGET: usize = 200_000;

/// Single rewrites of an executable label sequence: swaps of adjacent
/// concurrent actions and removal of adjacent opposite pairs.
fn rewrites(net: &Net, s0: &State, labels: &[Label]) -> Result<Vec<Vec<Label>>> {
    let (states, actions) = replay_labels(net, s0, labels)?;
    let mut out = Vec::new();
    for i in 0..actions.len().saturating_sub(1) {
        let (a, b) = (&actions[i], &actions[i + 1]);
        if actions_opposite(a, b) {
            let mut shorter = labels.to_vec();
            shorter.drain(i..i + 2);
            out.push(shorter);
        }
        if actions_concurrent(&states[i], a, b)
            && resolve(net, &states[i], &labels[i + 1])?.as_ref() == Some(b)
        {
            let mut swapped = labels.to_vec();
            swapped.swap(i, i + 1);
            if swapped != labels {
                out.push(swapped);
            }
        }
    }
    Ok(out)
}

fn closure(net: &Net, s0: &State, start: Vec<Label>) -> Result<BTreeSet<Vec<Label>>> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(form) = queue.pop_front() {
        for next in rewrites(net, s0, &form)? {
            if replay_labels(net, s0, &next).is_err() {
                continue;
            }
            if seen.insert(next.clone()) {
                if seen.len() > CLOSURE_BUDGET {
                    return Err(Error::BudgetExceeded(format!(
                        "rewrite closure above {CLOSURE_BUDGET} traces"
                    )));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// Causal equivalence of traces from `s0`: the two rewrite closures (swapping
/// adjacent concurrent actions, cancelling adjacent opposite pairs) meet.
pub fn traces_equivalent(net: &Net, s0: &State, t1: &Trace, t2: &Trace) -> Result<bool> {
    replay(net, s0, t1)?;
    replay(net, s0, t2)?;
    let (l1, l2) = (t1.labels(), t2.labels());
    if l1 == l2 {
        return Ok(true);
    }
    let c1 = closure(net, s0, l1)?;
    let c2 = closure(net, s0, l2)?;
    Ok(c1.intersection(&c2).next().is_some())
}

/// Rewrites `t` into all-reverse steps followed by all-forward steps by
/// cancelling opposite pairs and moving reverse steps ahead of forward ones.
pub fn parabolic_normalize(net: &Net, s0: &State, t: &Trace) -> Result<(Trace, Trace)> {
    replay(net, s0, t)?;
    let mut labels = t.labels();
    'rewrite: loop {
        let (states, actions) = replay_labels(net, s0, &labels)?;
        for i in 0..actions.len().saturating_sub(1) {
            if actions_opposite(&actions[i], &actions[i + 1]) {
                labels.drain(i..i + 2);
                continue 'rewrite;
            }
        }
        for i in 0..actions.len().saturating_sub(1) {
            let (a, b) = (&actions[i], &actions[i + 1]);
            if a.direction.is_forward() && !b.direction.is_forward() {
                if !actions_concurrent(&states[i], a, b) {
                    return Err(Error::Precondition(format!(
                        "{a} and {b} are neither opposite nor concurrent"
                    )));
                }
                labels.swap(i, i + 1);
                continue 'rewrite;
            }
        }
        let (_, actions) = replay_labels(net, s0, &labels)?;
        let split = actions
            .iter()
            .position(|a| a.direction.is_forward())
            .unwrap_or(actions.len());
        let mut reverses = actions;
        let forwards = reverses.split_off(split);
        return Ok((Trace::new(reverses), Trace::new(forwards)));
    }
}

fn is_enabled(net: &Net, s: &State, a: &Action) -> Result<bool> {
    Ok(resolve(net, s, &a.label())?.as_ref() == Some(a))
}

/// Both interleavings of two concurrent enabled actions complete and reach
/// causally equivalent states.
pub fn check_square(net: &Net, s: &State, a1: &Action, a2: &Action) -> Result<Verdict> {
    if !is_enabled(net, s, a1)? || !is_enabled(net, s, a2)? {
        return Err(Error::Precondition(format!(
            "{a1} and {a2} must both be enabled"
        )));
    }
    if !actions_concurrent(s, a1, a2) {
        return Err(Error::Precondition(format!(
            "{a1} and {a2} are not concurrent"
        )));
    }
    let order = [a1.label(), a2.label()];
    let swapped = [a2.label(), a1.label()];
    let (r1, r2) = (
        replay_labels(net, s, &order),
        replay_labels(net, s, &swapped),
    );
    match (r1, r2) {
        (Ok((s1, _)), Ok((s2, _))) => {
            if states_equivalent(s1.last().expect("end"), s2.last().expect("end")) {
                Ok(Verdict::Pass)
            } else {
                Ok(Verdict::fail(
                    "interleavings end in inequivalent states".into(),
                    alloc::vec![order.to_vec(), swapped.to_vec()],
                ))
            }
        }
        (r1, _) => {
            let which = if r1.is_err() {
                order.to_vec()
            } else {
                swapped.to_vec()
            };
            Ok(Verdict::fail(
                "an interleaving is not executable".into(),
                alloc::vec![which],
            ))
        }
    }
}

/// Loop property for a forward step `(t, a)` from `s`: reversing it restores
/// `s` exactly, and reversing then refiring from the successor reaches a
/// causally equivalent state.
pub fn check_loop(net: &Net, s: &State, t: &Transition, a: &Assignment) -> Result<Verdict> {
    let fwd = Action::forward(t.clone(), a.clone());
    if !is_enabled(net, s, &fwd)? {
        return Err(Error::Precondition(format!("{fwd} is not enabled")));
    }
    let s1 = fire_forward(net, s, t, a)?;
    let undo = Label::new(Direction::Reverse, t.clone(), a.projection());
    let Some(rev) = resolve(net, &s1, &undo)? else {
        return Ok(Verdict::fail(
            format!("no reverse of {fwd} after firing it"),
            alloc::vec![alloc::vec![fwd.label()]],
        ));
    };
    if !actions_opposite(&fwd, &rev) {
        return Ok(Verdict::fail(
            format!("{rev} is not opposite to {fwd}"),
            alloc::vec![alloc::vec![fwd.label(), undo]],
        ));
    }
    let s2 = apply(net, &s1, &rev)?;
    if s2 != *s {
        return Ok(Verdict::fail(
            "forward then reverse does not restore the state".into(),
            alloc::vec![alloc::vec![fwd.label(), undo]],
        ));
    }
    check_loop_reverse(net, &s1, &rev)
}

/// Loop property for a reverse step from `s`: refiring the opposite forward
/// step reaches a state causally equivalent to `s`.
pub fn check_loop_reverse(net: &Net, s: &State, rev: &Action) -> Result<Verdict> {
    if rev.direction.is_forward() || !is_enabled(net, s, rev)? {
        return Err(Error::Precondition(format!(
            "{rev} is not an enabled reverse action"
        )));
    }
    let s1 = apply(net, s, rev)?;
    let redo = Label::new(
        Direction::Forward,
        rev.transition.clone(),
        rev.label().binding,
    );
    let Some(fwd) = resolve(net, &s1, &redo)? else {
        return Ok(Verdict::fail(
            format!("{redo} is not enabled after {rev}"),
            alloc::vec![alloc::vec![rev.label()]],
        ));
    };
    let s2 = apply(net, &s1, &fwd)?;
    if states_equivalent(&s2, s) {
        Ok(Verdict::Pass)
    } else {
        Ok(Verdict::fail(
            "reverse then forward is not causally equivalent".into(),
            alloc::vec![alloc::vec![rev.label(), redo]],
        ))
    }
}

/// Any two distinct enabled reverse actions in `s` are concurrent.
pub fn check_reverse_independence(net: &Net, s: &State) -> Result<Verdict> {
    let revs: Vec<Action> = enabled_actions(net, s)?
        .into_iter()
        .filter(|a| !a.direction.is_forward())
        .collect();
    for (i, a) in revs.iter().enumerate() {
        for b in &revs[i + 1..] {
            if !actions_concurrent(s, a, b) {
                return Ok(Verdict::fail(
                    format!("{a} and {b} are not concurrent"),
                    alloc::vec![alloc::vec![a.label(), b.label()]],
                ));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// Enumerates every executable label sequence of length at most `max_len`
/// from `s0`, with the quotient key of its end state.
pub fn enumerate_traces(
    net: &Net,
    s0: &State,
    max_len: usize,
    budget: usize,
) -> Result<Vec<(Vec<Label>, StateKey)>> {
    fn go(
        net: &Net,
        s: &State,
        prefix: &mut Vec<Label>,
        left: usize,
        budget: usize,
        out: &mut Vec<(Vec<Label>, StateKey)>,
    ) -> Result<()> {
        if out.len() >= budget {
            return Err(Error::BudgetExceeded(format!("more than {budget} traces")));
        }
        out.push((prefix.clone(), canonical_key(s, KeyMode::Quotient)));
        if left == 0 {
            return Ok(());
        }
        for (a, next) in successors(net, s)? {
            prefix.push(a.label());
            go(net, &next, prefix, left - 1, budget, out)?;
            prefix.pop();
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(net, s0, &mut Vec::new(), max_len, budget, &mut out)?;
    Ok(out)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// For all executable traces of length at most `max_len` from `s0`: two
/// traces are causally equivalent iff their end states are.
///
/// Trace equivalence classes are computed with union-find over single
/// rewrites inside the enumerated set; the verdict compares that partition
/// with the partition by end-state quotient key.
pub fn check_causal_consistency(
    net: &Net,
    s0: &State,
    max_len: usize,
    budget: usize,
) -> Result<Verdict> {
    let traces = enumerate_traces(net, s0, max_len, budget)?;
    let index: BTreeMap<&[Label], usize> = traces
        .iter()
        .enumerate()
        .map(|(i, (l, _))| (l.as_slice(), i))
        .collect();
    let mut uf = UnionFind((0..traces.len()).collect());
    for (i, (labels, _)) in traces.iter().enumerate() {
        for next in rewrites(net, s0, labels)? {
            match index.get(next.as_slice()) {
                Some(&j) => uf.union(i, j),
                None => {
                    return Ok(Verdict::fail(
                        "a rewrite of an executable trace is not executable".into(),
                        alloc::vec![labels.clone(), next],
                    ))
                }
            }
        }
    }
    let mut by_class: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_state: BTreeMap<&StateKey, usize> = BTreeMap::new();
    for (i, (_, key)) in traces.iter().enumerate() {
        let class = uf.find(i);
        if let Some(&j) = by_class.get(&class) {
            if traces[j].1 != *key {
                return Ok(Verdict::fail(
                    "equivalent traces reach inequivalent states".into(),
                    alloc::vec![traces[j].0.clone(), traces[i].0.clone()],
                ));
            }
        } else {
            by_class.insert(class, i);
        }
        if let Some(&j) = by_state.get(key) {
            if uf.find(j) != class {
                return Ok(Verdict::fail(
                    "traces reaching equivalent states are not equivalent".into(),
                    alloc::vec![traces[j].0.clone(), traces[i].0.clone()],
                ));
            }
        } else {
            by_state.insert(key, i);
        }
    }
    Ok(Verdict::Pass)
}
