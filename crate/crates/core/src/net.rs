//! Static net structure and well-formedness.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::marking::{Marking, TokenId};
use crate::{Place, Transition, TypeName, Var};

/// An unordered pair of variables, `a-b`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarBond(Var, Var);

impl VarBond {
    pub fn new(a: impl Into<Var>, b: impl Into<Var>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn ends(&self) -> (&Var, &Var) {
        (&self.0, &self.1)
    }
}

impl fmt::Display for VarBond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl fmt::Debug for VarBond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An unordered pair of token types, a bond type `A-B`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeBond(TypeName, TypeName);

impl TypeBond {
    pub fn new(a: impl Into<TypeName>, b: impl Into<TypeName>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn ends(&self) -> (&TypeName, &TypeName) {
        (&self.0, &self.1)
    }
}

impl fmt::Display for TypeBond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl fmt::Debug for TypeBond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The label of an arc: a set of variables and a set of variable bonds.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct ArcLabel {
    pub vars: BTreeSet<Var>,
    pub bonds: BTreeSet<VarBond>,
}

impl ArcLabel {
    pub fn new<V: Into<Var>>(vars: impl IntoIterator<Item = V>) -> Self {
        Self {
            vars: vars.into_iter().map(Into::into).collect(),
            bonds: BTreeSet::new(),
        }
    }

    pub fn bond(mut self, a: impl Into<Var>, b: impl Into<Var>) -> Self {
        self.bonds.insert(VarBond::new(a, b));
        self
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.bonds.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct Shape {
    inputs: Vec<(Place, ArcLabel)>,
    outputs: Vec<(Place, ArcLabel)>,
    guard_vars: BTreeSet<Var>,
    effect_vars: BTreeSet<Var>,
    guard_bonds: BTreeSet<VarBond>,
    effect_bonds: BTreeSet<VarBond>,
}

/// A multi reversing Petri net `(P, T, 𝒜, 𝒜_V, ℬ, F)`.
///
/// Immutable once built. Per-transition views (`∘t`, `t∘`, guard, effects)
/// are computed at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Net {
    places: BTreeSet<Place>,
    transitions: BTreeSet<Transition>,
    types: BTreeSet<TypeName>,
    variables: BTreeMap<Var, TypeName>,
    bond_types: BTreeSet<TypeBond>,
    arcs_in: BTreeMap<(Place, Transition), ArcLabel>,
    arcs_out: BTreeMap<(Transition, Place), ArcLabel>,
    shapes: BTreeMap<Transition, Shape>,
}

/// Incremental construction of a [`Net`].
#[derive(Clone, Debug, Default)]
pub struct NetBuilder {
    places: BTreeSet<Place>,
    transitions: BTreeSet<Transition>,
    types: BTreeSet<TypeName>,
    variables: BTreeMap<Var, TypeName>,
    bond_types: BTreeSet<TypeBond>,
    arcs_in: BTreeMap<(Place, Transition), ArcLabel>,
    arcs_out: BTreeMap<(Transition, Place), ArcLabel>,
}

impl NetBuilder {
    pub fn ty(mut self, name: impl Into<TypeName>) -> Self {
        self.types.insert(name.into());
        self
    }

    pub fn types<T: Into<TypeName>>(mut self, names: impl IntoIterator<Item = T>) -> Self {
        self.types.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn bond_type(mut self, a: impl Into<TypeName>, b: impl Into<TypeName>) -> Self {
        self.bond_types.insert(TypeBond::new(a, b));
        self
    }

    pub fn variable(mut self, name: impl Into<Var>, ty: impl Into<TypeName>) -> Self {
        self.variables.insert(name.into(), ty.into());
        self
    }

    pub fn place(mut self, name: impl Into<Place>) -> Self {
        self.places.insert(name.into());
        self
    }

    pub fn transition(mut self, name: impl Into<Transition>) -> Self {
        self.transitions.insert(name.into());
        self
    }

    /// `F(place, transition)`. Empty labels are dropped (no arc).
    pub fn arc_in(
        mut self,
        place: impl Into<Place>,
        transition: impl Into<Transition>,
        label: ArcLabel,
    ) -> Self {
        if !label.is_empty() {
            self.arcs_in
                .insert((place.into(), transition.into()), label);
        }
        self
    }

    /// `F(transition, place)`. Empty labels are dropped (no arc).
    pub fn arc_out(
        mut self,
        transition: impl Into<Transition>,
        place: impl Into<Place>,
        label: ArcLabel,
    ) -> Self {
        if !label.is_empty() {
            self.arcs_out
                .insert((transition.into(), place.into()), label);
        }
        self
    }

    pub fn build(self) -> Net {
        let mut shapes: BTreeMap<Transition, Shape> = self
            .transitions
            .iter()
            .map(|t| (t.clone(), Shape::default()))
            .collect();
        for ((p, t), label) in &self.arcs_in {
            let s = shapes.entry(t.clone()).or_default();
            s.inputs.push((p.clone(), label.clone()));
            s.guard_vars.extend(label.vars.iter().cloned());
            s.guard_bonds.extend(label.bonds.iter().cloned());
        }
        for ((t, p), label) in &self.arcs_out {
            let s = shapes.entry(t.clone()).or_default();
            s.outputs.push((p.clone(), label.clone()));
            s.effect_vars.extend(label.vars.iter().cloned());
            s.effect_bonds.extend(label.bonds.iter().cloned());
        }
        Net {
            places: self.places,
            transitions: self.transitions,
            types: self.types,
            variables: self.variables,
            bond_types: self.bond_types,
            arcs_in: self.arcs_in,
            arcs_out: self.arcs_out,
            shapes,
        }
    }
}

impl Net {
    pub fn builder() -> NetBuilder {
        NetBuilder::default()
    }

    /// Back to a builder, e.g. to derive a modified net.
    pub fn to_builder(&self) -> NetBuilder {
        NetBuilder {
            places: self.places.clone(),
            transitions: self.transitions.clone(),
            types: self.types.clone(),
            variables: self.variables.clone(),
            bond_types: self.bond_types.clone(),
            arcs_in: self.arcs_in.clone(),
            arcs_out: self.arcs_out.clone(),
        }
    }

    pub fn places(&self) -> &BTreeSet<Place> {
        &self.places
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn types(&self) -> &BTreeSet<TypeName> {
        &self.types
    }

    pub fn variables(&self) -> &BTreeMap<Var, TypeName> {
        &self.variables
    }

    pub fn bond_types(&self) -> &BTreeSet<TypeBond> {
        &self.bond_types
    }

    pub fn var_type(&self, v: &Var) -> Option<&TypeName> {
        self.variables.get(v)
    }

    pub fn arcs_in(&self) -> impl Iterator<Item = (&Place, &Transition, &ArcLabel)> {
        self.arcs_in.iter().map(|((p, t), l)| (p, t, l))
    }

    pub fn arcs_out(&self) -> impl Iterator<Item = (&Transition, &Place, &ArcLabel)> {
        self.arcs_out.iter().map(|((t, p), l)| (t, p, l))
    }

    fn shape(&self, t: &Transition) -> Result<&Shape> {
        if !self.transitions.contains(t) {
            return Err(Error::UnknownTransition(t.clone()));
        }
        self.shapes
            .get(t)
            .ok_or_else(|| Error::UnknownTransition(t.clone()))
    }

    pub fn has_transition(&self, t: &Transition) -> bool {
        self.transitions.contains(t)
    }

    /// In-arcs of `t` as `(x, F(x, t))`, ordered by place.
    pub fn inputs(&self, t: &Transition) -> Result<&[(Place, ArcLabel)]> {
        Ok(&self.shape(t)?.inputs)
    }

    /// Out-arcs of `t` as `(x, F(t, x))`, ordered by place.
    pub fn outputs(&self, t: &Transition) -> Result<&[(Place, ArcLabel)]> {
        Ok(&self.shape(t)?.outputs)
    }

    /// `guard(t) ∩ 𝒜_V`.
    pub fn guard_vars(&self, t: &Transition) -> Result<&BTreeSet<Var>> {
        Ok(&self.shape(t)?.guard_vars)
    }

    /// `effects(t) ∩ 𝒜_V`.
    pub fn effect_vars(&self, t: &Transition) -> Result<&BTreeSet<Var>> {
        Ok(&self.shape(t)?.effect_vars)
    }

    /// `(effect⁺(t), effect⁻(t))` restricted to bonds: bonds created and
    /// destroyed by a forward firing of `t`.
    pub fn transition_effects(
        &self,
        t: &Transition,
    ) -> Result<(BTreeSet<VarBond>, BTreeSet<VarBond>)> {
        let s = self.shape(t)?;
        let plus = s.effect_bonds.difference(&s.guard_bonds).cloned().collect();
        let minus = s.guard_bonds.difference(&s.effect_bonds).cloned().collect();
        Ok((plus, minus))
    }

    /// The in-place whose arc carries variable `v` for transition `t`.
    pub fn input_place_of(&self, t: &Transition, v: &Var) -> Result<Option<&Place>> {
        Ok(self
            .shape(t)?
            .inputs
            .iter()
            .find(|(_, l)| l.vars.contains(v))
            .map(|(p, _)| p))
    }

    /// Checks the structural constraints of the net definition together with
    /// well-formedness (variables are preserved by every transition and never
    /// sent to two out-places). Returns one diagnostic per violation.
    pub fn validate_well_formed(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (v, ty) in &self.variables {
            if !self.types.contains(ty) {
                out.push(Diagnostic::new(
                    DiagnosticCode::UnknownType,
                    format!("variable `{v}` has undeclared type `{ty}`"),
                    None,
                    Some(v.clone()),
                ));
            }
        }
        for tb in &self.bond_types {
            let (a, b) = tb.ends();
            if !self.types.contains(a) || !self.types.contains(b) {
                out.push(Diagnostic::new(
                    DiagnosticCode::UnknownType,
                    format!("bond type `{tb}` mentions an undeclared type"),
                    None,
                    None,
                ));
            }
        }
        let arcs = self
            .arcs_in
            .iter()
            .map(|((p, t), l)| (p, t, l, "in"))
            .chain(self.arcs_out.iter().map(|((t, p), l)| (p, t, l, "out")));
        for (p, t, label, dir) in arcs {
            if !self.places.contains(p) {
                out.push(Diagnostic::new(
                    DiagnosticCode::UnknownPlace,
                    format!("{dir}-arc of `{t}` refers to unknown place `{p}`"),
                    Some(t.clone()),
                    None,
                ));
            }
            if !self.transitions.contains(t) {
                out.push(Diagnostic::new(
                    DiagnosticCode::UnknownTransition,
                    format!("{dir}-arc at `{p}` refers to unknown transition `{t}`"),
                    Some(t.clone()),
                    None,
                ));
            }
            for v in &label.vars {
                if !self.variables.contains_key(v) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::UnknownVariable,
                        format!("{dir}-arc of `{t}` at `{p}` uses undeclared variable `{v}`"),
                        Some(t.clone()),
                        Some(v.clone()),
                    ));
                }
            }
            for bond in &label.bonds {
                let (a, b) = bond.ends();
                if a == b {
                    out.push(Diagnostic::new(
                        DiagnosticCode::SelfBond,
                        format!("{dir}-arc of `{t}` at `{p}` bonds `{a}` to itself"),
                        Some(t.clone()),
                        Some(a.clone()),
                    ));
                }
                for end in [a, b] {
                    if !label.vars.contains(end) {
                        out.push(Diagnostic::new(
                            DiagnosticCode::BondVarMissing,
                            format!("{dir}-arc of `{t}` at `{p}` bonds `{bond}` but does not carry `{end}`"),
                            Some(t.clone()),
                            Some(end.clone()),
                        ));
                    }
                }
                if let (Some(ta), Some(tb)) = (self.variables.get(a), self.variables.get(b)) {
                    if !self
                        .bond_types
                        .contains(&TypeBond::new(ta.clone(), tb.clone()))
                    {
                        out.push(Diagnostic::new(
                            DiagnosticCode::BondTypeUndeclared,
                            format!("{dir}-arc of `{t}` at `{p}` bonds `{bond}` of undeclared bond type `{ta}-{tb}`"),
                            Some(t.clone()),
                            None,
                        ));
                    }
                }
            }
        }
        for (t, shape) in &self.shapes {
            if !self.transitions.contains(t) {
                continue;
            }
            pairwise_shared(&shape.inputs, |v, x, y| {
                out.push(Diagnostic::new(
                    DiagnosticCode::SharedInputVar,
                    format!("variable `{v}` labels in-arcs of `{t}` from both `{x}` and `{y}`"),
                    Some(t.clone()),
                    Some(v.clone()),
                ))
            });
            for v in shape.guard_vars.symmetric_difference(&shape.effect_vars) {
                let side = if shape.guard_vars.contains(v) {
                    "in-arcs but no out-arc"
                } else {
                    "out-arcs but no in-arc"
                };
                out.push(Diagnostic::new(
                    DiagnosticCode::VarNotPreserved,
                    format!("variable `{v}` occurs on {side} of `{t}`"),
                    Some(t.clone()),
                    Some(v.clone()),
                ));
            }
            pairwise_shared(&shape.outputs, |v, x, y| {
                out.push(Diagnostic::new(
                    DiagnosticCode::VarCloned,
                    format!("variable `{v}` labels out-arcs of `{t}` to both `{x}` and `{y}`"),
                    Some(t.clone()),
                    Some(v.clone()),
                ))
            });
            for (i, (x, lx)) in shape.outputs.iter().enumerate() {
                for (y, ly) in &shape.outputs[i + 1..] {
                    for b in lx.bonds.intersection(&ly.bonds) {
                        out.push(Diagnostic::new(
                            DiagnosticCode::VarCloned,
                            format!("bond `{b}` labels out-arcs of `{t}` to both `{x}` and `{y}`"),
                            Some(t.clone()),
                            None,
                        ));
                    }
                }
            }
        }
        out
    }

    /// Checks the conditions on an initial marking: known places and types,
    /// unique identities with index ≥ 1, empty causal paths, bonds of a
    /// declared type between distinct tokens held in the same place.
    pub fn validate_initial_marking(&self, m: &Marking) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut seen: BTreeMap<&TokenId, &Place> = BTreeMap::new();
        for (p, pool) in m.places() {
            if !self.places.contains(p) {
                out.push(Diagnostic::new(
                    DiagnosticCode::UnknownPlace,
                    format!("marking refers to unknown place `{p}`"),
                    None,
                    None,
                ));
            }
            for tok in &pool.tokens {
                if !self.types.contains(tok.ty()) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::UnknownType,
                        format!("instance `{}` has undeclared type", tok.id),
                        None,
                        None,
                    ));
                }
                if tok.id.index == 0 {
                    out.push(Diagnostic::new(
                        DiagnosticCode::BadIndex,
                        format!("instance `{}` must have an index of at least 1", tok.id),
                        None,
                        None,
                    ));
                }
                if !tok.path.is_empty() {
                    out.push(Diagnostic::new(
                        DiagnosticCode::PathNotEmpty,
                        format!("initial instance `{tok}` must have an empty path"),
                        None,
                        None,
                    ));
                }
                if let Some(prev) = seen.insert(&tok.id, p) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::DuplicateInstance,
                        format!("instance `{}` occurs in both `{prev}` and `{p}`", tok.id),
                        None,
                        None,
                    ));
                }
            }
            for bond in &pool.bonds {
                let (a, b) = bond.endpoints();
                if a.id == b.id {
                    out.push(Diagnostic::new(
                        DiagnosticCode::SelfBond,
                        format!("bond `{bond}` joins an instance to itself"),
                        None,
                        None,
                    ));
                }
                if !pool.tokens.contains(a) || !pool.tokens.contains(b) {
                    out.push(Diagnostic::new(
                        DiagnosticCode::BondEndpoint,
                        format!("bond `{bond}` in `{p}` has an endpoint outside the place"),
                        None,
                        None,
                    ));
                }
                if !self
                    .bond_types
                    .contains(&TypeBond::new(a.ty().clone(), b.ty().clone()))
                {
                    out.push(Diagnostic::new(
                        DiagnosticCode::BondTypeUndeclared,
                        format!(
                            "bond `{bond}` has undeclared bond type `{}-{}`",
                            a.ty(),
                            b.ty()
                        ),
                        None,
                        None,
                    ));
                }
            }
        }
        out
    }
}

fn pairwise_shared(arcs: &[(Place, ArcLabel)], mut report: impl FnMut(&Var, &Place, &Place)) {
    for (i, (x, lx)) in arcs.iter().enumerate() {
        for (y, ly) in &arcs[i + 1..] {
            for v in lx.vars.intersection(&ly.vars) {
                report(v, x, y);
            }
        }
    }
}

/// Machine-readable diagnostic codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticCode {
    /// A variable occurs on only one side of a transition.
    VarNotPreserved,
    /// A variable or bond labels two distinct out-arcs.
    VarCloned,
    /// A variable labels two distinct in-arcs.
    SharedInputVar,
    /// A bond on an arc mentions a variable the arc does not carry.
    BondVarMissing,
    BondTypeUndeclared,
    SelfBond,
    UnknownType,
    UnknownVariable,
    UnknownPlace,
    UnknownTransition,
    DuplicateInstance,
    BadIndex,
    PathNotEmpty,
    BondEndpoint,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::VarNotPreserved => "WF1-VAR-NOT-PRESERVED",
            DiagnosticCode::VarCloned => "WF2-VAR-CLONED",
            DiagnosticCode::SharedInputVar => "NET-SHARED-INPUT-VAR",
            DiagnosticCode::BondVarMissing => "NET-BOND-VAR-MISSING",
            DiagnosticCode::BondTypeUndeclared => "NET-BOND-TYPE",
            DiagnosticCode::SelfBond => "NET-SELF-BOND",
            DiagnosticCode::UnknownType => "NET-UNKNOWN-TYPE",
            DiagnosticCode::UnknownVariable => "NET-UNKNOWN-VAR",
            DiagnosticCode::UnknownPlace => "NET-UNKNOWN-PLACE",
            DiagnosticCode::UnknownTransition => "NET-UNKNOWN-TRANSITION",
            DiagnosticCode::DuplicateInstance => "MARK-DUP-INSTANCE",
            DiagnosticCode::BadIndex => "MARK-BAD-INDEX",
            DiagnosticCode::PathNotEmpty => "MARK-PATH-NOT-EMPTY",
            DiagnosticCode::BondEndpoint => "MARK-BOND-ENDPOINT",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validation finding, naming the transition and variable involved when
/// there is one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub transition: Option<Transition>,
    pub variable: Option<Var>,
}

impl Diagnostic {
    pub fn new(
        code: DiagnosticCode,
        message: String,
        transition: Option<Transition>,
        variable: Option<Var>,
    ) -> Self {
        Self {
            code,
            message,
            transition,
            variable,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}
