//! Token and bond instances, pools of them, and markings.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::{Place, Transition, TypeName, Var};

/// The identity `(A, i)` of a token instance, with its causal path dropped.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenId {
    pub ty: TypeName,
    pub index: u32,
}

impl TokenId {
    pub fn new(ty: impl Into<TypeName>, index: u32) -> Self {
        Self {
            ty: ty.into(),
            index,
        }
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.ty, self.index)
    }
}

impl fmt::Debug for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// What a token was bound to when a transition moved it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stamp {
    Var(Var),
    /// Moved as part of a bonded component without being selected (`*`).
    Bystander,
}

impl fmt::Display for Stamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stamp::Var(v) => write!(f, "{v}"),
            Stamp::Bystander => f.write_str("*"),
        }
    }
}

impl fmt::Debug for Stamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One `(k, t, v)` entry of a causal path.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathEntry {
    pub key: u32,
    pub transition: Transition,
    pub stamp: Stamp,
}

impl PathEntry {
    pub fn new(key: u32, transition: impl Into<Transition>, stamp: Stamp) -> Self {
        Self {
            key,
            transition: transition.into(),
            stamp,
        }
    }
}

impl fmt::Display for PathEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}.{}", self.key, self.transition, self.stamp)
    }
}

impl fmt::Debug for PathEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A token instance `(A, i, xs)`.
///
/// Ordering is by type name, then index, then path, which is the canonical
/// order used by every enumeration in the crate.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TokenInstance {
    pub id: TokenId,
    pub path: Vec<PathEntry>,
}

impl TokenInstance {
    /// A fresh instance with an empty causal path.
    pub fn initial(ty: impl Into<TypeName>, index: u32) -> Self {
        Self {
            id: TokenId::new(ty, index),
            path: Vec::new(),
        }
    }

    pub fn with_path(ty: impl Into<TypeName>, index: u32, path: Vec<PathEntry>) -> Self {
        Self {
            id: TokenId::new(ty, index),
            path,
        }
    }

    pub fn ty(&self) -> &TypeName {
        &self.id.ty
    }

    /// The causal path with occurrence keys dropped.
    pub fn cpath(&self) -> Vec<(Transition, Stamp)> {
        self.path
            .iter()
            .map(|e| (e.transition.clone(), e.stamp.clone()))
            .collect()
    }

    pub fn last(&self) -> Option<&PathEntry> {
        self.path.last()
    }

    /// `A_i + (k, t, v)`.
    pub fn extended(&self, entry: PathEntry) -> Self {
        let mut next = self.clone();
        next.path.push(entry);
        next
    }

    /// `init(A_i)`: the instance without its last path entry. Undefined (None)
    /// on an empty path.
    pub fn init(&self) -> Option<Self> {
        if self.path.is_empty() {
            return None;
        }
        let mut prev = self.clone();
        prev.path.pop();
        Some(prev)
    }

    pub fn has_occurrence(&self, key: u32, transition: &Transition) -> bool {
        self.path
            .iter()
            .any(|e| e.key == key && &e.transition == transition)
    }
}

impl fmt::Display for TokenInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)?;
        if !self.path.is_empty() {
            f.write_str("[")?;
            for (n, e) in self.path.iter().enumerate() {
                if n > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TokenInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An undirected bond between two token instances, stored with its endpoints
/// in canonical order so that `(a, b)` and `(b, a)` are the same value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BondInstance {
    lo: TokenInstance,
    hi: TokenInstance,
}

impl BondInstance {
    pub fn new(a: TokenInstance, b: TokenInstance) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn endpoints(&self) -> (&TokenInstance, &TokenInstance) {
        (&self.lo, &self.hi)
    }

    pub fn ids(&self) -> (&TokenId, &TokenId) {
        (&self.lo.id, &self.hi.id)
    }

    pub fn touches(&self, token: &TokenInstance) -> bool {
        &self.lo == token || &self.hi == token
    }

    /// The endpoint opposite to `token`, if `token` is an endpoint.
    pub fn other(&self, token: &TokenInstance) -> Option<&TokenInstance> {
        if &self.lo == token {
            Some(&self.hi)
        } else if &self.hi == token {
            Some(&self.lo)
        } else {
            None
        }
    }

    pub fn map(&self, mut f: impl FnMut(&TokenInstance) -> TokenInstance) -> Self {
        Self::new(f(&self.lo), f(&self.hi))
    }
}

impl fmt::Display for BondInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

impl fmt::Debug for BondInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A set of token and bond instances (the contents of a place, or any of the
/// intermediate sets used by the firing rules).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pool {
    pub tokens: BTreeSet<TokenInstance>,
    pub bonds: BTreeSet<BondInstance>,
}

static EMPTY_POOL: Pool = Pool::new();

impl Pool {
    pub const fn new() -> Self {
        Self {
            tokens: BTreeSet::new(),
            bonds: BTreeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty() && self.bonds.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len() + self.bonds.len()
    }

    pub fn contains_token(&self, token: &TokenInstance) -> bool {
        self.tokens.contains(token)
    }

    pub fn contains_bond(&self, bond: &BondInstance) -> bool {
        self.bonds.contains(bond)
    }

    pub fn token_by_id(&self, id: &TokenId) -> Option<&TokenInstance> {
        self.tokens.iter().find(|t| &t.id == id)
    }

    pub fn extend(&mut self, other: &Pool) {
        self.tokens.extend(other.tokens.iter().cloned());
        self.bonds.extend(other.bonds.iter().cloned());
    }

    pub fn remove_all(&mut self, other: &Pool) {
        for t in &other.tokens {
            self.tokens.remove(t);
        }
        for b in &other.bonds {
            self.bonds.remove(b);
        }
    }

    /// Applies `f` to every token and endpoint-wise to every bond.
    pub fn map_tokens(&self, mut f: impl FnMut(&TokenInstance) -> TokenInstance) -> Pool {
        Pool {
            tokens: self.tokens.iter().map(&mut f).collect(),
            bonds: self.bonds.iter().map(|b| b.map(&mut f)).collect(),
        }
    }

    /// `connected(seed, self)`: the seed (when present) together with every
    /// token and bond reachable from it through chains of bonds whose
    /// endpoints lie in the pool.
    pub fn connected(&self, seed: &TokenInstance) -> Pool {
        let mut out = Pool::new();
        if self.tokens.contains(seed) {
            out.tokens.insert(seed.clone());
        }
        let mut seen: BTreeSet<&TokenInstance> = BTreeSet::new();
        seen.insert(seed);
        let mut frontier: Vec<&TokenInstance> = alloc::vec![seed];
        while let Some(current) = frontier.pop() {
            for bond in &self.bonds {
                let Some(other) = bond.other(current) else {
                    continue;
                };
                if !self.tokens.contains(other) {
                    continue;
                }
                out.bonds.insert(bond.clone());
                out.tokens.insert(current.clone());
                out.tokens.insert(other.clone());
                if seen.insert(other) {
                    frontier.push(other);
                }
            }
        }
        out
    }

    /// Splits the tokens of the pool into bond-connected components, returning
    /// for each token the index of its component.
    pub fn component_ids(&self) -> BTreeMap<&TokenId, usize> {
        let mut ids: BTreeMap<&TokenId, usize> = BTreeMap::new();
        let mut next = 0;
        for token in &self.tokens {
            if ids.contains_key(&token.id) {
                continue;
            }
            for member in &self.connected(token).tokens {
                if let Some(m) = self.tokens.get(member) {
                    ids.insert(&m.id, next);
                }
            }
            ids.insert(&token.id, next);
            next += 1;
        }
        ids
    }
}

impl fmt::Debug for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.tokens.iter())
            .entries(self.bonds.iter())
            .finish()
    }
}

/// Association of token and bond instances to places.
///
/// Places holding nothing are not stored, so two markings are equal exactly
/// when every place holds the same instances.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Marking {
    places: BTreeMap<Place, Pool>,
}

impl Marking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, place: &Place) -> &Pool {
        self.places.get(place).unwrap_or(&EMPTY_POOL)
    }

    pub fn set(&mut self, place: Place, pool: Pool) {
        if pool.is_empty() {
            self.places.remove(&place);
        } else {
            self.places.insert(place, pool);
        }
    }

    pub fn add_token(&mut self, place: impl Into<Place>, token: TokenInstance) {
        self.places
            .entry(place.into())
            .or_default()
            .tokens
            .insert(token);
    }

    pub fn add_bond(&mut self, place: impl Into<Place>, bond: BondInstance) {
        self.places
            .entry(place.into())
            .or_default()
            .bonds
            .insert(bond);
    }

    /// Non-empty places in canonical order.
    pub fn places(&self) -> impl Iterator<Item = (&Place, &Pool)> {
        self.places.iter()
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&Place, &TokenInstance)> {
        self.places
            .iter()
            .flat_map(|(p, pool)| pool.tokens.iter().map(move |t| (p, t)))
    }

    pub fn bonds(&self) -> impl Iterator<Item = (&Place, &BondInstance)> {
        self.places
            .iter()
            .flat_map(|(p, pool)| pool.bonds.iter().map(move |b| (p, b)))
    }

    /// The first place holding an instance with identity `id`.
    pub fn locate(&self, id: &TokenId) -> Option<(&Place, &TokenInstance)> {
        self.tokens().find(|(_, t)| &t.id == id)
    }

    /// `♯(A, i, M)`: the number of (place, instance) pairs with identity `(A, i)`.
    pub fn count_instances(&self, ty: &TypeName, index: u32) -> usize {
        self.tokens()
            .filter(|(_, t)| &t.id.ty == ty && t.id.index == index)
            .count()
    }

    /// `♯(β, M)`: the number of places holding the bond instance.
    pub fn count_bond(&self, bond: &BondInstance) -> usize {
        self.places
            .values()
            .filter(|pool| pool.bonds.contains(bond))
            .count()
    }

    /// All token identities occurring in the marking.
    pub fn token_ids(&self) -> BTreeSet<TokenId> {
        self.tokens().map(|(_, t)| t.id.clone()).collect()
    }

    /// Applies `f` to every token (and endpoint-wise to every bond).
    pub fn map_tokens(&self, mut f: impl FnMut(&TokenInstance) -> TokenInstance) -> Marking {
        let mut out = Marking::new();
        for (p, pool) in &self.places {
            out.set(p.clone(), pool.map_tokens(&mut f));
        }
        out
    }
}

impl fmt::Debug for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.places.iter()).finish()
    }
}
