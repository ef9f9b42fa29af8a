//! Executable semantics for multi reversing Petri nets (MRPNs) under the
//! individual-token interpretation.
//!
//! Tokens of the same type are told apart by the causal path they carry.
//! Transitions move whole bonded components forward and stamp every moved
//! token; an occurrence may be reversed only while each token it touched
//! still carries its stamp last. On top of the firing rules the crate offers
//! causal-equivalence checks for states and traces, bounded exploration of
//! the reachable transition system, and the translation into nets that hold
//! a single token per type.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
mod names;

pub mod causality;
pub mod engine;
pub mod marking;
pub mod net;
pub mod space;
pub mod translate;

pub use error::Error;
pub use names::{Place, Transition, TypeName, Var};

pub use causality::{Action, Direction, Label, Trace, Verdict};
pub use engine::{Assignment, History, HistoryRecord, Projection, ReverseCandidate, State};
pub use marking::{BondInstance, Marking, PathEntry, Pool, Stamp, TokenId, TokenInstance};
pub use net::{ArcLabel, Diagnostic, DiagnosticCode, Net, NetBuilder, TypeBond, VarBond};
pub use space::{ExploreConfig, KeyMode, Lts, StateKey};
pub use translate::{SrpnNet, TranslationMaps};
