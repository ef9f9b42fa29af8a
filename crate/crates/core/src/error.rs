use alloc::string::String;
use core::fmt;

use crate::{Place, Transition, Var};

/// Errors raised by the engine, the checkers and the translator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    UnknownTransition(Transition),
    UnknownPlace(Place),
    /// An effect set mentions a variable the assignment does not bind.
    UnboundVariable(Var),
    /// The given assignment or candidate does not enable the transition.
    NotEnabled {
        transition: Transition,
        reason: String,
    },
    /// A trace step could not be replayed.
    NotExecutable {
        step: usize,
        reason: String,
    },
    /// A checker's precondition does not hold.
    Precondition(String),
    /// Token or bond conservation failed on a produced state.
    Conservation(String),
    /// Exploration or enumeration hit its configured bound.
    BudgetExceeded(String),
    /// A state refers to tokens or occurrences the translation maps do not cover.
    Unmapped(String),
    /// Input that breaks a structural requirement (e.g. non-initial marking).
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownTransition(t) => write!(f, "unknown transition `{t}`"),
            Error::UnknownPlace(p) => write!(f, "unknown place `{p}`"),
            Error::UnboundVariable(v) => write!(f, "variable `{v}` is not bound by the assignment"),
            Error::NotEnabled { transition, reason } => {
                write!(f, "transition `{transition}` is not enabled: {reason}")
            }
            Error::NotExecutable { step, reason } => {
                write!(f, "trace step {step} is not executable: {reason}")
            }
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Conservation(m) => write!(f, "conservation violated: {m}"),
            Error::BudgetExceeded(m) => write!(f, "budget exceeded: {m}"),
            Error::Unmapped(m) => write!(f, "unmapped element: {m}"),
            Error::Invalid(m) => write!(f, "invalid input: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
