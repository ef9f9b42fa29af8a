//! File formats, export, property suites, command line and REPL for
//! multi reversing Petri nets, on top of `mrpn-core`.

pub mod cli;
pub mod error;
pub mod export;
pub mod format;
pub mod props;
pub mod repl;

pub use error::ToolError;
pub use format::{
    parse_net, parse_state, serialize_net, serialize_state, NetDocument, ParseError, Snapshot,
};
