//! Interactive stepping through a net.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use mrpn_core::causality::{apply, Action};
use mrpn_core::engine::{enumerate_forward, enumerate_reverse};
use mrpn_core::{Label, Net, Place, State, Transition};

use crate::error::ToolError;
use crate::format::{format_pool, serialize_state};

/// Forward assignments and reverse candidates of every transition, indexed
/// as accepted by `fire` and `reverse`.
pub fn format_enabled(net: &Net, s: &State) -> Result<String, ToolError> {
    let mut out = String::new();
    for t in net.transitions() {
        for (n, a) in enumerate_forward(net, s, t)?.into_iter().enumerate() {
            writeln!(
                out,
                "fwd {t} [{n}] {}",
                Action::forward(t.clone(), a).label()
            )
            .unwrap();
        }
    }
    for t in net.transitions() {
        for (n, c) in enumerate_reverse(net, s, t)?.into_iter().enumerate() {
            let key = c.key;
            writeln!(
                out,
                "rev {t} [{n}] {} key {key}",
                Action::reverse(t.clone(), c).label()
            )
            .unwrap();
        }
    }
    Ok(out)
}

/// The `n`-th forward (or reverse) action of `t` in canonical order.
pub fn select(net: &Net, s: &State, t: &str, n: usize, forward: bool) -> Result<Action, ToolError> {
    let t = Transition::from(t);
    if !net.has_transition(&t) {
        return Err(ToolError::Usage(format!("unknown transition `{t}`")));
    }
    let found = if forward {
        enumerate_forward(net, s, &t)?
            .into_iter()
            .nth(n)
            .map(|a| Action::forward(t.clone(), a))
    } else {
        enumerate_reverse(net, s, &t)?
            .into_iter()
            .nth(n)
            .map(|c| Action::reverse(t.clone(), c))
    };
    found.ok_or_else(|| {
        let kind = if forward {
            "forward assignment"
        } else {
            "reverse candidate"
        };
        ToolError::Core(mrpn_core::Error::NotEnabled {
            transition: t,
            reason: format!("no {kind} with index {n}"),
        })
    })
}

pub struct Session {
    net: Net,
    states: Vec<State>,
    trace: Vec<Label>,
}

pub enum Reply {
    Text(String),
    Quit,
}

const HELP: &str = "commands:
  list                 enabled actions with their indices
  fire T N             fire the N-th forward assignment of T
  reverse T N          reverse the N-th reverse candidate of T
  undo                 go back one step
  show [P]             print the current state, or just place P
  history              print the steps taken
  save FILE            write the current state and steps to FILE
  quit
";

impl Session {
    pub fn new(net: Net, s0: State, trace: Vec<Label>) -> Self {
        Self {
            net,
            states: vec![s0],
            trace,
        }
    }

    pub fn state(&self) -> &State {
        self.states.last().expect("never empty")
    }

    pub fn trace(&self) -> &[Label] {
        &self.trace
    }

    pub fn execute(&mut self, line: &str) -> Result<Reply, ToolError> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let text = match words.as_slice() {
            [] => String::new(),
            ["help"] => HELP.into(),
            ["quit"] | ["exit"] => return Ok(Reply::Quit),
            ["list"] => format_enabled(&self.net, self.state())?,
            [cmd @ ("fire" | "reverse"), t, n] => {
                let n: usize = n
                    .parse()
                    .map_err(|_| ToolError::Usage(format!("`{n}` is not an index")))?;
                let a = select(&self.net, self.state(), t, n, *cmd == "fire")?;
                let next = apply(&self.net, self.state(), &a)?;
                self.states.push(next);
                self.trace.push(a.label());
                format!("{}\n", a.label())
            }
            ["undo"] => {
                if self.states.len() == 1 {
                    return Err(ToolError::Usage("nothing to undo".into()));
                }
                self.states.pop();
                let l = self.trace.pop().map(|l| l.to_string()).unwrap_or_default();
                format!("undid {l}\n")
            }
            ["show"] => serialize_state(self.state(), None),
            ["show", x] => {
                let x = Place::from(*x);
                if !self.net.places().contains(&x) {
                    return Err(ToolError::Usage(format!("unknown place `{x}`")));
                }
                format!("{x}: {}\n", format_pool(self.state().marking.get(&x)))
            }
            ["history"] => self.trace.iter().map(|l| format!("{l}\n")).collect(),
            ["save", path] => {
                std::fs::write(path, serialize_state(self.state(), Some(&self.trace)))
                    .map_err(|e| ToolError::io(*path, e))?;
                format!("saved {path}\n")
            }
            _ => {
                return Err(ToolError::Usage(format!(
                    "cannot parse `{line}`; try `help`"
                )))
            }
        };
        Ok(Reply::Text(text))
    }

    /// Reads commands until `quit` or end of input. Errors are reported and
    /// the session continues.
    pub fn run(&mut self, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
        write!(output, "> ")?;
        output.flush()?;
        for line in input.lines() {
            match self.execute(&line?) {
                Ok(Reply::Quit) => return Ok(()),
                Ok(Reply::Text(t)) => output.write_all(t.as_bytes())?,
                Err(e) => writeln!(output, "error: {e}")?,
            }
            write!(output, "> ")?;
            output.flush()?;
        }
        writeln!(output)
    }
}
