//! The `mrpn` command line.
//!
//! Exit codes: 0 success or PASS, 1 FAIL or engine error, 2 usage or IO,
//! 3 parse or validation error, 4 budget exceeded. Errors are written to stderr as one JSON
//! object.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use mrpn_core::causality::apply;
use mrpn_core::space::explore;
use mrpn_core::translate::{to_srpn, verify_iso};
use mrpn_core::{Diagnostic, ExploreConfig, KeyMode, Label, SrpnNet, State, Verdict};

use crate::error::ToolError;
use crate::export::{maps_json, summary_json, to_dot, to_jsonl};
use crate::format::{parse_net, parse_state, serialize_net, serialize_state, NetDocument};
use crate::props::{run_suite, Limits, Suite};
use crate::repl::{format_enabled, select, Session};

#[derive(Parser, Debug)]
#[command(
    name = "mrpn",
    version,
    about = "Simulate, explore and translate multi reversing Petri nets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Keys {
    Exact,
    Normalized,
    Quotient,
}

impl From<Keys> for KeyMode {
    fn from(k: Keys) -> Self {
        match k {
            Keys::Exact => KeyMode::Exact,
            Keys::Normalized => KeyMode::Normalized,
            Keys::Quotient => KeyMode::Quotient,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum LtsFormat {
    Summary,
    Dot,
    Jsonl,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CheckFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    All,
    Loop,
    Square,
    Rti,
    Parabolic,
    Main,
    Conservation,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report well-formedness and initial-marking diagnostics.
    Check {
        net: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: CheckFormat,
    },
    /// List forward assignments and reverse candidates with their indices.
    Enabled {
        net: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Fire one forward assignment and write the resulting state.
    Fire {
        net: PathBuf,
        transition: String,
        #[arg(long)]
        assign: usize,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reverse one occurrence and write the resulting state.
    Reverse {
        net: PathBuf,
        transition: String,
        #[arg(long)]
        assign: usize,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore the reachable transition system up to a depth.
    Explore {
        net: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, value_enum, default_value = "exact")]
        keys: Keys,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        #[arg(long, value_enum, default_value = "summary")]
        format: LtsFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Translate into a single-token net and write the maps report.
    Translate {
        net: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        maps: Option<PathBuf>,
    },
    /// Check that a net and its translation have isomorphic transition systems.
    Isocheck {
        net: PathBuf,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Compare against this single-token net instead of the translation.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Run property suites over the explored states and traces.
    Props {
        net: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
    /// Step through the net interactively.
    Repl {
        net: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, ToolError> {
    std::fs::read_to_string(path).map_err(|e| ToolError::io(path, e))
}

fn parse_file(path: &Path) -> Result<NetDocument, ToolError> {
    parse_net(&read(path)?).map_err(|error| ToolError::Parse {
        path: path.display().to_string(),
        error,
    })
}

fn diagnostics(doc: &NetDocument) -> Vec<Diagnostic> {
    doc.net
        .validate_well_formed()
        .into_iter()
        .chain(doc.net.validate_initial_marking(&doc.initial))
        .collect()
}

/// Parses and validates the net in `path`.
pub fn load_net(path: &Path) -> Result<NetDocument, ToolError> {
    let doc = parse_file(path)?;
    let diagnostics = diagnostics(&doc);
    if !diagnostics.is_empty() {
        return Err(ToolError::Invalid {
            path: path.display().to_string(),
            diagnostics,
        });
    }
    Ok(doc)
}

/// The state in `path`, or the initial state, with its trace.
pub fn load_state(
    doc: &NetDocument,
    path: Option<&Path>,
) -> Result<(State, Vec<Label>), ToolError> {
    let Some(path) = path else {
        return Ok((doc.initial_state(), Vec::new()));
    };
    let snap = parse_state(&read(path)?).map_err(|error| ToolError::Parse {
        path: path.display().to_string(),
        error,
    })?;
    snap.state.check_consistency()?;
    mrpn_core::engine::check_conservation(&doc.initial.token_ids(), &snap.state.marking)?;
    Ok((snap.state, snap.trace.unwrap_or_default()))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), ToolError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| ToolError::io(p, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| ToolError::io("<stdout>", e)),
    }
}

fn write_verdict(v: &Verdict, stdout: &mut dyn Write) -> Result<i32, ToolError> {
    let text = match v {
        Verdict::Pass => "PASS\n".to_string(),
        Verdict::Fail(cx) => format!("FAIL {cx}\n"),
    };
    emit(None, &text, stdout)?;
    Ok(if v.is_pass() { 0 } else { 1 })
}

fn step(
    net: &Path,
    transition: &str,
    index: usize,
    state: Option<&Path>,
    out: Option<&Path>,
    forward: bool,
    stdout: &mut dyn Write,
) -> Result<i32, ToolError> {
    let doc = load_net(net)?;
    let (s, mut trace) = load_state(&doc, state)?;
    let a = select(&doc.net, &s, transition, index, forward)?;
    let next = apply(&doc.net, &s, &a)?;
    trace.push(a.label());
    emit(out, &serialize_state(&next, Some(&trace)), stdout)?;
    Ok(0)
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<i32, ToolError> {
    match cli.command {
        Command::Check { net, format } => {
            let doc = parse_file(&net)?;
            let diags = diagnostics(&doc);
            let mut text = String::new();
            for d in &diags {
                let at = d.transition.as_ref().and_then(|t| doc.span_of(t.as_str()));
                match format {
                    CheckFormat::Text => {
                        let loc = at
                            .map(|(l, c)| format!("{}:{l}:{c}: ", net.display()))
                            .unwrap_or_default();
                        text.push_str(&format!("{loc}{}: {}\n", d.code.as_str(), d.message));
                    }
                    CheckFormat::Json => {
                        let v = serde_json::json!({
                            "code": d.code.as_str(),
                            "message": d.message,
                            "transition": d.transition.as_ref().map(|t| t.to_string()),
                            "variable": d.variable.as_ref().map(|v| v.to_string()),
                            "line": at.map(|x| x.0),
                            "col": at.map(|x| x.1),
                        });
                        text.push_str(&format!("{v}\n"));
                    }
                }
            }
            if diags.is_empty() && matches!(format, CheckFormat::Text) {
                text.push_str("ok\n");
            }
            emit(None, &text, stdout)?;
            Ok(if diags.is_empty() { 0 } else { 3 })
        }
        Command::Enabled { net, state } => {
            let doc = load_net(&net)?;
            let (s, _) = load_state(&doc, state.as_deref())?;
            emit(None, &format_enabled(&doc.net, &s)?, stdout)?;
            Ok(0)
        }
        Command::Fire {
            net,
            transition,
            assign,
            state,
            out,
        } => step(
            &net,
            &transition,
            assign,
            state.as_deref(),
            out.as_deref(),
            true,
            stdout,
        ),
        Command::Reverse {
            net,
            transition,
            assign,
            state,
            out,
        } => step(
            &net,
            &transition,
            assign,
            state.as_deref(),
            out.as_deref(),
            false,
            stdout,
        ),
        Command::Explore {
            net,
            state,
            depth,
            keys,
            cap,
            format,
            out,
        } => {
            let doc = load_net(&net)?;
            let (s, _) = load_state(&doc, state.as_deref())?;
            let lts = explore(
                &doc.net,
                &s,
                &ExploreConfig {
                    depth,
                    state_cap: cap,
                    key_mode: keys.into(),
                },
            )?;
            let text = match format {
                LtsFormat::Summary => format!("{}\n", summary_json(&lts)),
                LtsFormat::Dot => to_dot(&lts),
                LtsFormat::Jsonl => to_jsonl(&lts),
            };
            emit(out.as_deref(), &text, stdout)?;
            if lts.truncated {
                return Err(
                    mrpn_core::Error::BudgetExceeded(format!("state cap {cap} reached")).into(),
                );
            }
            Ok(0)
        }
        Command::Translate { net, out, maps } => {
            let doc = load_net(&net)?;
            let (srpn, m) = to_srpn(&doc.net, &doc.initial)?;
            emit(
                out.as_deref(),
                &serialize_net(&format!("{}_single", doc.name), &srpn.net, &srpn.initial),
                stdout,
            )?;
            if let Some(p) = maps {
                emit(Some(&p), &maps_json(&m), stdout)?;
            }
            Ok(0)
        }
        Command::Isocheck { net, depth, target } => {
            let doc = load_net(&net)?;
            let (mut srpn, maps) = to_srpn(&doc.net, &doc.initial)?;
            if let Some(t) = target {
                let tdoc = load_net(&t)?;
                srpn = SrpnNet {
                    net: tdoc.net,
                    initial: tdoc.initial,
                };
            }
            write_verdict(
                &verify_iso(&doc.net, &doc.initial_state(), &srpn, &maps, depth)?,
                stdout,
            )
        }
        Command::Props {
            net,
            suite,
            depth,
            cap,
        } => {
            let doc = load_net(&net)?;
            let suites: Vec<Suite> = match suite {
                SuiteArg::All => Suite::ALL.to_vec(),
                SuiteArg::Loop => vec![Suite::Loop],
                SuiteArg::Square => vec![Suite::Square],
                SuiteArg::Rti => vec![Suite::Rti],
                SuiteArg::Parabolic => vec![Suite::Parabolic],
                SuiteArg::Main => vec![Suite::Main],
                SuiteArg::Conservation => vec![Suite::Conservation],
            };
            let limits = Limits {
                depth,
                state_cap: cap,
                ..Limits::default()
            };
            let mut ok = true;
            for s in suites {
                let report = run_suite(&doc.net, &doc.initial_state(), s, &limits)?;
                ok &= report.passed();
                emit(None, &format!("{report}\n"), stdout)?;
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Repl { net, state } => {
            let doc = load_net(&net)?;
            let (s, trace) = load_state(&doc, state.as_deref())?;
            Session::new(doc.net, s, trace)
                .run(stdin, stdout)
                .map_err(|e| ToolError::io("<stdio>", e))?;
            Ok(0)
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = ToolError::Usage(e.to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return 2;
        }
    };
    match execute(cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}
