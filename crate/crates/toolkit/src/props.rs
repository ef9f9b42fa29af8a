//! Named property suites run over a depth-bounded exploration.

use std::fmt;
use std::str::FromStr;

use mrpn_core::causality::{
    actions_concurrent, check_causal_consistency, check_loop, check_loop_reverse,
    check_reverse_independence, check_square, enabled_actions, enumerate_traces,
    parabolic_normalize, replay_labels, successors, traces_equivalent,
};
use mrpn_core::engine::{check_bond_effects, check_conservation, effect_bond_ids};
use mrpn_core::space::explore;
use mrpn_core::{Error, ExploreConfig, KeyMode, Lts, Net, State, Trace, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Loop,
    Square,
    Rti,
    Parabolic,
    Main,
    Conservation,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Loop,
        Suite::Square,
        Suite::Rti,
        Suite::Parabolic,
        Suite::Main,
        Suite::Conservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Loop => "loop",
            Suite::Square => "square",
            Suite::Rti => "rti",
            Suite::Parabolic => "parabolic",
            Suite::Main => "main",
            Suite::Conservation => "conservation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {} ({} checks, {} failures)",
            self.suite,
            self.checks,
            self.failures.len()
        )?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub depth: usize,
    pub state_cap: usize,
    pub trace_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            depth: 3,
            state_cap: 100_000,
            trace_budget: 1_000_000,
        }
    }
}

fn ball(net: &Net, s0: &State, limits: &Limits) -> Result<Lts, Error> {
    let lts = explore(
        net,
        s0,
        &ExploreConfig {
            depth: limits.depth,
            state_cap: limits.state_cap,
            key_mode: KeyMode::Exact,
        },
    )?;
    if lts.truncated {
        return Err(Error::BudgetExceeded(format!(
            "more than {} states",
            limits.state_cap
        )));
    }
    Ok(lts)
}

pub fn run_suite(
    net: &Net,
    s0: &State,
    suite: Suite,
    limits: &Limits,
) -> Result<SuiteReport, Error> {
    let mut r = SuiteReport {
        suite,
        checks: 0,
        failures: Vec::new(),
    };
    let record = |r: &mut SuiteReport, v: Verdict, what: String| {
        r.checks += 1;
        if let Verdict::Fail(cx) = v {
            r.failures.push(format!("{what}: {cx}"));
        }
    };
    match suite {
        Suite::Loop | Suite::Square | Suite::Rti | Suite::Conservation => {
            let lts = ball(net, s0, limits)?;
            let ids = s0.marking.token_ids();
            for (i, st) in lts.states.iter().enumerate() {
                let s = &st.state;
                match suite {
                    Suite::Rti => record(
                        &mut r,
                        check_reverse_independence(net, s)?,
                        format!("state {i}"),
                    ),
                    Suite::Conservation => {
                        r.checks += 1;
                        if let Err(e) =
                            check_conservation(&ids, &s.marking).and_then(|_| s.check_consistency())
                        {
                            r.failures.push(format!("state {i}: {e}"));
                        }
                        if !lts.is_interior(i) {
                            continue;
                        }
                        for (a, next) in successors(net, s)? {
                            let (plus, minus) =
                                effect_bond_ids(net, &a.transition, &a.label().binding)?;
                            let (created, destroyed) = if a.direction.is_forward() {
                                (plus, minus)
                            } else {
                                (minus, plus)
                            };
                            r.checks += 1;
                            if let Err(e) =
                                check_bond_effects(&s.marking, &next.marking, &created, &destroyed)
                            {
                                r.failures.push(format!("state {i}, {}: {e}", a.label()));
                            }
                        }
                    }
                    _ if !lts.is_interior(i) => {}
                    Suite::Loop => {
                        for a in enabled_actions(net, s)? {
                            let v = if a.direction.is_forward() {
                                check_loop(net, s, &a.transition, &a.assignment)?
                            } else {
                                check_loop_reverse(net, s, &a)?
                            };
                            record(&mut r, v, format!("state {i}, {}", a.label()));
                        }
                    }
                    Suite::Square => {
                        let acts = enabled_actions(net, s)?;
                        for (n, a) in acts.iter().enumerate() {
                            for b in &acts[n + 1..] {
                                if actions_concurrent(s, a, b) {
                                    let what = format!("state {i}, {} | {}", a.label(), b.label());
                                    record(&mut r, check_square(net, s, a, b)?, what);
                                }
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        Suite::Parabolic => {
            for (labels, _) in enumerate_traces(net, s0, limits.depth, limits.trace_budget)? {
                let t = Trace::new(replay_labels(net, s0, &labels)?.1);
                r.checks += 1;
                let what = labels
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; ");
                match parabolic_normalize(net, s0, &t) {
                    Ok((rev, fwd)) => {
                        let joined = Trace::new(rev.steps.into_iter().chain(fwd.steps).collect());
                        if !traces_equivalent(net, s0, &t, &joined)? {
                            r.failures
                                .push(format!("<{what}>: normal form is not equivalent"));
                        }
                    }
                    Err(e) => r.failures.push(format!("<{what}>: {e}")),
                }
            }
        }
        Suite::Main => record(
            &mut r,
            check_causal_consistency(net, s0, limits.depth, limits.trace_budget)?,
            "traces".into(),
        ),
    }
    Ok(r)
}
