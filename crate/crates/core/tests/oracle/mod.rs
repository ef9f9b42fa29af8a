//! A brute-force enumerator written directly against the firing and
//! reversal rules on plain tuples, used to pin exploration counts.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use mrpn_core::{Stamp, State};

pub type Tok = (String, u32, Vec<(u32, String, String)>);
pub type Bond = (Tok, Tok);

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct OState {
    pub places: BTreeMap<String, (BTreeSet<Tok>, BTreeSet<Bond>)>,
    pub hist: BTreeMap<String, BTreeSet<u32>>,
}

pub struct Arc {
    pub place: &'static str,
    pub vars: Vec<&'static str>,
    pub bonds: Vec<(&'static str, &'static str)>,
}

pub struct OTrans {
    pub name: &'static str,
    pub ins: Vec<Arc>,
    pub outs: Vec<Arc>,
}

pub struct ONet {
    pub var_ty: BTreeMap<&'static str, &'static str>,
    pub trans: Vec<OTrans>,
}

pub fn bond(a: Tok, b: Tok) -> Bond {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

pub fn pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

/// Tokens reachable from `seed` over bonds of `w`, with the bonds among them.
pub fn connected(
    seed: &Tok,
    w: &(BTreeSet<Tok>, BTreeSet<Bond>),
) -> (BTreeSet<Tok>, BTreeSet<Bond>) {
    let mut toks = BTreeSet::from([seed.clone()]);
    let mut changed = true;
    while changed {
        changed = false;
        for (a, b) in &w.1 {
            if toks.contains(a) && !toks.contains(b) && w.0.contains(b) {
                toks.insert(b.clone());
                changed = true;
            }
            if toks.contains(b) && !toks.contains(a) && w.0.contains(a) {
                toks.insert(a.clone());
                changed = true;
            }
        }
    }
    let bonds =
        w.1.iter()
            .filter(|(a, b)| toks.contains(a) && toks.contains(b))
            .cloned()
            .collect();
    (toks, bonds)
}

pub fn effects(t: &OTrans) -> (BTreeSet<(String, String)>, BTreeSet<(String, String)>) {
    let ins: BTreeSet<_> = t
        .ins
        .iter()
        .flat_map(|a| a.bonds.iter().map(|(x, y)| pair(x, y)))
        .collect();
    let outs: BTreeSet<_> = t
        .outs
        .iter()
        .flat_map(|a| a.bonds.iter().map(|(x, y)| pair(x, y)))
        .collect();
    (
        outs.difference(&ins).cloned().collect(),
        ins.difference(&outs).cloned().collect(),
    )
}

pub fn all_tokens(s: &OState) -> Vec<Tok> {
    s.places
        .values()
        .flat_map(|(t, _)| t.iter().cloned())
        .collect()
}

/// All injective type-respecting maps from `vars` into the tokens of `s`.
pub fn assignments(
    net: &ONet,
    vars: &[&'static str],
    s: &OState,
) -> Vec<BTreeMap<&'static str, Tok>> {
    let toks = all_tokens(s);
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        let mut next = Vec::new();
        for partial in &out {
            for tok in &toks {
                if tok.0 == net.var_ty[v]
                    && !partial.values().any(|x: &Tok| x.0 == tok.0 && x.1 == tok.1)
                {
                    let mut p = partial.clone();
                    p.insert(*v, tok.clone());
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

pub fn pool(s: &OState, x: &str) -> (BTreeSet<Tok>, BTreeSet<Bond>) {
    s.places.get(x).cloned().unwrap_or_default()
}

pub fn union_pools(s: &OState, places: &BTreeSet<&str>) -> (BTreeSet<Tok>, BTreeSet<Bond>) {
    let mut out: (BTreeSet<Tok>, BTreeSet<Bond>) = Default::default();
    for p in places {
        let (t, b) = pool(s, p);
        out.0.extend(t);
        out.1.extend(b);
    }
    out
}

pub fn present(s: &OState, arc: &Arc, a: &BTreeMap<&'static str, Tok>) -> bool {
    let (t, b) = pool(s, arc.place);
    arc.vars.iter().all(|v| t.contains(&a[v]))
        && arc
            .bonds
            .iter()
            .all(|(x, y)| b.contains(&bond(a[x].clone(), a[y].clone())))
}

pub fn put(
    places: &mut BTreeMap<String, (BTreeSet<Tok>, BTreeSet<Bond>)>,
    x: &str,
    c: (BTreeSet<Tok>, BTreeSet<Bond>),
) {
    let e = places.entry(x.into()).or_default();
    e.0.extend(c.0);
    e.1.extend(c.1);
}

pub fn take(
    s: &OState,
    arcs: &[Arc],
    a: &BTreeMap<&'static str, Tok>,
) -> BTreeMap<String, (BTreeSet<Tok>, BTreeSet<Bond>)> {
    let mut places = s.places.clone();
    for arc in arcs {
        let here = pool(s, arc.place);
        for v in &arc.vars {
            let (t, b) = connected(&a[v], &here);
            let e = places.get_mut(arc.place).unwrap();
            e.0.retain(|x| !t.contains(x));
            e.1.retain(|x| !b.contains(x));
        }
    }
    places
}

pub fn tidy(
    mut places: BTreeMap<String, (BTreeSet<Tok>, BTreeSet<Bond>)>,
) -> BTreeMap<String, (BTreeSet<Tok>, BTreeSet<Bond>)> {
    places.retain(|_, (t, b)| !t.is_empty() || !b.is_empty());
    places
}

pub fn forward(net: &ONet, s: &OState) -> Vec<OState> {
    let mut out = Vec::new();
    for t in &net.trans {
        let vars: Vec<&'static str> = {
            let set: BTreeSet<_> = t.ins.iter().flat_map(|a| a.vars.iter().copied()).collect();
            set.into_iter().collect()
        };
        let (plus, minus) = effects(t);
        let in_places: BTreeSet<&str> = t.ins.iter().map(|a| a.place).collect();
        for a in assignments(net, &vars, s) {
            if !t.ins.iter().all(|arc| present(s, arc, &a)) {
                continue;
            }
            let already = t.ins.iter().any(|arc| {
                let b = pool(s, arc.place).1;
                plus.iter().any(|(x, y)| {
                    arc.vars.contains(&x.as_str())
                        && arc.vars.contains(&y.as_str())
                        && b.contains(&bond(a[x.as_str()].clone(), a[y.as_str()].clone()))
                })
            });
            if already {
                continue;
            }
            let mut after = union_pools(s, &in_places);
            for (x, y) in &plus {
                after
                    .1
                    .insert(bond(a[x.as_str()].clone(), a[y.as_str()].clone()));
            }
            for (x, y) in &minus {
                after
                    .1
                    .remove(&bond(a[x.as_str()].clone(), a[y.as_str()].clone()));
            }
            let mut clone = false;
            for o1 in &t.outs {
                for o2 in &t.outs {
                    if o1.place == o2.place {
                        continue;
                    }
                    for x in &o1.vars {
                        for y in &o2.vars {
                            if connected(&a[x], &after) == connected(&a[y], &after) {
                                clone = true;
                            }
                        }
                    }
                }
            }
            if clone {
                continue;
            }
            let k = s
                .hist
                .get(t.name)
                .and_then(|h| h.iter().max().copied())
                .unwrap_or(0)
                + 1;
            let stamp = |tok: &Tok| -> Tok {
                let var = a
                    .iter()
                    .find(|(_, x)| *x == tok)
                    .map(|(v, _)| v.to_string())
                    .unwrap_or_else(|| "*".into());
                let mut p = tok.2.clone();
                p.push((k, t.name.into(), var));
                (tok.0.clone(), tok.1, p)
            };
            let mut places = take(s, &t.ins, &a);
            for arc in &t.outs {
                for v in &arc.vars {
                    let (toks, bonds) = connected(&a[v], &after);
                    let toks = toks.iter().map(stamp).collect();
                    let bonds = bonds
                        .iter()
                        .map(|(x, y)| bond(stamp(x), stamp(y)))
                        .collect();
                    put(&mut places, arc.place, (toks, bonds));
                }
            }
            let mut hist = s.hist.clone();
            hist.entry(t.name.into()).or_default().insert(k);
            out.push(OState {
                places: tidy(places),
                hist,
            });
        }
    }
    out
}

pub fn reverse(net: &ONet, s: &OState) -> Vec<OState> {
    let mut out = Vec::new();
    for t in &net.trans {
        let vars: Vec<&'static str> = {
            let set: BTreeSet<_> = t.outs.iter().flat_map(|a| a.vars.iter().copied()).collect();
            set.into_iter().collect()
        };
        let (plus, minus) = effects(t);
        let out_places: BTreeSet<&str> = t.outs.iter().map(|a| a.place).collect();
        for &k in s.hist.get(t.name).into_iter().flatten() {
            let carried_last = all_tokens(s).iter().all(|tok| {
                let pos = tok.2.iter().position(|e| e.0 == k && e.1 == t.name);
                pos.is_none_or(|p| p + 1 == tok.2.len())
            });
            if !carried_last {
                continue;
            }
            for r in assignments(net, &vars, s) {
                if !t.outs.iter().all(|arc| present(s, arc, &r)) {
                    continue;
                }
                if !r
                    .iter()
                    .all(|(v, tok)| tok.2.last() == Some(&(k, t.name.to_string(), v.to_string())))
                {
                    continue;
                }
                let mut before = union_pools(s, &out_places);
                for (x, y) in &minus {
                    before
                        .1
                        .insert(bond(r[x.as_str()].clone(), r[y.as_str()].clone()));
                }
                for (x, y) in &plus {
                    before
                        .1
                        .remove(&bond(r[x.as_str()].clone(), r[y.as_str()].clone()));
                }
                let init = |tok: &Tok| -> Tok {
                    let mut p = tok.2.clone();
                    p.pop();
                    (tok.0.clone(), tok.1, p)
                };
                let mut places = take(s, &t.outs, &r);
                for arc in &t.ins {
                    for v in &arc.vars {
                        let (toks, bonds) = connected(&r[v], &before);
                        let toks = toks.iter().map(init).collect();
                        let bonds = bonds.iter().map(|(x, y)| bond(init(x), init(y))).collect();
                        put(&mut places, arc.place, (toks, bonds));
                    }
                }
                let mut hist = s.hist.clone();
                hist.get_mut(t.name).unwrap().remove(&k);
                out.push(OState {
                    places: tidy(places),
                    hist,
                });
            }
        }
    }
    out
}

/// Renumbers the live keys of each transition `1..n` in order.
pub fn normalize(s: &OState) -> OState {
    let maps: BTreeMap<String, BTreeMap<u32, u32>> = s
        .hist
        .iter()
        .map(|(t, ks)| {
            (
                t.clone(),
                ks.iter()
                    .enumerate()
                    .map(|(n, k)| (*k, n as u32 + 1))
                    .collect(),
            )
        })
        .collect();
    let tok = |x: &Tok| -> Tok {
        (
            x.0.clone(),
            x.1,
            x.2.iter()
                .map(|(k, t, v)| (maps[t][k], t.clone(), v.clone()))
                .collect(),
        )
    };
    OState {
        places: s
            .places
            .iter()
            .map(|(p, (ts, bs))| {
                (
                    p.clone(),
                    (
                        ts.iter().map(tok).collect(),
                        bs.iter().map(|(a, b)| bond(tok(a), tok(b))).collect(),
                    ),
                )
            })
            .collect(),
        hist: s
            .hist
            .iter()
            .filter(|(_, ks)| !ks.is_empty())
            .map(|(t, ks)| (t.clone(), (1..=ks.len() as u32).collect()))
            .collect(),
    }
}

pub struct Counts {
    pub states: BTreeSet<OState>,
    pub forward: usize,
    pub reverse: usize,
}

pub fn brute_force(net: &ONet, s0: OState, depth: usize) -> Counts {
    let mut states = BTreeSet::from([normalize(&s0)]);
    let mut queue = VecDeque::from([(normalize(&s0), 0)]);
    let (mut forward_edges, mut reverse_edges) = (0, 0);
    while let Some((s, d)) = queue.pop_front() {
        if d >= depth {
            continue;
        }
        let f = forward(net, &s);
        let r = reverse(net, &s);
        forward_edges += f.len();
        reverse_edges += r.len();
        for n in f.into_iter().chain(r) {
            let n = normalize(&n);
            if states.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    Counts {
        states,
        forward: forward_edges,
        reverse: reverse_edges,
    }
}

pub fn pairing_raw() -> (ONet, OState) {
    let net = ONet {
        var_ty: BTreeMap::from([("i", "I"), ("c", "C")]),
        trans: vec![OTrans {
            name: "t",
            ins: vec![
                Arc {
                    place: "u",
                    vars: vec!["i"],
                    bonds: vec![],
                },
                Arc {
                    place: "v",
                    vars: vec!["c"],
                    bonds: vec![],
                },
            ],
            outs: vec![Arc {
                place: "w",
                vars: vec!["i", "c"],
                bonds: vec![("i", "c")],
            }],
        }],
    };
    let mut s = OState::default();
    for i in 1..=2 {
        s.places
            .entry("u".into())
            .or_default()
            .0
            .insert(("I".into(), i, vec![]));
        s.places
            .entry("v".into())
            .or_default()
            .0
            .insert(("C".into(), i, vec![]));
    }
    (net, s)
}

pub fn chain_raw() -> (ONet, OState) {
    let net = ONet {
        var_ty: BTreeMap::from([("a", "A"), ("b", "B"), ("d", "D")]),
        trans: vec![
            OTrans {
                name: "t1",
                ins: vec![
                    Arc {
                        place: "p",
                        vars: vec!["a"],
                        bonds: vec![],
                    },
                    Arc {
                        place: "q",
                        vars: vec!["b"],
                        bonds: vec![],
                    },
                ],
                outs: vec![Arc {
                    place: "r",
                    vars: vec!["a", "b"],
                    bonds: vec![("a", "b")],
                }],
            },
            OTrans {
                name: "t2",
                ins: vec![Arc {
                    place: "r",
                    vars: vec!["a"],
                    bonds: vec![],
                }],
                outs: vec![Arc {
                    place: "s",
                    vars: vec!["a"],
                    bonds: vec![],
                }],
            },
            OTrans {
                name: "t3",
                ins: vec![Arc {
                    place: "s",
                    vars: vec!["d"],
                    bonds: vec![],
                }],
                outs: vec![Arc {
                    place: "z",
                    vars: vec!["d"],
                    bonds: vec![],
                }],
            },
        ],
    };
    let mut s = OState::default();
    for (p, ty, i) in [("p", "A", 1), ("p", "A", 2), ("q", "B", 1), ("s", "D", 1)] {
        s.places
            .entry(p.into())
            .or_default()
            .0
            .insert((ty.into(), i, vec![]));
    }
    (net, s)
}

pub fn lower(s: &State) -> OState {
    let tok = |t: &mrpn_core::TokenInstance| -> Tok {
        (
            t.id.ty.to_string(),
            t.id.index,
            t.path
                .iter()
                .map(|e| {
                    let v = match &e.stamp {
                        Stamp::Var(v) => v.to_string(),
                        Stamp::Bystander => "*".into(),
                    };
                    (e.key, e.transition.to_string(), v)
                })
                .collect(),
        )
    };
    let mut out = OState::default();
    for (p, pool) in s.marking.places() {
        let e = out.places.entry(p.to_string()).or_default();
        e.0.extend(pool.tokens.iter().map(tok));
        e.1.extend(pool.bonds.iter().map(|b| {
            let (x, y) = b.endpoints();
            bond(tok(x), tok(y))
        }));
    }
    for (t, recs) in s.history.transitions() {
        if !recs.is_empty() {
            out.hist
                .insert(t.to_string(), recs.keys().copied().collect());
        }
    }
    out
}
