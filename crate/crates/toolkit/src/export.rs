//! LTS export (DOT, JSON lines) and the translation maps report.

use std::fmt::Write;

use mrpn_core::{Label, Lts, Projection, TranslationMaps};
use serde::Serialize;
use serde_json::json;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text; reverse edges are dashed.
pub fn to_dot(lts: &Lts) -> String {
    let mut out = String::from("digraph lts {\n  rankdir=LR;\n  node [shape=box, fontsize=10];\n");
    for (i, s) in lts.states.iter().enumerate() {
        let shape = if i == lts.initial() {
            ", peripheries=2"
        } else {
            ""
        };
        writeln!(out, "  s{i} [label=\"{}\"{shape}];", escape(s.key.as_str())).unwrap();
    }
    for e in &lts.edges {
        let style = if e.label.direction.is_forward() {
            ""
        } else {
            ", style=dashed"
        };
        writeln!(
            out,
            "  s{} -> s{} [label=\"{}\"{style}];",
            e.from,
            e.to,
            escape(&e.label.to_string())
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

fn binding_json(p: &Projection) -> serde_json::Value {
    p.iter()
        .map(|(v, id)| (v.to_string(), json!(id.to_string())))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

pub fn label_json(l: &Label) -> serde_json::Value {
    json!({ "dir": l.direction.as_str(), "t": l.transition.as_str(), "assign": binding_json(&l.binding) })
}

/// One JSON object per line: states, then edges, then a summary record.
pub fn to_jsonl(lts: &Lts) -> String {
    let mut out = String::new();
    for (i, s) in lts.states.iter().enumerate() {
        let marking: serde_json::Map<_, _> = s
            .state
            .marking
            .places()
            .map(|(p, pool)| {
                let items: Vec<String> = pool
                    .tokens
                    .iter()
                    .map(ToString::to_string)
                    .chain(pool.bonds.iter().map(|b| {
                        let (a, c) = b.ids();
                        format!("{a}-{c}")
                    }))
                    .collect();
                (p.to_string(), json!(items))
            })
            .collect();
        let history: serde_json::Map<_, _> = s
            .state
            .history
            .transitions()
            .filter(|(_, r)| !r.is_empty())
            .map(|(t, recs)| {
                let list: Vec<_> = recs
                    .iter()
                    .map(|(k, b)| json!({ "key": k, "assign": binding_json(b) }))
                    .collect();
                (t.to_string(), json!(list))
            })
            .collect();
        let rec = json!({
            "kind": "state",
            "id": i,
            "depth": s.depth,
            "key": s.key.as_str(),
            "marking": marking,
            "history": history,
        });
        writeln!(out, "{rec}").unwrap();
    }
    for e in &lts.edges {
        writeln!(
            out,
            "{}",
            json!({ "kind": "edge", "from": e.from, "label": label_json(&e.label), "to": e.to })
        )
        .unwrap();
    }
    writeln!(out, "{}", summary_json(lts)).unwrap();
    out
}

pub fn summary_json(lts: &Lts) -> serde_json::Value {
    json!({
        "kind": "meta",
        "keys": lts.key_mode.to_string(),
        "depth": lts.depth,
        "states": lts.states.len(),
        "edges": lts.edges.len(),
        "forward": lts.forward_edge_count(),
        "reverse": lts.reverse_edge_count(),
        "truncated": lts.truncated,
    })
}

#[derive(Serialize)]
struct TypeEntry {
    instance: String,
    image: String,
}

#[derive(Serialize)]
struct VarEntry {
    variable: String,
    instance: String,
    image: String,
}

#[derive(Serialize)]
struct TransEntry {
    transition: String,
    assign: serde_json::Value,
    image: String,
}

#[derive(Serialize)]
struct MapsReport {
    types: Vec<TypeEntry>,
    variables: Vec<VarEntry>,
    transitions: Vec<TransEntry>,
}

pub fn maps_json(maps: &TranslationMaps) -> String {
    let report = MapsReport {
        types: maps
            .type_map
            .iter()
            .map(|(id, ty)| TypeEntry {
                instance: id.to_string(),
                image: ty.to_string(),
            })
            .collect(),
        variables: maps
            .var_map
            .iter()
            .map(|((v, id), w)| VarEntry {
                variable: v.to_string(),
                instance: id.to_string(),
                image: w.to_string(),
            })
            .collect(),
        transitions: maps
            .trans_map
            .iter()
            .map(|((t, f), u)| TransEntry {
                transition: t.to_string(),
                assign: binding_json(f),
                image: u.to_string(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("serializable");
    s.push('\n');
    s
}
