//! The `.net` description language and state snapshot files.
//!
//! ```text
//! // comments run to the end of the line
//! net pen
//! types { I C B }
//! bonds { I-C C-B }
//! places { u v w x y }
//! transition t1 {
//!   in u [i:I]
//!   in v [c:C]
//!   out w [i:I, c:C, i-c]
//! }
//! marking {
//!   u: I#1, I#2
//!   w: I#3, C#3, I#3-C#3
//! }
//! ```
//!
//! A snapshot holds a `marking` whose tokens may carry paths
//! (`I#1[1:t1.i, 1:t2.*]`), a `history` (`t1: 1(c=C#2,i=I#1)`) and
//! optionally the `trace` of labels that produced it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use mrpn_core::{
    ArcLabel, BondInstance, Direction, History, HistoryRecord, Label, Marking, Net, PathEntry,
    Place, Pool, Projection, Stamp, State, TokenId, TokenInstance, Transition, TypeBond, TypeName,
    Var,
};

/// A located syntax or declaration error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub code: &'static str,
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.code, self.message
        )
    }
}

impl std::error::Error for ParseError {}

pub type ParseResult<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u32),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> ParseResult<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '/' {
            bump(&mut chars);
            if chars.peek() != Some(&'/') {
                return Err(ParseError {
                    code: "PARSE-LEX",
                    message: "expected `//`".into(),
                    line: l,
                    col: k,
                });
            }
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            out.push(Spanned {
                tok: Tok::Ident(s),
                line: l,
                col: k,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(char::is_ascii_digit) {
                s.push(bump(&mut chars).unwrap());
            }
            let n = s.parse().map_err(|_| ParseError {
                code: "PARSE-LEX",
                message: format!("number `{s}` is out of range"),
                line: l,
                col: k,
            })?;
            out.push(Spanned {
                tok: Tok::Num(n),
                line: l,
                col: k,
            });
        } else if "{}[]():,-#.*=~;".contains(c) {
            bump(&mut chars);
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: l,
                col: k,
            });
        } else {
            return Err(ParseError {
                code: "PARSE-LEX",
                message: format!("unexpected character `{c}`"),
                line: l,
                col: k,
            });
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    last: usize,
}

impl Parser {
    fn new(src: &str) -> ParseResult<Self> {
        Ok(Self {
            toks: lex(src)?,
            at: 0,
            last: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> (usize, usize) {
        (self.toks[self.at].line, self.toks[self.at].col)
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        self.last = self.at;
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, code: &'static str, message: impl Into<String>) -> ParseResult<T> {
        let (line, col) = self.pos();
        Err(ParseError {
            code,
            message: message.into(),
            line,
            col,
        })
    }

    /// Error located at the most recently consumed token.
    fn err_last<T>(&self, code: &'static str, message: impl Into<String>) -> ParseResult<T> {
        let Spanned { line, col, .. } = self.toks[self.last];
        Err(ParseError {
            code,
            message: message.into(),
            line,
            col,
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> ParseResult<T> {
        self.err(
            "PARSE-SYNTAX",
            format!("expected {wanted}, found {}", self.peek()),
        )
    }

    fn sym(&mut self, c: char) -> ParseResult<()> {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            self.unexpected(&format!("`{c}`"))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> ParseResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    fn num(&mut self) -> ParseResult<u32> {
        match *self.peek() {
            Tok::Num(n) => {
                self.next();
                Ok(n)
            }
            _ => self.unexpected("a number"),
        }
    }

    fn keyword(&mut self, kw: &str) -> ParseResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.unexpected(&format!("`{kw}`")),
        }
    }

    fn token_id(&mut self) -> ParseResult<TokenId> {
        let ty = self.ident()?;
        self.sym('#')?;
        let i = self.num()?;
        Ok(TokenId::new(ty, i))
    }

    /// `I#1` or `I#1[1:t1.i, 2:t2.*]`.
    fn token(&mut self) -> ParseResult<TokenInstance> {
        let id = self.token_id()?;
        let mut path = Vec::new();
        if self.eat('[') {
            if !self.eat(']') {
                loop {
                    let k = self.num()?;
                    self.sym(':')?;
                    let t = self.ident()?;
                    self.sym('.')?;
                    let stamp = if self.eat('*') {
                        Stamp::Bystander
                    } else {
                        Stamp::Var(self.ident()?.into())
                    };
                    path.push(PathEntry::new(k, t, stamp));
                    if self.eat(']') {
                        break;
                    }
                    self.sym(',')?;
                }
            }
        }
        Ok(TokenInstance::with_path(id.ty, id.index, path))
    }

    /// `(c=C#2,i=I#1)`.
    fn binding(&mut self) -> ParseResult<Projection> {
        self.sym('(')?;
        let mut out = BTreeMap::new();
        if !self.eat(')') {
            loop {
                let v = self.ident()?;
                self.sym('=')?;
                let id = self.token_id()?;
                if out.insert(Var::from(v.clone()), id).is_some() {
                    return self.err("PARSE-DUPLICATE", format!("variable `{v}` bound twice"));
                }
                if self.eat(')') {
                    break;
                }
                self.sym(',')?;
            }
        }
        Ok(Projection(out))
    }

    /// `place: item, item, ...` entries of a marking block until `}`.
    fn marking(&mut self) -> ParseResult<(Marking, BTreeMap<Place, (usize, usize)>)> {
        self.sym('{')?;
        let mut m = Marking::new();
        let mut spans = BTreeMap::new();
        while !self.eat('}') {
            let pos = self.pos();
            let place = Place::from(self.ident()?);
            self.sym(':')?;
            if spans.insert(place.clone(), pos).is_some() {
                let (line, col) = pos;
                return Err(ParseError {
                    code: "PARSE-DUPLICATE",
                    message: format!("place `{place}` listed twice in the marking"),
                    line,
                    col,
                });
            }
            let mut pool = Pool::default();
            let mut bonds = Vec::new();
            loop {
                let pos = self.pos();
                let tok = self.token()?;
                if self.eat('-') {
                    let other = self.token_id()?;
                    bonds.push((tok.id, other, pos));
                } else if pool.token_by_id(&tok.id).is_some() {
                    return self.err(
                        "PARSE-DUPLICATE",
                        format!("instance `{}` listed twice in `{place}`", tok.id),
                    );
                } else {
                    pool.tokens.insert(tok);
                }
                if !self.eat(',') {
                    break;
                }
            }
            for (a, b, (line, col)) in bonds {
                let (Some(x), Some(y)) = (pool.token_by_id(&a), pool.token_by_id(&b)) else {
                    return Err(ParseError {
                        code: "PARSE-BOND-ENDPOINT",
                        message: format!(
                            "bond `{a}-{b}` in `{place}` joins an instance not listed there"
                        ),
                        line,
                        col,
                    });
                };
                let bond = BondInstance::new(x.clone(), y.clone());
                pool.bonds.insert(bond);
            }
            m.set(place, pool);
        }
        Ok((m, spans))
    }
}

/// A parsed `.net` file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetDocument {
    pub name: String,
    pub net: Net,
    pub initial: Marking,
    /// Source positions of declared places and transitions.
    pub spans: BTreeMap<String, (usize, usize)>,
}

impl NetDocument {
    pub fn initial_state(&self) -> State {
        State::initial(self.initial.clone())
    }

    pub fn span_of(&self, name: &str) -> Option<(usize, usize)> {
        self.spans.get(name).copied()
    }
}

type ArcDecl = (Place, Transition, ArcLabel, (usize, usize));

pub fn parse_net(src: &str) -> ParseResult<NetDocument> {
    let mut p = Parser::new(src)?;
    p.keyword("net")?;
    let name = p.ident()?;
    let mut types: BTreeSet<TypeName> = BTreeSet::new();
    let mut bond_types: Option<BTreeSet<TypeBond>> = None;
    let mut places: BTreeSet<Place> = BTreeSet::new();
    let mut transitions: BTreeSet<Transition> = BTreeSet::new();
    let mut variables: BTreeMap<Var, TypeName> = BTreeMap::new();
    let mut ins: Vec<ArcDecl> = Vec::new();
    let mut outs: Vec<ArcDecl> = Vec::new();
    let mut initial = None;
    let mut spans = BTreeMap::new();
    loop {
        let pos = p.pos();
        let Tok::Ident(kw) = p.peek().clone() else {
            if *p.peek() == Tok::Eof {
                break;
            }
            return p.unexpected("a section keyword");
        };
        p.next();
        match kw.as_str() {
            "types" => {
                p.sym('{')?;
                while !p.eat('}') {
                    let t = p.ident()?;
                    if !types.insert(t.clone().into()) {
                        return p.err_last("PARSE-DUPLICATE", format!("type `{t}` declared twice"));
                    }
                    p.eat(',');
                }
            }
            "bonds" => {
                p.sym('{')?;
                let set = bond_types.get_or_insert_with(BTreeSet::new);
                while !p.eat('}') {
                    let a = p.ident()?;
                    p.sym('-')?;
                    let b = p.ident()?;
                    set.insert(TypeBond::new(a, b));
                    p.eat(',');
                }
            }
            "places" => {
                p.sym('{')?;
                while !p.eat('}') {
                    let pos = p.pos();
                    let x = p.ident()?;
                    if !places.insert(x.clone().into()) {
                        return p
                            .err_last("PARSE-DUPLICATE", format!("place `{x}` declared twice"));
                    }
                    spans.insert(x, pos);
                    p.eat(',');
                }
            }
            "place" => {
                let pos = p.pos();
                let x = p.ident()?;
                if !places.insert(x.clone().into()) {
                    return p.err_last("PARSE-DUPLICATE", format!("place `{x}` declared twice"));
                }
                spans.insert(x, pos);
            }
            "transition" => {
                let t = p.ident()?;
                if !transitions.insert(t.clone().into()) {
                    return p.err_last(
                        "PARSE-DUPLICATE",
                        format!("transition `{t}` declared twice"),
                    );
                }
                spans.insert(t.clone(), pos);
                p.sym('{')?;
                while !p.eat('}') {
                    let pos = p.pos();
                    let dir = p.ident()?;
                    if dir != "in" && dir != "out" {
                        return Err(ParseError {
                            code: "PARSE-SYNTAX",
                            message: format!("expected `in` or `out`, found `{dir}`"),
                            line: pos.0,
                            col: pos.1,
                        });
                    }
                    let place = Place::from(p.ident()?);
                    p.sym('[')?;
                    let mut label = ArcLabel::default();
                    if !p.eat(']') {
                        loop {
                            let v = p.ident()?;
                            if p.eat('-') {
                                let w = p.ident()?;
                                label = label.bond(v, w);
                            } else {
                                if p.eat(':') {
                                    let ty = TypeName::from(p.ident()?);
                                    match variables.get(v.as_str()) {
                                        Some(prev) if *prev != ty => {
                                            return p.err(
                                                "PARSE-VAR-TYPE",
                                                format!("variable `{v}` has type `{prev}` elsewhere, not `{ty}`"),
                                            )
                                        }
                                        _ => {
                                            variables.insert(v.clone().into(), ty);
                                        }
                                    }
                                }
                                label.vars.insert(v.into());
                            }
                            if p.eat(']') {
                                break;
                            }
                            p.sym(',')?;
                        }
                    }
                    let list = if dir == "in" { &mut ins } else { &mut outs };
                    if list
                        .iter()
                        .any(|(x, u, _, _)| *x == place && u.as_str() == t)
                    {
                        return Err(ParseError {
                            code: "PARSE-DUPLICATE",
                            message: format!("two `{dir}` arcs between `{t}` and `{place}`"),
                            line: pos.0,
                            col: pos.1,
                        });
                    }
                    list.push((place, t.clone().into(), label, pos));
                }
            }
            "marking" => {
                if initial.is_some() {
                    return Err(ParseError {
                        code: "PARSE-DUPLICATE",
                        message: "second `marking` section".into(),
                        line: pos.0,
                        col: pos.1,
                    });
                }
                initial = Some(p.marking()?);
            }
            other => {
                return Err(ParseError {
                    code: "PARSE-SYNTAX",
                    message: format!("unknown section `{other}`"),
                    line: pos.0,
                    col: pos.1,
                })
            }
        }
    }
    for (_, _, label, (line, col)) in ins.iter().chain(&outs) {
        for v in &label.vars {
            if !variables.contains_key(v) {
                return Err(ParseError {
                    code: "PARSE-VAR-TYPE",
                    message: format!("variable `{v}` is never given a type"),
                    line: *line,
                    col: *col,
                });
            }
        }
    }
    let (initial, marking_spans) = initial.unwrap_or_default();
    for (x, pos) in marking_spans {
        spans.entry(format!("marking:{x}")).or_insert(pos);
    }
    let bond_types =
        bond_types.unwrap_or_else(|| infer_bond_types(&variables, &ins, &outs, &initial));
    let mut b = Net::builder().types(types);
    for bt in bond_types {
        let (x, y) = bt.ends();
        b = b.bond_type(x.clone(), y.clone());
    }
    for (v, ty) in variables {
        b = b.variable(v, ty);
    }
    for x in places {
        b = b.place(x);
    }
    for t in transitions {
        b = b.transition(t);
    }
    for (x, t, label, _) in ins {
        b = b.arc_in(x, t, label);
    }
    for (x, t, label, _) in outs {
        b = b.arc_out(t, x, label);
    }
    Ok(NetDocument {
        name,
        net: b.build(),
        initial,
        spans,
    })
}

fn infer_bond_types(
    variables: &BTreeMap<Var, TypeName>,
    ins: &[ArcDecl],
    outs: &[ArcDecl],
    m: &Marking,
) -> BTreeSet<TypeBond> {
    let mut out = BTreeSet::new();
    for (_, _, label, _) in ins.iter().chain(outs) {
        for vb in &label.bonds {
            let (a, b) = vb.ends();
            if let (Some(x), Some(y)) = (variables.get(a), variables.get(b)) {
                out.insert(TypeBond::new(x.clone(), y.clone()));
            }
        }
    }
    for (_, bond) in m.bonds() {
        let (a, b) = bond.ids();
        out.insert(TypeBond::new(a.ty.clone(), b.ty.clone()));
    }
    out
}

fn write_label(out: &mut String, net: &Net, label: &ArcLabel) {
    out.push('[');
    let mut first = true;
    for v in &label.vars {
        if !first {
            out.push_str(", ");
        }
        first = false;
        match net.var_type(v) {
            Some(ty) => write!(out, "{v}:{ty}").unwrap(),
            None => write!(out, "{v}").unwrap(),
        }
    }
    for b in &label.bonds {
        if !first {
            out.push_str(", ");
        }
        first = false;
        write!(out, "{b}").unwrap();
    }
    out.push(']');
}

/// Tokens then bonds of one place, comma separated.
pub fn format_pool(pool: &Pool) -> String {
    let items: Vec<String> = pool
        .tokens
        .iter()
        .map(ToString::to_string)
        .chain(pool.bonds.iter().map(|b| {
            let (a, c) = b.ids();
            format!("{a}-{c}")
        }))
        .collect();
    items.join(", ")
}

fn write_marking(out: &mut String, m: &Marking) {
    out.push_str("marking {\n");
    for (x, pool) in m.places() {
        writeln!(out, "  {x}: {}", format_pool(pool)).unwrap();
    }
    out.push_str("}\n");
}

/// Canonical text of a net document.
pub fn serialize_net(name: &str, net: &Net, initial: &Marking) -> String {
    let mut out = String::new();
    writeln!(out, "net {name}").unwrap();
    let types: Vec<&str> = net.types().iter().map(TypeName::as_str).collect();
    writeln!(out, "types {{ {} }}", types.join(" ")).unwrap();
    let bonds: Vec<String> = net.bond_types().iter().map(ToString::to_string).collect();
    if bonds.is_empty() {
        out.push_str("bonds { }\n");
    } else {
        writeln!(out, "bonds {{ {} }}", bonds.join(" ")).unwrap();
    }
    let places: Vec<&str> = net.places().iter().map(Place::as_str).collect();
    writeln!(out, "places {{ {} }}", places.join(" ")).unwrap();
    for t in net.transitions() {
        writeln!(out, "transition {t} {{").unwrap();
        for (x, label) in net.inputs(t).expect("declared") {
            write!(out, "  in {x} ").unwrap();
            write_label(&mut out, net, label);
            out.push('\n');
        }
        for (x, label) in net.outputs(t).expect("declared") {
            write!(out, "  out {x} ").unwrap();
            write_label(&mut out, net, label);
            out.push('\n');
        }
        out.push_str("}\n");
    }
    write_marking(&mut out, initial);
    out
}

pub fn serialize_document(doc: &NetDocument) -> String {
    serialize_net(&doc.name, &doc.net, &doc.initial)
}

/// A state file: the state and, when known, the labels leading to it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Snapshot {
    pub state: State,
    pub trace: Option<Vec<Label>>,
}

pub fn serialize_state(s: &State, trace: Option<&[Label]>) -> String {
    let mut out = String::new();
    write_marking(&mut out, &s.marking);
    out.push_str("history {\n");
    for (t, recs) in s.history.transitions() {
        if recs.is_empty() {
            continue;
        }
        let items: Vec<String> = recs.iter().map(|(k, b)| format!("{k}({b})")).collect();
        writeln!(out, "  {t}: {}", items.join(", ")).unwrap();
    }
    out.push_str("}\n");
    if let Some(trace) = trace {
        out.push_str("trace {\n");
        for l in trace {
            writeln!(out, "  {l}").unwrap();
        }
        out.push_str("}\n");
    }
    out
}

fn parse_label(p: &mut Parser) -> ParseResult<Label> {
    let dir = if p.eat('~') {
        Direction::Reverse
    } else {
        Direction::Forward
    };
    let t = p.ident()?;
    let binding = p.binding()?;
    Ok(Label::new(dir, t, binding))
}

/// Parses a single label such as `t1(c=C#2,i=I#1)` or `~t1(...)`.
pub fn parse_label_str(src: &str) -> ParseResult<Label> {
    let mut p = Parser::new(src)?;
    let l = parse_label(&mut p)?;
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of label");
    }
    Ok(l)
}

pub fn parse_state(src: &str) -> ParseResult<Snapshot> {
    let mut p = Parser::new(src)?;
    let mut snap = Snapshot::default();
    let mut seen = BTreeSet::new();
    while *p.peek() != Tok::Eof {
        let pos = p.pos();
        let kw = p.ident()?;
        if !seen.insert(kw.clone()) {
            return Err(ParseError {
                code: "PARSE-DUPLICATE",
                message: format!("second `{kw}` section"),
                line: pos.0,
                col: pos.1,
            });
        }
        match kw.as_str() {
            "marking" => snap.state.marking = p.marking()?.0,
            "history" => {
                p.sym('{')?;
                let mut h = History::new();
                while !p.eat('}') {
                    let t = Transition::from(p.ident()?);
                    p.sym(':')?;
                    loop {
                        let key = p.num()?;
                        let binding = p.binding()?;
                        if h.contains(&t, key) {
                            return p.err(
                                "PARSE-DUPLICATE",
                                format!("occurrence {key} of `{t}` listed twice"),
                            );
                        }
                        h.insert(t.clone(), HistoryRecord { key, binding });
                        if !p.eat(',') {
                            break;
                        }
                    }
                }
                snap.state.history = h;
            }
            "trace" => {
                p.sym('{')?;
                let mut labels = Vec::new();
                while !p.eat('}') {
                    labels.push(parse_label(&mut p)?);
                    p.eat(';');
                }
                snap.trace = Some(labels);
            }
            other => {
                return Err(ParseError {
                    code: "PARSE-SYNTAX",
                    message: format!("unknown section `{other}`"),
                    line: pos.0,
                    col: pos.1,
                })
            }
        }
    }
    Ok(snap)
}
