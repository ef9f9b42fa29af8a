#![allow(dead_code)]

use mrpn_core::causality::resolve;
use mrpn_core::{
    ArcLabel, Direction, Label, Marking, Net, Projection, State, TokenId, TokenInstance,
};

pub fn pen() -> (Net, State) {
    let net = Net::builder()
        .types(["I", "C", "B"])
        .bond_type("I", "C")
        .bond_type("C", "B")
        .variable("i", "I")
        .variable("c", "C")
        .variable("b", "B")
        .place("u")
        .place("v")
        .place("w")
        .place("x")
        .place("y")
        .transition("t1")
        .transition("t2")
        .arc_in("u", "t1", ArcLabel::new(["i"]))
        .arc_in("v", "t1", ArcLabel::new(["c"]))
        .arc_out("t1", "w", ArcLabel::new(["i", "c"]).bond("i", "c"))
        .arc_in("w", "t2", ArcLabel::new(["c"]))
        .arc_in("y", "t2", ArcLabel::new(["b"]))
        .arc_out("t2", "x", ArcLabel::new(["c", "b"]).bond("c", "b"))
        .build();
    let mut m = Marking::new();
    for i in 1..=3 {
        m.add_token("u", TokenInstance::initial("I", i));
        m.add_token("v", TokenInstance::initial("C", i));
        m.add_token("y", TokenInstance::initial("B", i));
    }
    (net, State::initial(m))
}

pub fn pairing() -> (Net, State) {
    let net = Net::builder()
        .types(["I", "C"])
        .bond_type("I", "C")
        .variable("i", "I")
        .variable("c", "C")
        .place("u")
        .place("v")
        .place("w")
        .transition("t")
        .arc_in("u", "t", ArcLabel::new(["i"]))
        .arc_in("v", "t", ArcLabel::new(["c"]))
        .arc_out("t", "w", ArcLabel::new(["i", "c"]).bond("i", "c"))
        .build();
    let mut m = Marking::new();
    for i in 1..=2 {
        m.add_token("u", TokenInstance::initial("I", i));
        m.add_token("v", TokenInstance::initial("C", i));
    }
    (net, State::initial(m))
}

/// A chain `a --t1--> b --t2--> c` moving a bonded pair, plus an
/// independent transition `t3` on its own token.
pub fn chain() -> (Net, State) {
    let net = Net::builder()
        .types(["A", "B", "D"])
        .bond_type("A", "B")
        .variable("a", "A")
        .variable("b", "B")
        .variable("d", "D")
        .place("p")
        .place("q")
        .place("r")
        .place("s")
        .place("z")
        .transition("t1")
        .transition("t2")
        .transition("t3")
        .arc_in("p", "t1", ArcLabel::new(["a"]))
        .arc_in("q", "t1", ArcLabel::new(["b"]))
        .arc_out("t1", "r", ArcLabel::new(["a", "b"]).bond("a", "b"))
        .arc_in("r", "t2", ArcLabel::new(["a"]))
        .arc_out("t2", "s", ArcLabel::new(["a"]))
        .arc_in("s", "t3", ArcLabel::new(["d"]))
        .arc_out("t3", "z", ArcLabel::new(["d"]))
        .build();
    let mut m = Marking::new();
    m.add_token("p", TokenInstance::initial("A", 1));
    m.add_token("p", TokenInstance::initial("A", 2));
    m.add_token("q", TokenInstance::initial("B", 1));
    m.add_token("s", TokenInstance::initial("D", 1));
    (net, State::initial(m))
}

/// A two-place cycle: tokens can circulate indefinitely.
pub fn cycle() -> (Net, State) {
    let net = Net::builder()
        .ty("A")
        .variable("a", "A")
        .place("p")
        .place("q")
        .transition("go")
        .transition("back")
        .arc_in("p", "go", ArcLabel::new(["a"]))
        .arc_out("go", "q", ArcLabel::new(["a"]))
        .arc_in("q", "back", ArcLabel::new(["a"]))
        .arc_out("back", "p", ArcLabel::new(["a"]))
        .build();
    let mut m = Marking::new();
    m.add_token("p", TokenInstance::initial("A", 1));
    m.add_token("p", TokenInstance::initial("A", 2));
    (net, State::initial(m))
}

/// Bond destruction: `split` breaks an `A-B` pair and sends the halves apart.
pub fn split() -> (Net, State) {
    let net = Net::builder()
        .types(["A", "B"])
        .bond_type("A", "B")
        .variable("a", "A")
        .variable("b", "B")
        .place("p")
        .place("l")
        .place("r")
        .transition("split")
        .arc_in("p", "split", ArcLabel::new(["a", "b"]).bond("a", "b"))
        .arc_out("split", "l", ArcLabel::new(["a"]))
        .arc_out("split", "r", ArcLabel::new(["b"]))
        .build();
    let mut m = Marking::new();
    for i in 1..=2 {
        m.add_token("p", TokenInstance::initial("A", i));
        m.add_token("p", TokenInstance::initial("B", i));
        m.add_bond(
            "p",
            mrpn_core::BondInstance::new(
                TokenInstance::initial("A", i),
                TokenInstance::initial("B", i),
            ),
        );
    }
    (net, State::initial(m))
}

pub fn id(ty: &str, i: u32) -> TokenId {
    TokenId::new(ty, i)
}

pub fn label(dir: Direction, t: &str, binding: &[(&str, (&str, u32))]) -> Label {
    Label::new(
        dir,
        t,
        Projection::from_pairs(binding.iter().map(|(v, (ty, i))| (*v, id(ty, *i)))),
    )
}

pub fn fwd(t: &str, binding: &[(&str, (&str, u32))]) -> Label {
    label(Direction::Forward, t, binding)
}

pub fn rev(t: &str, binding: &[(&str, (&str, u32))]) -> Label {
    label(Direction::Reverse, t, binding)
}

/// Resolves and applies `l`, panicking if it is not enabled.
pub fn step(net: &Net, s: &State, l: &Label) -> State {
    let a = resolve(net, s, l)
        .unwrap()
        .unwrap_or_else(|| panic!("{l} is not enabled"));
    mrpn_core::causality::apply(net, s, &a).unwrap()
}

pub fn run(net: &Net, s: &State, labels: &[Label]) -> State {
    labels.iter().fold(s.clone(), |s, l| step(net, &s, l))
}
