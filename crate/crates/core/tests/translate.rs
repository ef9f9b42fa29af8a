mod common;

use common::*;
use mrpn_core::causality::enabled_actions;
use mrpn_core::engine::check_conservation;
use mrpn_core::translate::{map_action, map_label, map_state, to_srpn, verify_iso};
use mrpn_core::{
    ArcLabel, Net, PathEntry, Projection, SrpnNet, Stamp, State, TokenId, TokenInstance,
    Transition, TranslationMaps, Verdict,
};

#[test]
fn pairing_has_four_types_and_transitions() {
    let (net, s0) = pairing();
    let (srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    let types: Vec<&str> = srpn.net.types().iter().map(|t| t.as_str()).collect();
    assert_eq!(types, ["C_1", "C_2", "I_1", "I_2"]);
    let ts: Vec<&str> = srpn.net.transitions().iter().map(|t| t.as_str()).collect();
    assert_eq!(ts, ["t__c1_i1", "t__c1_i2", "t__c2_i1", "t__c2_i2"]);
    assert_eq!(maps.trans_map.len(), 4);
    assert!(srpn.net.validate_well_formed().is_empty());
    srpn.check().unwrap();
    let inputs = srpn.net.inputs(&"t__c2_i1".into()).unwrap();
    assert_eq!(inputs[0], ("u".into(), ArcLabel::new(["i_1"])));
    assert_eq!(inputs[1], ("v".into(), ArcLabel::new(["c_2"])));
    let outputs = srpn.net.outputs(&"t__c2_i1".into()).unwrap();
    assert_eq!(
        outputs[0],
        ("w".into(), ArcLabel::new(["i_1", "c_2"]).bond("i_1", "c_2"))
    );
}

#[test]
fn pen_transition_count() {
    let (net, s0) = pen();
    let (srpn, _) = to_srpn(&net, &s0.marking).unwrap();
    let count = |prefix: &str| {
        srpn.net
            .transitions()
            .iter()
            .filter(|t| t.as_str().starts_with(prefix))
            .count()
    };
    // Every injective type-respecting choice of initial instances.
    assert_eq!(count("t1__"), 3 * 3);
    assert_eq!(count("t2__"), 3 * 3);
    assert_eq!(srpn.net.types().len(), 9);
    assert!(srpn.net.validate_well_formed().is_empty());
}

#[test]
fn rejects_stamped_initial_markings() {
    let (net, mut s0) = pairing();
    s0.marking.add_token(
        "w",
        TokenInstance::with_path("I", 3, vec![PathEntry::new(1, "t", Stamp::Var("i".into()))]),
    );
    assert!(to_srpn(&net, &s0.marking).is_err());
}

#[test]
fn gamma_after_one_step() {
    let (net, s0) = pairing();
    let (srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    assert_eq!(
        map_state(&maps, &s0).unwrap(),
        State::initial(srpn.initial.clone())
    );
    let s1 = step(&net, &s0, &fwd("t", &[("i", ("I", 1)), ("c", ("C", 1))]));
    let g = map_state(&maps, &s1).unwrap();
    let want = TokenInstance::with_path(
        "I_1",
        1,
        vec![PathEntry::new(1, "t__c1_i1", Stamp::Var("i_1".into()))],
    );
    assert!(g.marking.get(&"w".into()).contains_token(&want));
    assert_eq!(g.history.keys(&"t__c1_i1".into()).collect::<Vec<_>>(), [1]);
    let ids = srpn.initial.token_ids();
    check_conservation(&ids, &g.marking).unwrap();
}

#[test]
fn eta_is_injective_and_matches_labels() {
    let (net, s0) = pen();
    let (_, maps) = to_srpn(&net, &s0.marking).unwrap();
    let acts = enabled_actions(&net, &s0).unwrap();
    let images: std::collections::BTreeSet<_> = acts
        .iter()
        .map(|a| map_action(&maps, &s0, a).unwrap())
        .collect();
    assert_eq!(images.len(), acts.len());
    for a in &acts {
        assert_eq!(
            map_action(&maps, &s0, a).unwrap().label(),
            map_label(&maps, &a.label()).unwrap()
        );
    }
}

#[test]
fn pairing_iso_passes() {
    let (net, s0) = pairing();
    let (srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    for depth in 0..=4 {
        assert_eq!(
            verify_iso(&net, &s0, &srpn, &maps, depth).unwrap(),
            Verdict::Pass,
            "depth {depth}"
        );
    }
}

#[test]
fn corpus_iso_passes() {
    for (net, s0) in [pen(), chain(), cycle(), split()] {
        let (srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
        assert!(verify_iso(&net, &s0, &srpn, &maps, 3).unwrap().is_pass());
    }
}

#[test]
fn identity_maps() {
    let net = Net::builder()
        .types(["A", "B"])
        .bond_type("A", "B")
        .variable("a", "A")
        .variable("b", "B")
        .place("p")
        .place("q")
        .place("r")
        .transition("join")
        .arc_in("p", "join", ArcLabel::new(["a"]))
        .arc_in("q", "join", ArcLabel::new(["b"]))
        .arc_out("join", "r", ArcLabel::new(["a", "b"]).bond("a", "b"))
        .build();
    let mut m = mrpn_core::Marking::new();
    m.add_token("p", TokenInstance::initial("A", 1));
    m.add_token("q", TokenInstance::initial("B", 1));
    let maps = TranslationMaps::identity(&net, &m).unwrap();
    let same = SrpnNet {
        net: net.clone(),
        initial: m.clone(),
    };
    assert!(
        verify_iso(&net, &State::initial(m.clone()), &same, &maps, 4)
            .unwrap()
            .is_pass()
    );
    let (srpn, _) = to_srpn(&net, &m).unwrap();
    assert_eq!(srpn.net.transitions().len(), net.transitions().len());
}

fn remove_transition(net: &Net, t: &str) -> Net {
    let mut b = Net::builder();
    for ty in net.types() {
        b = b.ty(ty.clone());
    }
    for bt in net.bond_types() {
        let (x, y) = bt.ends();
        b = b.bond_type(x.clone(), y.clone());
    }
    for (v, ty) in net.variables() {
        b = b.variable(v.clone(), ty.clone());
    }
    for p in net.places() {
        b = b.place(p.clone());
    }
    for tr in net.transitions().iter().filter(|tr| tr.as_str() != t) {
        b = b.transition(tr.clone());
    }
    for (p, tr, l) in net.arcs_in().filter(|(_, tr, _)| tr.as_str() != t) {
        b = b.arc_in(p.clone(), tr.clone(), l.clone());
    }
    for (tr, p, l) in net.arcs_out().filter(|(tr, _, _)| tr.as_str() != t) {
        b = b.arc_out(tr.clone(), p.clone(), l.clone());
    }
    b.build()
}

#[test]
fn deleting_a_transition_fails_with_witness() {
    let (net, s0) = pairing();
    let (mut srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    srpn.net = remove_transition(&srpn.net, "t__c2_i1");
    match verify_iso(&net, &s0, &srpn, &maps, 4).unwrap() {
        Verdict::Fail(cx) => assert!(!cx.traces.is_empty() && !cx.traces[0].is_empty(), "{cx}"),
        Verdict::Pass => panic!("mutant passed"),
    }
}

fn relabel(srpn: &SrpnNet, t: &str, rename: impl Fn(&ArcLabel, bool) -> ArcLabel) -> Net {
    let t: Transition = t.into();
    let mut b = remove_transition(&srpn.net, t.as_str())
        .to_builder()
        .transition(t.clone());
    for (p, l) in srpn.net.inputs(&t).unwrap() {
        b = b.arc_in(p.clone(), t.clone(), rename(l, p.as_str() == "u"));
    }
    for (p, l) in srpn.net.outputs(&t).unwrap() {
        b = b.arc_out(t.clone(), p.clone(), rename(l, false));
    }
    b.build()
}

#[test]
fn permuting_an_arc_label_fails_with_witness() {
    let (net, s0) = pairing();
    let (mut srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    // t__c1_i1 now takes I_2 throughout.
    srpn.net = relabel(&srpn, "t__c1_i1", |l, _| {
        let mut out = ArcLabel::new(l.vars.iter().map(|v| {
            if v.as_str() == "i_1" {
                "i_2"
            } else {
                v.as_str()
            }
        }));
        if !l.bonds.is_empty() {
            out = out.bond("i_2", "c_1");
        }
        out
    });
    assert!(srpn.net.validate_well_formed().is_empty());
    match verify_iso(&net, &s0, &srpn, &maps, 4).unwrap() {
        Verdict::Fail(cx) => assert!(!cx.traces.is_empty() && !cx.traces[0].is_empty(), "{cx}"),
        Verdict::Pass => panic!("mutant passed"),
    }
}

#[test]
fn ill_formed_targets_fail() {
    let (net, s0) = pairing();
    let (mut srpn, maps) = to_srpn(&net, &s0.marking).unwrap();
    srpn.net = relabel(&srpn, "t__c1_i1", |l, on_u| {
        if on_u {
            ArcLabel::new(["i_2"])
        } else {
            l.clone()
        }
    });
    assert!(!verify_iso(&net, &s0, &srpn, &maps, 4).unwrap().is_pass());
}

#[test]
fn unmapped_instances_are_errors() {
    let (net, s0) = pairing();
    let (_, maps) = to_srpn(&net, &s0.marking).unwrap();
    let mut s = s0.clone();
    s.marking.add_token("u", TokenInstance::initial("I", 7));
    assert!(map_state(&maps, &s).is_err());
    let stray = Projection::from_pairs([("i", TokenId::new("I", 7))]);
    assert!(maps.transition(&"t".into(), &stray).is_err());
}
