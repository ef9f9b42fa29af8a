#![allow(dead_code)]

use std::path::PathBuf;

use mrpn_core::{ArcLabel, BondInstance, Marking, Net, State, TokenInstance};
use mrpn_toolkit::{parse_net, NetDocument};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn nets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("nets")
}

pub fn net_path(name: &str) -> PathBuf {
    nets_dir().join(format!("{name}.net"))
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Compares against a pinned file; `MRPN_BLESS=1` rewrites it instead.
pub fn golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("MRPN_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} differs from the pinned copy");
}

pub fn load(name: &str) -> NetDocument {
    let src = std::fs::read_to_string(net_path(name)).unwrap();
    parse_net(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every `.net` file in the corpus, sorted by name, with its source text.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<_> = std::fs::read_dir(nets_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "net"))
        .map(|p| {
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

const TYPES: [&str; 3] = ["A", "B", "C"];

/// A random well-formed net with at most 6 places, 4 transitions and
/// 6 token instances, reproducible from `seed`.
pub fn random_net(seed: u64) -> (Net, State) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(x) = try_random_net(&mut rng) {
            return x;
        }
    }
}

fn try_random_net(rng: &mut ChaCha8Rng) -> Option<(Net, State)> {
    let ntypes = rng.random_range(1..=3);
    let types = &TYPES[..ntypes];
    let places: Vec<String> = (0..rng.random_range(2..=6))
        .map(|i| format!("p{i}"))
        .collect();
    let vars: Vec<(String, &str)> = types
        .iter()
        .flat_map(|t| [1, 2].map(|k| (format!("{}{k}", t.to_lowercase()), *t)))
        .collect();

    let mut b = Net::builder().types(types.iter().copied());
    for (i, x) in types.iter().enumerate() {
        for y in &types[i + 1..] {
            b = b.bond_type(*x, *y);
        }
    }
    for p in &places {
        b = b.place(p.as_str());
    }
    let mut used = std::collections::BTreeSet::new();
    let ty = |v: &str| vars.iter().find(|(w, _)| w == v).unwrap().1;
    for n in 0..rng.random_range(1..=4) {
        let t = format!("t{n}");
        b = b.transition(t.as_str());
        let k = rng.random_range(1..=3.min(vars.len()));
        let chosen: Vec<&str> = vars
            .choose_multiple(rng, k)
            .map(|(v, _)| v.as_str())
            .collect();
        used.extend(chosen.iter().copied());
        let mut ins: Vec<(String, Vec<&str>)> = Vec::new();
        for v in &chosen {
            let p = places.choose(rng).unwrap().clone();
            match ins.iter_mut().find(|(q, _)| *q == p) {
                Some((_, vs)) => vs.push(v),
                None => ins.push((p, vec![v])),
            }
        }
        let mut outs: Vec<(String, Vec<&str>)> = Vec::new();
        for v in &chosen {
            let p = places.choose(rng).unwrap().clone();
            match outs.iter_mut().find(|(q, _)| *q == p) {
                Some((_, vs)) => vs.push(v),
                None => outs.push((p, vec![v])),
            }
        }
        // a bond between two variables on one arc, half the time
        let bonded = |vs: &[&str], rng: &mut ChaCha8Rng| -> Option<(String, String)> {
            let pairs: Vec<_> = vs
                .iter()
                .enumerate()
                .flat_map(|(i, a)| vs[i + 1..].iter().map(move |b| (*a, *b)))
                .filter(|(a, b)| ty(a) != ty(b))
                .collect();
            if pairs.is_empty() || rng.random_bool(0.5) {
                return None;
            }
            pairs
                .choose(rng)
                .map(|(a, b)| (a.to_string(), b.to_string()))
        };
        for (p, vs) in &ins {
            let mut l = ArcLabel::new(vs.iter().copied());
            if let Some((x, y)) = bonded(vs, rng) {
                l = l.bond(x, y);
            }
            b = b.arc_in(p.as_str(), t.as_str(), l);
        }
        for (p, vs) in &outs {
            let mut l = ArcLabel::new(vs.iter().copied());
            if let Some((x, y)) = bonded(vs, rng) {
                l = l.bond(x, y);
            }
            b = b.arc_out(t.as_str(), p.as_str(), l);
        }
    }
    // only variables that label an arc can be written down
    for v in used {
        b = b.variable(v, ty(v));
    }
    let net = b.build();

    let mut m = Marking::new();
    let mut counts = [0u32; 3];
    let mut placed: Vec<(String, TokenInstance)> = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let i = rng.random_range(0..ntypes);
        counts[i] += 1;
        let tok = TokenInstance::initial(types[i], counts[i]);
        let p = places.choose(rng).unwrap().clone();
        m.add_token(p.as_str(), tok.clone());
        placed.push((p, tok));
    }
    placed.shuffle(rng);
    if rng.random_bool(0.3) {
        let pair = placed.iter().enumerate().find_map(|(i, (p, a))| {
            placed[i + 1..]
                .iter()
                .find(|(q, b)| q == p && a.ty() != b.ty())
                .map(|(_, b)| (p, a, b))
        });
        if let Some((p, a, c)) = pair {
            m.add_bond(p.as_str(), BondInstance::new(a.clone(), c.clone()));
        }
    }
    if !net.validate_well_formed().is_empty() || !net.validate_initial_marking(&m).is_empty() {
        return None;
    }
    Some((net, State::initial(m)))
}
