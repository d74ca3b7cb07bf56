//! Worked example algebras, their circuits and witness families.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::algebra::{
    counter_monoid, monoid_aperiodic, restrict_to_image, restricted_count, syntactic_quotient, validate_algebra,
    write_algebra, FiniteMonoid, ForestAlgebra, Homomorphism, Transform, Verdict, DEFAULT_BUDGET,
};
use crate::derived::{extended_vertical_element, subset_of, DerivedError, ExtendedMap};
use crate::proofsearch::{write_circuit, write_seeds, Circuit, Seeds, Tuple};
use crate::terms::{parse_term, Alphabet, Node, Term};

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub phi: Homomorphism,
    /// Named subsets of H: tight-set candidates, ideals.
    pub notable: BTreeMap<String, BTreeSet<usize>>,
}

impl Fixture {
    pub fn algebra(&self) -> &ForestAlgebra {
        &self.phi.algebra
    }

    pub fn alphabet(&self) -> Alphabet {
        self.phi.alphabet()
    }

    pub fn accepting(&self) -> &BTreeSet<usize> {
        &self.phi.accepting
    }

    pub fn set(&self, name: &str) -> &BTreeSet<usize> {
        &self.notable[name]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("no fixture named `{0}`")]
    Unknown(String),
    #[error("parameters beyond the supported range: {0}")]
    Range(String),
}

pub const NAMES: [&str; 8] = ["boolean", "duplex", "even-depth", "zigzag012", "potthoff", "exactly-one-b", "od", "trivial"];

pub fn fixture(name: &str) -> Result<Fixture, FixtureError> {
    Ok(match name {
        "boolean" => boolean_fixture(),
        "duplex" => duplex_fixture(),
        "even-depth" => even_depth_fixture(),
        "zigzag012" => zigzag012_fixture(),
        "potthoff" => potthoff_fixture(),
        "exactly-one-b" => exactly_one_b_fixture(),
        "od" => od_fixture(),
        "trivial" => trivial_fixture(),
        _ => return Err(FixtureError::Unknown(name.to_string())),
    })
}

pub fn all_fixtures() -> Vec<Fixture> {
    NAMES.iter().map(|n| fixture(n).expect("listed")).collect()
}

/// Assembles a homomorphism from a sum function and letter actions on indices.
fn assemble(
    names: Vec<String>,
    sum: impl Fn(usize, usize) -> usize,
    letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)>,
    accepting: &[usize],
) -> Homomorphism {
    let n = names.len();
    let table = (0..n).map(|a| (0..n).map(|b| sum(a, b)).collect()).collect();
    let h = FiniteMonoid::from_table(names, table).expect("fixture table has an identity");
    let lmap: BTreeMap<String, Transform> =
        letters.into_iter().map(|(l, f)| (l.to_string(), (0..n).map(&f).collect())).collect();
    let alg = ForestAlgebra::generated(h, lmap.values().cloned().collect(), DEFAULT_BUDGET).expect("fixture fits");
    let mut phi = Homomorphism::new(alg, lmap);
    phi.accepting = accepting.iter().copied().collect();
    phi
}

fn port(name: String, input: &str) -> Node {
    Node::labelled_port(name, input)
}

// Boolean circuits: ⟨a,b⟩ with componentwise (∧, ∨) as sum.

fn bool_idx(a: usize, b: usize) -> usize {
    // order: 10, 00, 11, 01
    match (a, b) {
        (1, 0) => 0,
        (0, 0) => 1,
        (1, 1) => 2,
        _ => 3,
    }
}

fn bool_pair(x: usize) -> (usize, usize) {
    [(1, 0), (0, 0), (1, 1), (0, 1)][x]
}

pub fn boolean_fixture() -> Fixture {
    let names = ["10", "00", "11", "01"].map(String::from).to_vec();
    let sum = |x, y| {
        let ((a, b), (c, d)) = (bool_pair(x), bool_pair(y));
        bool_idx(a & c, b | d)
    };
    let letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = vec![
        ("∧", Box::new(|x| {
            let a = bool_pair(x).0;
            bool_idx(a, a)
        })),
        ("∨", Box::new(|x| {
            let b = bool_pair(x).1;
            bool_idx(b, b)
        })),
    ];
    let phi = assemble(names, sum, letters, &[2]);
    let notable = [("J".to_string(), [1, 2].into())].into();
    Fixture { name: "boolean", phi, notable }
}

fn psi_of(m: &Term, values: &[usize]) -> BTreeMap<String, usize> {
    m.ports().into_iter().zip(values).map(|(p, &v)| (p.name, v)).collect()
}

fn boolean_m() -> Term {
    let x = |i: usize| port(format!("x{i}"), "J");
    Term::single(Node::tree(
        "∧",
        vec![Node::tree("∨", vec![x(1), x(2)]), Node::tree("∨", vec![x(3), x(4)])],
    ))
}

/// The two tuples over J = {00, 11}: same multicontext, different ψ.
pub fn boolean_circuit() -> Circuit {
    let m = boolean_m();
    let (f, t) = (1, 2);
    let mut c = Circuit::default();
    c.tuples.insert(("J".into(), f), Tuple::new(m.clone(), psi_of(&m, &[f, f, t, t])));
    c.tuples.insert(("J".into(), t), Tuple::new(m.clone(), psi_of(&m, &[f, t, f, t])));
    c
}

pub fn boolean_seeds() -> Seeds {
    [(("J".to_string(), 1), Term::single(Node::leaf("∨"))), (("J".to_string(), 2), Term::single(Node::leaf("∧")))].into()
}

// Duplex: semantic algebra on multisets of son values, then minimized.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Dx {
    Id,
    Bad,
    /// Sorted leaf values, one or two of them.
    Leaves(u8, Option<u8>),
    /// Family 0 = {∪,⊔} (combined by AND), family 1 = {∩,⊓} (by OR);
    /// per label: (count, combined value).
    Fam(usize, [Option<(u8, u8)>; 2]),
}

const FAMILY: [[&str; 2]; 2] = [["∪", "⊔"], ["∩", "⊓"]];

fn dx_all() -> Vec<Dx> {
    let mut out = vec![Dx::Id, Dx::Bad, Dx::Leaves(0, None), Dx::Leaves(1, None)];
    out.extend([Dx::Leaves(0, Some(0)), Dx::Leaves(0, Some(1)), Dx::Leaves(1, Some(1))]);
    let slots: Vec<Option<(u8, u8)>> = std::iter::once(None)
        .chain((1..=2).flat_map(|c| (0..=1).map(move |v| Some((c, v)))))
        .collect();
    for f in [1, 0] {
        for a in &slots {
            for b in &slots {
                if a.is_some() || b.is_some() {
                    out.push(Dx::Fam(f, [*a, *b]));
                }
            }
        }
    }
    out
}

fn dx_name(d: Dx) -> String {
    match d {
        Dx::Id => "id".into(),
        Dx::Bad => "⊥".into(),
        Dx::Leaves(a, None) => format!("l{a}"),
        Dx::Leaves(a, Some(b)) => format!("l{a}{b}"),
        Dx::Fam(f, s) => {
            let mut out = String::new();
            for (i, slot) in s.iter().enumerate() {
                if let Some((c, v)) = slot {
                    out.push_str(&format!("{}{c}{v}", FAMILY[f][i]));
                }
            }
            out
        }
    }
}

fn dx_sum(x: Dx, y: Dx) -> Dx {
    match (x, y) {
        (Dx::Id, o) | (o, Dx::Id) => o,
        (Dx::Leaves(a, None), Dx::Leaves(b, None)) => Dx::Leaves(a.min(b), Some(a.max(b))),
        (Dx::Fam(f, s), Dx::Fam(g, t)) if f == g => {
            let mut out = [None, None];
            for i in 0..2 {
                out[i] = match (s[i], t[i]) {
                    (None, o) | (o, None) => o,
                    (Some((c, v)), Some((d, w))) => {
                        if c + d > 2 {
                            return Dx::Bad;
                        }
                        Some((c + d, if f == 0 { v & w } else { v | w }))
                    }
                };
            }
            Dx::Fam(f, out)
        }
        _ => Dx::Bad,
    }
}

/// Action of an interior label of family `f`, slot `i`.
fn dx_node(f: usize, i: usize, x: Dx) -> Dx {
    let mut slots = [None, None];
    let v = match x {
        Dx::Leaves(a, Some(b)) => {
            if f == 1 {
                a & b
            } else {
                a | b
            }
        }
        Dx::Fam(g, [Some((2, a)), Some((2, b))]) if g != f && a == b => a,
        _ => return Dx::Bad,
    };
    slots[i] = Some((1, v));
    Dx::Fam(f, slots)
}

/// Nodes labelled 0/1 are leaves; ∩,⊓ nodes take the AND over two leaves or
/// over ∪/⊔ sons; ∪,⊔ nodes the OR. Unequal halves give ⊥.
pub fn duplex_fixture() -> Fixture {
    let all = dx_all();
    let pos: HashMap<Dx, usize> = all.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let names = all.iter().map(|&d| dx_name(d)).collect();
    let mut letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = Vec::new();
    for v in 0..=1u8 {
        let (all, pos) = (all.clone(), pos.clone());
        let l = if v == 0 { "0" } else { "1" };
        letters.push((l, Box::new(move |x| pos[&if all[x] == Dx::Id { Dx::Leaves(v, None) } else { Dx::Bad }])));
    }
    for f in 0..2 {
        for i in 0..2 {
            let (all, pos) = (all.clone(), pos.clone());
            letters.push((FAMILY[f][i], Box::new(move |x| pos[&dx_node(f, i, all[x])])));
        }
    }
    let (a2, p2) = (all.clone(), pos.clone());
    let accept = pos[&Dx::Fam(1, [Some((1, 1)), None])];
    let semantic = assemble(names, move |x, y| p2[&dx_sum(a2[x], a2[y])], letters, &[accept]);
    let semantic = restrict_to_image(&semantic);
    let acc = semantic.accepting.clone();
    let (phi, _) = syntactic_quotient(&semantic, &acc);
    let tree = |l: &str, v: u8| -> usize {
        let leaf = if v == 0 { "0" } else { "1" };
        phi.eval_h(&Term::single(Node::tree(l, vec![Node::leaf(leaf), Node::leaf(leaf)]))).expect("duplex seed")
    };
    let notable = [
        ("⊖".to_string(), [tree("∩", 0), tree("∩", 1)].into()),
        ("⊡".to_string(), [tree("⊓", 0), tree("⊓", 1)].into()),
    ]
    .into();
    Fixture { name: "duplex", phi, notable }
}

/// Root labels of the two duplex classes.
pub const DUPLEX_CLASSES: [(&str, &str); 2] = [("⊖", "∩"), ("⊡", "⊓")];

/// The four trees l(v,v) for l ∈ {∩,⊓} and v ∈ {0,1}.
pub fn duplex_seed_trees(f: &Fixture) -> Seeds {
    let mut out = Seeds::new();
    for (class, root) in DUPLEX_CLASSES {
        for v in ["0", "1"] {
            let t = Term::single(Node::tree(root, vec![Node::leaf(v), Node::leaf(v)]));
            let h = f.phi.eval_h(&t).expect("seed evaluates");
            out.insert((class.to_string(), h), t);
        }
    }
    out
}

/// M(⊖) ∪ M(⊡): the root sits over ∪,∪,⊔,⊔ sons with four ports each.
pub fn duplex_circuit(f: &Fixture) -> Circuit {
    let value = |class: &str, v: usize| -> usize {
        let root = DUPLEX_CLASSES.iter().find(|c| c.0 == class).expect("class").1;
        let leaf = bit(v);
        f.phi.eval_h(&Term::single(Node::tree(root, vec![Node::leaf(leaf), Node::leaf(leaf)]))).expect("seed")
    };
    let mut c = Circuit::default();
    for (class, root) in DUPLEX_CLASSES {
        for v in 0..2 {
            let patterns: [[(usize, usize); 4]; 4] = if v == 0 {
                let low = [(0, 0), (0, 0), (1, 0), (1, 0)];
                let high = [(0, 1), (0, 1), (1, 1), (1, 1)];
                [low, high, low, high]
            } else {
                let mix = [(0, 0), (0, 1), (1, 0), (1, 1)];
                [mix; 4]
            };
            let mut k = 0;
            let mut psi = Vec::new();
            let sons: Vec<Node> = ["∪", "∪", "⊔", "⊔"]
                .iter()
                .zip(patterns)
                .map(|(l, pat)| {
                    let ports = pat
                        .iter()
                        .map(|&(cls, val)| {
                            k += 1;
                            let name = DUPLEX_CLASSES[cls].0;
                            psi.push(value(name, val));
                            port(format!("x{k}"), name)
                        })
                        .collect();
                    Node::tree(*l, ports)
                })
                .collect();
            let m = Term::single(Node::tree(root, sons));
            let psi = psi_of(&m, &psi);
            c.tuples.insert((class.to_string(), value(class, v)), Tuple::new(m, psi));
        }
    }
    c
}

// Even depth: every leaf at even depth.

pub fn even_depth_fixture() -> Fixture {
    let names = ["0", "e", "o", "ee", "oo", "∞"].map(String::from).to_vec();
    let sum = |x: usize, y: usize| match (x, y) {
        (0, o) | (o, 0) => o,
        (1, 1) => 3,
        (2, 2) => 4,
        _ => 5,
    };
    let letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = vec![("•", Box::new(|x| match x {
        0 | 3 => 2,
        4 => 1,
        _ => 5,
    }))];
    let phi = assemble(names, sum, letters, &[1]);
    let notable = [("J".to_string(), [1, 2].into()), ("nonzero".to_string(), (1..6).collect())].into();
    Fixture { name: "even-depth", phi, notable }
}

/// The complete binary •-tree of depth d with ports `?zk:z` as leaves.
pub fn m_family(d: usize) -> Term {
    fn go(d: usize, k: &mut usize) -> Node {
        if d == 0 {
            *k += 1;
            return port(format!("z{k}"), "z");
        }
        Node::tree("•", vec![go(d - 1, k), go(d - 1, k)])
    }
    let mut k = 0;
    Term::single(go(d, &mut k))
}

/// top_e = •(z+z) expecting o at both ports, top_o expecting e.
pub fn even_depth_tops(f: &Fixture) -> BTreeMap<usize, Tuple> {
    let (e, o) = (f.phi.elem("e"), f.phi.elem("o"));
    let m = m_family(1);
    [(e, Tuple::new(m.clone(), psi_of(&m, &[o, o]))), (o, Tuple::new(m.clone(), psi_of(&m, &[e, e])))].into()
}

// Zigzag over 0,1,2.

pub fn zigzag012_fixture() -> Fixture {
    let names = ["id", "∞", "t0", "t1", "t2", "p0", "p1", "p2"].map(String::from).to_vec();
    let sum = |x: usize, y: usize| match (x, y) {
        (0, o) | (o, 0) => o,
        (a @ 2..=4, b) if a == b => a + 3,
        _ => 1,
    };
    let mut letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = Vec::new();
    for (l, v) in [("0", 2), ("1", 3), ("2", 4)] {
        letters.push((l, Box::new(move |x| if x == 0 { v } else { 1 })));
    }
    letters.push(("⊥", Box::new(|_| 1)));
    letters.push(("a", Box::new(|x| match x {
        5 => 2,
        6 => 4,
        _ => 1,
    })));
    letters.push(("b", Box::new(|x| match x {
        5 => 3,
        7 => 2,
        _ => 1,
    })));
    let phi = assemble(names, sum, letters, &[2]);
    let notable = [("J".to_string(), [2, 4].into())].into();
    Fixture { name: "zigzag012", phi, notable }
}

/// a(b(y₀+y₁)+b(z₀+z₁)).
pub fn zigzag_m() -> Term {
    let b = |p: &str| Node::tree("b", vec![port(format!("{p}0"), p), port(format!("{p}1"), p)]);
    Term::single(Node::tree("a", vec![b("y"), b("z")]))
}

// Potthoff: ∆(z+⋓(y₀+y₁)) chains.

pub fn potthoff_fixture() -> Fixture {
    // id ∞ 0̂ 1̂ u0 u1 pp0 pp1 q0 q1
    let names = ["id", "∞", "0̂", "1̂", "u0", "u1", "pp0", "pp1", "q0", "q1"].map(String::from).to_vec();
    let t = |x: usize| (2..=3).contains(&x).then(|| x - 2);
    let u = |x: usize| (4..=5).contains(&x).then(|| x - 4);
    let sum = move |x: usize, y: usize| match (x, y) {
        (0, o) | (o, 0) => o,
        _ => match (t(x), t(y), u(x), u(y)) {
            (Some(a), Some(b), _, _) => 6 + usize::from(a == b),
            (Some(a), _, _, Some(b)) | (_, Some(a), Some(b), _) if a == b => 8 + (1 - a),
            _ => 1,
        },
    };
    let mut letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = Vec::new();
    letters.push(("0", Box::new(|x| if x == 0 { 2 } else { 1 })));
    letters.push(("1", Box::new(|x| if x == 0 { 3 } else { 1 })));
    letters.push(("⊥", Box::new(|_| 1)));
    letters.push(("∆", Box::new(|x| if (8..=9).contains(&x) { x - 6 } else { 1 })));
    letters.push(("⋓", Box::new(|x| if (6..=7).contains(&x) { x - 2 } else { 1 })));
    let phi = assemble(names, sum, letters, &[3]);
    let notable = [("J".to_string(), [2, 3].into())].into();
    Fixture { name: "potthoff", phi, notable }
}

/// ∆(z+⋓(y₀+y₁)).
pub fn potthoff_m() -> Term {
    Term::single(Node::tree(
        "∆",
        vec![port("z".into(), "z"), Node::tree("⋓", vec![port("y0".into(), "y"), port("y1".into(), "y")])],
    ))
}

/// The context ∇(t_i, z) for the i-fold chain, lateral ports labelled y.
pub fn potthoff_chain(i: usize) -> Term {
    let mut k = 0;
    let mut node = Node::Hole;
    for _ in 0..i {
        k += 2;
        let y = |n: usize| port(format!("y{n}"), "y");
        node = Node::tree("∆", vec![node, Node::tree("⋓", vec![y(k - 1), y(k)])]);
    }
    Term::single(node)
}

/// φ_% of the i-fold chain with the lateral ports ranging over {0̂,1̂}.
pub fn potthoff_v(f: &Fixture, i: usize) -> Result<ExtendedMap, DerivedError> {
    let lateral = subset_of([f.phi.elem("0̂"), f.phi.elem("1̂")]);
    extended_vertical_element(&f.phi, &potthoff_chain(i), &|_, _| Some(lateral), &[])
}

fn bit(v: usize) -> &'static str {
    if v == 0 {
        "0"
    } else {
        "1"
    }
}

/// p_θ^{(k)}: θ chained copies of m over the leaf 1, lateral values chosen
/// bottom-up so every ∆ is defined; for k ≥ 2 the lateral leaves are
/// replaced by p^{(k-1)} of the same value. Evaluates to 0̂ iff θ is odd.
pub fn p_family(theta: usize, k: usize) -> Result<Term, FixtureError> {
    if !(1..=9).contains(&theta) || !(1..=3).contains(&k) {
        return Err(FixtureError::Range(format!("θ={theta}, k={k}; supported θ ≤ 9, k ≤ 3")));
    }
    Ok(Term::single(p_node(theta, k)))
}

fn p_node(theta: usize, k: usize) -> Node {
    let lateral = |v: usize| -> Node {
        if k == 1 {
            Node::leaf(bit(v))
        } else {
            // odd exponents evaluate to 0̂
            let th = if (theta % 2 == 1) == (v == 0) { theta } else { theta + 1 };
            p_node(th, k - 1)
        }
    };
    let mut node = Node::leaf("1");
    let mut a = 1;
    for _ in 0..theta {
        let (y0, y1) = if a == 1 { (0, 0) } else { (0, 1) };
        node = Node::tree("∆", vec![node, Node::tree("⋓", vec![lateral(y0), lateral(y1)])]);
        a = 1 - a;
    }
    node
}

// Ancestor of exactly one b.

pub fn exactly_one_b_fixture() -> Fixture {
    // (count capped at 2, flag)
    let enc = |c: usize, f: bool| c * 2 + usize::from(f);
    let dec = |x: usize| (x / 2, x % 2 == 1);
    let names = (0..6).map(|x| format!("c{}{}", x / 2, if x % 2 == 1 { "+" } else { "-" })).collect();
    let sum = move |x, y| {
        let ((c, f), (d, g)) = (dec(x), dec(y));
        enc((c + d).min(2), f || g)
    };
    let act = move |is_b: bool| -> Box<dyn Fn(usize) -> usize> {
        Box::new(move |x| {
            let (c, f) = dec(x);
            enc((c + usize::from(is_b)).min(2), f || c == 1)
        })
    };
    let letters = vec![("a", act(false)), ("b", act(true))];
    let semantic = restrict_to_image(&assemble(names, sum, letters, &[1, 3, 5]));
    let acc = semantic.accepting.clone();
    let (phi, _) = syntactic_quotient(&semantic, &acc);
    Fixture { name: "exactly-one-b", phi, notable: BTreeMap::new() }
}

/// a(a(x₁+x₂)+a(x₃+x₄)) with the leaf assignments (a,b,a,b) and (a,a,b,b).
/// Every port carries the same class tag `h`, as when all four receive
/// witnesses of one class.
pub fn exactly_one_b_tuples(f: &Fixture) -> (Tuple, Tuple) {
    let x = |i: usize| port(format!("x{i}"), "J");
    let m = Term::single(Node::tree(
        "a",
        vec![Node::tree("a", vec![x(1), x(2)]), Node::tree("a", vec![x(3), x(4)])],
    ));
    let leaf = |l: &str| f.phi.eval_h(&Term::single(Node::leaf(l))).expect("letter");
    let (va, vb) = (leaf("a"), leaf("b"));
    let mu: BTreeMap<String, String> = m.port_names().into_iter().map(|p| (p, "h".to_string())).collect();
    let mut t = Tuple::new(m.clone(), psi_of(&m, &[va, vb, va, vb]));
    let mut u = Tuple::new(m.clone(), psi_of(&m, &[va, va, vb, vb]));
    t.mu = mu.clone();
    u.mu = mu;
    (t, u)
}

/// The one-dimensional algebra over N_{1,1}: a counts, b is neutral.
pub fn od_fixture() -> Fixture {
    let m = counter_monoid(1, 1).expect("valid counter");
    let names = m.names.clone();
    let table = m.table.clone();
    let letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> =
        vec![("a", Box::new(move |x| table[x][1])), ("b", Box::new(|x| x))];
    let phi = assemble(names, move |x, y| m.op(x, y), letters, &[1]);
    Fixture { name: "od", phi, notable: BTreeMap::new() }
}

pub fn trivial_fixture() -> Fixture {
    let letters: Vec<(&str, Box<dyn Fn(usize) -> usize>)> = vec![("a", Box::new(|x| x))];
    let phi = assemble(vec!["0".into()], |_, _| 0, letters, &[]);
    Fixture { name: "trivial", phi, notable: BTreeMap::new() }
}

/// Named checks of the documented values of a fixture.
pub fn golden(name: &str) -> Result<Vec<(String, bool)>, FixtureError> {
    let f = fixture(name)?;
    let phi = &f.phi;
    let mut out = vec![
        ("validates".to_string(), validate_algebra(f.algebra()).is_ok()),
        ("horizontal monoid is commutative".to_string(), f.phi.h().is_commutative()),
    ];
    let mut check = |label: &str, ok: bool| out.push((label.to_string(), ok));
    let val = |s: &str| -> Option<String> {
        let t = parse_term(s, Some(&phi.alphabet())).ok()?;
        Some(phi.name(phi.eval_h(&t).ok()?).to_string())
    };
    match name {
        "boolean" => {
            check("φ(∧) = 11", val("∧").as_deref() == Some("11"));
            check("φ(∨) = 00", val("∨").as_deref() == Some("00"));
            let id = phi.elem("10");
            check("10 is the identity", (0..4).all(|x| phi.h().op(id, x) == x && phi.h().op(x, id) == x));
            check("01 is absorbing", (0..4).all(|x| phi.h().op(3, x) == 3));
            let c = boolean_circuit();
            check("circuit images", c.tuples.iter().all(|(k, t)| t.image(phi).ok() == Some(k.1)));
        }
        "duplex" => {
            check("carrier size", phi.h().len() == DUPLEX_CARRIER);
            let seeds = duplex_seed_trees(&f);
            check("four distinct seed values", seeds.len() == 4);
            let c = duplex_circuit(&f);
            check("circuit images", c.tuples.iter().all(|(k, t)| t.image(phi).ok() == Some(k.1)));
            check("mismatch is ⊥", val("∩(∪(0+0)+∪(1+1)+⊔(1+1)+⊔(1+1))") == val("∩(0)"));
        }
        "even-depth" => {
            let h = phi.h();
            let (e, o) = (phi.elem("e"), phi.elem("o"));
            check("e+e = ee", h.names[h.op(e, e)] == "ee");
            check("o+o = oo", h.names[h.op(o, o)] == "oo");
            check("e+o = ∞", h.names[h.op(e, o)] == "∞");
            check("•□ maps oo to e", phi.letters["•"][phi.elem("oo")] == e);
            check("|V| on H∖{0} = 19", restricted_count(&f.algebra().v, f.set("nonzero")) == 19);
            check("|V| = 25", f.algebra().v.len() == 25);
            check("V aperiodic", monoid_aperiodic(&f.algebra().v) == Verdict::Yes);
        }
        "zigzag012" => {
            check("a(0+0) = t0", val("a(0+0)").as_deref() == Some("t0"));
            check("a(1+1) = t2", val("a(1+1)").as_deref() == Some("t2"));
            check("a(2+2) = ∞", val("a(2+2)").as_deref() == Some("∞"));
            check("b(2+2) = t0", val("b(2+2)").as_deref() == Some("t0"));
            let m = zigzag_m();
            let (t0, t2) = (phi.elem("t0"), phi.elem("t2"));
            let swap = |v: usize| phi.eval_with(&m, &|_, _| Some(v)).ok();
            check("m swaps t0 and t2", swap(t0) == Some(t2) && swap(t2) == Some(t0));
        }
        "potthoff" => {
            check("|G| = 10", phi.h().len() == 10);
            check("∆(0+⋓(0+1)) = 1̂", val("∆(0+⋓(0+1))").as_deref() == Some("1̂"));
            check("∆(1+⋓(0+0)) = 0̂", val("∆(1+⋓(0+0))").as_deref() == Some("0̂"));
            check("⋓(0+1) = u0", val("⋓(0+1)").as_deref() == Some("u0"));
            let parity = (1..=5).all(|th| {
                let want = if th % 2 == 1 { "0̂" } else { "1̂" };
                p_family(th, 1).ok().and_then(|t| phi.eval_h(&t).ok()).map(|h| phi.name(h) == want) == Some(true)
            });
            check("p_θ alternates 0̂/1̂", parity);
            let z0 = subset_of([phi.elem("0̂")]);
            let img = |i: usize| potthoff_v(&f, i).ok().and_then(|v| v.apply(z0));
            check("v₁({0̂}) = {1̂,∞}", img(1) == Some(subset_of([phi.elem("1̂"), phi.elem("∞")])));
            check("v₂({0̂}) = {0̂,∞}", img(2) == Some(subset_of([phi.elem("0̂"), phi.elem("∞")])));
        }
        "exactly-one-b" => {
            let (t, u) = exactly_one_b_tuples(&f);
            let acc = |t: &Tuple| t.image(phi).ok().map(|h| phi.accepting.contains(&h));
            check("ψ̆(m) accepted, ψ̆′(m) rejected", acc(&t) == Some(true) && acc(&u) == Some(false));
        }
        _ => {}
    }
    Ok(out)
}

/// Carrier size of the minimized duplex algebra.
pub const DUPLEX_CARRIER: usize = 47;

/// Algebra, circuit, and seed files for the corpus directory.
pub fn corpus_files() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for f in all_fixtures() {
        out.push((format!("{}.fa", f.name), write_algebra(&f.phi)));
    }
    let b = boolean_fixture();
    out.push(("boolean.fc".into(), write_circuit(&b.phi, &boolean_circuit(), Some("boolean.fa"))));
    out.push(("boolean.fs".into(), write_seeds(&b.phi, &boolean_seeds())));
    let d = duplex_fixture();
    out.push(("duplex.fc".into(), write_circuit(&d.phi, &duplex_circuit(&d), Some("duplex.fa"))));
    out.push(("duplex.fs".into(), write_seeds(&d.phi, &duplex_seed_trees(&d))));
    let e = even_depth_fixture();
    let tops = Circuit { tuples: even_depth_tops(&e).into_iter().map(|(j, t)| (("J".to_string(), j), t)).collect() };
    out.push(("even-depth-tops.fc".into(), write_circuit(&e.phi, &tops, Some("even-depth.fa"))));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_values_hold() {
        for n in NAMES {
            for (label, ok) in golden(n).unwrap() {
                assert!(ok, "{n}: {label}");
            }
        }
    }

    #[test]
    fn every_fixture_validates() {
        for f in all_fixtures() {
            validate_algebra(f.algebra()).unwrap_or_else(|v| panic!("{}: {}", f.name, v.0));
        }
    }

    #[test]
    fn boolean_values() {
        let f = boolean_fixture();
        let phi = &f.phi;
        assert_eq!(phi.eval_h(&parse_term("∧", None).unwrap()).unwrap(), phi.elem("11"));
        for x in 0..4 {
            assert_eq!(phi.h().op(phi.elem("10"), x), x);
        }
        let c = boolean_circuit();
        for (k, t) in &c.tuples {
            assert_eq!(t.image(phi).unwrap(), k.1);
        }
    }

    #[test]
    fn potthoff_tables() {
        let f = potthoff_fixture();
        let p = |s: &str| f.phi.eval_h(&parse_term(s, Some(&f.alphabet())).unwrap()).unwrap();
        assert_eq!(f.phi.h().len(), 10);
        assert_eq!(p("⋓(0+0)"), f.phi.elem("u1"));
        assert_eq!(p("⋓(0+1)"), f.phi.elem("u0"));
        assert_eq!(p("∆(0+⋓(0+0))"), f.phi.elem("∞"));
        assert_eq!(p("∆(0+⋓(0+1))"), f.phi.elem("1̂"));
        assert_eq!(p("∆(1+⋓(0+0))"), f.phi.elem("0̂"));
        for theta in 1..=6 {
            let want = if theta % 2 == 1 { "0̂" } else { "1̂" };
            for k in 1..=2 {
                let t = p_family(theta, k).unwrap();
                assert_eq!(f.phi.name(f.phi.eval_h(&t).unwrap()), want, "θ={theta} k={k}");
            }
        }
        assert!(p_family(10, 1).is_err());
    }

    #[test]
    fn zigzag_tables() {
        let f = zigzag012_fixture();
        let p = |s: &str| f.phi.name(f.phi.eval_h(&parse_term(s, Some(&f.alphabet())).unwrap()).unwrap()).to_string();
        assert_eq!(p("a(0+0)"), "t0");
        assert_eq!(p("a(1+1)"), "t2");
        assert_eq!(p("a(2+2)"), "∞");
        assert_eq!(p("b(2+2)"), "t0");
        assert_eq!(p("b(0+0)"), "t1");
    }

    #[test]
    fn duplex_seeds_and_mismatch() {
        let f = duplex_fixture();
        let seeds = duplex_seed_trees(&f);
        assert_eq!(seeds.len(), 4);
        let c = duplex_circuit(&f);
        assert_eq!(c.tuples.len(), 4);
        for (k, t) in &c.tuples {
            assert_eq!(t.image(&f.phi).unwrap(), k.1, "{k:?}");
        }
        let a = f.alphabet();
        let bad = parse_term("∩(∪(0+0)+∪(1+1)+⊔(1+1)+⊔(1+1))", Some(&a)).unwrap();
        let bot = f.phi.eval_h(&parse_term("∩(0)", Some(&a)).unwrap()).unwrap();
        assert_eq!(f.phi.eval_h(&bad).unwrap(), bot);
        let good = parse_term("∩(∪(0+1)+∪(1+1)+⊔(1+0)+⊔(1+1))", Some(&a)).unwrap();
        assert!(f.phi.accepts(&good).unwrap());
    }

    #[test]
    fn even_depth_rules() {
        let f = even_depth_fixture();
        let h = f.phi.h();
        let (e, o) = (f.phi.elem("e"), f.phi.elem("o"));
        assert_eq!(h.names[h.op(e, e)], "ee");
        assert_eq!(h.names[h.op(o, o)], "oo");
        assert_eq!(h.names[h.op(e, o)], "∞");
        assert_eq!(f.phi.letters["•"][f.phi.elem("oo")], e);
    }

    #[test]
    fn exactly_one_b_images_differ() {
        let f = exactly_one_b_fixture();
        let (t, u) = exactly_one_b_tuples(&f);
        assert!(f.phi.accepting.contains(&t.image(&f.phi).unwrap()));
        assert!(!f.phi.accepting.contains(&u.image(&f.phi).unwrap()));
    }
}
