use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::select;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use forestalg::algebra::{compose, Value};
use forestalg::congruence::{cmp_tau_pi, equiv_n, SignatureEngine, TauPi};
use forestalg::derived::{gpercent_image, subset_elems, subset_of};
use forestalg::fixtures::*;
use forestalg::proofsearch::*;
use forestalg::terms::{freshen, insert_context, nabla, sum, Node, Term};

/// Randomized cases per suite.
pub const CASES: u32 = 128;

fn fixtures() -> &'static Vec<Fixture> {
    static F: OnceLock<Vec<Fixture>> = OnceLock::new();
    F.get_or_init(all_fixtures)
}

fn node(leaves: BoxedStrategy<Node>, letters: Vec<String>) -> BoxedStrategy<Node> {
    leaves
        .prop_recursive(4, 20, 3, move |inner| {
            (select(letters.clone()), prop::collection::vec(inner, 0..3)).prop_map(|(l, c)| Node::tree(l, c))
        })
        .boxed()
}

fn forest_of(leaves: BoxedStrategy<Node>, letters: Vec<String>, max_roots: usize) -> BoxedStrategy<Term> {
    prop::collection::vec(node(leaves, letters), 0..=max_roots).prop_map(Term::new).boxed()
}

fn forest(letters: Vec<String>) -> BoxedStrategy<Term> {
    let leaves = select(letters.clone()).prop_map(Node::leaf).boxed();
    forest_of(leaves, letters, 3)
}

/// ∇ of a nonempty forest at a chosen node.
fn context(letters: Vec<String>) -> BoxedStrategy<Term> {
    let leaves = select(letters.clone()).prop_map(Node::leaf).boxed();
    (prop::collection::vec(node(leaves, letters), 1..=3), any::<prop::sample::Index>())
        .prop_map(|(roots, i)| {
            let t = Term::new(roots);
            let paths = t.paths();
            nabla(&t, &paths[i.index(paths.len())]).expect("path of t")
        })
        .boxed()
}

/// Forests whose leaves may be ports reading input `y`, with distinct names.
fn multicontext(letters: Vec<String>) -> BoxedStrategy<Term> {
    let leaves = prop_oneof![
        select(letters.clone()).prop_map(Node::leaf),
        Just(Node::labelled_port("p", "y")),
    ]
    .boxed();
    forest_of(leaves, letters, 2).prop_map(|t| freshen(&t, &mut BTreeSet::new())).boxed()
}

fn fixture_and<S: Strategy + 'static>(
    f: impl Fn(Vec<String>) -> S + 'static,
) -> impl Strategy<Value = (usize, S::Value)> {
    (0..fixtures().len()).prop_flat_map(move |i| (Just(i), f(fixtures()[i].phi.alphabet().proper())))
}

fn shuffle_siblings(t: &Term, seed: u64) -> Term {
    fn go(nodes: &[Node], rng: &mut ChaCha8Rng) -> Vec<Node> {
        let mut out: Vec<Node> = nodes
            .iter()
            .map(|n| match n {
                Node::Interior { label, children } => Node::tree(label.clone(), go(children, rng)),
                other => other.clone(),
            })
            .collect();
        out.shuffle(rng);
        out
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Term::new(go(&t.roots, &mut rng))
}

fn rename_ports(t: &Tuple, prefix: &str) -> Tuple {
    let m = t.m.map_ports(&mut |name, labels| vec![Node::Port { name: format!("{prefix}{name}"), labels: labels.to_vec() }]);
    let rn = |(k, v): (&String, &usize)| (format!("{prefix}{k}"), *v);
    let mut u = Tuple::new(m, t.psi.iter().map(rn).collect());
    u.mu = t.mu.iter().map(|(k, v)| (format!("{prefix}{k}"), v.clone())).collect();
    u
}

fn c(tau: usize, pi: usize) -> TauPi {
    TauPi::new(tau, pi).unwrap()
}

pub fn tau_pi_is_an_additive_congruence() {
    for tau in 0..=5 {
        for pi in 1..=6 - tau {
            let k = c(tau, pi);
            let top = 3 * (tau + pi);
            for p in 0..=top {
                assert!(cmp_tau_pi(p, p, k));
                assert_eq!(k.cap(k.cap(p)), k.cap(p));
                for q in 0..=top {
                    assert_eq!(cmp_tau_pi(p, q, k), cmp_tau_pi(q, p, k));
                    assert_eq!(cmp_tau_pi(p, q, k), k.cap(p) == k.cap(q));
                    for r in 0..=top {
                        if cmp_tau_pi(p, q, k) {
                            assert!(cmp_tau_pi(p + r, q + r, k));
                            if cmp_tau_pi(q, r, k) {
                                assert!(cmp_tau_pi(p, r, k));
                            }
                        }
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    fn evaluation_is_a_homomorphism(
        (i, (s, t, ctx, ctx2, a)) in fixture_and(|l| (forest(l.clone()), forest(l.clone()), context(l.clone()), context(l.clone()), select(l)))
    ) {
        let phi = &fixtures()[i].phi;
        let (hs, ht) = (phi.eval_h(&s).unwrap(), phi.eval_h(&t).unwrap());
        prop_assert_eq!(phi.eval_h(&sum(&s, &t)).unwrap(), phi.h().op(hs, ht));
        let at = Term::single(Node::tree(a.clone(), t.roots.clone()));
        prop_assert_eq!(phi.eval_h(&at).unwrap(), phi.letters[&a][ht]);
        let v = phi.eval_v(&ctx).unwrap();
        prop_assert_eq!(phi.eval_h(&insert_context(&ctx, &t).unwrap()).unwrap(), v[ht]);
        let w = phi.eval_v(&ctx2).unwrap();
        prop_assert_eq!(phi.eval(&insert_context(&ctx, &ctx2).unwrap()).unwrap(), Value::V(compose(&v, &w)));
        prop_assert!(phi.algebra.v.contains(&v));
    }

    fn context_insertion_is_associative(
        (_, (a, b, t)) in fixture_and(|l| (context(l.clone()), context(l.clone()), forest(l)))
    ) {
        let left = insert_context(&insert_context(&a, &b).unwrap(), &t).unwrap();
        let right = insert_context(&a, &insert_context(&b, &t).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    fn congruences_are_downward_compatible(
        (_, (s, dup, u, ctx)) in fixture_and(|l| (forest(l.clone()), any::<prop::sample::Index>(), forest(l.clone()), context(l))),
        n in 1usize..3,
        tau in 1usize..3,
        pi in 1usize..3,
        seed in any::<u64>(),
    ) {
        // A copy of one root often leaves the capped counts unchanged.
        let t = if s.roots.is_empty() { u.clone() } else {
            let mut r = s.roots.clone();
            r.push(r[dup.index(r.len())].clone());
            Term::new(r)
        };
        let k = c(tau, pi);
        if equiv_n(&s, &t, n + 1, k) {
            prop_assert!(equiv_n(&s, &t, n, k));
        }
        if equiv_n(&s, &t, n, c(tau + 1, 2 * pi)) {
            prop_assert!(equiv_n(&s, &t, n, k));
        }
        if equiv_n(&s, &t, n, k) {
            prop_assert!(equiv_n(&sum(&s, &u), &sum(&t, &u), n, k));
            prop_assert!(equiv_n(&sum(&u, &s), &sum(&u, &t), n, k));
            prop_assert!(equiv_n(&insert_context(&ctx, &s).unwrap(), &insert_context(&ctx, &t).unwrap(), n, k));
        }
        prop_assert!(equiv_n(&s, &shuffle_siblings(&s, seed), n, k));
    }

    fn gpercent_is_the_set_of_completion_values(
        (m, g) in multicontext(boolean_fixture().phi.alphabet().proper())
            .prop_flat_map(|m| (Just(m), prop::collection::btree_set(0usize..4, 1..=3)))
    ) {
        let f = boolean_fixture();
        prop_assume!(m.ports().len() <= 4);
        let nu = subset_of(g.iter().copied());
        let got = gpercent_image(&f.phi, &m, &|_, _| Some(nu)).unwrap();
        let ports: Vec<String> = m.ports().into_iter().map(|p| p.name).collect();
        let vals: Vec<usize> = g.iter().copied().collect();
        let mut want = BTreeSet::new();
        let mut idx = vec![0usize; ports.len()];
        loop {
            let psi: BTreeMap<&str, usize> = ports.iter().map(String::as_str).zip(idx.iter().map(|&i| vals[i])).collect();
            want.insert(f.phi.eval_with(&m, &|n, _| psi.get(n).copied()).unwrap());
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < vals.len() { break; }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() { break; }
        }
        prop_assert_eq!(subset_elems(got).into_iter().collect::<BTreeSet<_>>(), want);
    }

    fn gpercent_is_additive(
        (a, b, g) in (multicontext(potthoff_fixture().phi.alphabet().proper()), multicontext(potthoff_fixture().phi.alphabet().proper()))
            .prop_flat_map(|(a, b)| (Just(a), Just(b), prop::collection::btree_set(0usize..10, 1..=3)))
    ) {
        let f = potthoff_fixture();
        let nu = subset_of(g.iter().copied());
        let gam = |t: &Term| gpercent_image(&f.phi, t, &|_, _| Some(nu)).unwrap();
        let joined = freshen(&sum(&a, &b), &mut BTreeSet::new());
        let mut want = BTreeSet::new();
        for x in subset_elems(gam(&a)) {
            for y in subset_elems(gam(&b)) {
                want.insert(f.phi.h().op(x, y));
            }
        }
        prop_assert_eq!(subset_elems(gam(&joined)).into_iter().collect::<BTreeSet<_>>(), want);
    }

    fn counters_ignore_sibling_order_and_port_names(
        which in 0usize..2,
        seed in any::<u64>(),
        n in 0usize..3,
        tau in 1usize..3,
    ) {
        let (phi, m, s0) = if which == 0 {
            (boolean_fixture().phi, boolean_circuit(), boolean_seeds())
        } else {
            let d = duplex_fixture();
            let m = duplex_circuit(&d);
            let s = duplex_seed_trees(&d);
            (d.phi, m, s)
        };
        let _ = phi;
        let family = build_witnesses(&m, &s0, n).unwrap().family;
        let mut e = SignatureEngine::new(c(tau, 1));
        for t in m.tuples.values() {
            let t = tag_ports(&mut e, t, &family, n).unwrap();
            let mut u = rename_ports(&t, "r");
            u.m = shuffle_siblings(&u.m, seed);
            for mode in [Mode::Exact, Mode::Signature(n)] {
                prop_assert_eq!(counters(&t, mode, &mut e).unwrap(), counters(&u, mode, &mut e).unwrap());
            }
            prop_assert!(star(&t, &u, Mode::Signature(n), c(tau, 1)).unwrap());
        }
    }

    fn exact_star_implies_signature_star(
        which in 0usize..2,
        seed in any::<u64>(),
        flips in prop::collection::vec(any::<prop::sample::Index>(), 0..3),
        n in 0usize..3,
        tau in 1usize..3,
        pi in 1usize..3,
    ) {
        let (m, s0) = if which == 0 {
            (boolean_circuit(), boolean_seeds())
        } else {
            let d = duplex_fixture();
            (duplex_circuit(&d), duplex_seed_trees(&d))
        };
        let k = c(tau, pi);
        // Perturb ψ inside each class so both outcomes of the exact check occur.
        let mut pert = m.clone();
        let classes = m.classes();
        for (key, t) in pert.tuples.iter_mut() {
            let targets: Vec<usize> = classes[&key.0].iter().copied().collect();
            let names: Vec<String> = t.psi.keys().cloned().collect();
            for f in &flips {
                let name = &names[f.index(names.len())];
                t.psi.insert(name.clone(), targets[f.index(targets.len())]);
            }
            t.m = shuffle_siblings(&t.m, seed);
        }
        let family = build_witnesses(&m, &s0, n).unwrap().family;
        let mut e = SignatureEngine::new(k);
        for (ka, a) in &m.tuples {
            for (kb, b) in &pert.tuples {
                if ka.0 != kb.0 {
                    continue;
                }
                if star(a, b, Mode::Exact, k).unwrap() {
                    let (ta, tb) = (tag_ports(&mut e, a, &family, n).unwrap(), tag_ports(&mut e, b, &family, n).unwrap());
                    prop_assert!(star(&ta, &tb, Mode::Signature(n), k).unwrap());
                }
            }
        }
    }
}

/// Every suite by name, the exhaustive sweep first.
pub const SUITES: &[(&str, fn())] = &[
    ("tau_pi_is_an_additive_congruence", tau_pi_is_an_additive_congruence),
    ("evaluation_is_a_homomorphism", evaluation_is_a_homomorphism),
    ("context_insertion_is_associative", context_insertion_is_associative),
    ("congruences_are_downward_compatible", congruences_are_downward_compatible),
    ("gpercent_is_the_set_of_completion_values", gpercent_is_the_set_of_completion_values),
    ("gpercent_is_additive", gpercent_is_additive),
    ("counters_ignore_sibling_order_and_port_names", counters_ignore_sibling_order_and_port_names),
    ("exact_star_implies_signature_star", exact_star_implies_signature_star),
];
