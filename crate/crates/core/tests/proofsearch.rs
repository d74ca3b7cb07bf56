use std::collections::{BTreeMap, BTreeSet};

use forestalg::congruence::{SignatureEngine, TauPi};
use forestalg::fixtures::*;
use forestalg::proofsearch::*;

fn c(t: usize, p: usize) -> TauPi {
    TauPi::new(t, p).unwrap()
}

#[test]
fn boolean_circuit_passes_rc() {
    let f = boolean_fixture();
    let (m, s0) = (boolean_circuit(), boolean_seeds());
    for n in 1..=2 {
        for (t, p) in [(1, 1), (2, 1), (1, 2)] {
            let r = rc_verify(&f.phi, &m, &s0, n, c(t, p)).unwrap();
            assert_eq!(r, Ok(()), "n={n} τ={t} π={p}");
        }
    }
}

#[test]
fn boolean_witnesses_up_to_three() {
    let f = boolean_fixture();
    let (m, s0) = (boolean_circuit(), boolean_seeds());
    for n in 0..=3 {
        let s = build_witnesses(&m, &s0, n).unwrap();
        assert_eq!(verify_witnesses(&s, &f.phi, n, c(1, 1)).unwrap(), Ok(()), "n={n}");
    }
    let s1 = build_witnesses(&m, &s0, 1).unwrap();
    let imgs: BTreeSet<usize> = s1.family.values().map(|t| f.phi.eval_h(t).unwrap()).collect();
    assert_eq!(imgs, [f.phi.elem("00"), f.phi.elem("11")].into());
    assert_eq!(build_witnesses(&m, &s0, 0).unwrap().family, s0);
}

#[test]
fn counters_of_boolean_circuit() {
    let m = boolean_circuit();
    let t0 = &m.tuples[&("J".to_string(), 1)];
    let mut e = SignatureEngine::new(c(1, 1));
    let cv = counters(t0, Mode::Exact, &mut e).unwrap();
    assert_eq!(cv.0.len(), 2);
    assert!(cv.0.values().all(|&v| v == 2));
    let ctxs: BTreeSet<&String> = cv.0.keys().map(|k| &k.0).collect();
    assert_eq!(ctxs.len(), 1);
    let t1 = &m.tuples[&("J".to_string(), 2)];
    for tau in 1..=3 {
        assert!(star(t0, t1, Mode::Exact, c(tau, 1)).unwrap());
    }
    assert!(star(t0, t0, Mode::Exact, c(1, 1)).unwrap());
}

#[test]
fn swapped_psi_fails_counter_clause() {
    let f = boolean_fixture();
    let mut m = boolean_circuit();
    let t0 = m.tuples.get_mut(&("J".to_string(), 1)).unwrap();
    t0.psi.insert("x3".into(), f.phi.elem("00"));
    let r = rc_verify(&f.phi, &m, &boolean_seeds(), 1, c(2, 1)).unwrap();
    assert!(matches!(r, Err(Violation::Counter { .. })), "{r:?}");
}

#[test]
fn duplex_rc_and_witnesses() {
    let f = duplex_fixture();
    let (m, s0) = (duplex_circuit(&f), duplex_seed_trees(&f));
    assert_eq!(rc_verify(&f.phi, &m, &s0, 1, c(1, 1)).unwrap(), Ok(()));
    let s = build_witnesses(&m, &s0, 1).unwrap();
    assert_eq!(verify_witnesses(&s, &f.phi, 1, c(1, 1)).unwrap(), Ok(()));
    for ((class, _), t) in &s.family {
        let root = DUPLEX_CLASSES.iter().find(|x| x.0 == class).unwrap().1;
        match &t.roots[0] {
            forestalg::terms::Node::Interior { label, .. } => assert_eq!(label, root),
            _ => panic!(),
        }
    }
}

#[test]
fn exactly_one_b_star_holds() {
    let f = exactly_one_b_fixture();
    let (t, u) = exactly_one_b_tuples(&f);
    let cc = c(2, 1);
    let mut e = SignatureEngine::new(cc);
    assert_eq!(star_detail(&mut e, &t, &u, Mode::Signature(2), cc).unwrap(), StarOutcome::Holds);
    assert_ne!(t.image(&f.phi).unwrap(), u.image(&f.phi).unwrap());
}

#[test]
fn search_copy_boolean() {
    let f = boolean_fixture();
    let r = search_copy(&f.phi, f.set("J"), c(2, 1), 7, 8).unwrap();
    let CopyOutcome::Found { circuit, seeds, .. } = r else { panic!("{r:?}") };
    for (k, t) in &circuit.tuples {
        eprintln!("{k:?} {} {:?}", forestalg::terms::format_term(&t.m), t.psi);
    }
    for n in 1..=2 {
        assert_eq!(rc_verify(&f.phi, &circuit, &seeds, n, c(2, 1)).unwrap(), Ok(()));
    }
}

#[test]
fn search_copy_exhausts() {
    let f = trivial_fixture();
    assert!(matches!(search_copy(&f.phi, &[0].into(), c(1, 1), 3, 3).unwrap(), CopyOutcome::Exhausted { .. }));
    let f = even_depth_fixture();
    let r = search_copy(&f.phi, f.set("J"), c(1, 1), 6, 7).unwrap();
    assert!(matches!(r, CopyOutcome::Exhausted { .. }), "{r:?}");
}

#[test]
fn pumped_subcircuit_even_depth() {
    let f = even_depth_fixture();
    let tops = even_depth_tops(&f);
    let (e, o) = (f.phi.elem("e"), f.phi.elem("o"));
    let thetas: BTreeMap<usize, usize> = [(e, 2), (o, 1)].into();
    let z: BTreeSet<String> = ["z".to_string()].into();
    let cc = c(1, 1);
    let a = build_pumped_subcircuit(&tops, &thetas, &z, 3, 2, cc).unwrap();
    assert_eq!(a.omega, 2);
    assert!(a.balanced, "{:?}", a.z_counts);
    let b = build_pumped_subcircuit(&tops, &thetas, &z, 5, 2, cc).unwrap();
    for j in [e, o] {
        assert!(star(&a.tuples[&j], &b.tuples[&j], Mode::Pumped { sigma: 2, rho: 2 }, cc).unwrap());
    }
    assert!(build_pumped_subcircuit(&tops, &thetas, &z, 3, 2, c(1, 2)).is_err());
    assert!(build_pumped_subcircuit(&tops, &thetas, &z, 2, 2, cc).is_err());
}

