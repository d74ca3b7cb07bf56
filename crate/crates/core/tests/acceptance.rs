//! One PASS/FAIL line per acceptance criterion, with timing.

#[path = "common/props.rs"]
mod props;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use forestalg::algebra::{compose, monoid_aperiodic, restricted_count, Transform, Verdict, DEFAULT_BUDGET};
use forestalg::congruence::{equiv_n, refinement_falsify, Falsification, TauPi};
use forestalg::derived::*;
use forestalg::fixtures::*;
use forestalg::proofsearch::*;
use forestalg::terms::parse_term;

type Check = Result<String, String>;

fn c(tau: usize, pi: usize) -> TauPi {
    TauPi::new(tau, pi).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn anchors() -> Check {
    let s = parse_term("a+_", None).map_err(|e| e.to_string())?;
    let t = parse_term("a_", None).map_err(|e| e.to_string())?;
    ensure(equiv_n(&s, &t, 1, c(1, 1)), "not ≈¹")?;
    ensure(!equiv_n(&s, &t, 2, c(1, 1)), "≈²")?;
    Ok("≈¹ holds, ≈² fails".into())
}

fn boolean_pipeline() -> Check {
    let f = boolean_fixture();
    let (m, s0) = (boolean_circuit(), boolean_seeds());
    for n in [1, 2] {
        for (tau, pi) in [(1, 1), (2, 1), (1, 2)] {
            let r = rc_verify(&f.phi, &m, &s0, n, c(tau, pi)).map_err(|e| e.to_string())?;
            r.map_err(|v| format!("rc_verify n={n} ({tau},{pi}): {v}"))?;
        }
    }
    let mut sizes = Vec::new();
    for n in 1..=3 {
        let w = build_witnesses(&m, &s0, n).map_err(|e| e.to_string())?;
        let r = verify_witnesses(&w, &f.phi, n, c(1, 1)).map_err(|e| e.to_string())?;
        r.map_err(|v| format!("witnesses n={n}: {v}"))?;
        let largest = w.family.values().map(|t| t.size()).max().unwrap_or(0);
        ensure(largest <= 200, format!("witness of size {largest} at n={n}"))?;
        sizes.push(largest);
    }
    match refinement_falsify(&f.phi, 2, c(1, 1), 10) {
        Falsification::Counterexample(a, b) => {
            let (x, y) = (f.phi.eval_h(&a).unwrap(), f.phi.eval_h(&b).unwrap());
            ensure(x != y && equiv_n(&a, &b, 2, c(1, 1)), "counterexample does not check out")?;
            Ok(format!("witness sizes {sizes:?}, counterexample {a} / {b}"))
        }
        Falsification::Exhausted => Err("no counterexample within size 10".into()),
    }
}

fn boolean_copy() -> Check {
    let f = boolean_fixture();
    match search_copy(&f.phi, f.set("J"), c(2, 1), 7, 8).map_err(|e| e.to_string())? {
        CopyOutcome::Found { circuit, seeds, examined } => {
            for n in [1, 2] {
                let r = rc_verify(&f.phi, &circuit, &seeds, n, c(2, 1)).map_err(|e| e.to_string())?;
                r.map_err(|v| format!("found circuit fails at n={n}: {v}"))?;
            }
            Ok(format!("found after {examined} candidates"))
        }
        CopyOutcome::Exhausted { examined } => Err(format!("exhausted after {examined} candidates")),
    }
}

/// Multivertical threshold and period by BFS closure of the maps
/// x ↦ v(n⊙x), v ∈ V, n ≥ 1, independent of the library routine.
fn multivertical_oracle(f: &Fixture) -> (usize, usize) {
    let h = f.phi.h();
    let k = h.len();
    let mut gens: BTreeSet<Transform> = BTreeSet::new();
    for v in &f.algebra().v.elements {
        for n in 1..=2 * k + 1 {
            gens.insert((0..k).map(|x| v[h.times(n, x)]).collect());
        }
    }
    let mut seen: BTreeSet<Transform> = gens.clone();
    let mut queue: VecDeque<Transform> = gens.iter().cloned().collect();
    while let Some(a) = queue.pop_front() {
        for g in &gens {
            let b = compose(g, &a);
            if seen.insert(b.clone()) {
                queue.push_back(b);
            }
        }
    }
    let (mut threshold, mut period) = (0, 1);
    for a in &seen {
        let mut powers: Vec<Transform> = vec![a.clone()];
        loop {
            let next = compose(a, powers.last().unwrap());
            if let Some(i) = powers.iter().position(|p| *p == next) {
                threshold = threshold.max(i + 1);
                let p = powers.len() - i;
                period = period * p / gcd(period, p);
                break;
            }
            powers.push(next);
        }
    }
    (threshold, period)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn even_depth() -> Check {
    let f = even_depth_fixture();
    ensure(monoid_aperiodic(&f.algebra().v) == Verdict::Yes, "V is not aperiodic")?;
    let count = restricted_count(&f.algebra().v, f.set("nonzero"));
    ensure(count == 19, format!("{count} actions on H∖{{0}}"))?;
    let (t, p) = multivertical_oracle(&f);
    ensure(p == 2, format!("oracle period {p}"))?;
    let lib = multivertical_threshold_period(&f.phi, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(lib == (t, p), format!("library {lib:?} vs oracle {:?}", (t, p)))?;
    Ok(format!("19 actions, multivertical threshold {t} period {p}"))
}

fn potthoff() -> Check {
    let f = potthoff_fixture();
    let phi = &f.phi;
    ensure(phi.h().len() == 10, "|G| ≠ 10")?;
    let v: Vec<ExtendedMap> = (1..=3).map(|i| potthoff_v(&f, i)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let z0 = subset_of([phi.elem("0̂")]);
    ensure(v[0].apply(z0) == Some(subset_of([phi.elem("1̂"), phi.elem("∞")])), "v₁({0̂})")?;
    ensure(v[1].apply(z0) == Some(subset_of([phi.elem("0̂"), phi.elem("∞")])), "v₂({0̂})")?;
    let reach = reachable_subsets(&[&v[0], &v[1], &v[2]], &[z0]);
    let r = |i: usize| v[i].restrict(&reach);
    ensure(r(0) == r(2), "v₁ ≠ v₃")?;
    ensure(r(0) != r(1), "v₁ = v₂")?;
    let pump = pump_falsify_exhaustive(phi, 3, 1, 12).map_err(|e| e.to_string())?;
    ensure(pump.is_none(), format!("pumping counterexample {pump:?}"))?;
    let pump = pump_falsify(phi, 3, 1, 5, 6).map_err(|e| e.to_string())?;
    ensure(pump.is_none(), format!("enumerated pumping counterexample {pump:?}"))?;
    let mv = multivertical_threshold_period(phi, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    ensure(mv.0 <= 3 && 1 % mv.1 == 0, format!("multivertical {mv:?} does not fit (3,1)"))?;
    Ok(format!("{} reachable subsets, no pumping counterexample up to size 12, multivertical {mv:?}", reach.len()))
}

fn boundary() -> Check {
    let f = exactly_one_b_fixture();
    let (t, u) = exactly_one_b_tuples(&f);
    ensure(star(&t, &u, Mode::Signature(2), c(2, 1)).map_err(|e| e.to_string())?, "star fails")?;
    let (a, b) = (t.image(&f.phi).map_err(|e| e.to_string())?, u.image(&f.phi).map_err(|e| e.to_string())?);
    ensure(a != b, "images agree")?;
    Ok(format!("star holds, images {} and {}", f.phi.name(a), f.phi.name(b)))
}

fn properties() -> Check {
    for (name, suite) in props::SUITES {
        catch_unwind(AssertUnwindSafe(suite)).map_err(|_| format!("{name} failed"))?;
    }
    Ok(format!("{} suites, {} cases each", props::SUITES.len(), props::CASES))
}

fn p_pairs() -> Check {
    let f = potthoff_fixture();
    let value = |th: usize| -> Result<usize, String> {
        let t = p_family(th, 1).map_err(|e| e.to_string())?;
        f.phi.eval_h(&t).map_err(|e| e.to_string())
    };
    for th in 3..=5 {
        let want = if th % 2 == 1 { "0̂" } else { "1̂" };
        ensure(f.phi.name(value(th)?) == want, format!("p_{th} is not {want}"))?;
        let mut family = BTreeMap::new();
        for x in [th, th + 1] {
            family.insert(("J".to_string(), value(x)?), p_family(x, 1).unwrap());
        }
        let w = WitnessSet { level: 1, family, trace: vec![] };
        let r = verify_witnesses(&w, &f.phi, 1, c(1, 1)).map_err(|e| e.to_string())?;
        r.map_err(|v| format!("(p_{th}, p_{}): {v}", th + 1))?;
    }
    Ok("θ = 3, 4, 5".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 8] = [
        ("congruence anchors", anchors, Duration::from_secs(1)),
        ("boolean non-membership pipeline", boolean_pipeline, Duration::from_secs(60)),
        ("boolean proof-by-copy search", boolean_copy, Duration::from_secs(600)),
        ("even-depth vertical and multivertical monoids", even_depth, Duration::from_secs(30)),
        ("potthoff extended algebra and pumping", potthoff, Duration::from_secs(300)),
        ("exactly-one-b boundary example", boundary, Duration::from_secs(60)),
        ("property suites", properties, Duration::from_secs(300)),
        ("potthoff witness pairs", p_pairs, Duration::from_secs(120)),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(_) if took > *limit => Err(format!("over the {} s limit", limit.as_secs())),
            r => r,
        };
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {}. {name} [{:.2} s]: {detail}", i + 1, took.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
