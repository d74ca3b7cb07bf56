use std::path::PathBuf;
use std::process::Command;

use forestalg::cli::{Outcome, Report};
use forestalg::terms::{format_term, parse_term};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn fab(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_fab")).args(args).output().expect("spawn fab");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("utf-8"))
}

/// Runs fab, reparses the report, and checks the outcome against the exit
/// code and every term-valued field against the term grammar.
fn report(args: &[&str]) -> (i32, Report) {
    let (code, text) = fab(args);
    let r = Report::parse(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
    assert_eq!(r.render(), text);
    assert_eq!(r.outcome.exit_code(), code, "{args:?}");
    for (k, v) in &r.evidence {
        if k.starts_with("term.") {
            let t = parse_term(v, None).unwrap_or_else(|e| panic!("{k}: {e}"));
            assert_eq!(&format_term(&t), v);
        }
    }
    (code, r)
}

#[test]
fn equiv_anchor() {
    assert_eq!(report(&["equiv", "--n", "1", "--tau", "1", "--pi", "1", "a+_", "a_"]).0, 0);
    assert_eq!(report(&["equiv", "--n", "2", "--tau", "1", "--pi", "1", "a+_", "a_"]).0, 1);
    let (s, t) = (corpus("a-beside-hole.term"), corpus("a-over-hole.term"));
    assert_eq!(report(&["equiv", "--n", "1", &s, &t]).0, 0);
}

#[test]
fn fixtures_check_all() {
    let (code, r) = report(&["fixtures", "--check", "all"]);
    assert_eq!(code, 0);
    assert!(r.evidence.iter().all(|(_, v)| v.starts_with("pass")));
}

#[test]
fn falsify_counterexample_is_real() {
    let (code, r) = report(&["falsify", "--n", "2", "--budget", "10", &corpus("boolean.fa")]);
    assert_eq!(code, 1);
    assert_ne!(r.get("left-value"), r.get("right-value"));
    let a = parse_term(r.get("term.left").unwrap(), None).unwrap();
    let b = parse_term(r.get("term.right").unwrap(), None).unwrap();
    let c = forestalg::congruence::TauPi::new(1, 1).unwrap();
    assert!(forestalg::congruence::equiv_n(&a, &b, 2, c));
}

#[test]
fn sampled_falsify_is_reproducible() {
    let args = ["falsify", "--n", "2", "--budget", "9", "--samples", "3000", "--seed", "11", "boolean"];
    let (_, a) = report(&args);
    let (_, b) = report(&args);
    assert_eq!(a.evidence, b.evidence);
}

#[test]
fn circuit_commands_on_corpus() {
    let (fc, fs) = (corpus("boolean.fc"), corpus("boolean.fs"));
    for n in ["1", "2"] {
        assert_eq!(report(&["rc-verify", &fc, &fs, "--n", n, "--tau", "2"]).0, 0);
    }
    let (code, r) = report(&["witnesses", &fc, &fs, "--n", "2"]);
    assert_eq!(code, 0);
    assert_eq!(r.evidence.iter().filter(|(k, _)| k.starts_with("term.witness")).count(), 2);
    let (dc, ds) = (corpus("duplex.fc"), corpus("duplex.fs"));
    assert_eq!(report(&["rc-verify", &dc, &ds, "--n", "1"]).0, 0);
}

#[test]
fn search_copy_exit_codes() {
    let dir = std::env::temp_dir().join(format!("fab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("b.fc");
    let out = out.to_str().unwrap();
    let (code, _) = report(&["search-copy", "boolean", "--set", "J", "--tau", "2", "--budget", "7", "--out", out]);
    assert_eq!(code, 0);
    let fs = dir.join("b.fs");
    assert_eq!(report(&["rc-verify", out, fs.to_str().unwrap(), "--algebra", "boolean", "--n", "2"]).0, 0);
    let (code, _) = report(&["search-copy", "even-depth", "--set", "J", "--budget", "4", "--out", out]);
    assert_eq!(code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn derived_commands() {
    let (code, r) = report(&["multivertical", &corpus("even-depth.fa")]);
    assert_eq!((code, r.get("period")), (1, Some("2")));
    let (code, r) = report(&["multivertical", "potthoff"]);
    assert_eq!((code, r.get("threshold"), r.get("period")), (0, Some("3"), Some("1")));
    let (code, r) =
        report(&["extended", "potthoff", "--element", &corpus("potthoff-v1.term"), "--port-subsets", &corpus("potthoff.subsets")]);
    assert_eq!(code, 0);
    assert_eq!((r.get("threshold"), r.get("period")), (Some("1"), Some("2")));
    assert_eq!(r.get("map.{0̂}"), Some("{∞,1̂}"));
    let (code, r) = report(&["pump-subcircuit", &corpus("even-depth-tops.fc"), "--thetas", "e=2,o=1", "--chi", "3", "--sigma", "2"]);
    assert_eq!((code, r.get("omega")), (0, Some("2")));
}

#[test]
fn algebra_commands() {
    let (_, r) = report(&["scc", "potthoff"]);
    assert_eq!(r.get("count"), Some("3"));
    assert_eq!(report(&["divides", "od", "boolean"]).0, 0);
    let (code, r) = report(&["syntactic", "boolean"]);
    assert_eq!((code, r.get("size")), (0, Some("4")));
    let (code, r) = report(&["eval", "boolean", "∧(∧+∧)"]);
    assert_eq!((code, r.get("value")), (0, Some("11")));
    assert_eq!(report(&["eval", "boolean", "∨(∨)"]).1.outcome, Outcome::Refuted);
}

#[test]
fn usage_and_format_errors() {
    assert_eq!(fab(&["bogus"]).0, 3);
    assert_eq!(fab(&["equiv", "--pi", "0", "a", "a"]).0, 3);
    assert_eq!(fab(&["eval", "no-such-algebra", "a"]).0, 3);
    assert_eq!(fab(&["eval", "boolean", "∧(q)"]).0, 4);
    assert_eq!(fab(&["rc-verify", &corpus("boolean.fs"), &corpus("boolean.fs")]).0, 3);
}
