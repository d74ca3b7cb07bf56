//! The `fab` command line: argument grammar, dispatch, and line-oriented
//! reports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::algebra::{
    divides, parse_algebra, restrict_to_image, scc, syntactic_quotient, write_algebra, Division, Homomorphism, Value,
    DEFAULT_BUDGET,
};
use crate::congruence::{equiv_n, refinement_falsify, sample_falsify, Falsification, TauPi};
use crate::derived::{
    extended_vertical_element, monoid_threshold_period, multivertical, reachable_subsets, subset_elems, subset_of,
    DerivedError, Subset,
};
use crate::fixtures::{corpus_files, fixture, golden, NAMES};
use crate::proofsearch::{
    build_pumped_subcircuit, build_witnesses, circuit_algebra, parse_circuit, parse_seeds, rc_verify, search_copy,
    verify_witnesses, write_circuit, write_seeds, Circuit, CopyOutcome, Seeds, Tuple,
};
use crate::terms::{format_term, parse_term, Alphabet, Term};

#[derive(Debug, Parser)]
#[command(name = "fab", version, about = "Forest algebras, relabeling congruences and non-membership proofs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Params {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[arg(long, default_value_t = 1)]
    pub pi: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a term under an algebra.
    Eval {
        algebra: String,
        term: String,
    },
    /// Decide s ≈ⁿ_{τ,π} t.
    Equiv {
        #[command(flatten)]
        p: Params,
        s: String,
        t: String,
    },
    /// Look for two forests with equal level-n signature and distinct images.
    Falsify {
        #[command(flatten)]
        p: Params,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Draw this many random forests instead of enumerating.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        algebra: String,
    },
    /// Minimize an algebra with respect to its accepting set.
    Syntactic {
        algebra: String,
        /// Comma-separated element names; defaults to the declared accepting set.
        #[arg(long)]
        accepting: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strongly connected components of H.
    Scc { algebra: String },
    /// Does G divide H?
    Divides {
        g: String,
        h: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Multivertical monoid: size, threshold, period, aperiodicity.
    Multivertical {
        algebra: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Orbit of an extended vertical element.
    Extended {
        algebra: String,
        #[arg(long)]
        element: String,
        /// Lines `input: names…` for port inputs, `seed: names…` for start sets.
        #[arg(long)]
        port_subsets: PathBuf,
    },
    /// Check a circuit and its seeds against the recursive-copy conditions.
    RcVerify {
        circuit: PathBuf,
        seeds: PathBuf,
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Build the witness forests of a circuit and check their separation.
    Witnesses {
        circuit: PathBuf,
        seeds: PathBuf,
        #[command(flatten)]
        p: Params,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Search for a single-tree copying circuit over a set J.
    SearchCopy {
        algebra: String,
        /// Comma-separated element names, or the name of a notable set of a fixture.
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long, default_value_t = 1)]
        pi: usize,
        /// Interior-node budget.
        #[arg(long, default_value_t = 6)]
        budget: usize,
        #[arg(long, default_value_t = 8)]
        ports: usize,
        #[arg(long, default_value = "search-copy.fc")]
        out: PathBuf,
    },
    /// Pumped-subcircuit construction from top tuples.
    PumpSubcircuit {
        tops: PathBuf,
        /// Pump exponents, `name=θ` per target.
        #[arg(long)]
        thetas: String,
        #[arg(long, default_value = "z")]
        z: String,
        #[arg(long)]
        chi: usize,
        #[arg(long)]
        sigma: usize,
        #[arg(long, default_value_t = 1)]
        tau: usize,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// List, check, or export the built-in fixtures.
    Fixtures {
        /// A fixture name or `all`.
        #[arg(long)]
        check: Option<String>,
        /// Write the corpus files into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Found,
    Refuted,
    Holds,
    Violated,
    Exhausted,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Found | Outcome::Holds => 0,
            Outcome::Refuted | Outcome::Violated => 1,
            Outcome::Exhausted => 2,
        }
    }

    fn parse(s: &str) -> Option<Outcome> {
        Some(match s {
            "found" => Outcome::Found,
            "refuted" => Outcome::Refuted,
            "holds" => Outcome::Holds,
            "violated" => Outcome::Violated,
            "exhausted" => Outcome::Exhausted,
            _ => return None,
        })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Found => "found",
            Outcome::Refuted => "refuted",
            Outcome::Holds => "holds",
            Outcome::Violated => "violated",
            Outcome::Exhausted => "exhausted",
        })
    }
}

/// A command result. Evidence keys starting with `term.` carry term syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub outcome: Outcome,
    pub evidence: Vec<(String, String)>,
    pub elapsed_ms: u128,
}

impl Report {
    fn new(command: &str, outcome: Outcome) -> Report {
        Report { command: command.into(), params: Vec::new(), outcome, evidence: Vec::new(), elapsed_ms: 0 }
    }

    fn param(mut self, k: &str, v: impl ToString) -> Report {
        self.params.push((k.into(), v.to_string()));
        self
    }

    fn ev(&mut self, k: impl Into<String>, v: impl ToString) {
        self.evidence.push((k.into(), one_line(&v.to_string())));
    }

    fn term(&mut self, k: impl fmt::Display, t: &Term) {
        self.evidence.push((format!("term.{k}"), format_term(t)));
    }

    pub fn render(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        for (k, v) in &self.params {
            s += &format!("param.{k}: {v}\n");
        }
        s += &format!("outcome: {}\n", self.outcome);
        for (k, v) in &self.evidence {
            s += &format!("{k}: {v}\n");
        }
        s += &format!("elapsed-ms: {}\n", self.elapsed_ms);
        s
    }

    pub fn parse(text: &str) -> Result<Report, String> {
        let mut command = None;
        let mut outcome = None;
        let mut elapsed = None;
        let mut params = Vec::new();
        let mut evidence = Vec::new();
        for line in text.lines() {
            let (k, v) = line.split_once(": ").ok_or_else(|| format!("no key in `{line}`"))?;
            match k {
                "command" => command = Some(v.to_string()),
                "outcome" => outcome = Some(Outcome::parse(v).ok_or_else(|| format!("bad outcome `{v}`"))?),
                "elapsed-ms" => elapsed = Some(v.parse().map_err(|_| format!("bad timing `{v}`"))?),
                _ => match k.strip_prefix("param.") {
                    Some(p) => params.push((p.to_string(), v.to_string())),
                    None => evidence.push((k.to_string(), v.to_string())),
                },
            }
        }
        Ok(Report {
            command: command.ok_or("missing command")?,
            params,
            outcome: outcome.ok_or("missing outcome")?,
            evidence,
            elapsed_ms: elapsed.ok_or("missing elapsed-ms")?,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.evidence.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn one_line(s: &str) -> String {
    s.replace('\n', " ")
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Input(_) => 4,
        }
    }
}

fn input(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// A `.fa` path or a fixture name.
pub fn load_algebra(arg: &str) -> Result<Homomorphism, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| input(format!("{arg}: {e}")))?;
        return parse_algebra(&text).map_err(|e| input(format!("{arg}: {e}")));
    }
    fixture(arg).map(|f| f.phi).map_err(|_| usage(format!("`{arg}` is neither a file nor a fixture")))
}

/// A `.term` path or literal term syntax.
fn load_term(arg: &str, alphabet: Option<&Alphabet>) -> Result<Term, CliError> {
    let path = Path::new(arg);
    let text = if arg.ends_with(".term") || path.is_file() {
        std::fs::read_to_string(path).map_err(|e| input(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    parse_term(text.trim(), alphabet).map_err(|e| input(format!("{arg}: {e}")))
}

fn tau_pi(tau: usize, pi: usize) -> Result<TauPi, CliError> {
    TauPi::new(tau, pi).map_err(usage)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn element(phi: &Homomorphism, name: &str) -> Result<usize, CliError> {
    phi.h().index(name).ok_or_else(|| input(format!("no element named `{name}`")))
}

fn elements(phi: &Homomorphism, list: &str) -> Result<BTreeSet<usize>, CliError> {
    list.split([',', ' ']).filter(|s| !s.is_empty()).map(|s| element(phi, s)).collect()
}

fn names(phi: &Homomorphism, set: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<&str> = set.into_iter().map(|h| phi.name(h)).collect();
    format!("{{{}}}", v.join(","))
}

/// Reads a circuit and resolves its algebra from `--algebra` or its header.
fn load_circuit(path: &Path, algebra: Option<&str>) -> Result<(Homomorphism, Circuit), CliError> {
    let text = read(path)?;
    let phi = match algebra {
        Some(a) => load_algebra(a)?,
        None => {
            let name = circuit_algebra(&text).ok_or_else(|| usage("circuit names no algebra; pass --algebra"))?;
            let rel = path.parent().unwrap_or(Path::new(".")).join(&name);
            load_algebra(if rel.is_file() { rel.to_str().unwrap_or(&name) } else { &name })?
        }
    };
    let c = parse_circuit(&text, &phi).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok((phi, c))
}

fn load_seeds(path: &Path, phi: &Homomorphism) -> Result<Seeds, CliError> {
    parse_seeds(&read(path)?, phi).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn key_name(phi: &Homomorphism, k: &(String, usize)) -> String {
    format!("[{},{}]", k.0, phi.name(k.1))
}

pub fn run(cli: Cli) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut r = dispatch(cli.command)?;
    r.elapsed_ms = start.elapsed().as_millis();
    Ok(r)
}

fn dispatch(cmd: Command) -> Result<Report, CliError> {
    match cmd {
        Command::Eval { algebra, term } => {
            let phi = load_algebra(&algebra)?;
            let t = load_term(&term, Some(&phi.alphabet()))?;
            match phi.eval(&t).map_err(input)? {
                Value::H(h) => {
                    let ok = phi.accepting.contains(&h);
                    let mut r = Report::new("eval", if ok { Outcome::Holds } else { Outcome::Refuted });
                    r.term("input", &t);
                    r.ev("value", phi.name(h));
                    r.ev("accepted", if ok { "yes" } else { "no" });
                    Ok(r)
                }
                Value::V(map) => {
                    let mut r = Report::new("eval", Outcome::Found);
                    r.term("input", &t);
                    let pairs: Vec<String> =
                        map.iter().enumerate().map(|(x, &y)| format!("{}↦{}", phi.name(x), phi.name(y))).collect();
                    r.ev("transformation", pairs.join(" "));
                    Ok(r)
                }
            }
        }
        Command::Equiv { p, s, t } => {
            let c = tau_pi(p.tau, p.pi)?;
            let (s, t) = (load_term(&s, None)?, load_term(&t, None)?);
            let eq = equiv_n(&s, &t, p.n, c);
            let mut r = Report::new("equiv", if eq { Outcome::Holds } else { Outcome::Refuted })
                .param("n", p.n)
                .param("tau", p.tau)
                .param("pi", p.pi);
            r.term("s", &s);
            r.term("t", &t);
            Ok(r)
        }
        Command::Falsify { p, budget, samples, seed, algebra } => {
            let phi = load_algebra(&algebra)?;
            let c = tau_pi(p.tau, p.pi)?;
            let res = match samples {
                Some(k) => sample_falsify(&phi, p.n, c, k, budget, seed),
                None => refinement_falsify(&phi, p.n, c, budget),
            };
            let mut r = Report::new("falsify", Outcome::Exhausted)
                .param("n", p.n)
                .param("tau", p.tau)
                .param("pi", p.pi)
                .param("budget", budget);
            if let Some(k) = samples {
                r = r.param("samples", k).param("seed", seed);
            }
            if let Falsification::Counterexample(a, b) = res {
                r.outcome = Outcome::Refuted;
                r.term("left", &a);
                r.term("right", &b);
                r.ev("left-value", phi.name(phi.eval_h(&a).map_err(input)?));
                r.ev("right-value", phi.name(phi.eval_h(&b).map_err(input)?));
            }
            Ok(r)
        }
        Command::Syntactic { algebra, accepting, out } => {
            let mut phi = load_algebra(&algebra)?;
            if let Some(a) = accepting {
                phi.accepting = elements(&phi, &a)?;
            }
            let before = phi.h().len();
            let img = restrict_to_image(&phi);
            let acc = img.accepting.clone();
            let (q, class) = syntactic_quotient(&img, &acc);
            let mut r = Report::new("syntactic", Outcome::Found);
            r.ev("size-before", before);
            r.ev("size-image", img.h().len());
            r.ev("size", q.h().len());
            for (h, &k) in class.iter().enumerate() {
                r.ev(format!("class.{}", img.name(h)), q.name(k));
            }
            let text = write_algebra(&q);
            if let Some(path) = out {
                write(&path, &text)?;
                r.ev("written", path.display());
            }
            Ok(r)
        }
        Command::Scc { algebra } => {
            let phi = load_algebra(&algebra)?;
            let comps = scc(&phi.algebra);
            let mut r = Report::new("scc", Outcome::Found);
            r.ev("count", comps.len());
            for (i, s) in comps.iter().enumerate() {
                r.ev(format!("scc.{i}"), names(&phi, s.iter().copied()));
            }
            Ok(r)
        }
        Command::Divides { g, h, budget } => {
            let (pg, ph) = (load_algebra(&g)?, load_algebra(&h)?);
            let mut r = Report::new("divides", Outcome::Refuted).param("budget", budget);
            match divides(&pg.algebra, &ph.algebra, budget) {
                Division::Yes { subset, map } => {
                    r.outcome = Outcome::Holds;
                    r.ev("subalgebra", names(&ph, subset));
                    let m: Vec<String> =
                        map.iter().map(|&(x, y)| format!("{}↦{}", ph.name(x), pg.name(y))).collect();
                    r.ev("map", m.join(" "));
                }
                Division::No => {}
                Division::Exhausted => r.outcome = Outcome::Exhausted,
            }
            Ok(r)
        }
        Command::Multivertical { algebra, budget } => {
            let phi = load_algebra(&algebra)?;
            let mut r = Report::new("multivertical", Outcome::Exhausted).param("budget", budget);
            match multivertical(&phi, budget) {
                Ok(m) => {
                    let (t, p) = monoid_threshold_period(&m);
                    r.outcome = if p == 1 { Outcome::Holds } else { Outcome::Refuted };
                    r.ev("size", m.len());
                    r.ev("threshold", t);
                    r.ev("period", p);
                    r.ev("aperiodic", if p == 1 { "yes" } else { "no" });
                }
                Err(DerivedError::Budget(..)) | Err(DerivedError::Algebra(crate::algebra::AlgebraError::Budget(_))) => {}
                Err(e) => return Err(input(e)),
            }
            Ok(r)
        }
        Command::Extended { algebra, element: w, port_subsets } => {
            let phi = load_algebra(&algebra)?;
            let w = load_term(&w, Some(&phi.alphabet()))?;
            let mut inputs: BTreeMap<String, Subset> = BTreeMap::new();
            let mut seeds = Vec::new();
            for line in read(&port_subsets)?.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once(':').ok_or_else(|| input(format!("bad line `{line}`")))?;
                let set = subset_of(elements(&phi, v)?);
                if k.trim() == "seed" {
                    seeds.push(set);
                } else {
                    inputs.insert(k.trim().to_string(), set);
                }
            }
            if seeds.is_empty() {
                return Err(usage("port-subsets file declares no `seed:` line"));
            }
            let nu = |name: &str, labels: &[String]| inputs.get(crate::terms::port_input(name, labels)).copied();
            let v = extended_vertical_element(&phi, &w, &nu, &seeds).map_err(input)?;
            let dom = reachable_subsets(&[&v], &seeds);
            let v = v.restrict(&dom);
            let (t, p) = v.threshold_period();
            let mut r = Report::new("extended", Outcome::Found);
            r.term("element", &w);
            r.ev("reachable", dom.len());
            for s in &dom {
                let img = v.apply(*s).unwrap_or(0);
                r.ev(format!("map.{}", names(&phi, subset_elems(*s))), names(&phi, subset_elems(img)));
            }
            r.ev("threshold", t);
            r.ev("period", p);
            Ok(r)
        }
        Command::RcVerify { circuit, seeds, p, algebra } => {
            let (phi, m) = load_circuit(&circuit, algebra.as_deref())?;
            let s0 = load_seeds(&seeds, &phi)?;
            let c = tau_pi(p.tau, p.pi)?;
            let res = rc_verify(&phi, &m, &s0, p.n, c).map_err(input)?;
            let mut r = Report::new("rc-verify", Outcome::Holds).param("n", p.n).param("tau", p.tau).param("pi", p.pi);
            r.ev("tuples", m.tuples.len());
            if let Err(v) = res {
                r.outcome = Outcome::Violated;
                r.ev("violation", v);
            }
            Ok(r)
        }
        Command::Witnesses { circuit, seeds, p, algebra } => {
            let (phi, m) = load_circuit(&circuit, algebra.as_deref())?;
            let s0 = load_seeds(&seeds, &phi)?;
            let c = tau_pi(p.tau, p.pi)?;
            let w = build_witnesses(&m, &s0, p.n).map_err(input)?;
            let mut r = Report::new("witnesses", Outcome::Holds).param("n", p.n).param("tau", p.tau).param("pi", p.pi);
            let trace: Vec<String> = w.trace.iter().map(|x| x.to_string()).collect();
            r.ev("sizes", trace.join(" "));
            for (k, t) in &w.family {
                r.term(format!("witness{}", key_name(&phi, k)), t);
            }
            if let Err(v) = verify_witnesses(&w, &phi, p.n, c).map_err(input)? {
                r.outcome = Outcome::Violated;
                r.ev("violation", v);
            }
            Ok(r)
        }
        Command::SearchCopy { algebra, set, tau, pi, budget, ports, out } => {
            let phi = load_algebra(&algebra)?;
            let j = match fixture(&algebra).ok().and_then(|f| f.notable.get(&set).cloned()) {
                Some(s) => s,
                None => elements(&phi, &set)?,
            };
            let c = tau_pi(tau, pi)?;
            let mut r = Report::new("search-copy", Outcome::Exhausted)
                .param("set", names(&phi, j.iter().copied()))
                .param("tau", tau)
                .param("pi", pi)
                .param("budget", budget)
                .param("ports", ports);
            match search_copy(&phi, &j, c, budget, ports).map_err(input)? {
                CopyOutcome::Found { circuit, seeds, examined } => {
                    r.outcome = Outcome::Found;
                    r.ev("examined", examined);
                    for (k, t) in &circuit.tuples {
                        r.term(format!("m{}", key_name(&phi, k)), &t.m);
                    }
                    let header = Path::new(&algebra).is_file().then_some(algebra.as_str());
                    write(&out, &write_circuit(&phi, &circuit, header))?;
                    let seeds_path = out.with_extension("fs");
                    write(&seeds_path, &write_seeds(&phi, &seeds))?;
                    r.ev("circuit", out.display());
                    r.ev("seeds", seeds_path.display());
                }
                CopyOutcome::Exhausted { examined } => r.ev("examined", examined),
            }
            Ok(r)
        }
        Command::PumpSubcircuit { tops, thetas, z, chi, sigma, tau, algebra } => {
            let (phi, m) = load_circuit(&tops, algebra.as_deref())?;
            let c = tau_pi(tau, 1)?;
            let tops: BTreeMap<usize, Tuple> = m.tuples.into_iter().map(|(k, t)| (k.1, t)).collect();
            let mut th = BTreeMap::new();
            for part in thetas.split(',').filter(|s| !s.is_empty()) {
                let (k, v) = part.split_once('=').ok_or_else(|| usage(format!("bad exponent `{part}`")))?;
                th.insert(element(&phi, k.trim())?, v.trim().parse::<usize>().map_err(usage)?);
            }
            let zs: BTreeSet<String> = z.split(',').map(str::to_string).collect();
            let p = build_pumped_subcircuit(&tops, &th, &zs, chi, sigma, c).map_err(input)?;
            let mut r = Report::new("pump-subcircuit", if p.balanced { Outcome::Holds } else { Outcome::Refuted })
                .param("chi", chi)
                .param("sigma", sigma)
                .param("tau", tau);
            r.ev("omega", p.omega);
            r.ev("eta", p.eta);
            let rows: Vec<String> =
                p.matrix.rows().iter().map(|row| row.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")).collect();
            r.ev("matrix", rows.join(" ; "));
            for (j, counts) in &p.z_counts {
                let v: Vec<String> = counts.iter().map(|(k, n)| format!("{}={n}", phi.name(*k))).collect();
                r.ev(format!("z-counts.{}", phi.name(*j)), v.join(" "));
            }
            for (j, t) in &p.tuples {
                r.term(format!("u[{}]", phi.name(*j)), &t.m);
            }
            Ok(r)
        }
        Command::Fixtures { check, export } => {
            let mut r = Report::new("fixtures", Outcome::Found);
            if let Some(dir) = export {
                std::fs::create_dir_all(&dir).map_err(input)?;
                for (name, text) in corpus_files() {
                    write(&dir.join(&name), &text)?;
                    r.ev("written", dir.join(name).display());
                }
            }
            match check.as_deref() {
                Some(which) => {
                    let list: Vec<&str> = if which == "all" { NAMES.to_vec() } else { vec![which] };
                    r.outcome = Outcome::Holds;
                    for name in list {
                        let checks = golden(name).map_err(usage)?;
                        for (i, (label, ok)) in checks.iter().enumerate() {
                            r.ev(format!("check.{name}.{i}"), format!("{} {label}", if *ok { "pass" } else { "fail" }));
                            if !ok {
                                r.outcome = Outcome::Refuted;
                            }
                        }
                    }
                }
                None => {
                    for f in NAMES {
                        let phi = fixture(f).map_err(usage)?.phi;
                        r.ev(format!("fixture.{f}"), format!("|H|={} letters={}", phi.h().len(), phi.alphabet().proper().len()));
                    }
                }
            }
            Ok(r)
        }
    }
}

/// Parses argv, runs, prints the report and returns the exit code.
pub fn main_with(args: impl IntoIterator<Item = String>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(r) => {
            print!("{}", r.render());
            r.outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
