//! Tuples, port counters, the star relations, witness construction,
//! proof-by-copy search and the pumped-subcircuit builder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::algebra::{scc, AlgebraError, FormatError, Homomorphism};
use crate::congruence::{cmp_tau_pi, for_each_forest, idempotent_power, mat_mul, CounterMatrix, SignatureEngine, TauPi};
use crate::derived::{pump_equiv, DerivedError, PumpedTerm};
use crate::terms::{
    canonical_form, contract_neutral, erase_port_names, format_term, leaf_completion, nabla, parse_term, port_input,
    Node, Term, TermError, NEUTRAL,
};

/// (class key, target element).
pub type Key = (String, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tuple {
    pub m: Term,
    /// Class tag per port; filled in by the verifier in signature mode.
    pub mu: BTreeMap<String, String>,
    pub psi: BTreeMap<String, usize>,
    /// Symbolic pump shape, for pumped mode.
    pub shape: Option<PumpedTerm>,
}

impl Tuple {
    pub fn new(m: Term, psi: BTreeMap<String, usize>) -> Tuple {
        Tuple { m, mu: BTreeMap::new(), psi, shape: None }
    }

    /// ψ̆(m): the forest obtained by evaluating every port at ψ.
    pub fn image(&self, phi: &Homomorphism) -> Result<usize, ProofError> {
        let missing = self.m.ports().into_iter().find(|p| !self.psi.contains_key(&p.name));
        if let Some(p) = missing {
            return Err(ProofError::MissingPsi(p.name));
        }
        Ok(phi.eval_with(&self.m, &|n, _| self.psi.get(n).copied())?)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub tuples: BTreeMap<Key, Tuple>,
}

impl Circuit {
    /// Class key ↦ targets present in the circuit.
    pub fn classes(&self) -> BTreeMap<String, BTreeSet<usize>> {
        let mut out: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (c, j) in self.tuples.keys() {
            out.entry(c.clone()).or_default().insert(*j);
        }
        out
    }

    /// Every port names a class of the circuit and carries a ψ value in it.
    pub fn check(&self) -> Result<(), ProofError> {
        let classes = self.classes();
        for t in self.tuples.values() {
            for p in t.m.ports() {
                let j = *t.psi.get(&p.name).ok_or_else(|| ProofError::MissingPsi(p.name.clone()))?;
                match classes.get(p.input()) {
                    Some(js) if js.contains(&j) => {}
                    _ => return Err(ProofError::UnknownInput { port: p.name.clone(), input: p.input().to_string() }),
                }
            }
        }
        Ok(())
    }
}

pub type Seeds = BTreeMap<Key, Term>;

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSet {
    pub level: usize,
    pub family: BTreeMap<Key, Term>,
    /// Total forest size after each round.
    pub trace: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProofError {
    #[error("port `{0}` has no target value")]
    MissingPsi(String),
    #[error("port `{0}` has no class tag")]
    MissingMu(String),
    #[error("port `{port}` reads input `{input}`, which the circuit does not provide")]
    UnknownInput { port: String, input: String },
    #[error("no seed for ({0}, {1})")]
    MissingSeed(String, String),
    #[error("pumped mode needs pump shapes on both tuples")]
    NoShape,
    #[error("the pumped construction needs period 1, got {0}")]
    Period(usize),
    #[error("χ = {chi} must exceed σ = {sigma}")]
    Chi { chi: usize, sigma: usize },
    #[error("no top tuple for target {0}")]
    MissingTop(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Derived(#[from] DerivedError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Inconsistent { key: String, expected: String, got: String },
    Image { key: String, expected: String, got: String },
    Separated { class: String, a: String, b: String, level: usize },
    Structure { class: String, a: String, b: String, level: usize },
    Counter { class: String, a: String, b: String, counter: String },
    CrossCheck(Box<Violation>),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Inconsistent { key, expected, got } => {
                write!(f, "seed {key} evaluates to {got}, expected {expected}")
            }
            Violation::Image { key, expected, got } => write!(f, "tuple {key} evaluates to {got}, expected {expected}"),
            Violation::Separated { class, a, b, level } => {
                write!(f, "witnesses {a} and {b} of class {class} differ at level {level}")
            }
            Violation::Structure { class, a, b, level } => {
                write!(f, "tuples {a} and {b} of class {class} fail the structural clause at level {level}")
            }
            Violation::Counter { class, a, b, counter } => {
                write!(f, "tuples {a} and {b} of class {class} fail the counter clause at {counter}")
            }
            Violation::CrossCheck(v) => write!(f, "cross-check at the next level: {v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Signature(usize),
    Pumped { sigma: usize, rho: usize },
}

/// Sparse counter: (context class, input class, target) ↦ count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CounterVec(pub BTreeMap<(String, String, usize), usize>);

impl CounterVec {
    pub fn get(&self, k: &(String, String, usize)) -> usize {
        self.0.get(k).copied().unwrap_or(0)
    }

    pub fn capped(&self, c: TauPi) -> BTreeMap<(String, String, usize), usize> {
        self.0.iter().map(|(k, &v)| (k.clone(), c.cap(v))).collect()
    }

    /// First key where the two counters differ under ≡_{τ,π}.
    pub fn mismatch(&self, other: &CounterVec, c: TauPi) -> Option<(String, String, usize)> {
        let keys: BTreeSet<_> = self.0.keys().chain(other.0.keys()).collect();
        keys.into_iter().find(|k| !cmp_tau_pi(self.get(k), other.get(k), c)).cloned()
    }
}

fn mu_of<'a>(t: &'a Tuple, port: &str) -> Result<&'a String, ProofError> {
    t.mu.get(port).ok_or_else(|| ProofError::MissingMu(port.to_string()))
}

fn mu_completion(t: &Tuple) -> Result<Term, ProofError> {
    for p in t.m.ports() {
        mu_of(t, &p.name)?;
    }
    Ok(leaf_completion(&t.m, &|n, _| t.mu.get(n).cloned())?)
}

/// ∇(m,x) with the other ports kept as `?input` leaves, contracted and sorted.
fn exact_context(m: &Term, port: &str) -> String {
    let mut f = |name: &str, labels: &[String]| {
        if name == port {
            vec![Node::Hole]
        } else {
            vec![Node::leaf(format!("?{}", port_input(name, labels)))]
        }
    };
    format_term(&canonical_form(&contract_neutral(&m.map_ports(&mut f))))
}

fn exact_shape(m: &Term) -> Term {
    canonical_form(&contract_neutral(&erase_port_names(m)))
}

/// Parses a pumped-port annotation `{stage}d{depth}h{height}o{origin}`.
fn parse_annotation(a: &str) -> Option<(char, usize, usize, usize)> {
    let mut it = a.chars();
    let stage = it.next()?;
    let rest: String = it.collect();
    let rest = rest.strip_prefix('d')?;
    let (d, rest) = rest.split_once('h')?;
    let (h, o) = rest.split_once('o')?;
    Some((stage, d.parse().ok()?, h.parse().ok()?, o.parse().ok()?))
}

pub fn counters(t: &Tuple, mode: Mode, engine: &mut SignatureEngine) -> Result<CounterVec, ProofError> {
    let mut out = CounterVec::default();
    let completed = match mode {
        Mode::Signature(_) => Some(mu_completion(t)?),
        _ => None,
    };
    for p in t.m.ports() {
        let j = *t.psi.get(&p.name).ok_or_else(|| ProofError::MissingPsi(p.name.clone()))?;
        let key = match mode {
            Mode::Exact => (exact_context(&t.m, &p.name), p.input().to_string(), j),
            Mode::Signature(n) => {
                let ctx = if n == 0 {
                    "v".to_string()
                } else {
                    let cx = nabla(completed.as_ref().expect("completed"), &p.path)?;
                    let id = engine.signature(&cx, n);
                    format!("v{:016x}", engine.digest(id))
                };
                (ctx, mu_of(t, &p.name)?.clone(), j)
            }
            Mode::Pumped { sigma, rho } => {
                let c = TauPi::new(sigma, rho).map_err(|e| ProofError::Algebra(AlgebraError::Params(e.to_string())))?;
                let ann = p.labels.get(1).and_then(|a| parse_annotation(a)).ok_or_else(|| ProofError::MissingMu(p.name.clone()))?;
                let (s, d, h, o) = ann;
                (format!("{s}d{}h{}o{o}", c.cap(d), c.cap(h)), p.input().to_string(), j)
            }
        };
        *out.0.entry(key).or_default() += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StarOutcome {
    Holds,
    Structure,
    Counter((String, String, usize)),
}

/// The counter clause is checked before the structural one.
pub fn star_detail(engine: &mut SignatureEngine, t: &Tuple, u: &Tuple, mode: Mode, c: TauPi) -> Result<StarOutcome, ProofError> {
    let (a, b) = (counters(t, mode, engine)?, counters(u, mode, engine)?);
    if let Some(k) = a.mismatch(&b, c) {
        return Ok(StarOutcome::Counter(k));
    }
    let same = match mode {
        Mode::Exact => exact_shape(&t.m) == exact_shape(&u.m),
        Mode::Signature(n) => engine.equiv(&mu_completion(t)?, &mu_completion(u)?, n + 1),
        Mode::Pumped { sigma, rho } => {
            let (p, q) = (t.shape.as_ref().ok_or(ProofError::NoShape)?, u.shape.as_ref().ok_or(ProofError::NoShape)?);
            match pump_equiv(p, q, sigma, rho) {
                Ok(b) => b,
                Err(DerivedError::Mismatch) => false,
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(if same { StarOutcome::Holds } else { StarOutcome::Structure })
}

pub fn star(t: &Tuple, u: &Tuple, mode: Mode, c: TauPi) -> Result<bool, ProofError> {
    let mut engine = SignatureEngine::new(c);
    Ok(star_detail(&mut engine, t, u, mode, c)? == StarOutcome::Holds)
}

fn key_name(phi: &Homomorphism, k: &Key) -> String {
    format!("({}, {})", k.0, phi.name(k.1))
}

fn insert_family(t: &Tuple, family: &BTreeMap<Key, Term>, phi: Option<&Homomorphism>) -> Result<Term, ProofError> {
    let ports = t.m.ports();
    if ports.is_empty() {
        return Ok(contract_neutral(&t.m));
    }
    let mut missing = None;
    let mut f = |name: &str, labels: &[String]| {
        let input = port_input(name, labels).to_string();
        let found = t.psi.get(name).and_then(|&j| family.get(&(input.clone(), j)));
        match found {
            Some(s) => vec![Node::Interior { label: NEUTRAL.to_string(), children: s.roots.clone() }],
            None => {
                let j = t.psi.get(name).map(|&j| phi.map_or(j.to_string(), |p| p.name(j).to_string()));
                missing.get_or_insert((input, j.unwrap_or_else(|| "?".into())));
                vec![]
            }
        }
    };
    let out = t.m.map_ports(&mut f);
    if let Some((c, j)) = missing {
        return Err(ProofError::MissingSeed(c, j));
    }
    Ok(contract_neutral(&out))
}

/// S⁽ⁿ⁾ = Mⁿ·S⁽⁰⁾.
pub fn build_witnesses(m: &Circuit, s0: &Seeds, n: usize) -> Result<WitnessSet, ProofError> {
    let size = |f: &BTreeMap<Key, Term>| f.values().map(Term::size).sum::<usize>();
    let mut cur: BTreeMap<Key, Term> = s0.clone();
    let mut trace = vec![size(&cur)];
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (k, t) in &m.tuples {
            next.insert(k.clone(), insert_family(t, &cur, None)?);
        }
        cur = next;
        trace.push(size(&cur));
    }
    Ok(WitnessSet { level: n, family: cur, trace })
}

pub fn verify_witnesses_with(
    engine: &mut SignatureEngine,
    s: &WitnessSet,
    phi: &Homomorphism,
    n: usize,
) -> Result<Result<(), Violation>, ProofError> {
    for (k, t) in &s.family {
        let got = phi.eval_h(t)?;
        if got != k.1 {
            return Ok(Err(Violation::Image {
                key: key_name(phi, k),
                expected: phi.name(k.1).to_string(),
                got: phi.name(got).to_string(),
            }));
        }
    }
    if n == 0 {
        return Ok(Ok(()));
    }
    let mut first: BTreeMap<&str, (&Key, u32)> = BTreeMap::new();
    for (k, t) in &s.family {
        let id = engine.signature(t, n);
        match first.get(k.0.as_str()) {
            None => {
                first.insert(&k.0, (k, id));
            }
            Some(&(k0, id0)) if id0 != id => {
                return Ok(Err(Violation::Separated {
                    class: k.0.clone(),
                    a: key_name(phi, k0),
                    b: key_name(phi, k),
                    level: n,
                }));
            }
            _ => {}
        }
    }
    Ok(Ok(()))
}

/// φ-diagonality plus pairwise ≈ⁿ_{τ,π} within each class.
pub fn verify_witnesses(s: &WitnessSet, phi: &Homomorphism, n: usize, c: TauPi) -> Result<Result<(), Violation>, ProofError> {
    verify_witnesses_with(&mut SignatureEngine::new(c), s, phi, n)
}

/// Class tags from the level-n signatures of the forests inserted at each port.
pub fn tag_ports(engine: &mut SignatureEngine, t: &Tuple, family: &BTreeMap<Key, Term>, n: usize) -> Result<Tuple, ProofError> {
    let mut out = t.clone();
    out.mu.clear();
    for p in t.m.ports() {
        let j = *t.psi.get(&p.name).ok_or_else(|| ProofError::MissingPsi(p.name.clone()))?;
        let s = family
            .get(&(p.input().to_string(), j))
            .ok_or_else(|| ProofError::MissingSeed(p.input().to_string(), j.to_string()))?;
        let label = if n == 0 {
            "σ".to_string()
        } else {
            let id = engine.signature(s, n);
            format!("σ{:016x}", engine.digest(id))
        };
        out.mu.insert(p.name.clone(), label);
    }
    Ok(out)
}

/// Checks the circuit against the seeds at level n: seed consistency, the
/// image condition, pairwise star in signature mode over S⁽ⁿ⁾, that S⁽ⁿ⁾ are
/// witnesses at level n, and that S⁽ⁿ⁺¹⁾ are witnesses at level n+1.
pub fn rc_verify(
    phi: &Homomorphism,
    m: &Circuit,
    s0: &Seeds,
    n: usize,
    c: TauPi,
) -> Result<Result<(), Violation>, ProofError> {
    m.check()?;
    for (k, s) in s0 {
        let got = phi.eval_h(s)?;
        if got != k.1 {
            return Ok(Err(Violation::Inconsistent {
                key: key_name(phi, k),
                expected: phi.name(k.1).to_string(),
                got: phi.name(got).to_string(),
            }));
        }
    }
    for (k, t) in &m.tuples {
        let got = t.image(phi)?;
        if got != k.1 {
            return Ok(Err(Violation::Image {
                key: key_name(phi, k),
                expected: phi.name(k.1).to_string(),
                got: phi.name(got).to_string(),
            }));
        }
    }
    let mut engine = SignatureEngine::new(c);
    let sn = build_witnesses(m, s0, n)?;
    let mut tagged: BTreeMap<&Key, Tuple> = BTreeMap::new();
    for (k, t) in &m.tuples {
        tagged.insert(k, tag_ports(&mut engine, t, &sn.family, n)?);
    }
    let keys: Vec<&Key> = tagged.keys().copied().collect();
    for (i, a) in keys.iter().enumerate() {
        for b in &keys[i + 1..] {
            if a.0 != b.0 {
                continue;
            }
            match star_detail(&mut engine, &tagged[a], &tagged[b], Mode::Signature(n), c)? {
                StarOutcome::Holds => {}
                StarOutcome::Structure => {
                    return Ok(Err(Violation::Structure {
                        class: a.0.clone(),
                        a: key_name(phi, a),
                        b: key_name(phi, b),
                        level: n + 1,
                    }))
                }
                StarOutcome::Counter(k) => {
                    return Ok(Err(Violation::Counter {
                        class: a.0.clone(),
                        a: key_name(phi, a),
                        b: key_name(phi, b),
                        counter: format!("{}/{}/{}", k.0, k.1, phi.name(k.2)),
                    }))
                }
            }
        }
    }
    if let Err(v) = verify_witnesses_with(&mut engine, &sn, phi, n)? {
        return Ok(Err(v));
    }
    let next = build_witnesses(m, &sn.family, 1)?;
    let next = WitnessSet { level: n + 1, ..next };
    if let Err(v) = verify_witnesses_with(&mut engine, &next, phi, n + 1)? {
        return Ok(Err(Violation::CrossCheck(Box::new(v))));
    }
    Ok(Ok(()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CopyOutcome {
    Found { circuit: Circuit, seeds: Seeds, examined: usize },
    Exhausted { examined: usize },
}

/// Smallest closed forest for each target, found by enumeration.
pub fn find_seeds(phi: &Homomorphism, class: &str, targets: &BTreeSet<usize>, max_size: usize) -> Option<Seeds> {
    let letters = phi.alphabet().proper();
    let mut out = Seeds::new();
    for_each_forest(&letters, max_size, &mut |t| {
        if let Ok(h) = phi.eval_h(t) {
            if targets.contains(&h) {
                out.entry((class.to_string(), h)).or_insert_with(|| t.clone());
            }
        }
        out.len() == targets.len()
    });
    (out.len() == targets.len()).then_some(out)
}

/// Canonical single-root trees with exactly `k` non-port nodes and `p` ports.
struct TreeEnum {
    letters: Vec<String>,
    port: Node,
    trees: BTreeMap<(usize, usize), Vec<Node>>,
}

impl TreeEnum {
    fn trees(&mut self, k: usize, p: usize) -> Vec<Node> {
        if let Some(v) = self.trees.get(&(k, p)) {
            return v.clone();
        }
        let mut out = BTreeSet::new();
        if k == 0 {
            if p == 1 {
                out.insert(self.port.clone());
            }
        } else {
            let forests = self.forests(k - 1, p, None);
            for l in self.letters.clone() {
                for f in &forests {
                    out.insert(Node::tree(l.clone(), f.clone()));
                }
            }
        }
        let v: Vec<Node> = out.into_iter().collect();
        self.trees.insert((k, p), v.clone());
        v
    }

    /// Sorted child lists whose trees are all ≤ `bound`.
    fn forests(&mut self, k: usize, p: usize, bound: Option<&Node>) -> Vec<Vec<Node>> {
        if k == 0 && p == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for k1 in 0..=k {
            for p1 in 0..=p {
                if k1 == 0 && p1 == 0 {
                    continue;
                }
                for t in self.trees(k1, p1) {
                    if bound.is_some_and(|b| t > *b) {
                        continue;
                    }
                    for mut rest in self.forests(k - k1, p - p1, Some(&t)) {
                        rest.insert(0, t.clone());
                        out.push(rest);
                    }
                }
            }
        }
        for f in &mut out {
            f.sort();
        }
        out.sort();
        out.dedup();
        out
    }
}

fn number_ports(n: &Node) -> Term {
    let mut i = 0;
    Term::single(n.clone()).map_ports(&mut |_, labels| {
        i += 1;
        vec![Node::Port { name: format!("x{i}"), labels: labels.to_vec() }]
    })
}

/// Proof-by-copy search over single-tree multicontexts, ordered by
/// (non-port nodes, ports, canonical form). Ports carry the class `J`.
pub fn search_copy(
    phi: &Homomorphism,
    j: &BTreeSet<usize>,
    c: TauPi,
    node_budget: usize,
    port_budget: usize,
) -> Result<CopyOutcome, ProofError> {
    const CLASS: &str = "J";
    let mut examined = 0;
    if j.len() < 2 || !scc(&phi.algebra).iter().any(|s| j.is_subset(s)) {
        return Ok(CopyOutcome::Exhausted { examined });
    }
    let Some(seeds) = find_seeds(phi, CLASS, j, 8) else {
        return Ok(CopyOutcome::Exhausted { examined });
    };
    let targets: Vec<usize> = j.iter().copied().collect();
    let mut en = TreeEnum {
        letters: phi.alphabet().proper(),
        port: Node::labelled_port("x", CLASS),
        trees: BTreeMap::new(),
    };
    for k in 1..=node_budget {
        for p in 1..=port_budget {
            for tree in en.trees(k, p) {
                examined += 1;
                let m = number_ports(&tree);
                let ports = m.ports();
                let ctx: Vec<String> = ports.iter().map(|x| exact_context(&m, &x.name)).collect();
                let mut buckets: BTreeMap<BTreeMap<(usize, usize), usize>, BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
                let mut ctx_ids: BTreeMap<&str, usize> = BTreeMap::new();
                for s in &ctx {
                    let n = ctx_ids.len();
                    ctx_ids.entry(s).or_insert(n);
                }
                let mut idx = vec![0usize; ports.len()];
                loop {
                    let psi: Vec<usize> = idx.iter().map(|&i| targets[i]).collect();
                    let h = phi.eval_with(&m, &|name, _| {
                        ports.iter().position(|x| x.name == name).map(|i| psi[i])
                    })?;
                    let mut cv: BTreeMap<(usize, usize), usize> = BTreeMap::new();
                    for (i, s) in ctx.iter().enumerate() {
                        *cv.entry((ctx_ids[s.as_str()], psi[i])).or_default() += 1;
                    }
                    let cv = cv.into_iter().map(|(k, v)| (k, c.cap(v))).collect();
                    let bucket = buckets.entry(cv).or_default();
                    bucket.entry(h).or_insert_with(|| psi.clone());
                    if targets.iter().all(|t| bucket.contains_key(t)) {
                        let mut circuit = Circuit::default();
                        for t in &targets {
                            let psi = &bucket[t];
                            let map = ports.iter().zip(psi).map(|(x, &v)| (x.name.clone(), v)).collect();
                            circuit.tuples.insert((CLASS.to_string(), *t), Tuple::new(m.clone(), map));
                        }
                        return Ok(CopyOutcome::Found { circuit, seeds, examined });
                    }
                    let mut i = 0;
                    while i < idx.len() {
                        idx[i] += 1;
                        if idx[i] < targets.len() {
                            break;
                        }
                        idx[i] = 0;
                        i += 1;
                    }
                    if i == idx.len() {
                        break;
                    }
                }
            }
        }
    }
    Ok(CopyOutcome::Exhausted { examined })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpedSubcircuit {
    pub tuples: BTreeMap<usize, Tuple>,
    pub matrix: CounterMatrix,
    pub omega: usize,
    pub eta: usize,
    /// Z-port counts by target at the bottom of each u_j, capped.
    pub z_counts: BTreeMap<usize, BTreeMap<usize, usize>>,
    pub balanced: bool,
}

struct Grower<'a> {
    tops: &'a BTreeMap<usize, Tuple>,
    z: &'a BTreeSet<String>,
    origin: BTreeMap<usize, usize>,
    next: usize,
    psi: BTreeMap<String, usize>,
}

impl Grower<'_> {
    /// Copies top_j at layer `d` of `stages[s]`, growing the chain below its Z-ports.
    fn grow(&mut self, j: usize, stages: &[(char, usize)], thetas: &BTreeMap<usize, usize>, s: usize, d: usize) -> Vec<Node> {
        let top = &self.tops[&j];
        let (stage, len) = stages[s];
        let len = if stage == 'b' { thetas[&j] } else { len };
        let mut nodes = Vec::new();
        for r in &top.m.roots {
            nodes.push(r.clone());
        }
        let t = Term::new(nodes);
        let mut out_ports = Vec::new();
        for p in t.ports() {
            let v = top.psi[&p.name];
            let in_z = self.z.contains(p.input());
            let sub = if in_z && d < len {
                Some(self.grow(v, stages, thetas, s, d + 1))
            } else if in_z && s + 1 < stages.len() {
                Some(self.grow(v, stages, thetas, s + 1, 1))
            } else {
                None
            };
            let sub = sub.unwrap_or_else(|| {
                self.next += 1;
                let name = format!("x{}", self.next);
                self.psi.insert(name.clone(), v);
                let ann = format!("{stage}d{d}h{}o{}", len - d, self.origin[&j]);
                vec![Node::Port { name, labels: vec![p.input().to_string(), ann] }]
            });
            out_ports.push((p.name.clone(), sub));
        }
        let mut subs: BTreeMap<String, Vec<Node>> = out_ports.into_iter().collect();
        t.map_ports(&mut |name, _| subs.remove(name).unwrap_or_default()).roots
    }
}

/// Three-step pumped-subcircuit construction for period 1. `tops` holds
/// top_j for every target, `thetas` the pump exponent of the full t_j.
pub fn build_pumped_subcircuit(
    tops: &BTreeMap<usize, Tuple>,
    thetas: &BTreeMap<usize, usize>,
    z: &BTreeSet<String>,
    chi: usize,
    sigma: usize,
    c: TauPi,
) -> Result<PumpedSubcircuit, ProofError> {
    if c.pi != 1 {
        return Err(ProofError::Period(c.pi));
    }
    if chi <= sigma {
        return Err(ProofError::Chi { chi, sigma });
    }
    let targets: Vec<usize> = tops.keys().copied().collect();
    for t in tops.values() {
        for p in t.m.ports() {
            let v = *t.psi.get(&p.name).ok_or_else(|| ProofError::MissingPsi(p.name.clone()))?;
            if z.contains(p.input()) && !tops.contains_key(&v) {
                return Err(ProofError::MissingTop(v.to_string()));
            }
        }
    }
    for j in &targets {
        if !thetas.contains_key(j) {
            return Err(ProofError::MissingTop(j.to_string()));
        }
    }
    let pos = |v: usize| targets.iter().position(|&t| t == v).expect("target");
    let mut rows = vec![vec![0usize; targets.len()]; targets.len()];
    for (i, j) in targets.iter().enumerate() {
        let t = &tops[j];
        for p in t.m.ports() {
            if z.contains(p.input()) {
                rows[i][pos(t.psi[&p.name])] += 1;
            }
        }
    }
    let matrix = CounterMatrix::new(c, rows);
    let (omega, _) = idempotent_power(&matrix);
    let eta = (c.tau + chi).div_ceil(omega) * omega;
    let mut shapes: Vec<Term> = Vec::new();
    let mut origin = BTreeMap::new();
    for j in &targets {
        let key = exact_shape(&tops[j].m);
        let o = shapes.iter().position(|s| *s == key).unwrap_or_else(|| {
            shapes.push(key.clone());
            shapes.len() - 1
        });
        origin.insert(*j, o);
    }
    let zname = z.iter().next().cloned().unwrap_or_default();
    let stages = [('a', chi), ('b', 0), ('c', eta)];
    let mut tuples = BTreeMap::new();
    let mut z_counts = BTreeMap::new();
    for &j in &targets {
        let mut g = Grower { tops, z, origin: origin.clone(), next: 0, psi: BTreeMap::new() };
        let roots = g.grow(j, &stages, thetas, 0, 1);
        let m = Term::new(roots);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for p in m.ports() {
            if z.contains(p.input()) {
                *counts.entry(g.psi[&p.name]).or_default() += 1;
            }
        }
        z_counts.insert(j, counts.into_iter().map(|(k, v)| (k, c.cap(v))).collect());
        let base = tops[&j].m.clone();
        let shape = PumpedTerm::new(base.clone(), zname.clone(), chi)
            .then(PumpedTerm::new(base.clone(), zname.clone(), thetas[&j]))
            .then(PumpedTerm::new(base, zname.clone(), eta));
        tuples.insert(j, Tuple { m, mu: BTreeMap::new(), psi: g.psi, shape: Some(shape) });
    }
    let first = z_counts.values().next().cloned();
    let balanced = z_counts.values().all(|v| Some(v) == first.as_ref());
    Ok(PumpedSubcircuit { tuples, matrix, omega, eta, z_counts, balanced })
}

/// A^δ computed by repeated multiplication, for checking Z-port counts.
pub fn matrix_power(a: &CounterMatrix, delta: usize) -> CounterMatrix {
    let mut m = CounterMatrix::identity(a.c, a.dim);
    for _ in 0..delta {
        m = mat_mul(&m, a).expect("square");
    }
    m
}

fn psi_line(phi: &Homomorphism, t: &Tuple) -> String {
    let items: Vec<String> = t.psi.iter().map(|(p, &v)| format!("{p}={}", phi.name(v))).collect();
    items.join(" ")
}

/// Circuit file: an optional `algebra:` line, then one block per tuple.
///
/// ```text
/// tuple J 00
///   m: ∧(∨(?x1:J+?x2:J)+∨(?x3:J+?x4:J))
///   psi: x1=00 x2=00 x3=11 x4=11
/// ```
pub fn write_circuit(phi: &Homomorphism, m: &Circuit, algebra: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(a) = algebra {
        out.push_str(&format!("algebra: {a}\n"));
    }
    for ((c, j), t) in &m.tuples {
        out.push_str(&format!("tuple {c} {}\n  m: {}\n  psi: {}\n", phi.name(*j), format_term(&t.m), psi_line(phi, t)));
    }
    out
}

/// The `algebra:` path named by a circuit file, if any.
pub fn circuit_algebra(text: &str) -> Option<String> {
    text.lines().find_map(|l| l.trim().strip_prefix("algebra:").map(|s| s.trim().to_string()))
}

fn elem(phi: &Homomorphism, ln: usize, name: &str) -> Result<usize, FormatError> {
    phi.h().index(name).ok_or_else(|| FormatError { line: ln, msg: format!("unknown element `{name}`") })
}

pub fn parse_circuit(text: &str, phi: &Homomorphism) -> Result<Circuit, FormatError> {
    let alphabet = phi.alphabet();
    let mut out = Circuit::default();
    let mut cur: Option<(usize, Key, Option<Term>, Option<BTreeMap<String, usize>>)> = None;
    let finish = |cur: &mut Option<(usize, Key, Option<Term>, Option<BTreeMap<String, usize>>)>,
                      out: &mut Circuit|
     -> Result<(), FormatError> {
        if let Some((ln, k, m, psi)) = cur.take() {
            let m = m.ok_or(FormatError { line: ln, msg: "tuple without `m:`".into() })?;
            let t = Tuple::new(m, psi.unwrap_or_default());
            if out.tuples.insert(k, t).is_some() {
                return Err(FormatError { line: ln, msg: "duplicate tuple key".into() });
            }
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("algebra:") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("tuple ") {
            finish(&mut cur, &mut out)?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(FormatError { line: ln, msg: "expected `tuple <class> <element>`".into() });
            }
            cur = Some((ln, (parts[0].to_string(), elem(phi, ln, parts[1])?), None, None));
        } else if let Some(rest) = line.strip_prefix("m:") {
            let c = cur.as_mut().ok_or(FormatError { line: ln, msg: "`m:` outside a tuple".into() })?;
            c.2 = Some(parse_term(rest.trim(), Some(&alphabet)).map_err(|e| FormatError { line: ln, msg: e.to_string() })?);
        } else if let Some(rest) = line.strip_prefix("psi:") {
            let c = cur.as_mut().ok_or(FormatError { line: ln, msg: "`psi:` outside a tuple".into() })?;
            let mut psi = BTreeMap::new();
            for item in rest.split_whitespace() {
                let (p, v) = item.split_once('=').ok_or(FormatError { line: ln, msg: format!("bad assignment `{item}`") })?;
                psi.insert(p.to_string(), elem(phi, ln, v)?);
            }
            c.3 = Some(psi);
        } else {
            return Err(FormatError { line: ln, msg: format!("unexpected line `{line}`") });
        }
    }
    finish(&mut cur, &mut out)?;
    Ok(out)
}

/// Seed file: one `seed <class> <element>: <term>` line per entry.
pub fn write_seeds(phi: &Homomorphism, s: &Seeds) -> String {
    s.iter().map(|((c, j), t)| format!("seed {c} {}: {}\n", phi.name(*j), format_term(t))).collect()
}

pub fn parse_seeds(text: &str, phi: &Homomorphism) -> Result<Seeds, FormatError> {
    let alphabet = phi.alphabet();
    let mut out = Seeds::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rest = line.strip_prefix("seed ").ok_or(FormatError { line: ln, msg: "expected `seed`".into() })?;
        let (head, term) = rest.split_once(':').ok_or(FormatError { line: ln, msg: "missing `:`".into() })?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(FormatError { line: ln, msg: "expected `seed <class> <element>: <term>`".into() });
        }
        let t = parse_term(term.trim(), Some(&alphabet)).map_err(|e| FormatError { line: ln, msg: e.to_string() })?;
        out.insert((parts[0].to_string(), elem(phi, ln, parts[1])?), t);
    }
    Ok(out)
}
