//! ≡_{τ,π}, the relabeling congruences ≈ⁿ_{τ,π} and counter matrices.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::algebra::Homomorphism;
use crate::terms::{contract_neutral, port_input, Node, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TauPi {
    pub tau: usize,
    pub pi: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

impl TauPi {
    pub fn new(tau: usize, pi: usize) -> Result<TauPi, CongruenceError> {
        if pi == 0 {
            return Err(CongruenceError::ZeroPeriod);
        }
        Ok(TauPi { tau, pi })
    }

    /// Canonical representative of p modulo ≡_{τ,π}.
    pub fn cap(&self, p: usize) -> usize {
        if p < self.tau {
            p
        } else {
            self.tau + (p - self.tau) % self.pi
        }
    }

    pub fn equiv(&self, p: usize, q: usize) -> bool {
        cmp_tau_pi(p, q, *self)
    }
}

pub fn cmp_tau_pi(p: usize, q: usize, c: TauPi) -> bool {
    p == q || (p >= c.tau && q >= c.tau && p.abs_diff(q) % c.pi == 0)
}

pub type SigId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    /// Capped label counts.
    Base(Vec<(u32, usize)>),
    /// Previous level plus capped counts of relabeled nodes
    /// (symbol, on-trunk, Δ-signature, ∇-signature).
    Step { prev: SigId, items: Vec<((u32, bool, SigId, SigId), usize)> },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct STree {
    sym: u32,
    kids: Vec<STree>,
}

const HOLE: &str = "□";

/// Interning registry for signatures. Ids are local to one engine.
#[derive(Debug, Clone)]
pub struct SignatureEngine {
    pub c: TauPi,
    symbols: HashMap<String, u32>,
    names: Vec<String>,
    payloads: Vec<Payload>,
    index: HashMap<Payload, SigId>,
    memo: HashMap<(usize, Vec<STree>), SigId>,
    digests: HashMap<SigId, u64>,
    markers: Vec<u32>,
}

impl SignatureEngine {
    pub fn new(c: TauPi) -> SignatureEngine {
        let mut e = SignatureEngine {
            c,
            symbols: HashMap::new(),
            names: Vec::new(),
            payloads: Vec::new(),
            index: HashMap::new(),
            memo: HashMap::new(),
            digests: HashMap::new(),
            markers: Vec::new(),
        };
        e.sym(HOLE);
        e
    }

    fn sym(&mut self, name: &str) -> u32 {
        if let Some(&s) = self.symbols.get(name) {
            return s;
        }
        let s = self.names.len() as u32;
        self.names.push(name.to_string());
        self.symbols.insert(name.to_string(), s);
        s
    }

    fn marker(&mut self, k: usize) -> u32 {
        while self.markers.len() <= k {
            let m = self.sym(&format!("◇{}", self.markers.len()));
            self.markers.push(m);
        }
        self.markers[k]
    }

    fn intern(&mut self, p: Payload) -> SigId {
        if let Some(&id) = self.index.get(&p) {
            return id;
        }
        let id = self.payloads.len() as SigId;
        self.payloads.push(p.clone());
        self.index.insert(p, id);
        id
    }

    pub fn payload(&self, id: SigId) -> &Payload {
        &self.payloads[id as usize]
    }

    pub fn interned(&self) -> usize {
        self.payloads.len()
    }

    fn convert(&mut self, nodes: &[Node], out: &mut Vec<STree>) {
        for n in nodes {
            match n {
                Node::Interior { label, children } => {
                    let mut kids = Vec::new();
                    self.convert(children, &mut kids);
                    kids.sort();
                    out.push(STree { sym: self.sym(label), kids });
                }
                Node::Port { name, labels } => {
                    let s = self.sym(&format!("?{}", port_input(name, labels)));
                    out.push(STree { sym: s, kids: vec![] });
                }
                Node::Hole => out.push(STree { sym: 0, kids: vec![] }),
            }
        }
    }

    /// Level-n signature of a forest or context; neutral nodes are contracted first.
    pub fn signature(&mut self, t: &Term, n: usize) -> SigId {
        assert!(n >= 1, "signature level starts at 1");
        let t = contract_neutral(t);
        let mut f = Vec::new();
        self.convert(&t.roots, &mut f);
        f.sort();
        self.sig(&f, n)
    }

    pub fn equiv(&mut self, s: &Term, t: &Term, n: usize) -> bool {
        self.signature(s, n) == self.signature(t, n)
    }

    fn counts(&self, f: &[STree], acc: &mut BTreeMap<u32, usize>) {
        for t in f {
            *acc.entry(t.sym).or_default() += 1;
            self.counts(&t.kids, acc);
        }
    }

    fn sig(&mut self, f: &[STree], n: usize) -> SigId {
        if n == 1 {
            let mut acc = BTreeMap::new();
            self.counts(f, &mut acc);
            let v = acc.into_iter().map(|(s, k)| (s, self.c.cap(k))).collect();
            return self.intern(Payload::Base(v));
        }
        let key = (n, f.to_vec());
        if let Some(&id) = self.memo.get(&key) {
            return id;
        }
        let prev = self.sig(f, n - 1);
        let mut markers = 0;
        count_markers(f, &self.markers, &mut markers);
        let marker = self.marker(markers);
        let renamed = rename_hole(f, marker);
        let mut paths = Vec::new();
        collect_paths(f, &mut vec![], &mut paths);
        let mut items: BTreeMap<(u32, bool, SigId, SigId), usize> = BTreeMap::new();
        for p in paths {
            let (sym, trunk, kids) = {
                let node = at(f, &p);
                (node.sym, contains_hole(node), node.kids.clone())
            };
            let d = self.sig(&kids, n - 1);
            let mut nab = renamed.clone();
            replace(&mut nab, &p, STree { sym: 0, kids: vec![] });
            canon(&mut nab);
            let v = self.sig(&nab, n - 1);
            *items.entry((sym, trunk, d, v)).or_default() += 1;
        }
        let items = items.into_iter().map(|(k, c)| (k, self.c.cap(c))).collect();
        let id = self.intern(Payload::Step { prev, items });
        self.memo.insert(key, id);
        id
    }

    /// A structural hash of the payload, stable across engines.
    pub fn digest(&mut self, id: SigId) -> u64 {
        if let Some(&d) = self.digests.get(&id) {
            return d;
        }
        let mut h = DefaultHasher::new();
        match self.payloads[id as usize].clone() {
            Payload::Base(v) => {
                0u8.hash(&mut h);
                for (s, k) in v {
                    self.names[s as usize].hash(&mut h);
                    k.hash(&mut h);
                }
            }
            Payload::Step { prev, items } => {
                1u8.hash(&mut h);
                self.digest(prev).hash(&mut h);
                let mut parts: Vec<(String, bool, u64, u64, usize)> = items
                    .into_iter()
                    .map(|((s, t, d, v), k)| (self.names[s as usize].clone(), t, self.digest(d), self.digest(v), k))
                    .collect();
                parts.sort();
                parts.hash(&mut h);
            }
        }
        let d = h.finish();
        self.digests.insert(id, d);
        d
    }
}

fn count_markers(f: &[STree], markers: &[u32], acc: &mut usize) {
    for t in f {
        if markers.contains(&t.sym) {
            *acc += 1;
        }
        count_markers(&t.kids, markers, acc);
    }
}

fn rename_hole(f: &[STree], marker: u32) -> Vec<STree> {
    f.iter()
        .map(|t| STree { sym: if t.sym == 0 { marker } else { t.sym }, kids: rename_hole(&t.kids, marker) })
        .collect()
}

fn contains_hole(t: &STree) -> bool {
    t.sym == 0 || t.kids.iter().any(contains_hole)
}

fn collect_paths(f: &[STree], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for (i, t) in f.iter().enumerate() {
        cur.push(i);
        out.push(cur.clone());
        collect_paths(&t.kids, cur, out);
        cur.pop();
    }
}

fn at<'a>(f: &'a [STree], p: &[usize]) -> &'a STree {
    let mut t = &f[p[0]];
    for &i in &p[1..] {
        t = &t.kids[i];
    }
    t
}

fn replace(f: &mut [STree], p: &[usize], new: STree) {
    let mut t = &mut f[p[0]];
    for &i in &p[1..] {
        t = &mut t.kids[i];
    }
    *t = new;
}

fn canon(f: &mut [STree]) {
    for t in f.iter_mut() {
        canon(&mut t.kids);
    }
    f.sort();
}

pub fn equiv_n(s: &Term, t: &Term, n: usize, c: TauPi) -> bool {
    SignatureEngine::new(c).equiv(s, t, n)
}

/// Calls `visit` on every forest over `letters` with at most `max_size`
/// nodes, once per sibling-permutation class, by increasing size. Stops
/// early when `visit` returns true.
pub fn for_each_forest(letters: &[String], max_size: usize, visit: &mut dyn FnMut(&Term) -> bool) -> bool {
    let mut trees: Vec<Vec<Node>> = vec![vec![]];
    for size in 0..=max_size {
        if size >= 1 {
            let mut ts = Vec::new();
            let mut forests = Vec::new();
            forests_of(&trees, size - 1, &mut forests);
            for l in letters {
                for f in &forests {
                    ts.push(Node::tree(l.clone(), f.clone()));
                }
            }
            trees.push(ts);
        }
        let mut stop = false;
        each_forest(&trees, size, size, usize::MAX, &mut Vec::new(), &mut |f| {
            stop = visit(&Term::new(f.to_vec()));
            stop
        });
        if stop {
            return true;
        }
    }
    false
}

/// Like `for_each_forest` but once per sibling order, for algebras whose
/// horizontal monoid is not commutative.
pub fn for_each_ordered_forest(letters: &[String], max_size: usize, visit: &mut dyn FnMut(&Term) -> bool) -> bool {
    fn seqs(trees: &[Vec<Node>], left: usize, cur: &mut Vec<Node>, f: &mut dyn FnMut(&[Node]) -> bool) -> bool {
        if left == 0 {
            return f(cur);
        }
        for s in 1..=left {
            for t in &trees[s] {
                cur.push(t.clone());
                let stop = seqs(trees, left - s, cur, f);
                cur.pop();
                if stop {
                    return true;
                }
            }
        }
        false
    }
    let mut trees: Vec<Vec<Node>> = vec![vec![]];
    for size in 0..=max_size {
        if size >= 1 {
            let mut ts = Vec::new();
            seqs(&trees, size - 1, &mut Vec::new(), &mut |f| {
                for l in letters {
                    ts.push(Node::tree(l.clone(), f.to_vec()));
                }
                false
            });
            trees.push(ts);
        }
        if seqs(&trees, size, &mut Vec::new(), &mut |f| visit(&Term::new(f.to_vec()))) {
            return true;
        }
    }
    false
}

fn forests_of(trees: &[Vec<Node>], size: usize, out: &mut Vec<Vec<Node>>) {
    each_forest(trees, size, size, usize::MAX, &mut Vec::new(), &mut |f| {
        out.push(f.to_vec());
        false
    });
}

/// Non-increasing sequences of (tree size, index) summing to `left`.
fn each_forest(
    trees: &[Vec<Node>],
    left: usize,
    max_size: usize,
    max_idx: usize,
    cur: &mut Vec<Node>,
    f: &mut dyn FnMut(&[Node]) -> bool,
) -> bool {
    if left == 0 {
        return f(cur);
    }
    for s in (1..=left.min(max_size)).rev() {
        let bound = if s == max_size { max_idx.min(trees[s].len().saturating_sub(1)) } else { trees[s].len().saturating_sub(1) };
        if trees[s].is_empty() {
            continue;
        }
        for i in (0..=bound).rev() {
            cur.push(trees[s][i].clone());
            let stop = each_forest(trees, left - s, s, i, cur, f);
            cur.pop();
            if stop {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq)]
pub enum Falsification {
    Counterexample(Term, Term),
    Exhausted,
}

/// Searches forests up to `budget` nodes for two with equal level-n
/// signature but distinct images under φ.
pub fn refinement_falsify(phi: &Homomorphism, n: usize, c: TauPi, budget: usize) -> Falsification {
    let letters = phi.alphabet().proper();
    let mut eng = SignatureEngine::new(c);
    let mut seen: HashMap<SigId, (Term, usize)> = HashMap::new();
    let mut found = None;
    let walk = if phi.h().is_commutative() { for_each_forest } else { for_each_ordered_forest };
    walk(&letters, budget, &mut |t| {
        let Ok(v) = phi.eval_h(t) else { return false };
        let s = eng.signature(t, n);
        match seen.get(&s) {
            Some((r, w)) if *w != v => {
                found = Some((r.clone(), t.clone()));
                true
            }
            Some(_) => false,
            None => {
                seen.insert(s, (t.clone(), v));
                false
            }
        }
    });
    match found {
        Some((a, b)) => Falsification::Counterexample(a, b),
        None => Falsification::Exhausted,
    }
}

/// A uniformly shaped random forest with exactly `size` nodes.
pub fn random_forest<R: Rng>(rng: &mut R, letters: &[String], size: usize) -> Term {
    fn forest<R: Rng>(rng: &mut R, letters: &[String], k: usize) -> Vec<Node> {
        let mut out = Vec::new();
        let mut left = k;
        while left > 0 {
            let s = rng.gen_range(1..=left);
            let label = letters[rng.gen_range(0..letters.len())].clone();
            out.push(Node::tree(label, forest(rng, letters, s - 1)));
            left -= s;
        }
        out
    }
    if letters.is_empty() {
        return Term::new(Vec::new());
    }
    Term::new(forest(rng, letters, size))
}

/// Randomized variant of `refinement_falsify`: draws `samples` forests of
/// size at most `max_size` from a ChaCha stream seeded with `seed`.
pub fn sample_falsify(phi: &Homomorphism, n: usize, c: TauPi, samples: usize, max_size: usize, seed: u64) -> Falsification {
    let letters = phi.alphabet().proper();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eng = SignatureEngine::new(c);
    let mut seen: HashMap<SigId, (Term, usize)> = HashMap::new();
    for _ in 0..samples {
        let size = rng.gen_range(0..=max_size);
        let t = random_forest(&mut rng, &letters, size);
        let Ok(v) = phi.eval_h(&t) else { continue };
        let s = eng.signature(&t, n);
        match seen.get(&s) {
            Some((r, w)) if *w != v => return Falsification::Counterexample(r.clone(), t),
            Some(_) => {}
            None => {
                seen.insert(s, (t, v));
            }
        }
    }
    Falsification::Exhausted
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CounterMatrix {
    pub c: TauPi,
    pub dim: usize,
    pub data: Vec<usize>,
}

impl CounterMatrix {
    pub fn new(c: TauPi, rows: Vec<Vec<usize>>) -> CounterMatrix {
        let dim = rows.len();
        let data = rows.into_iter().flat_map(|r| r.into_iter().map(|x| c.cap(x))).collect();
        CounterMatrix { c, dim, data }
    }

    pub fn identity(c: TauPi, dim: usize) -> CounterMatrix {
        let rows = (0..dim).map(|i| (0..dim).map(|j| usize::from(i == j)).collect()).collect();
        CounterMatrix::new(c, rows)
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.data.chunks(self.dim.max(1)).map(|r| r.to_vec()).collect()
    }
}

/// Product computed in ℕ, then re-capped.
pub fn mat_mul(a: &CounterMatrix, b: &CounterMatrix) -> Result<CounterMatrix, CongruenceError> {
    if a.dim != b.dim {
        return Err(CongruenceError::Dimension(a.dim, b.dim));
    }
    let n = a.dim;
    let mut data = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            let s: usize = (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum();
            data[i * n + j] = a.c.cap(s);
        }
    }
    Ok(CounterMatrix { c: a.c, dim: n, data })
}

/// Least ω ≥ 1 with A^{2ω} = A^ω, and A^ω.
pub fn idempotent_power(a: &CounterMatrix) -> (usize, CounterMatrix) {
    let (t, p) = crate::algebra::threshold_period(a, |x, y| mat_mul(x, y).expect("square"));
    let omega = t.div_ceil(p) * p;
    let mut m = a.clone();
    for _ in 1..omega {
        m = mat_mul(&m, a).expect("square");
    }
    (omega, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::parse_term;

    fn t(s: &str) -> Term {
        parse_term(s, None).unwrap()
    }

    #[test]
    fn tau_pi_examples() {
        let c = TauPi::new(2, 1).unwrap();
        assert!(cmp_tau_pi(2, 5, c));
        let c = TauPi::new(1, 2).unwrap();
        assert!(cmp_tau_pi(1, 3, c));
        assert!(!cmp_tau_pi(1, 2, c));
        assert!(cmp_tau_pi(0, 0, c));
        assert!(TauPi::new(0, 0).is_err());
    }

    #[test]
    fn context_anchor() {
        let c = TauPi::new(1, 1).unwrap();
        assert!(equiv_n(&t("a+_"), &t("a_"), 1, c));
        assert!(!equiv_n(&t("a+_"), &t("a_"), 2, c));
    }

    #[test]
    fn sibling_order_and_depth() {
        let c = TauPi::new(2, 1).unwrap();
        for n in 1..=3 {
            assert!(equiv_n(&t("a(b+c)+d"), &t("d+a(c+b)"), n, c));
        }
        assert!(equiv_n(&t("a(a)"), &t("a+a"), 1, c));
        assert!(!equiv_n(&t("a(a)"), &t("a+a"), 2, c));
        assert!(equiv_n(&t("e(a)+e"), &t("a"), 2, c));
    }

    #[test]
    fn engine_is_deterministic() {
        let c = TauPi::new(1, 1).unwrap();
        let mut a = SignatureEngine::new(c);
        let mut b = SignatureEngine::new(c);
        let s = t("a(b(c)+_)");
        let x = a.signature(&s, 3);
        assert_eq!(x, a.signature(&s, 3));
        let y = b.signature(&s, 3);
        assert_eq!(a.digest(x), b.digest(y));
    }

    #[test]
    fn forest_enumeration_counts() {
        let one = vec!["a".to_string()];
        let mut counts = vec![0usize; 6];
        for_each_forest(&one, 5, &mut |f| {
            counts[f.size()] += 1;
            false
        });
        // unlabeled rooted forests: 1, 1, 2, 4, 9, 20
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20]);
        let two = vec!["a".to_string(), "b".to_string()];
        let mut counts = vec![0usize; 4];
        for_each_forest(&two, 3, &mut |f| {
            counts[f.size()] += 1;
            false
        });
        assert_eq!(counts, vec![1, 2, 7, 26]);
    }

    #[test]
    fn matrices() {
        let c = TauPi::new(1, 1).unwrap();
        let (w, _) = idempotent_power(&CounterMatrix::new(c, vec![vec![1]]));
        assert_eq!(w, 1);
        let c = TauPi::new(2, 1).unwrap();
        let a = CounterMatrix::new(c, vec![vec![0, 1], vec![1, 0]]);
        let (w, aw) = idempotent_power(&a);
        assert_eq!(w, 2);
        assert_eq!(aw, CounterMatrix::identity(c, 2));
        let (w, _) = idempotent_power(&CounterMatrix::new(c, vec![vec![2, 2], vec![2, 2]]));
        assert_eq!(w, 1);
        assert!(mat_mul(&a, &CounterMatrix::identity(c, 3)).is_err());
    }
}
