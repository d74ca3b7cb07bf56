//! Finite monoids, transformation monoids, forest algebras and homomorphisms.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::terms::{port_input, Node, Term, NEUTRAL};

pub type Transform = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("closure exceeded budget of {0} elements")]
    Budget(usize),
    #[error("label `{0}` has no letter action or leaf extension")]
    Unextended(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("term has more than one box port")]
    TwoHoles,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMonoid {
    pub names: Vec<String>,
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
}

impl FiniteMonoid {
    /// Builds a monoid from a table, locating its identity.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<usize>>) -> Option<FiniteMonoid> {
        let n = names.len();
        let identity = (0..n).find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))?;
        Some(FiniteMonoid { names, table, identity })
    }

    pub fn trivial() -> FiniteMonoid {
        FiniteMonoid { names: vec!["0".into()], table: vec![vec![0]], identity: 0 }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn op(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// n⊙h = h+⋯+h (n copies); 0⊙h is the identity.
    pub fn times(&self, n: usize, h: usize) -> usize {
        (0..n).fold(self.identity, |acc, _| self.op(acc, h))
    }

    pub fn is_commutative(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| (0..n).all(|b| self.op(a, b) == self.op(b, a)))
    }
}

#[derive(Debug, Clone)]
pub struct TransformationMonoid {
    pub degree: usize,
    pub elements: Vec<Transform>,
    pub generators: Vec<Transform>,
    index: HashMap<Transform, usize>,
}

impl PartialEq for TransformationMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements.len() == other.elements.len() && self.elements.iter().all(|e| other.contains(e))
    }
}

/// (a∘b)(h) = a(b(h)).
pub fn compose(a: &[usize], b: &[usize]) -> Transform {
    b.iter().map(|&x| a[x]).collect()
}

pub fn identity_map(n: usize) -> Transform {
    (0..n).collect()
}

impl TransformationMonoid {
    /// Breadth-first closure of the generators under composition.
    pub fn generate(degree: usize, generators: Vec<Transform>, budget: usize) -> Result<TransformationMonoid, AlgebraError> {
        let id = identity_map(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &generators {
                let c = compose(g, &elements[i]);
                if !index.contains_key(&c) {
                    if elements.len() >= budget {
                        return Err(AlgebraError::Budget(budget));
                    }
                    index.insert(c.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(c);
                }
            }
        }
        Ok(TransformationMonoid { degree, elements, generators, index })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.index.contains_key(t)
    }

    pub fn position(&self, t: &[usize]) -> Option<usize> {
        self.index.get(t).copied()
    }
}

pub const DEFAULT_BUDGET: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestAlgebra {
    pub h: FiniteMonoid,
    pub v: TransformationMonoid,
}

impl ForestAlgebra {
    pub fn translation(h: &FiniteMonoid, u: usize, w: usize) -> Transform {
        (0..h.len()).map(|x| h.op(h.op(u, x), w)).collect()
    }

    /// All two-sided translations of H.
    pub fn translations(h: &FiniteMonoid) -> Vec<Transform> {
        let mut out = BTreeSet::new();
        for u in 0..h.len() {
            for w in 0..h.len() {
                out.insert(Self::translation(h, u, w));
            }
        }
        out.into_iter().collect()
    }

    /// The algebra whose vertical monoid is generated by `extra` and the translations.
    pub fn generated(h: FiniteMonoid, extra: Vec<Transform>, budget: usize) -> Result<ForestAlgebra, AlgebraError> {
        let mut gens = extra;
        for t in Self::translations(&h) {
            if !gens.contains(&t) {
                gens.push(t);
            }
        }
        let v = TransformationMonoid::generate(h.len(), gens, budget)?;
        Ok(ForestAlgebra { h, v })
    }

    pub fn trivial() -> ForestAlgebra {
        ForestAlgebra::generated(FiniteMonoid::trivial(), vec![], 8).expect("trivial algebra")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation(pub String);

/// Checks the forest-algebra axioms; the report names the failing triple.
pub fn validate_algebra(a: &ForestAlgebra) -> Result<(), Violation> {
    let h = &a.h;
    let n = h.len();
    for x in 0..n {
        if h.op(h.identity, x) != x || h.op(x, h.identity) != x {
            return Err(Violation(format!("identity law fails at {}", h.names[x])));
        }
        for y in 0..n {
            for z in 0..n {
                if h.op(h.op(x, y), z) != h.op(x, h.op(y, z)) {
                    return Err(Violation(format!(
                        "associativity fails on ({}, {}, {})",
                        h.names[x], h.names[y], h.names[z]
                    )));
                }
            }
        }
    }
    if !a.v.contains(&identity_map(n)) {
        return Err(Violation("vertical monoid lacks the identity".into()));
    }
    for (i, s) in a.v.elements.iter().enumerate() {
        if s.len() != n || s.iter().any(|&x| x >= n) {
            return Err(Violation(format!("vertical element {i} is not a map on H")));
        }
        for g in &a.v.generators {
            if !a.v.contains(&compose(g, s)) {
                return Err(Violation(format!("vertical monoid not closed at element {i}")));
            }
        }
    }
    for u in 0..n {
        for w in 0..n {
            if !a.v.contains(&ForestAlgebra::translation(h, u, w)) {
                return Err(Violation(format!("missing translation [{}+ε+{}]", h.names[u], h.names[w])));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Homomorphism {
    pub algebra: ForestAlgebra,
    pub letters: BTreeMap<String, Transform>,
    pub leaf_ext: BTreeMap<String, usize>,
    pub accepting: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    H(usize),
    V(Transform),
}

impl Homomorphism {
    pub fn new(algebra: ForestAlgebra, mut letters: BTreeMap<String, Transform>) -> Homomorphism {
        let n = algebra.h.len();
        letters.insert(NEUTRAL.to_string(), identity_map(n));
        Homomorphism { algebra, letters, leaf_ext: BTreeMap::new(), accepting: BTreeSet::new() }
    }

    pub fn h(&self) -> &FiniteMonoid {
        &self.algebra.h
    }

    pub fn alphabet(&self) -> crate::terms::Alphabet {
        crate::terms::Alphabet::new(self.letters.keys().cloned())
    }

    /// The element a label denotes when it sits on a leaf without a letter action.
    pub fn leaf_value(&self, label: &str) -> Option<usize> {
        self.leaf_ext.get(label).copied().or_else(|| self.h().index(label))
    }

    pub fn elem(&self, name: &str) -> usize {
        self.h().index(name).unwrap_or_else(|| panic!("no element named {name}"))
    }

    pub fn name(&self, h: usize) -> &str {
        &self.h().names[h]
    }

    fn eval_forest(&self, nodes: &[Node], hole: usize) -> Result<usize, AlgebraError> {
        let h = self.h();
        let mut acc = h.identity;
        for n in nodes {
            let x = match n {
                Node::Interior { label, children } => match self.letters.get(label) {
                    Some(act) => act[self.eval_forest(children, hole)?],
                    None if children.is_empty() => {
                        self.leaf_value(label).ok_or_else(|| AlgebraError::Unextended(label.clone()))?
                    }
                    None => return Err(AlgebraError::Unextended(label.clone())),
                },
                Node::Port { name, labels } => {
                    let l = port_input(name, labels);
                    self.leaf_value(l).ok_or_else(|| AlgebraError::Unextended(l.to_string()))?
                }
                Node::Hole => hole,
            };
            acc = h.op(acc, x);
        }
        Ok(acc)
    }

    /// φ(t): an H-element for forests, a transformation for contexts.
    pub fn eval(&self, t: &Term) -> Result<Value, AlgebraError> {
        if t.has_hole() {
            let n = self.h().len();
            let map = (0..n).map(|x| self.eval_forest(&t.roots, x)).collect::<Result<Vec<_>, _>>()?;
            Ok(Value::V(map))
        } else {
            Ok(Value::H(self.eval_forest(&t.roots, usize::MAX)?))
        }
    }

    pub fn eval_h(&self, t: &Term) -> Result<usize, AlgebraError> {
        match self.eval(t)? {
            Value::H(x) => Ok(x),
            Value::V(_) => Err(AlgebraError::Params("expected a forest, got a context".into())),
        }
    }

    pub fn eval_v(&self, t: &Term) -> Result<Transform, AlgebraError> {
        match self.eval(t)? {
            Value::V(x) => Ok(x),
            Value::H(_) => Err(AlgebraError::Params("expected a context, got a forest".into())),
        }
    }

    /// Evaluates a forest whose ports take the values given by `port`.
    pub fn eval_with(&self, t: &Term, port: &dyn Fn(&str, &[String]) -> Option<usize>) -> Result<usize, AlgebraError> {
        fn go(
            phi: &Homomorphism,
            nodes: &[Node],
            port: &dyn Fn(&str, &[String]) -> Option<usize>,
        ) -> Result<usize, AlgebraError> {
            let h = phi.h();
            let mut acc = h.identity;
            for n in nodes {
                let x = match n {
                    Node::Interior { label, children } => match phi.letters.get(label) {
                        Some(act) => act[go(phi, children, port)?],
                        None if children.is_empty() => {
                            phi.leaf_value(label).ok_or_else(|| AlgebraError::Unextended(label.clone()))?
                        }
                        None => return Err(AlgebraError::Unextended(label.clone())),
                    },
                    Node::Port { name, labels } => {
                        port(name, labels).ok_or_else(|| AlgebraError::Unextended(name.clone()))?
                    }
                    Node::Hole => return Err(AlgebraError::Params("unexpected box port".into())),
                };
                acc = h.op(acc, x);
            }
            Ok(acc)
        }
        go(self, &t.roots, port)
    }

    pub fn accepts(&self, t: &Term) -> Result<bool, AlgebraError> {
        Ok(self.accepting.contains(&self.eval_h(t)?))
    }

    /// The generators of V that come from letters, plus all translations.
    pub fn vertical_generators(&self) -> Vec<Transform> {
        let mut gens: Vec<Transform> = self.letters.values().cloned().collect();
        gens.extend(ForestAlgebra::translations(self.h()));
        gens.sort();
        gens.dedup();
        gens
    }
}

/// N_{τ,π}: the quotient of (ℕ,+) by ≡_{τ,π}.
pub fn counter_monoid(tau: usize, pi: usize) -> Result<FiniteMonoid, AlgebraError> {
    if pi == 0 {
        return Err(AlgebraError::Params("period must be at least 1".into()));
    }
    let n = tau + pi;
    let cap = |p: usize| if p < tau { p } else { tau + (p - tau) % pi };
    let table = (0..n).map(|a| (0..n).map(|b| cap(a + b)).collect()).collect();
    Ok(FiniteMonoid { names: (0..n).map(|i| i.to_string()).collect(), table, identity: 0 })
}

/// The one-dimensional algebra (M, M(M)).
pub fn od_algebra(m: &FiniteMonoid) -> ForestAlgebra {
    ForestAlgebra::generated(m.clone(), vec![], DEFAULT_BUDGET).expect("translation monoid fits the budget")
}

/// Restricts φ to the part of H reachable from forests.
pub fn restrict_to_image(phi: &Homomorphism) -> Homomorphism {
    let h = phi.h();
    let mut reach: BTreeSet<usize> = [h.identity].into();
    loop {
        let mut add = Vec::new();
        for &x in &reach {
            for act in phi.letters.values() {
                add.push(act[x]);
            }
            for &y in &reach {
                add.push(h.op(x, y));
            }
        }
        let before = reach.len();
        reach.extend(add);
        if reach.len() == before {
            break;
        }
    }
    if reach.len() == h.len() {
        return phi.clone();
    }
    let keep: Vec<usize> = reach.into_iter().collect();
    let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let names = keep.iter().map(|&x| h.names[x].clone()).collect();
    let table = keep.iter().map(|&a| keep.iter().map(|&b| pos[&h.op(a, b)]).collect()).collect();
    let sub = FiniteMonoid { names, table, identity: pos[&h.identity] };
    let restrict = |t: &Transform| keep.iter().map(|&x| pos[&t[x]]).collect::<Transform>();
    let letters: BTreeMap<String, Transform> = phi.letters.iter().map(|(l, t)| (l.clone(), restrict(t))).collect();
    let alg = ForestAlgebra::generated(sub, letters.values().cloned().collect(), DEFAULT_BUDGET).expect("restriction fits");
    let mut out = Homomorphism::new(alg, letters);
    out.leaf_ext = phi.leaf_ext.iter().filter_map(|(l, &x)| pos.get(&x).map(|&p| (l.clone(), p))).collect();
    out.accepting = phi.accepting.iter().filter_map(|x| pos.get(x).copied()).collect();
    out
}

/// Coarsest congruence saturating `f`, by Moore refinement against the
/// letter actions and translations. Returns the quotient and projection.
pub fn syntactic_quotient(phi: &Homomorphism, f: &BTreeSet<usize>) -> (Homomorphism, Vec<usize>) {
    let h = phi.h();
    let n = h.len();
    let mut gens: Vec<Transform> = phi.algebra.v.generators.clone();
    gens.extend(phi.letters.values().cloned());
    for u in 0..n {
        gens.push((0..n).map(|x| h.op(u, x)).collect());
        gens.push((0..n).map(|x| h.op(x, u)).collect());
    }
    gens.sort();
    gens.dedup();
    let mut class: Vec<usize> = (0..n).map(|x| usize::from(f.contains(&x))).collect();
    let mut count = class.iter().collect::<BTreeSet<_>>().len();
    loop {
        let mut keys: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut next = vec![0; n];
        for x in 0..n {
            let mut key = vec![class[x]];
            key.extend(gens.iter().map(|g| class[g[x]]));
            let k = keys.len();
            next[x] = *keys.entry(key).or_insert(k);
        }
        let c = keys.len();
        class = next;
        if c == count {
            break;
        }
        count = c;
    }
    let mut rep: Vec<usize> = vec![usize::MAX; count];
    for x in 0..n {
        if rep[class[x]] == usize::MAX {
            rep[class[x]] = x;
        }
    }
    let names = rep.iter().map(|&r| h.names[r].clone()).collect();
    let table = rep.iter().map(|&a| rep.iter().map(|&b| class[h.op(a, b)]).collect()).collect();
    let q = FiniteMonoid { names, table, identity: class[h.identity] };
    let induce = |t: &Transform| rep.iter().map(|&r| class[t[r]]).collect::<Transform>();
    let letters: BTreeMap<String, Transform> = phi.letters.iter().map(|(l, t)| (l.clone(), induce(t))).collect();
    let extra: Vec<Transform> = phi.algebra.v.generators.iter().map(&induce).chain(letters.values().cloned()).collect();
    let alg = ForestAlgebra::generated(q, extra, DEFAULT_BUDGET).expect("quotient fits");
    let mut out = Homomorphism::new(alg, letters);
    out.leaf_ext = phi.leaf_ext.iter().map(|(l, &x)| (l.clone(), class[x])).collect();
    out.accepting = f.iter().map(|&x| class[x]).collect();
    (out, class)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Division {
    /// Carrier of the subalgebra of H and the surjection onto G.
    Yes { subset: Vec<usize>, map: Vec<(usize, usize)> },
    No,
    Exhausted,
}

fn subsets_by_size(n: usize, must: usize) -> impl Iterator<Item = Vec<usize>> {
    (1..=n).flat_map(move |k| {
        let others: Vec<usize> = (0..n).filter(|&x| x != must).collect();
        combinations(&others, k - 1).into_iter().map(move |mut c| {
            c.push(must);
            c.sort();
            c
        })
    })
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn closed_submonoid(m: &FiniteMonoid, s: &[usize]) -> bool {
    s.iter().all(|&a| s.iter().all(|&b| s.contains(&m.op(a, b))))
}

/// Surjective monoid morphisms from the submonoid `s` of `h` onto `g`.
fn morphisms(g: &FiniteMonoid, h: &FiniteMonoid, s: &[usize], budget: &mut usize, out: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    let mut f = vec![usize::MAX; h.len()];
    f[h.identity] = g.identity;
    let order: Vec<usize> = s.iter().copied().filter(|&x| x != h.identity).collect();
    fn consistent(g: &FiniteMonoid, h: &FiniteMonoid, s: &[usize], f: &[usize]) -> bool {
        for &a in s {
            for &b in s {
                let (fa, fb, fab) = (f[a], f[b], f[h.op(a, b)]);
                if fa != usize::MAX && fb != usize::MAX && fab != usize::MAX && g.op(fa, fb) != fab {
                    return false;
                }
            }
        }
        true
    }
    fn go(
        g: &FiniteMonoid,
        h: &FiniteMonoid,
        s: &[usize],
        order: &[usize],
        i: usize,
        f: &mut Vec<usize>,
        budget: &mut usize,
        out: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if i == order.len() {
            let img: BTreeSet<usize> = s.iter().map(|&x| f[x]).collect();
            return img.len() == g.len() && out(f);
        }
        for y in 0..g.len() {
            f[order[i]] = y;
            if consistent(g, h, s, f) && go(g, h, s, order, i + 1, f, budget, out) {
                return true;
            }
        }
        f[order[i]] = usize::MAX;
        false
    }
    go(g, h, s, &order, 0, &mut f, budget, out)
}

/// Monoid division: is `g` a quotient of a submonoid of `h`?
pub fn divides_monoid(g: &FiniteMonoid, h: &FiniteMonoid, budget: usize) -> Division {
    let mut left = budget;
    for s in subsets_by_size(h.len(), h.identity) {
        if s.len() < g.len() || !closed_submonoid(h, &s) {
            continue;
        }
        let mut found = None;
        morphisms(g, h, &s, &mut left, &mut |f| {
            found = Some(s.iter().map(|&x| (x, f[x])).collect());
            true
        });
        if let Some(map) = found {
            return Division::Yes { subset: s, map };
        }
        if left == 0 {
            return Division::Exhausted;
        }
    }
    Division::No
}

/// Forest-algebra division: G is the image of a subalgebra of H.
pub fn divides(g: &ForestAlgebra, h: &ForestAlgebra, budget: usize) -> Division {
    let mut left = budget;
    for s in subsets_by_size(h.h.len(), h.h.identity) {
        if s.len() < g.h.len() || !closed_submonoid(&h.h, &s) {
            continue;
        }
        let preserving: Vec<&Transform> = h.v.elements.iter().filter(|v| s.iter().all(|&x| s.contains(&v[x]))).collect();
        let mut found = None;
        morphisms(&g.h, &h.h, &s, &mut left, &mut |f| {
            let mut induced = BTreeSet::new();
            for v in &preserving {
                let mut w = vec![usize::MAX; g.h.len()];
                let mut ok = true;
                for &x in &s {
                    let (a, b) = (f[x], f[v[x]]);
                    if w[a] == usize::MAX {
                        w[a] = b;
                    } else if w[a] != b {
                        ok = false;
                        break;
                    }
                }
                if ok && g.v.contains(&w) {
                    induced.insert(w);
                }
            }
            if induced.len() == g.v.len() {
                found = Some(s.iter().map(|&x| (x, f[x])).collect());
                true
            } else {
                false
            }
        });
        if let Some(map) = found {
            return Division::Yes { subset: s, map };
        }
        if left == 0 {
            return Division::Exhausted;
        }
    }
    Division::No
}

fn reach(a: &ForestAlgebra, from: usize) -> BTreeSet<usize> {
    let mut seen: BTreeSet<usize> = [from].into();
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for g in &a.v.generators {
            if seen.insert(g[x]) {
                stack.push(g[x]);
            }
        }
    }
    seen
}

/// Strongly connected components of the accessibility relation g → wg.
pub fn scc(a: &ForestAlgebra) -> Vec<BTreeSet<usize>> {
    let n = a.h.len();
    let reaches: Vec<BTreeSet<usize>> = (0..n).map(|x| reach(a, x)).collect();
    let mut done = vec![false; n];
    let mut out = Vec::new();
    for x in 0..n {
        if done[x] {
            continue;
        }
        let comp: BTreeSet<usize> = (0..n).filter(|&y| reaches[x].contains(&y) && reaches[y].contains(&x)).collect();
        for &y in &comp {
            done[y] = true;
        }
        out.push(comp);
    }
    out
}

/// W⁻¹K = { g : ∃ w, wg ∈ K }.
pub fn accessible(a: &ForestAlgebra, k: &BTreeSet<usize>) -> BTreeSet<usize> {
    (0..a.h.len()).filter(|&x| !reach(a, x).is_disjoint(k)).collect()
}

/// I(K), the complement of W⁻¹K; it is closed under W.
pub fn ideal_complement(a: &ForestAlgebra, k: &BTreeSet<usize>) -> BTreeSet<usize> {
    let acc = accessible(a, k);
    (0..a.h.len()).filter(|x| !acc.contains(x)).collect()
}

/// Least t ≥ 1 and p ≥ 1 with x^{t+p} = x^t, for any associative product.
pub fn threshold_period<T: Clone + Eq + std::hash::Hash>(x: &T, mul: impl Fn(&T, &T) -> T) -> (usize, usize) {
    let mut seen: HashMap<T, usize> = HashMap::new();
    let mut p = x.clone();
    let mut k = 1;
    loop {
        if let Some(&t) = seen.get(&p) {
            return (t, k - t);
        }
        seen.insert(p.clone(), k);
        p = mul(&p, x);
        k += 1;
    }
}

pub fn elem_threshold_period(m: &FiniteMonoid, x: usize) -> (usize, usize) {
    threshold_period(&x, |a, b| m.op(*a, *b))
}

pub fn transform_threshold_period(t: &Transform) -> (usize, usize) {
    threshold_period(t, |a, b| compose(a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Yes,
    No(String),
    Exhausted,
}

pub fn monoid_aperiodic(m: &TransformationMonoid) -> Verdict {
    for e in &m.elements {
        let (_, p) = transform_threshold_period(e);
        if p != 1 {
            return Verdict::No(format!("element {:?} has period {p}", e));
        }
    }
    Verdict::Yes
}

/// Closes the generators and tests aperiodicity, reporting exhaustion.
pub fn generated_aperiodic(degree: usize, gens: Vec<Transform>, budget: usize) -> Verdict {
    match TransformationMonoid::generate(degree, gens, budget) {
        Ok(m) => monoid_aperiodic(&m),
        Err(_) => Verdict::Exhausted,
    }
}

fn maximal_groups(m: &TransformationMonoid) -> Vec<Vec<usize>> {
    let els = &m.elements;
    let mut groups = Vec::new();
    for e in els.iter().filter(|e| compose(e, e) == **e) {
        let mut g = Vec::new();
        for (xi, x) in els.iter().enumerate() {
            if compose(e, x) != *x || compose(x, e) != *x {
                continue;
            }
            let (t, p) = transform_threshold_period(x);
            let mut pw = x.clone();
            let mut unit = false;
            for _ in 0..t + p {
                if pw == *e {
                    unit = true;
                    break;
                }
                pw = compose(&pw, x);
            }
            if unit {
                g.push(xi);
            }
        }
        groups.push(g);
    }
    groups
}

fn prime_factors(mut n: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut d = 2;
    while d * d <= n {
        while n % d == 0 {
            out.insert(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.insert(n);
    }
    out
}

/// Every maximal group is solvable with all prime divisors of its order dividing π.
pub fn monoid_solvable(m: &TransformationMonoid, _tau: usize, pi: usize) -> Verdict {
    for g in maximal_groups(m) {
        let order = g.len();
        if order <= 1 {
            continue;
        }
        if let Some(p) = prime_factors(order).into_iter().find(|p| pi % p != 0) {
            return Verdict::No(format!("group of order {order} has prime factor {p} not dividing {pi}"));
        }
        let mut cur: BTreeSet<Transform> = g.iter().map(|&i| m.elements[i].clone()).collect();
        for _ in 0..=order {
            if cur.len() <= 1 {
                break;
            }
            let unit = cur.iter().find(|x| compose(x, x) == **x).cloned();
            let Some(e) = unit else { break };
            let inv = |x: &Transform| -> Transform {
                let mut y = e.clone();
                for _ in 0..order - 1 {
                    y = compose(&y, x);
                }
                y
            };
            let mut comm: BTreeSet<Transform> = BTreeSet::new();
            for a in &cur {
                for b in &cur {
                    comm.insert(compose(&compose(&inv(a), &inv(b)), &compose(a, b)));
                }
            }
            let mut sub = comm.clone();
            loop {
                let mut add = Vec::new();
                for a in &sub {
                    for b in &comm {
                        let c = compose(a, b);
                        if !sub.contains(&c) {
                            add.push(c);
                        }
                    }
                }
                if add.is_empty() {
                    break;
                }
                sub.extend(add);
            }
            if sub.len() == cur.len() {
                return Verdict::No(format!("group of order {order} is not solvable"));
            }
            cur = sub;
        }
    }
    Verdict::Yes
}

/// Number of distinct restrictions of the elements of V to `domain`.
pub fn restricted_count(v: &TransformationMonoid, domain: &BTreeSet<usize>) -> usize {
    let dom: Vec<usize> = domain.iter().copied().collect();
    v.elements.iter().map(|t| dom.iter().map(|&x| t[x]).collect::<Vec<_>>()).collect::<BTreeSet<_>>().len()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn ferr(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError { line, msg: msg.into() }
}

/// Reads the line-oriented algebra definition format.
///
/// ```text
/// horizontal:
///   elements: id a ∞
///   id: id a ∞
///   a: a ∞ ∞
///   ∞: ∞ ∞ ∞
/// vertical-generators:
///   f = a ∞ ∞
/// letters:
///   x = f
///   y = identity
/// accepting: a
/// leaves:
///   k = a
/// ```
///
/// Each row lists `r+c` for the columns in `elements:` order. Translations
/// are added to the vertical generators implicitly.
pub fn parse_algebra(text: &str) -> Result<Homomorphism, FormatError> {
    #[derive(PartialEq)]
    enum Sec {
        None,
        H,
        V,
        L,
        Leaves,
    }
    let mut sec = Sec::None;
    let mut names: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, (usize, Vec<String>)> = BTreeMap::new();
    let mut gens: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut letters: Vec<(usize, String, String)> = Vec::new();
    let mut leaves: Vec<(usize, String, String)> = Vec::new();
    let mut accepting: Option<(usize, Vec<String>)> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line {
            "horizontal:" => sec = Sec::H,
            "vertical-generators:" => sec = Sec::V,
            "letters:" => sec = Sec::L,
            "leaves:" => sec = Sec::Leaves,
            _ if line.starts_with("accepting:") => {
                let items = line["accepting:".len()..].split_whitespace().map(String::from).collect();
                accepting = Some((ln, items));
                sec = Sec::None;
            }
            _ => match sec {
                Sec::H => {
                    let (k, v) = line.split_once(':').ok_or_else(|| ferr(ln, "expected `name: row`"))?;
                    let k = k.trim();
                    let v: Vec<String> = v.split_whitespace().map(String::from).collect();
                    if k == "elements" {
                        names = v;
                    } else if rows.insert(k.to_string(), (ln, v)).is_some() {
                        return Err(ferr(ln, format!("duplicate row for `{k}`")));
                    }
                }
                Sec::V | Sec::L | Sec::Leaves => {
                    let (k, v) = line.split_once('=').ok_or_else(|| ferr(ln, "expected `name = value`"))?;
                    let (k, v) = (k.trim().to_string(), v.trim().to_string());
                    match sec {
                        Sec::V => gens.push((ln, k, v.split_whitespace().map(String::from).collect())),
                        Sec::L => letters.push((ln, k, v)),
                        _ => leaves.push((ln, k, v)),
                    }
                }
                Sec::None => return Err(ferr(ln, format!("unexpected line `{line}`"))),
            },
        }
    }
    if names.is_empty() {
        return Err(ferr(0, "missing `elements:` line"));
    }
    let pos = |ln: usize, n: &str| names.iter().position(|x| x == n).ok_or_else(|| ferr(ln, format!("unknown element `{n}`")));
    let mut table = Vec::new();
    for n in &names {
        let (ln, row) = rows.get(n).ok_or_else(|| ferr(0, format!("table has no row for `{n}`")))?;
        if row.len() != names.len() {
            return Err(ferr(*ln, format!("row for `{n}` has {} entries, expected {}", row.len(), names.len())));
        }
        table.push(row.iter().map(|x| pos(*ln, x)).collect::<Result<Vec<_>, _>>()?);
    }
    if let Some((k, (ln, _))) = rows.iter().find(|(k, _)| !names.contains(k)) {
        return Err(ferr(*ln, format!("row for unknown element `{k}`")));
    }
    let h = FiniteMonoid::from_table(names.clone(), table).ok_or_else(|| ferr(0, "table has no identity"))?;
    let mut vmap: BTreeMap<String, Transform> = BTreeMap::new();
    vmap.insert("identity".into(), identity_map(names.len()));
    for (ln, k, imgs) in &gens {
        if imgs.len() != names.len() {
            return Err(ferr(*ln, format!("generator `{k}` has {} images, expected {}", imgs.len(), names.len())));
        }
        let t = imgs.iter().map(|x| pos(*ln, x)).collect::<Result<Vec<_>, _>>()?;
        vmap.insert(k.clone(), t);
    }
    let mut lmap = BTreeMap::new();
    for (ln, l, v) in &letters {
        let t = vmap.get(v).ok_or_else(|| ferr(*ln, format!("unknown vertical element `{v}`")))?;
        lmap.insert(l.clone(), t.clone());
    }
    let extra: Vec<Transform> = vmap.values().cloned().collect();
    let alg = ForestAlgebra::generated(h, extra, DEFAULT_BUDGET).map_err(|e| ferr(0, e.to_string()))?;
    validate_algebra(&alg).map_err(|v| ferr(0, v.0))?;
    let mut phi = Homomorphism::new(alg, lmap);
    for (ln, l, v) in &leaves {
        phi.leaf_ext.insert(l.clone(), pos(*ln, v)?);
    }
    if let Some((ln, items)) = accepting {
        for it in items {
            phi.accepting.insert(pos(ln, &it)?);
        }
    }
    Ok(phi)
}

/// Writes `phi` in the format read by [`parse_algebra`].
pub fn write_algebra(phi: &Homomorphism) -> String {
    let h = phi.h();
    let mut out = String::from("horizontal:\n");
    out.push_str(&format!("  elements: {}\n", h.names.join(" ")));
    for (i, n) in h.names.iter().enumerate() {
        let row: Vec<&str> = (0..h.len()).map(|j| h.names[h.op(i, j)].as_str()).collect();
        out.push_str(&format!("  {n}: {}\n", row.join(" ")));
    }
    let id = identity_map(h.len());
    let mut gens: Vec<(String, &Transform)> = Vec::new();
    let mut letter_ref: Vec<(String, String)> = Vec::new();
    for (l, t) in &phi.letters {
        if l == NEUTRAL {
            continue;
        }
        if *t == id {
            letter_ref.push((l.clone(), "identity".into()));
            continue;
        }
        let name = match gens.iter().find(|(_, g)| *g == t) {
            Some((n, _)) => n.clone(),
            None => {
                let n = format!("g{}", gens.len());
                gens.push((n.clone(), t));
                n
            }
        };
        letter_ref.push((l.clone(), name));
    }
    let translations: BTreeSet<Transform> = ForestAlgebra::translations(h).into_iter().collect();
    let mut others = Vec::new();
    for g in &phi.algebra.v.generators {
        if !translations.contains(g) && !gens.iter().any(|(_, t)| *t == g) && !others.contains(&g) {
            others.push(g);
        }
    }
    for g in others {
        gens.push((format!("g{}", gens.len()), g));
    }
    out.push_str("vertical-generators:\n");
    for (n, t) in &gens {
        let imgs: Vec<&str> = t.iter().map(|&x| h.names[x].as_str()).collect();
        out.push_str(&format!("  {n} = {}\n", imgs.join(" ")));
    }
    out.push_str("letters:\n");
    for (l, r) in letter_ref {
        out.push_str(&format!("  {l} = {r}\n"));
    }
    let acc: Vec<&str> = phi.accepting.iter().map(|&x| h.names[x].as_str()).collect();
    out.push_str(&format!("accepting: {}\n", acc.join(" ")));
    if !phi.leaf_ext.is_empty() {
        out.push_str("leaves:\n");
        for (l, &x) in &phi.leaf_ext {
            out.push_str(&format!("  {l} = {}\n", h.names[x]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_monoids() {
        let n11 = counter_monoid(1, 1).unwrap();
        assert_eq!(n11.len(), 2);
        assert_eq!(n11.op(1, 1), 1);
        let z3 = counter_monoid(0, 3).unwrap();
        assert_eq!(z3.op(2, 2), 1);
        let n21 = counter_monoid(2, 1).unwrap();
        assert_eq!(n21.op(2, 1), 2);
        assert!(counter_monoid(0, 0).is_err());
    }

    #[test]
    fn counter_monoid_laws_exhaustive() {
        for tau in 0..8 {
            for pi in 1..=(8 - tau) {
                let m = counter_monoid(tau, pi).unwrap();
                let n = m.len();
                for a in 0..n {
                    for b in 0..n {
                        assert_eq!(m.op(a, b), m.op(b, a));
                        for c in 0..n {
                            assert_eq!(m.op(m.op(a, b), c), m.op(a, m.op(b, c)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn od_examples() {
        let a = od_algebra(&counter_monoid(1, 1).unwrap());
        assert_eq!(a.h.len(), 2);
        assert_eq!(a.v.len(), 2);
        assert!(validate_algebra(&a).is_ok());
        let t = od_algebra(&FiniteMonoid::trivial());
        assert_eq!(t.v.len(), 1);
        let z2 = od_algebra(&counter_monoid(0, 2).unwrap());
        assert_eq!(z2.v.len(), 2);
        assert_eq!(transform_threshold_period(&z2.v.elements[1]), (1, 2));
    }

    #[test]
    fn validate_detects_missing_translation() {
        let h = counter_monoid(1, 1).unwrap();
        let v = TransformationMonoid::generate(2, vec![], 10).unwrap();
        let bad = ForestAlgebra { h, v };
        let err = validate_algebra(&bad).unwrap_err();
        assert!(err.0.contains("missing translation"), "{}", err.0);
        assert!(validate_algebra(&ForestAlgebra::trivial()).is_ok());
    }

    #[test]
    fn threshold_period_examples() {
        assert_eq!(transform_threshold_period(&vec![0, 0]), (1, 1));
        assert_eq!(transform_threshold_period(&vec![1, 0]), (1, 2));
        let n32 = counter_monoid(3, 2).unwrap();
        assert_eq!(elem_threshold_period(&n32, 1), (3, 2));
    }

    #[test]
    fn division_examples() {
        let n11 = counter_monoid(1, 1).unwrap();
        let n21 = counter_monoid(2, 1).unwrap();
        let z2 = counter_monoid(0, 2).unwrap();
        assert!(matches!(divides_monoid(&n11, &n21, 10_000), Division::Yes { .. }));
        assert_eq!(divides_monoid(&z2, &n21, 10_000), Division::No);
        assert!(matches!(divides_monoid(&n21, &n21, 10_000), Division::Yes { .. }));
        let a = od_algebra(&n21);
        assert!(matches!(divides(&a, &a, 100_000), Division::Yes { .. }));
        assert!(matches!(divides(&od_algebra(&n11), &a, 100_000), Division::Yes { .. }));
        assert_eq!(divides(&od_algebra(&z2), &a, 100_000), Division::No);
    }

    #[test]
    fn format_round_trip_and_rejects() {
        let text = "horizontal:\n  elements: id a z\n  id: id a z\n  a: a z z\n  z: z z z\nvertical-generators:\n  f = a z z\nletters:\n  x = f\naccepting: a\n";
        let phi = parse_algebra(text).unwrap();
        assert_eq!(phi.h().len(), 3);
        let again = parse_algebra(&write_algebra(&phi)).unwrap();
        assert_eq!(again.letters, phi.letters);
        assert_eq!(again.algebra.h, phi.algebra.h);
        let short = text.replace("a: a z z", "a: a z");
        assert!(parse_algebra(&short).unwrap_err().msg.contains("entries"));
        let missing = text.replace("  z: z z z\n", "");
        assert!(parse_algebra(&missing).is_err());
    }

    #[test]
    fn solvable_groups() {
        let z2 = od_algebra(&counter_monoid(0, 2).unwrap());
        assert_eq!(monoid_solvable(&z2.v, 0, 2), Verdict::Yes);
        assert!(matches!(monoid_solvable(&z2.v, 0, 1), Verdict::No(_)));
        assert!(matches!(monoid_aperiodic(&z2.v), Verdict::No(_)));
        let s3 = TransformationMonoid::generate(3, vec![vec![1, 0, 2], vec![1, 2, 0]], 100).unwrap();
        assert_eq!(s3.len(), 6);
        assert!(matches!(monoid_solvable(&s3, 0, 6), Verdict::Yes));
        let s5 = TransformationMonoid::generate(5, vec![vec![1, 0, 2, 3, 4], vec![1, 2, 3, 4, 0]], 1000).unwrap();
        assert_eq!(s5.len(), 120);
        assert!(matches!(monoid_solvable(&s5, 0, 30), Verdict::No(_)));
    }
}
