//! Algebra of mappings, multivertical monoid, extended algebra and
//! symbolic pumping equivalence.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algebra::{compose, identity_map, threshold_period, AlgebraError, Homomorphism, Transform, TransformationMonoid, Value};
use crate::congruence::{cmp_tau_pi, TauPi};
use crate::terms::{canonical_form, contract_neutral, delta, erase_port_names, insert_at_ports, nabla, port_input, Node, Term, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DerivedError {
    #[error("table of {0} entries exceeds budget {1}")]
    Budget(usize, usize),
    #[error("port label `{0}` is not among the declared inputs")]
    UndeclaredInput(String),
    #[error("carrier of {0} elements is too large for subset encoding")]
    Carrier(usize),
    #[error("mismatched base families")]
    Mismatch,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Term(#[from] TermError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingTable {
    pub inputs: Vec<String>,
    pub k: usize,
    pub values: Vec<Value>,
}

impl MappingTable {
    pub fn index(&self, xi: &[usize]) -> usize {
        xi.iter().fold(0, |acc, &x| acc * self.k + x)
    }

    pub fn get(&self, xi: &[usize]) -> &Value {
        &self.values[self.index(xi)]
    }

    pub fn h(&self, xi: &[usize]) -> usize {
        match self.get(xi) {
            Value::H(h) => *h,
            Value::V(_) => panic!("context table"),
        }
    }

    /// All assignments ξ in table order.
    pub fn assignments(&self) -> impl Iterator<Item = Vec<usize>> {
        all_assignments(self.inputs.len(), self.k)
    }
}

fn all_assignments(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let size = k.pow(n as u32);
    {
        (0..size).map(move |mut i| {
            let mut xi = vec![0; n];
            for slot in xi.iter_mut().rev() {
                *slot = i % k;
                i /= k;
            }
            xi
        })
    }
}

pub const TABLE_BUDGET: usize = 1 << 16;

/// γ[m]: ξ ↦ γ(ξ̆(m)), where each port reads the value of its input label.
pub fn mapping_table(phi: &Homomorphism, m: &Term, inputs: &[String], budget: usize) -> Result<MappingTable, DerivedError> {
    let k = phi.h().len();
    let size = k.checked_pow(inputs.len() as u32).unwrap_or(usize::MAX);
    if size > budget {
        return Err(DerivedError::Budget(size, budget));
    }
    for p in m.ports() {
        if !inputs.iter().any(|i| i == p.input()) {
            return Err(DerivedError::UndeclaredInput(p.input().to_string()));
        }
    }
    let mut table = MappingTable { inputs: inputs.to_vec(), k, values: Vec::with_capacity(size) };
    let xis: Vec<Vec<usize>> = all_assignments(inputs.len(), k).collect();
    let slot = |l: &str| inputs.iter().position(|i| i == l).expect("declared");
    let n = k;
    for xi in xis {
        let look = |name: &str, labels: &[String]| Some(xi[slot(port_input(name, labels))]);
        let v = if m.has_hole() {
            let mut map = Vec::with_capacity(n);
            for h in 0..n {
                map.push(eval_hole(phi, m, h, &look)?);
            }
            Value::V(map)
        } else {
            Value::H(phi.eval_with(m, &look)?)
        };
        table.values.push(v);
    }
    Ok(table)
}

fn eval_hole(
    phi: &Homomorphism,
    m: &Term,
    h: usize,
    port: &dyn Fn(&str, &[String]) -> Option<usize>,
) -> Result<usize, AlgebraError> {
    const SLOT: &str = "\u{0}hole";
    let filled = m.map_ports(&mut |name, labels| vec![Node::Port { name: name.to_string(), labels: labels.to_vec() }]);
    let filled = replace_hole(&filled, SLOT);
    phi.eval_with(&filled, &|name, labels| if name == SLOT { Some(h) } else { port(name, labels) })
}

fn replace_hole(t: &Term, name: &str) -> Term {
    fn go(n: &Node, name: &str) -> Node {
        match n {
            Node::Hole => Node::port(name),
            Node::Interior { label, children } => {
                Node::Interior { label: label.clone(), children: children.iter().map(|c| go(c, name)).collect() }
            }
            p => p.clone(),
        }
    }
    Term::new(t.roots.iter().map(|r| go(r, name)).collect())
}

fn node_label(t: &Term, x: &[usize]) -> Option<String> {
    match t.node(x)? {
        Node::Interior { label, .. } => Some(label.clone()),
        Node::Port { name, labels } => Some(format!("?{}", port_input(name, labels))),
        Node::Hole => Some("_".into()),
    }
}

fn inputs_of(ts: &[&Term]) -> Vec<String> {
    let set: BTreeSet<String> = ts.iter().flat_map(|t| t.ports().into_iter().map(|p| p.input().to_string())).collect();
    set.into_iter().collect()
}

/// Same label, and equal mapping tables for the Δ pair and the ∇ pair.
pub fn node_equiv(phi: &Homomorphism, a: (&Term, &[usize]), b: (&Term, &[usize]), budget: usize) -> Result<bool, DerivedError> {
    let (la, lb) = (
        node_label(a.0, a.1).ok_or_else(|| TermError::BadPath(a.1.to_vec()))?,
        node_label(b.0, b.1).ok_or_else(|| TermError::BadPath(b.1.to_vec()))?,
    );
    if la != lb {
        return Ok(false);
    }
    let inputs = inputs_of(&[a.0, b.0]);
    let (da, db) = (delta(a.0, a.1)?, delta(b.0, b.1)?);
    if mapping_table(phi, &da, &inputs, budget)? != mapping_table(phi, &db, &inputs, budget)? {
        return Ok(false);
    }
    let (na, nb) = (nabla(a.0, a.1)?, nabla(b.0, b.1)?);
    Ok(mapping_table(phi, &na, &inputs, budget)? == mapping_table(phi, &nb, &inputs, budget)?)
}

/// Largest additive threshold and period over H.
pub fn additive_orbit_bound(phi: &Homomorphism) -> (usize, usize) {
    let h = phi.h();
    (0..h.len()).map(|x| crate::algebra::elem_threshold_period(h, x)).fold((1, 1), |(t, p), (a, b)| (t.max(a), p.max(b)))
}

/// ᵐV: generated by h ↦ v(n⊙h) for vertical generators v and 1 ≤ n ≤ t_H+p_H.
pub fn multivertical(phi: &Homomorphism, budget: usize) -> Result<TransformationMonoid, DerivedError> {
    let h = phi.h();
    let (t, p) = additive_orbit_bound(phi);
    let mut vs = phi.vertical_generators();
    vs.push(identity_map(h.len()));
    let mut gens = BTreeSet::new();
    for v in &vs {
        for n in 1..=t + p {
            let mult: Transform = (0..h.len()).map(|x| h.times(n, x)).collect();
            gens.insert(compose(v, &mult));
        }
    }
    Ok(TransformationMonoid::generate(h.len(), gens.into_iter().collect(), budget)?)
}

/// Least (σ,ρ) with x^{σ+ρ} = x^σ for every x in ᵐV.
pub fn multivertical_threshold_period(phi: &Homomorphism, budget: usize) -> Result<(usize, usize), DerivedError> {
    let mv = multivertical(phi, budget)?;
    Ok(monoid_threshold_period(&mv))
}

pub fn monoid_threshold_period(m: &TransformationMonoid) -> (usize, usize) {
    m.elements.iter().map(crate::algebra::transform_threshold_period).fold((1, 1), |(s, r), (t, p)| (s.max(t), lcm(r, p)))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Nonempty subsets of the carrier, as bit masks.
pub type Subset = u64;

pub fn subset_of(items: impl IntoIterator<Item = usize>) -> Subset {
    items.into_iter().fold(0, |m, x| m | (1 << x))
}

pub fn subset_elems(s: Subset) -> Vec<usize> {
    (0..64).filter(|i| s >> i & 1 == 1).collect()
}

fn lift(act: &[usize], s: Subset) -> Subset {
    subset_elems(s).into_iter().fold(0, |m, x| m | (1 << act[x]))
}

fn add_sets(phi: &Homomorphism, a: Subset, b: Subset) -> Subset {
    let h = phi.h();
    let mut out = 0;
    for x in subset_elems(a) {
        for y in subset_elems(b) {
            out |= 1 << h.op(x, y);
        }
    }
    out
}

fn gpercent_nodes(
    phi: &Homomorphism,
    nodes: &[Node],
    nu: &dyn Fn(&str, &[String]) -> Option<Subset>,
    hole: Subset,
) -> Result<Subset, DerivedError> {
    let mut acc: Subset = 1 << phi.h().identity;
    for n in nodes {
        let s = match n {
            Node::Interior { label, children } => match phi.letters.get(label) {
                Some(act) => lift(act, gpercent_nodes(phi, children, nu, hole)?),
                None if children.is_empty() => {
                    1 << phi.leaf_value(label).ok_or_else(|| AlgebraError::Unextended(label.clone()))?
                }
                None => return Err(AlgebraError::Unextended(label.clone()).into()),
            },
            Node::Port { name, labels } => nu(name, labels).ok_or_else(|| AlgebraError::Unextended(name.clone()))?,
            Node::Hole => hole,
        };
        acc = add_sets(phi, acc, s);
    }
    Ok(acc)
}

/// γ_%(m,ν): all values of completions choosing ψ(x) ∈ ν(x) at each port.
pub fn gpercent_image(phi: &Homomorphism, m: &Term, nu: &dyn Fn(&str, &[String]) -> Option<Subset>) -> Result<Subset, DerivedError> {
    check_carrier(phi)?;
    gpercent_nodes(phi, &m.roots, nu, 0)
}

fn check_carrier(phi: &Homomorphism) -> Result<(), DerivedError> {
    let n = phi.h().len();
    if n > 64 {
        Err(DerivedError::Carrier(n))
    } else {
        Ok(())
    }
}

/// A map on nonempty subsets, given on a domain closed under it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtendedMap {
    pub g: usize,
    pub map: BTreeMap<Subset, Subset>,
}

impl ExtendedMap {
    pub fn apply(&self, s: Subset) -> Option<Subset> {
        self.map.get(&s).copied()
    }

    /// self∘other on the common domain.
    pub fn after(&self, other: &ExtendedMap) -> ExtendedMap {
        let map = other.map.iter().filter_map(|(&k, &v)| self.apply(v).map(|w| (k, w))).collect();
        ExtendedMap { g: self.g, map }
    }

    pub fn restrict(&self, dom: &BTreeSet<Subset>) -> ExtendedMap {
        ExtendedMap { g: self.g, map: self.map.iter().filter(|(k, _)| dom.contains(k)).map(|(&k, &v)| (k, v)).collect() }
    }

    pub fn threshold_period(&self) -> (usize, usize) {
        threshold_period(self, |a, b| a.after(b))
    }
}

pub const DENSE_LIMIT: usize = 12;

/// φ_%(w): F ↦ γ_%(w) with F at the box port. Dense over all nonempty
/// subsets when |G| ≤ 12, otherwise over the subsets reachable from `seeds`.
pub fn extended_vertical_element(
    phi: &Homomorphism,
    w: &Term,
    nu: &dyn Fn(&str, &[String]) -> Option<Subset>,
    seeds: &[Subset],
) -> Result<ExtendedMap, DerivedError> {
    check_carrier(phi)?;
    let g = phi.h().len();
    let mut map = BTreeMap::new();
    if g <= DENSE_LIMIT {
        for s in 1..(1u64 << g) {
            map.insert(s, gpercent_nodes(phi, &w.roots, nu, s)?);
        }
    } else {
        let mut todo: Vec<Subset> = seeds.to_vec();
        while let Some(s) = todo.pop() {
            if map.contains_key(&s) {
                continue;
            }
            let img = gpercent_nodes(phi, &w.roots, nu, s)?;
            map.insert(s, img);
            todo.push(img);
        }
    }
    Ok(ExtendedMap { g, map })
}

/// Subsets reachable from `seeds` under the given maps.
pub fn reachable_subsets(maps: &[&ExtendedMap], seeds: &[Subset]) -> BTreeSet<Subset> {
    let mut seen: BTreeSet<Subset> = seeds.iter().copied().collect();
    let mut todo: Vec<Subset> = seeds.to_vec();
    while let Some(s) = todo.pop() {
        for m in maps {
            if let Some(t) = m.apply(s) {
                if seen.insert(t) {
                    todo.push(t);
                }
            }
        }
    }
    seen
}

/// base^{(exponent,Z)} with `nested` inserted at every remaining Z-port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PumpedTerm {
    pub base: Term,
    pub z: String,
    pub exponent: usize,
    pub nested: Option<Box<PumpedTerm>>,
}

impl PumpedTerm {
    pub fn new(base: Term, z: impl Into<String>, exponent: usize) -> PumpedTerm {
        PumpedTerm { base, z: z.into(), exponent, nested: None }
    }

    pub fn then(mut self, inner: PumpedTerm) -> PumpedTerm {
        match self.nested {
            Some(n) => self.nested = Some(Box::new(n.then(inner))),
            None => self.nested = Some(Box::new(inner)),
        }
        self
    }

    fn key(&self) -> Term {
        canonical_form(&erase_port_names(&contract_neutral(&self.base)))
    }

    /// Runs of equal bases merged, as (base key, z, exponent) triples.
    pub fn runs(&self) -> Vec<(Term, String, usize)> {
        let mut out: Vec<(Term, String, usize)> = Vec::new();
        let mut cur = Some(self);
        while let Some(p) = cur {
            let k = p.key();
            match out.last_mut() {
                Some((b, z, e)) if *b == k && *z == p.z => *e += p.exponent,
                _ => out.push((k, p.z.clone(), p.exponent)),
            }
            cur = p.nested.as_deref();
        }
        out
    }

    /// Expands to a concrete multicontext.
    pub fn expand(&self) -> Result<Term, TermError> {
        let zs: BTreeSet<String> = [self.z.clone()].into();
        let mut t = crate::terms::pump(&[self.base.clone()], &zs, self.exponent)?.remove(0);
        if let Some(inner) = &self.nested {
            let ins = inner.expand()?;
            let names = crate::terms::ports_with_input(&t, &zs);
            t = insert_at_ports(&t, &names, &mut |_| Some(ins.clone()))?;
        }
        Ok(t)
    }
}

/// Equality of the run decompositions, exponents compared under ≡_{σ,ρ}.
pub fn pump_equiv(p: &PumpedTerm, q: &PumpedTerm, sigma: usize, rho: usize) -> Result<bool, DerivedError> {
    let c = TauPi::new(sigma, rho).map_err(|_| DerivedError::Mismatch)?;
    let (a, b) = (p.runs(), q.runs());
    if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0 || x.1 != y.1) {
        return Err(DerivedError::Mismatch);
    }
    Ok(a.iter().zip(&b).all(|(x, y)| cmp_tau_pi(x.2, y.2, c)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpCounterexample {
    /// Base with the pumped ports labelled `z` and one label per lateral class.
    pub base: Term,
    pub theta: usize,
    pub theta2: usize,
    pub assignment: Vec<(String, usize)>,
}

/// Ports of `base` grouped by their context up to sibling order. A base is
/// suitable for pumping when each group carries its own input label.
pub fn port_orbits(base: &Term) -> Result<Vec<Vec<String>>, TermError> {
    let uniform = base.map_ports(&mut |name, _| vec![Node::Port { name: name.to_string(), labels: vec!["p".into()] }]);
    let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for p in uniform.ports() {
        let ctx = canonical_form(&erase_port_names(&nabla(&uniform, &p.path)?));
        groups.entry(crate::terms::format_term(&ctx)).or_default().push(p.name);
    }
    Ok(groups.into_values().collect())
}

/// Bounded search for a base m suitable for pumping, a port class Z of m
/// and exponents θ ≡_{σ,ρ} θ′ such that m^{(θ,Z)} and m^{(θ′,Z)} have
/// different mapping tables. Bases are forests over the alphabet and a port
/// symbol; those whose table would exceed `TABLE_BUDGET` are skipped.
pub fn pump_falsify(
    phi: &Homomorphism,
    sigma: usize,
    rho: usize,
    base_size: usize,
    max_exponent: usize,
) -> Result<Option<PumpCounterexample>, DerivedError> {
    let c = TauPi::new(sigma, rho).map_err(|_| DerivedError::Mismatch)?;
    let mut letters = phi.alphabet().proper();
    letters.push(PORT_LEAF.into());
    let mut result = None;
    let mut err = None;
    let mut visit = |f: &Term| {
        let Some(base) = ports_from_leaves(f) else { return false };
        match falsify_base(phi, &base, c, max_exponent) {
            Ok(None) => false,
            Ok(found) => {
                result = found;
                true
            }
            Err(e) => {
                err = Some(e);
                true
            }
        }
    };
    if phi.h().is_commutative() {
        crate::congruence::for_each_forest(&letters, base_size, &mut visit);
    } else {
        crate::congruence::for_each_ordered_forest(&letters, base_size, &mut visit);
    }
    match err {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

const PORT_LEAF: &str = "?";

fn falsify_base(phi: &Homomorphism, base: &Term, c: TauPi, max: usize) -> Result<Option<PumpCounterexample>, DerivedError> {
    let orbits = port_orbits(base)?;
    let k = phi.h().len();
    if k.checked_pow(orbits.len() as u32).is_none_or(|s| s > TABLE_BUDGET) {
        return Ok(None);
    }
    for zi in 0..orbits.len() {
        let mut label: BTreeMap<&str, String> = BTreeMap::new();
        let mut inputs = Vec::new();
        for (i, o) in orbits.iter().enumerate() {
            let l = if i == zi { "z".to_string() } else { format!("y{}", inputs.len() + usize::from(i < zi)) };
            for n in o {
                label.insert(n, l.clone());
            }
            inputs.push(l);
        }
        let m = base.map_ports(&mut |name, _| vec![Node::Port { name: name.to_string(), labels: vec![label[name].clone()] }]);
        let tables = pumped_tables(phi, &m, &inputs, max)?;
        for a in 1..=max {
            for b in a + 1..=max {
                if cmp_tau_pi(a, b, c) && tables[a - 1] != tables[b - 1] {
                    let xi = tables[a - 1]
                        .assignments()
                        .find(|xi| tables[a - 1].get(xi) != tables[b - 1].get(xi))
                        .expect("tables differ");
                    return Ok(Some(PumpCounterexample {
                        base: m,
                        theta: a,
                        theta2: b,
                        assignment: inputs.iter().cloned().zip(xi).collect(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Turns leaves labelled `?` into ports with fresh names.
fn ports_from_leaves(f: &Term) -> Option<Term> {
    let mut k = 0;
    fn go(n: &Node, k: &mut usize) -> Option<Node> {
        match n {
            Node::Interior { label, children } if label == PORT_LEAF => {
                if !children.is_empty() {
                    return None;
                }
                *k += 1;
                Some(Node::port(format!("p{k}")))
            }
            Node::Interior { label, children } => Some(Node::Interior {
                label: label.clone(),
                children: children.iter().map(|c| go(c, k)).collect::<Option<Vec<_>>>()?,
            }),
            other => Some(other.clone()),
        }
    }
    Some(Term::new(f.roots.iter().map(|r| go(r, &mut k)).collect::<Option<Vec<_>>>()?))
}

/// Search over the maps z ↦ m(ȳ, z) of bases suitable for pumping with at
/// most `max_size` nodes. Such a map is a composite of x ↦ a(n⊙x + h), the
/// outermost step possibly without the letter, where n⊙x stands for n
/// isomorphic copies of the inner part and h for the laterals. Each lateral
/// is charged one port node whatever its value, so the search covers every
/// suitable base of that size and possibly a few more. A map is pumped
/// safely iff its σ-th and (σ+ρ)-th powers agree, which covers every
/// exponent pair at once.
pub fn pump_falsify_exhaustive(
    phi: &Homomorphism,
    sigma: usize,
    rho: usize,
    max_size: usize,
) -> Result<Option<PumpCounterexample>, DerivedError> {
    #[derive(Clone)]
    struct Rep {
        cost: usize,
        roots: Vec<Node>,
        lateral: Vec<(String, usize)>,
    }
    TauPi::new(sigma, rho).map_err(|_| DerivedError::Mismatch)?;
    let h = phi.h();
    let e = h.identity;
    let actions: Vec<(&String, &Transform)> =
        phi.letters.iter().filter(|(l, _)| l.as_str() != crate::terms::NEUTRAL).collect();
    let mut trees: BTreeMap<Transform, Rep> = BTreeMap::new();
    let mut forests: BTreeMap<Transform, Rep> = BTreeMap::new();
    trees.insert(identity_map(h.len()), Rep { cost: 1, roots: vec![Node::labelled_port("z1", "z")], lateral: vec![] });
    let mut fresh = 0;
    let better = |m: &BTreeMap<Transform, Rep>, k: &Transform, cost: usize| m.get(k).is_none_or(|r| r.cost > cost);
    loop {
        let mut changed = false;
        for (tau, t) in trees.clone() {
            for n in (1..).take_while(|n| n * t.cost <= max_size) {
                for x in 0..h.len() {
                    let cost = n * t.cost + usize::from(x != e);
                    let map: Transform = tau.iter().map(|&v| h.op(h.times(n, v), x)).collect();
                    if cost > max_size || !better(&forests, &map, cost) {
                        continue;
                    }
                    let mut roots: Vec<Node> = (0..n).flat_map(|_| t.roots.iter().cloned()).collect();
                    let mut lateral = t.lateral.clone();
                    if x != e {
                        fresh += 1;
                        let l = format!("y{fresh}");
                        roots.push(Node::labelled_port(l.clone(), l.clone()));
                        lateral.push((l, x));
                    }
                    forests.insert(map, Rep { cost, roots, lateral });
                    changed = true;
                }
            }
        }
        for (f, r) in forests.clone() {
            if r.cost >= max_size {
                continue;
            }
            for (a, act) in &actions {
                let map = compose(act, &f);
                if better(&trees, &map, r.cost + 1) {
                    let node = Node::tree((*a).clone(), r.roots.clone());
                    trees.insert(map, Rep { cost: r.cost + 1, roots: vec![node], lateral: r.lateral.clone() });
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let pow = |m: &Transform, k: usize| (1..k).fold(m.clone(), |acc, _| compose(m, &acc));
    let lo = sigma.max(1);
    for (zeta, r) in &forests {
        let (p, q) = (pow(zeta, lo), pow(zeta, lo + rho));
        if p != q {
            let x = (0..h.len()).find(|&x| p[x] != q[x]).expect("powers differ");
            let base = Term::new(r.roots.clone()).map_ports(&mut {
                let mut k = 0;
                move |_, labels: &[String]| {
                    k += 1;
                    vec![Node::Port { name: format!("x{k}"), labels: labels.to_vec() }]
                }
            });
            let mut assignment = r.lateral.clone();
            assignment.push(("z".into(), x));
            return Ok(Some(PumpCounterexample { base, theta: lo, theta2: lo + rho, assignment }));
        }
    }
    Ok(None)
}

/// Mapping tables of base^{(θ,Z)} for θ = 1..=max, built by iterating the
/// curried table of the base at z.
pub fn pumped_tables(phi: &Homomorphism, base: &Term, inputs: &[String], max: usize) -> Result<Vec<MappingTable>, DerivedError> {
    let zi = inputs.iter().position(|i| i == "z").ok_or_else(|| DerivedError::UndeclaredInput("z".into()))?;
    let first = mapping_table(phi, base, inputs, TABLE_BUDGET)?;
    let mut out = vec![first.clone()];
    for _ in 1..max {
        let prev = out.last().expect("nonempty");
        let values = first
            .assignments()
            .map(|xi| {
                let mut inner = xi.clone();
                inner[zi] = prev.h(&xi);
                first.get(&inner).clone()
            })
            .collect();
        out.push(MappingTable { inputs: inputs.to_vec(), k: first.k, values });
    }
    Ok(out)
}
