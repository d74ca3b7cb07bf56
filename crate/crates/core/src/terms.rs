//! Forests, multicontexts and the insertion operations on them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// The neutral letter. Every alphabet contains it.
pub const NEUTRAL: &str = "e";

const SYMBOL_CHARS: &str = "∧∨⋓∆•⊥∩∪⊓⊔⊖⊡#'";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown letter `{letter}` at {pos}")]
    UnknownLetter { letter: String, pos: usize },
    #[error("duplicate port name `{0}`")]
    DuplicatePort(String),
    #[error("more than one box port")]
    TwoHoles,
    #[error("term has no box port")]
    NoHole,
    #[error("no node at path {0:?}")]
    BadPath(Vec<usize>),
    #[error("port set does not meet the term")]
    EmptyIntersection,
    #[error("port `{0}` has no assigned value")]
    Unassigned(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Interior { label: String, children: Vec<Node> },
    Port { name: String, labels: Vec<String> },
    Hole,
}

impl Node {
    pub fn leaf(label: impl Into<String>) -> Node {
        Node::Interior { label: label.into(), children: Vec::new() }
    }

    pub fn tree(label: impl Into<String>, children: Vec<Node>) -> Node {
        Node::Interior { label: label.into(), children }
    }

    pub fn port(name: impl Into<String>) -> Node {
        Node::Port { name: name.into(), labels: Vec::new() }
    }

    pub fn labelled_port(name: impl Into<String>, label: impl Into<String>) -> Node {
        Node::Port { name: name.into(), labels: vec![label.into()] }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Interior { children, .. } => 1 + children.iter().map(Node::size).sum::<usize>(),
            _ => 1,
        }
    }

    fn children(&self) -> &[Node] {
        match self {
            Node::Interior { children, .. } => children,
            _ => &[],
        }
    }
}

/// A port of a multicontext: its address and its labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PortRef {
    pub path: Vec<usize>,
    pub name: String,
    pub labels: Vec<String>,
}

impl PortRef {
    /// The input label of the port: its first extra label, or its name.
    pub fn input(&self) -> &str {
        port_input(&self.name, &self.labels)
    }
}

pub fn port_input<'a>(name: &'a str, labels: &'a [String]) -> &'a str {
    labels.first().map(String::as_str).unwrap_or(name)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Term {
    pub roots: Vec<Node>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    letters: BTreeSet<String>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Alphabet
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set: BTreeSet<String> = letters.into_iter().map(Into::into).collect();
        set.insert(NEUTRAL.to_string());
        Alphabet { letters: set }
    }

    pub fn contains(&self, l: &str) -> bool {
        self.letters.contains(l)
    }

    pub fn letters(&self) -> impl Iterator<Item = &str> {
        self.letters.iter().map(String::as_str)
    }

    /// Letters other than the neutral one.
    pub fn proper(&self) -> Vec<String> {
        self.letters.iter().filter(|l| l.as_str() != NEUTRAL).cloned().collect()
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || SYMBOL_CHARS.contains(c)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    alphabet: Option<&'a Alphabet>,
    ports: HashSet<String>,
    holes: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> TermError {
        TermError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn zero_is_letter(&self) -> bool {
        self.alphabet.is_some_and(|a| a.contains("0"))
    }

    fn name_run(&self) -> usize {
        let mut end = self.pos;
        while end < self.chars.len() && is_name_char(self.chars[end]) {
            end += 1;
        }
        end
    }

    fn letter(&mut self) -> Result<String, TermError> {
        let end = self.name_run();
        if end == self.pos {
            return Err(self.err("expected a letter"));
        }
        let run: String = self.chars[self.pos..end].iter().collect();
        let taken = match self.alphabet {
            None => run.chars().next().map(char::len_utf8).unwrap_or(0),
            Some(a) => {
                let mut best = None;
                for (i, _) in run.char_indices().skip(1).chain(std::iter::once((run.len(), ' '))) {
                    if a.contains(&run[..i]) {
                        best = Some(i);
                    }
                }
                match best {
                    Some(b) => b,
                    None => {
                        let first: String = run.chars().next().into_iter().collect();
                        return Err(TermError::UnknownLetter { letter: first, pos: self.pos });
                    }
                }
            }
        };
        let letter = run[..taken].to_string();
        self.pos += letter.chars().count();
        Ok(letter)
    }

    fn name(&mut self) -> Result<String, TermError> {
        let end = self.name_run();
        if end == self.pos {
            return Err(self.err("expected a name"));
        }
        let s: String = self.chars[self.pos..end].iter().collect();
        self.pos = end;
        Ok(s)
    }

    fn forest(&mut self) -> Result<Vec<Node>, TermError> {
        if self.peek() == Some('0') && !self.zero_is_letter() {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.chars.len() && is_name_char(self.chars[self.pos]) {
                self.pos = save;
            } else {
                return Ok(Vec::new());
            }
        }
        if self.peek() == Some(')') {
            return Ok(Vec::new());
        }
        let mut out = vec![self.tree()?];
        while self.peek() == Some('+') {
            self.pos += 1;
            out.push(self.tree()?);
        }
        Ok(out)
    }

    fn starts_tree(&mut self) -> bool {
        match self.peek() {
            Some('?') | Some('_') => true,
            Some('0') => self.zero_is_letter(),
            Some(c) => is_name_char(c),
            None => false,
        }
    }

    fn tree(&mut self) -> Result<Node, TermError> {
        match self.peek() {
            Some('_') => {
                self.pos += 1;
                self.holes += 1;
                if self.holes > 1 {
                    return Err(TermError::TwoHoles);
                }
                Ok(Node::Hole)
            }
            Some('?') => {
                self.pos += 1;
                let name = self.name()?;
                let mut labels = Vec::new();
                while self.chars.get(self.pos) == Some(&':') {
                    self.pos += 1;
                    labels.push(self.name()?);
                }
                if !self.ports.insert(name.clone()) {
                    return Err(TermError::DuplicatePort(name));
                }
                Ok(Node::Port { name, labels })
            }
            Some(c) if is_name_char(c) => {
                let label = self.letter()?;
                let children = if self.peek() == Some('(') {
                    self.pos += 1;
                    let f = self.forest()?;
                    if self.peek() != Some(')') {
                        return Err(self.err("expected `)`"));
                    }
                    self.pos += 1;
                    f
                } else if self.starts_tree() {
                    vec![self.tree()?]
                } else {
                    Vec::new()
                };
                Ok(Node::Interior { label, children })
            }
            Some(c) => Err(self.err(format!("unexpected `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses term syntax. Juxtaposition denotes father-son, so `ab` is `a(b)`.
/// Without an alphabet every letter is a single character; with one, the
/// longest declared letter is taken.
pub fn parse_term(text: &str, alphabet: Option<&Alphabet>) -> Result<Term, TermError> {
    let mut p = Parser { chars: text.chars().collect(), pos: 0, alphabet, ports: HashSet::new(), holes: 0 };
    if p.peek().is_none() {
        return Ok(Term::default());
    }
    let roots = p.forest()?;
    if p.peek().is_some() {
        return Err(p.err("trailing input"));
    }
    Ok(Term { roots })
}

fn fmt_node(n: &Node, out: &mut String) {
    match n {
        Node::Interior { label, children } => {
            out.push_str(label);
            if !children.is_empty() {
                out.push('(');
                fmt_forest(children, out);
                out.push(')');
            }
        }
        Node::Port { name, labels } => {
            out.push('?');
            out.push_str(name);
            for l in labels {
                out.push(':');
                out.push_str(l);
            }
        }
        Node::Hole => out.push('_'),
    }
}

fn fmt_forest(f: &[Node], out: &mut String) {
    for (i, n) in f.iter().enumerate() {
        if i > 0 {
            out.push('+');
        }
        fmt_node(n, out);
    }
}

pub fn format_term(t: &Term) -> String {
    if t.roots.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    fmt_forest(&t.roots, &mut s);
    s
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_term(self))
    }
}

impl Term {
    pub fn new(roots: Vec<Node>) -> Term {
        Term { roots }
    }

    pub fn single(n: Node) -> Term {
        Term { roots: vec![n] }
    }

    pub fn hole() -> Term {
        Term::single(Node::Hole)
    }

    pub fn size(&self) -> usize {
        self.roots.iter().map(Node::size).sum()
    }

    /// Nodes carrying a letter, excluding neutral ones.
    pub fn interior_count(&self) -> usize {
        fn go(n: &Node) -> usize {
            match n {
                Node::Interior { label, children } => {
                    usize::from(label != NEUTRAL) + children.iter().map(go).sum::<usize>()
                }
                _ => 0,
            }
        }
        self.roots.iter().map(go).sum()
    }

    pub fn has_hole(&self) -> bool {
        fn go(n: &Node) -> bool {
            match n {
                Node::Hole => true,
                Node::Interior { children, .. } => children.iter().any(go),
                Node::Port { .. } => false,
            }
        }
        self.roots.iter().any(go)
    }

    pub fn is_closed(&self) -> bool {
        self.ports().is_empty() && !self.has_hole()
    }

    /// Ports in preorder.
    pub fn ports(&self) -> Vec<PortRef> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        for (i, r) in self.roots.iter().enumerate() {
            path.push(i);
            collect_ports(r, &mut path, &mut out);
            path.pop();
        }
        out
    }

    pub fn port_names(&self) -> BTreeSet<String> {
        self.ports().into_iter().map(|p| p.name).collect()
    }

    pub fn find_port(&self, name: &str) -> Option<PortRef> {
        self.ports().into_iter().find(|p| p.name == name)
    }

    /// Paths of every node in preorder.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        fn go(n: &Node, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            for (i, c) in n.children().iter().enumerate() {
                path.push(i);
                go(c, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        let mut path = Vec::new();
        for (i, r) in self.roots.iter().enumerate() {
            path.push(i);
            go(r, &mut path, &mut out);
            path.pop();
        }
        out
    }

    pub fn node(&self, path: &[usize]) -> Option<&Node> {
        let (first, rest) = path.split_first()?;
        let mut n = self.roots.get(*first)?;
        for &i in rest {
            n = n.children().get(i)?;
        }
        Some(n)
    }

    fn node_mut(&mut self, path: &[usize]) -> Option<&mut Node> {
        let (first, rest) = path.split_first()?;
        let mut n = self.roots.get_mut(*first)?;
        for &i in rest {
            n = match n {
                Node::Interior { children, .. } => children.get_mut(i)?,
                _ => return None,
            };
        }
        Some(n)
    }

    /// Applies `f` to every port, replacing it by the returned nodes.
    pub fn map_ports(&self, f: &mut dyn FnMut(&str, &[String]) -> Vec<Node>) -> Term {
        fn go(n: &Node, f: &mut dyn FnMut(&str, &[String]) -> Vec<Node>, out: &mut Vec<Node>) {
            match n {
                Node::Port { name, labels } => out.extend(f(name, labels)),
                Node::Interior { label, children } => {
                    let mut ch = Vec::with_capacity(children.len());
                    for c in children {
                        go(c, f, &mut ch);
                    }
                    out.push(Node::Interior { label: label.clone(), children: ch });
                }
                Node::Hole => out.push(Node::Hole),
            }
        }
        let mut roots = Vec::new();
        for r in &self.roots {
            go(r, f, &mut roots);
        }
        Term { roots }
    }
}

fn collect_ports(n: &Node, path: &mut Vec<usize>, out: &mut Vec<PortRef>) {
    match n {
        Node::Port { name, labels } => {
            out.push(PortRef { path: path.clone(), name: name.clone(), labels: labels.clone() })
        }
        Node::Interior { children, .. } => {
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                collect_ports(c, path, out);
                path.pop();
            }
        }
        Node::Hole => {}
    }
}

/// Δ(t,x): the forest of subtrees below x.
pub fn delta(t: &Term, x: &[usize]) -> Result<Term, TermError> {
    let n = t.node(x).ok_or_else(|| TermError::BadPath(x.to_vec()))?;
    Ok(Term { roots: n.children().to_vec() })
}

/// Δ⁺(t,x): the subtree rooted at x.
pub fn delta_plus(t: &Term, x: &[usize]) -> Result<Term, TermError> {
    let n = t.node(x).ok_or_else(|| TermError::BadPath(x.to_vec()))?;
    Ok(Term::single(n.clone()))
}

/// ∇(t,x): t with Δ⁺(t,x) replaced by the box port.
pub fn nabla(t: &Term, x: &[usize]) -> Result<Term, TermError> {
    let mut out = t.clone();
    let sub = out.node_mut(x).ok_or_else(|| TermError::BadPath(x.to_vec()))?;
    let had_hole = Term::single(sub.clone()).has_hole();
    *sub = Node::Hole;
    if t.has_hole() && !had_hole {
        return Err(TermError::TwoHoles);
    }
    Ok(out)
}

/// Renames ports of `t` that collide with `used`, recording the original
/// name as label when the port had none, so its input label is kept.
pub fn freshen(t: &Term, used: &mut BTreeSet<String>) -> Term {
    let mut f = |name: &str, labels: &[String]| {
        let mut fresh = name.to_string();
        if used.contains(&fresh) {
            let mut k = 1usize;
            loop {
                fresh = format!("{name}{k}");
                if !used.contains(&fresh) {
                    break;
                }
                k += 1;
            }
        }
        used.insert(fresh.clone());
        let labels = if fresh != name && labels.is_empty() { vec![name.to_string()] } else { labels.to_vec() };
        vec![Node::Port { name: fresh, labels }]
    };
    t.map_ports(&mut f)
}

/// s·t: replaces the box port of s by the roots of t.
pub fn insert_context(s: &Term, t: &Term) -> Result<Term, TermError> {
    if !s.has_hole() {
        return Err(TermError::NoHole);
    }
    let mut used = s.port_names();
    let t = freshen(t, &mut used);
    fn go(n: &Node, t: &[Node], out: &mut Vec<Node>) {
        match n {
            Node::Hole => out.extend(t.iter().cloned()),
            Node::Interior { label, children } => {
                let mut ch = Vec::new();
                for c in children {
                    go(c, t, &mut ch);
                }
                out.push(Node::Interior { label: label.clone(), children: ch });
            }
            p => out.push(p.clone()),
        }
    }
    let mut roots = Vec::new();
    for r in &s.roots {
        go(r, &t.roots, &mut roots);
    }
    Ok(Term { roots })
}

/// M₁ ·_Z M₂: every port of `m1` named in `z` becomes a neutral node whose
/// children are the roots of `chooser(port)`.
pub fn insert_at_ports(
    m1: &Term,
    z: &BTreeSet<String>,
    chooser: &mut dyn FnMut(&PortRef) -> Option<Term>,
) -> Result<Term, TermError> {
    let ports = m1.ports();
    if !ports.iter().any(|p| z.contains(&p.name)) {
        return Err(TermError::EmptyIntersection);
    }
    let mut used: BTreeSet<String> = ports.iter().filter(|p| !z.contains(&p.name)).map(|p| p.name.clone()).collect();
    let mut chosen: BTreeMap<String, Term> = BTreeMap::new();
    for p in &ports {
        if z.contains(&p.name) {
            let ins = chooser(p).ok_or_else(|| TermError::Unassigned(p.name.clone()))?;
            chosen.insert(p.name.clone(), freshen(&ins, &mut used));
        }
    }
    let mut f = |name: &str, labels: &[String]| match chosen.remove(name) {
        Some(t) => vec![Node::Interior { label: NEUTRAL.to_string(), children: t.roots }],
        None => vec![Node::Port { name: name.to_string(), labels: labels.to_vec() }],
    };
    Ok(m1.map_ports(&mut f))
}

/// Ports of `t` whose input label is in `labels`.
pub fn ports_with_input(t: &Term, labels: &BTreeSet<String>) -> BTreeSet<String> {
    t.ports().into_iter().filter(|p| labels.contains(p.input())).map(|p| p.name).collect()
}

/// M^{(θ,Z)}, with Z given as a set of input labels.
pub fn pump(ms: &[Term], z: &BTreeSet<String>, theta: usize) -> Result<Vec<Term>, TermError> {
    assert!(theta >= 1, "pump exponent must be positive");
    let mut cur: Vec<Term> = ms.to_vec();
    for _ in 1..theta {
        let mut next = Vec::new();
        for m in &cur {
            let zn = ports_with_input(m, z);
            if zn.is_empty() {
                return Err(TermError::EmptyIntersection);
            }
            let names: Vec<String> = zn.iter().cloned().collect();
            let mut idx = vec![0usize; names.len()];
            loop {
                let pick: BTreeMap<&str, &Term> =
                    names.iter().map(String::as_str).zip(idx.iter().map(|&i| &ms[i])).collect();
                next.push(insert_at_ports(m, &zn, &mut |p| pick.get(p.name.as_str()).map(|t| (*t).clone()))?);
                let mut k = 0;
                while k < idx.len() {
                    idx[k] += 1;
                    if idx[k] < ms.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// M·S: inserts at every port the forest chosen for it.
pub fn circuit_insert(
    ms: &[Term],
    chooser: &mut dyn FnMut(&PortRef) -> Option<Term>,
) -> Result<Vec<Term>, TermError> {
    ms.iter()
        .map(|m| {
            let all = m.port_names();
            if all.is_empty() {
                Ok(m.clone())
            } else {
                insert_at_ports(m, &all, chooser)
            }
        })
        .collect()
}

/// Replaces every port by a leaf carrying the label `chi` assigns to it.
pub fn leaf_completion(m: &Term, chi: &dyn Fn(&str, &[String]) -> Option<String>) -> Result<Term, TermError> {
    let mut missing = None;
    let mut f = |name: &str, labels: &[String]| match chi(name, labels) {
        Some(l) => vec![Node::leaf(l)],
        None => {
            missing.get_or_insert_with(|| name.to_string());
            vec![]
        }
    };
    let t = m.map_ports(&mut f);
    match missing {
        Some(n) => Err(TermError::Unassigned(n)),
        None => Ok(t),
    }
}

fn canon_node(n: &Node) -> Node {
    match n {
        Node::Interior { label, children } => {
            let mut ch: Vec<Node> = children.iter().map(canon_node).collect();
            ch.sort();
            Node::Interior { label: label.clone(), children: ch }
        }
        other => other.clone(),
    }
}

/// Sorts siblings everywhere; two terms are equal up to horizontal
/// permutation iff their canonical forms are equal.
pub fn canonical_form(t: &Term) -> Term {
    let mut roots: Vec<Node> = t.roots.iter().map(canon_node).collect();
    roots.sort();
    Term { roots }
}

/// Removes neutral nodes, splicing their children into place.
pub fn contract_neutral(t: &Term) -> Term {
    fn go(n: &Node, out: &mut Vec<Node>) {
        match n {
            Node::Interior { label, children } if label == NEUTRAL => {
                for c in children {
                    go(c, out);
                }
            }
            Node::Interior { label, children } => {
                let mut ch = Vec::new();
                for c in children {
                    go(c, &mut ch);
                }
                out.push(Node::Interior { label: label.clone(), children: ch });
            }
            other => out.push(other.clone()),
        }
    }
    let mut roots = Vec::new();
    for r in &t.roots {
        go(r, &mut roots);
    }
    Term { roots }
}

/// Replaces ports by leaves labelled `?input`, forgetting port names.
pub fn erase_port_names(t: &Term) -> Term {
    let mut f = |name: &str, labels: &[String]| vec![Node::leaf(format!("?{}", port_input(name, labels)))];
    t.map_ports(&mut f)
}

pub fn sum(a: &Term, b: &Term) -> Term {
    let mut used = a.port_names();
    let b = freshen(b, &mut used);
    let mut roots = a.roots.clone();
    roots.extend(b.roots);
    Term { roots }
}
