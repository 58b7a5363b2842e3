//! Canonical decorated rooted trees, forests and tree polynomials.
//!
//! A [`Tree`] is immutable and shared; its children are kept sorted under the
//! canonical order (weight, root decoration, children lexicographically), so
//! structural equality is algebra equality.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_traits::Zero;
use rustc_hash::{FxHashMap, FxHasher};
use thiserror::Error;

use crate::rational::{format_rational, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("weight must be at least 1")]
    ZeroWeight,
    #[error("invalid decoration name `{0}`")]
    BadName(String),
    #[error("duplicate decoration name `{0}`")]
    DuplicateName(String),
    #[error("unknown decoration `{name}` at position {pos}")]
    UnknownDecoration { name: String, pos: usize },
    #[error("parse error at position {pos}: expected {expected}")]
    Parse { pos: usize, expected: String },
}

/// An element of the index set, interned as a small integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decoration(pub u32);

impl Decoration {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Name table for decorations. Decoration `k` is the `k`-th name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    lookup: HashMap<String, Decoration>,
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, TreeError> {
        let mut lookup = HashMap::new();
        let mut out = Vec::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            let name = name.as_ref();
            if !valid_name(name) {
                return Err(TreeError::BadName(name.to_string()));
            }
            if lookup.insert(name.to_string(), Decoration(k as u32)).is_some() {
                return Err(TreeError::DuplicateName(name.to_string()));
            }
            out.push(name.to_string());
        }
        Ok(Alphabet { names: out, lookup })
    }

    /// Names `1..=n`.
    pub fn numeric(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|k| k.to_string()).collect();
        Alphabet::new(&names).expect("numeric names are valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, d: Decoration) -> &str {
        &self.names[d.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<Decoration> {
        self.lookup.get(name).copied()
    }

    pub fn decorations(&self) -> Vec<Decoration> {
        (0..self.names.len() as u32).map(Decoration).collect()
    }
}

struct Node {
    root: Decoration,
    weight: u32,
    hash: u64,
    children: Vec<Tree>,
}

/// A canonical decorated rooted tree.
#[derive(Clone)]
pub struct Tree(Arc<Node>);

impl Tree {
    /// The single-vertex tree `•_d`.
    pub fn leaf(d: Decoration) -> Tree {
        Tree::canonicalize(d, Vec::new())
    }

    /// Builds the canonical tree with the given root and children in any order.
    pub fn canonicalize(root: Decoration, mut children: Vec<Tree>) -> Tree {
        children.sort();
        Tree::from_sorted(root, children)
    }

    pub(crate) fn from_sorted(root: Decoration, children: Vec<Tree>) -> Tree {
        debug_assert!(children.windows(2).all(|w| w[0] <= w[1]));
        let weight = 1 + children.iter().map(Tree::weight).sum::<u32>();
        let mut h = FxHasher::default();
        root.0.hash(&mut h);
        weight.hash(&mut h);
        for c in &children {
            c.0.hash.hash(&mut h);
        }
        Tree(Arc::new(Node {
            root,
            weight,
            hash: h.finish(),
            children,
        }))
    }

    pub fn root(&self) -> Decoration {
        self.0.root
    }

    pub fn weight(&self) -> u32 {
        self.0.weight
    }

    pub fn children(&self) -> &[Tree] {
        &self.0.children
    }

    pub fn is_leaf(&self) -> bool {
        self.0.children.is_empty()
    }

    pub fn children_forest(&self) -> Forest {
        Forest::from_sorted(self.0.children.clone())
    }

    /// The ladder `l(d_1, ..., d_n)` with root `d_1`.
    pub fn ladder(decorations: &[Decoration]) -> Tree {
        let (last, rest) = decorations.split_last().expect("ladder needs a vertex");
        rest.iter()
            .rev()
            .fold(Tree::leaf(*last), |acc, &d| Tree::from_sorted(d, vec![acc]))
    }

    /// The ladder decorations from the root down, if the tree is a ladder.
    pub fn as_ladder(&self) -> Option<Vec<Decoration>> {
        let mut out = vec![self.root()];
        let mut cur = self.clone();
        loop {
            match cur.children() {
                [] => return Some(out),
                [c] => {
                    out.push(c.root());
                    let next = c.clone();
                    cur = next;
                }
                _ => return None,
            }
        }
    }

    /// Decorations of all vertices in preorder.
    pub fn vertices(&self) -> Vec<Decoration> {
        let mut out = Vec::with_capacity(self.weight() as usize);
        fn walk(t: &Tree, out: &mut Vec<Decoration>) {
            out.push(t.root());
            for c in t.children() {
                walk(c, out);
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> TreeDisplay<'a> {
        TreeDisplay { tree: self, alphabet }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.display(alphabet).to_string()
    }

    /// Parses the bracket notation `d[c,b[a]]`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Tree, TreeError> {
        let mut p = TextParser {
            bytes: text.as_bytes(),
            pos: 0,
            alphabet,
        };
        let t = p.tree()?;
        if p.pos != p.bytes.len() {
            return Err(TreeError::Parse {
                pos: p.pos,
                expected: "end of input".into(),
            });
        }
        Ok(t)
    }
}

impl PartialEq for Tree {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.cmp(other) == Ordering::Equal)
    }
}

impl Eq for Tree {}

impl Hash for Tree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.weight()
            .cmp(&other.weight())
            .then(self.root().cmp(&other.root()))
            .then_with(|| self.children().cmp(other.children()))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root().0)?;
        if !self.is_leaf() {
            f.write_str("[")?;
            for (k, c) in self.children().iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c:?}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

pub struct TreeDisplay<'a> {
    tree: &'a Tree,
    alphabet: &'a Alphabet,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.alphabet.name(self.tree.root()))?;
        if !self.tree.is_leaf() {
            f.write_str("[")?;
            for (k, c) in self.tree.children().iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", c.display(self.alphabet))?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

struct TextParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl TextParser<'_> {
    fn name(&mut self) -> Result<Decoration, TreeError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(TreeError::Parse {
                pos: start,
                expected: "decoration name".into(),
            });
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii");
        self.alphabet.lookup(name).ok_or_else(|| TreeError::UnknownDecoration {
            name: name.to_string(),
            pos: start,
        })
    }

    fn tree(&mut self) -> Result<Tree, TreeError> {
        let root = self.name()?;
        let mut children = Vec::new();
        if self.bytes.get(self.pos) == Some(&b'[') {
            self.pos += 1;
            loop {
                children.push(self.tree()?);
                match self.bytes.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b']') => {
                        self.pos += 1;
                        break;
                    }
                    _ => {
                        return Err(TreeError::Parse {
                            pos: self.pos,
                            expected: "`,` or `]`".into(),
                        })
                    }
                }
            }
        }
        Ok(Tree::canonicalize(root, children))
    }
}

/// B⁺_d: graft the trees of `f` on a new root decorated `d`.
pub fn graft_bplus(f: &Forest, d: Decoration) -> Tree {
    Tree::from_sorted(d, f.trees.clone())
}

/// A commutative monomial of trees; the empty forest is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn unit() -> Forest {
        Forest { trees: Vec::new() }
    }

    pub fn from_trees(mut trees: Vec<Tree>) -> Forest {
        trees.sort();
        Forest { trees }
    }

    pub(crate) fn from_sorted(trees: Vec<Tree>) -> Forest {
        Forest { trees }
    }

    pub fn single(t: Tree) -> Forest {
        Forest { trees: vec![t] }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_unit(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.trees.iter().map(Tree::weight).sum()
    }

    pub fn as_tree(&self) -> Option<&Tree> {
        match self.trees.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Forest) -> Forest {
        let mut out = Vec::with_capacity(self.trees.len() + other.trees.len());
        let (mut a, mut b) = (self.trees.iter().peekable(), other.trees.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x <= y {
                        out.push(a.next().unwrap().clone());
                    } else {
                        out.push(b.next().unwrap().clone());
                    }
                }
                (Some(_), None) => out.push(a.next().unwrap().clone()),
                (None, Some(_)) => out.push(b.next().unwrap().clone()),
                (None, None) => break,
            }
        }
        Forest { trees: out }
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> ForestDisplay<'a> {
        ForestDisplay { forest: self, alphabet }
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.display(alphabet).to_string()
    }

    /// Parses `()` for the unit or trees joined by `*`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Forest, TreeError> {
        let text = text.trim();
        if text == "()" {
            return Ok(Forest::unit());
        }
        let mut trees = Vec::new();
        let mut offset = 0;
        for part in text.split('*') {
            let t = Tree::parse(part.trim(), alphabet).map_err(|e| match e {
                TreeError::Parse { pos, expected } => TreeError::Parse {
                    pos: pos + offset,
                    expected,
                },
                TreeError::UnknownDecoration { name, pos } => TreeError::UnknownDecoration {
                    name,
                    pos: pos + offset,
                },
                other => other,
            })?;
            trees.push(t);
            offset += part.len() + 1;
        }
        Ok(Forest::from_trees(trees))
    }
}

impl Ord for Forest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.trees.cmp(&other.trees))
    }
}

impl PartialOrd for Forest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return f.write_str("()");
        }
        for (k, t) in self.trees.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{t:?}")?;
        }
        Ok(())
    }
}

pub struct ForestDisplay<'a> {
    forest: &'a Forest,
    alphabet: &'a Alphabet,
}

impl fmt::Display for ForestDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.forest.trees.is_empty() {
            return f.write_str("()");
        }
        for (k, t) in self.forest.trees.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}", t.display(self.alphabet))?;
        }
        Ok(())
    }
}

/// Finite linear combination of forests with nonzero rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreePoly {
    terms: FxHashMap<Forest, Q>,
}

impl TreePoly {
    pub fn zero() -> TreePoly {
        TreePoly::default()
    }

    pub fn one() -> TreePoly {
        TreePoly::from_forest(Forest::unit(), crate::rational::one())
    }

    pub fn from_forest(f: Forest, c: Q) -> TreePoly {
        let mut p = TreePoly::zero();
        p.add_term(f, c);
        p
    }

    pub fn from_tree(t: Tree) -> TreePoly {
        TreePoly::from_forest(Forest::single(t), crate::rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, f: &Forest) -> Q {
        self.terms.get(f).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, f: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(f) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &TreePoly) {
        for (f, c) in &other.terms {
            self.add_term(f.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &TreePoly) -> TreePoly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &TreePoly) -> TreePoly {
        self.add(&other.scale(&-crate::rational::one()))
    }

    pub fn scale(&self, c: &Q) -> TreePoly {
        if c.is_zero() {
            return TreePoly::zero();
        }
        TreePoly {
            terms: self.terms.iter().map(|(f, x)| (f.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &TreePoly) -> TreePoly {
        self.mul_bounded(other, u32::MAX)
    }

    /// Product keeping only forests of weight at most `bound`.
    pub fn mul_bounded(&self, other: &TreePoly, bound: u32) -> TreePoly {
        let mut out = TreePoly::zero();
        for (f, a) in &self.terms {
            let wf = f.weight();
            if wf > bound {
                continue;
            }
            for (g, b) in &other.terms {
                if wf + g.weight() <= bound {
                    out.add_term(f.mul(g), a * b);
                }
            }
        }
        out
    }

    /// Homogeneous component of the given weight.
    pub fn component(&self, weight: u32) -> TreePoly {
        TreePoly {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.weight() == weight)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn truncate(&self, bound: u32) -> TreePoly {
        TreePoly {
            terms: self
                .terms
                .iter()
                .filter(|(f, _)| f.weight() <= bound)
                .map(|(f, c)| (f.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Forest, &Q)> {
        self.terms.iter()
    }

    /// Terms in canonical forest order.
    pub fn sorted_terms(&self) -> Vec<(&Forest, &Q)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.sorted_terms()
            .iter()
            .map(|(f, c)| format!("{} {}", format_rational(c), f.to_text(alphabet)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Calls `visit` once for every multiset drawn from `weights` (pool indices
/// with multiplicities, indices increasing) whose total weight is `target`.
/// `weights` must be non-decreasing and positive.
pub fn for_each_multiset<F: FnMut(&[(usize, u32)])>(weights: &[u32], target: u32, visit: &mut F) {
    debug_assert!(weights.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(weights.iter().all(|&w| w > 0));
    let mut stack = Vec::new();
    multiset_rec(weights, 0, target, &mut stack, visit);
}

fn multiset_rec<F: FnMut(&[(usize, u32)])>(
    weights: &[u32],
    start: usize,
    remaining: u32,
    stack: &mut Vec<(usize, u32)>,
    visit: &mut F,
) {
    if remaining == 0 {
        visit(stack);
        return;
    }
    for k in start..weights.len() {
        let w = weights[k];
        if w > remaining {
            break;
        }
        let mut m = 1;
        while m * w <= remaining {
            stack.push((k, m));
            multiset_rec(weights, k + 1, remaining - m * w, stack, visit);
            stack.pop();
            m += 1;
        }
    }
}

/// All canonical trees of weight `n` decorated by `decorations`, optionally
/// with a fixed root, in canonical order.
pub fn enumerate_trees(decorations: &[Decoration], n: u32, root: Option<Decoration>) -> Result<Vec<Tree>, TreeError> {
    if n == 0 {
        return Err(TreeError::ZeroWeight);
    }
    let mut decos = decorations.to_vec();
    decos.sort();
    decos.dedup();
    // pool holds every tree of weight < current, in canonical order
    let mut pool: Vec<Tree> = Vec::new();
    let mut last: Vec<Tree> = Vec::new();
    for w in 1..=n {
        let weights: Vec<u32> = pool.iter().map(Tree::weight).collect();
        let mut forests: Vec<Vec<Tree>> = Vec::new();
        for_each_multiset(&weights, w - 1, &mut |ms| {
            let mut children = Vec::new();
            for &(k, m) in ms {
                for _ in 0..m {
                    children.push(pool[k].clone());
                }
            }
            forests.push(children);
        });
        let roots: Vec<Decoration> = if w == n {
            match root {
                Some(r) => vec![r],
                None => decos.clone(),
            }
        } else {
            decos.clone()
        };
        let mut layer = Vec::with_capacity(roots.len() * forests.len());
        for &r in &roots {
            for f in &forests {
                layer.push(Tree::from_sorted(r, f.clone()));
            }
        }
        layer.sort();
        if w == n {
            last = layer;
        } else {
            pool.extend(layer);
        }
    }
    Ok(last)
}
