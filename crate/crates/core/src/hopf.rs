//! Admissible cuts, the coproduct and antipode of the tree Hopf algebra, and
//! the cut-counting functions used by the Hopf criterion for SDSE.

use std::fmt::Write as _;

use num_traits::Zero;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::rational::{format_rational, int, Q};
use crate::trees::{Alphabet, Decoration, Forest, Tree, TreePoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HopfError {
    #[error("weight mismatch: expected {expected}, found {found}")]
    WeightMismatch { expected: u32, found: u32 },
}

/// One admissible cut: pruned part `P^c`, trunk `R^c`, number of cut edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutResult {
    pub pruned: Forest,
    pub trunk: Forest,
    pub num_cut_edges: usize,
}

/// All admissible cuts of `t`, including the empty and the total cut.
pub fn admissible_cuts(t: &Tree) -> Vec<CutResult> {
    let mut out: Vec<CutResult> = rooted_cuts(t)
        .into_iter()
        .map(|(pruned, trunk, n)| CutResult {
            pruned: Forest::from_trees(pruned),
            trunk: Forest::single(trunk),
            num_cut_edges: n,
        })
        .collect();
    out.push(CutResult {
        pruned: Forest::single(t.clone()),
        trunk: Forest::unit(),
        num_cut_edges: 0,
    });
    out
}

/// Cuts keeping the root: each child edge is either cut (whole subtree pruned)
/// or kept, in which case the child subtree is cut admissibly below.
fn rooted_cuts(t: &Tree) -> Vec<(Vec<Tree>, Tree, usize)> {
    // partial states: (pruned trees, kept children, cut count)
    let mut states: Vec<(Vec<Tree>, Vec<Tree>, usize)> = vec![(Vec::new(), Vec::new(), 0)];
    for child in t.children() {
        let below = rooted_cuts(child);
        let mut next = Vec::with_capacity(states.len() * (below.len() + 1));
        for (pruned, kept, n) in &states {
            let mut p = pruned.clone();
            p.push(child.clone());
            next.push((p, kept.clone(), n + 1));
            for (bp, btrunk, bn) in &below {
                let mut p = pruned.clone();
                p.extend(bp.iter().cloned());
                let mut k = kept.clone();
                k.push(btrunk.clone());
                next.push((p, k, n + bn));
            }
        }
        states = next;
    }
    states
        .into_iter()
        .map(|(p, k, n)| (p, Tree::canonicalize(t.root(), k), n))
        .collect()
}

/// Any edge subset of a tree, admissible or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnyCut {
    /// Cut edges, each named by the preorder index of its lower vertex.
    pub edges: Vec<usize>,
    pub admissible: bool,
    /// All pieces after cutting, `W^c`.
    pub pieces: Forest,
    /// `(P^c, R^c)` for admissible cuts.
    pub split: Option<(Forest, Forest)>,
}

struct Flat {
    deco: Vec<Decoration>,
    parent: Vec<Option<usize>>,
}

fn flatten(t: &Tree) -> Flat {
    let mut flat = Flat {
        deco: Vec::new(),
        parent: Vec::new(),
    };
    fn walk(t: &Tree, parent: Option<usize>, flat: &mut Flat) {
        let me = flat.deco.len();
        flat.deco.push(t.root());
        flat.parent.push(parent);
        for c in t.children() {
            walk(c, Some(me), flat);
        }
    }
    walk(t, None, &mut flat);
    flat
}

fn build(flat: &Flat, v: usize, cut: &[bool]) -> Tree {
    let children = (0..flat.deco.len())
        .filter(|&w| flat.parent[w] == Some(v) && !cut[w])
        .map(|w| build(flat, w, cut))
        .collect();
    Tree::canonicalize(flat.deco[v], children)
}

/// Every non-total cut of `t` (all `2^{edges}` subsets), in subset order.
pub fn all_cuts(t: &Tree) -> Vec<AnyCut> {
    let flat = flatten(t);
    let n = flat.deco.len();
    let edges: Vec<usize> = (1..n).collect();
    let mut out = Vec::with_capacity(1 << edges.len());
    for mask in 0u64..(1u64 << edges.len()) {
        let mut cut = vec![false; n];
        for (k, &e) in edges.iter().enumerate() {
            cut[e] = mask >> k & 1 == 1;
        }
        let mut admissible = true;
        for v in 0..n {
            let mut seen = 0;
            let mut w = Some(v);
            while let Some(x) = w {
                if cut[x] {
                    seen += 1;
                }
                w = flat.parent[x];
            }
            if seen > 1 {
                admissible = false;
            }
        }
        let tops: Vec<usize> = (0..n).filter(|&v| v == 0 || cut[v]).collect();
        let pieces: Vec<Tree> = tops.iter().map(|&v| build(&flat, v, &cut)).collect();
        let split = admissible.then(|| {
            let trunk = Forest::single(pieces[0].clone());
            let pruned = Forest::from_trees(pieces[1..].to_vec());
            (pruned, trunk)
        });
        out.push(AnyCut {
            edges: (0..n).filter(|&v| cut[v]).collect(),
            admissible,
            pieces: Forest::from_trees(pieces),
            split,
        });
    }
    out
}

/// Finite linear combination of `left ⊗ right` with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TensorPoly {
    terms: FxHashMap<(Forest, Forest), Q>,
}

impl TensorPoly {
    pub fn zero() -> TensorPoly {
        TensorPoly::default()
    }

    pub fn add_term(&mut self, left: Forest, right: Forest, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry((left, right)) {
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

    pub fn add_assign(&mut self, other: &TensorPoly) {
        for ((l, r), c) in &other.terms {
            self.add_term(l.clone(), r.clone(), c.clone());
        }
    }

    pub fn coeff(&self, left: &Forest, right: &Forest) -> Q {
        self.terms
            .get(&(left.clone(), right.clone()))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Forest, Forest), &Q)> {
        self.terms.iter()
    }

    /// Componentwise product in `H ⊗ H`.
    pub fn mul(&self, other: &TensorPoly) -> TensorPoly {
        let mut out = TensorPoly::zero();
        for ((l1, r1), a) in &self.terms {
            for ((l2, r2), b) in &other.terms {
                out.add_term(l1.mul(l2), r1.mul(r2), a * b);
            }
        }
        out
    }

    pub fn sorted_terms(&self) -> Vec<(&(Forest, Forest), &Q)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    /// One `left<TAB>right<TAB>coefficient` line per term, sorted.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut s = String::new();
        for ((l, r), c) in self.sorted_terms() {
            let _ = writeln!(
                s,
                "{}\t{}\t{}",
                l.to_text(alphabet),
                r.to_text(alphabet),
                format_rational(c)
            );
        }
        s
    }
}

/// `Δ(t) = Σ_c P^c(t) ⊗ R^c(t)` over admissible cuts.
pub fn tree_coproduct(t: &Tree) -> TensorPoly {
    let mut out = TensorPoly::zero();
    for c in admissible_cuts(t) {
        out.add_term(c.pruned, c.trunk, int(1));
    }
    out
}

pub fn forest_coproduct(f: &Forest) -> TensorPoly {
    let mut out = TensorPoly::zero();
    out.add_term(Forest::unit(), Forest::unit(), int(1));
    for t in f.trees() {
        out = out.mul(&tree_coproduct(t));
    }
    out
}

/// Coproduct extended linearly and multiplicatively.
pub fn coproduct(x: &TreePoly) -> TensorPoly {
    let mut cache: FxHashMap<Tree, TensorPoly> = FxHashMap::default();
    let mut out = TensorPoly::zero();
    for (f, c) in x.iter() {
        let mut acc = TensorPoly::zero();
        acc.add_term(Forest::unit(), Forest::unit(), c.clone());
        for t in f.trees() {
            let d = cache.entry(t.clone()).or_insert_with(|| tree_coproduct(t)).clone();
            acc = acc.mul(&d);
        }
        out.add_assign(&acc);
    }
    out
}

/// `S(t) = −Σ_c (−1)^{n_c} W^c(t)` over all non-total cuts.
pub fn tree_antipode(t: &Tree) -> TreePoly {
    let mut out = TreePoly::zero();
    for c in all_cuts(t) {
        let sign = if c.edges.len() % 2 == 0 { -1 } else { 1 };
        out.add_term(c.pieces, int(sign));
    }
    out
}

/// Antipode extended linearly and multiplicatively.
pub fn antipode(x: &TreePoly) -> TreePoly {
    let mut out = TreePoly::zero();
    for (f, c) in x.iter() {
        let mut acc = TreePoly::from_forest(Forest::unit(), c.clone());
        for t in f.trees() {
            acc = acc.mul(&tree_antipode(t));
        }
        out.add_assign(&acc);
    }
    out
}

/// Every way of deleting one non-root leaf of `t`: (leaf decoration,
/// resulting tree, number of leaf positions giving that result).
pub fn leaf_deletions(t: &Tree) -> Vec<(Decoration, Tree, u64)> {
    let mut acc: FxHashMap<(Decoration, Tree), u64> = FxHashMap::default();
    let children = t.children();
    let mut k = 0;
    while k < children.len() {
        let mut m = 1;
        while k + m < children.len() && children[k + m] == children[k] {
            m += 1;
        }
        let child = &children[k];
        let rest = || {
            let mut v = children.to_vec();
            v.remove(k);
            v
        };
        if child.is_leaf() {
            let t2 = Tree::from_sorted(t.root(), rest());
            *acc.entry((child.root(), t2)).or_default() += m as u64;
        } else {
            for (d, c2, n) in leaf_deletions(child) {
                let mut v = rest();
                v.push(c2);
                let t2 = Tree::canonicalize(t.root(), v);
                *acc.entry((d, t2)).or_default() += m as u64 * n;
            }
        }
        k += m;
    }
    let mut out: Vec<_> = acc.into_iter().map(|((d, t2), n)| (d, t2, n)).collect();
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    out
}

/// `n_j(t, t′)`: number of leaves of `t` decorated `j` whose deletion gives `t′`.
pub fn leaf_cut_count(t: &Tree, t_prime: &Tree, j: Decoration) -> Result<u64, HopfError> {
    if t.weight() != t_prime.weight() + 1 {
        return Err(HopfError::WeightMismatch {
            expected: t_prime.weight() + 1,
            found: t.weight(),
        });
    }
    Ok(leaf_deletions(t)
        .into_iter()
        .filter(|(d, t2, _)| *d == j && t2 == t_prime)
        .map(|(_, _, n)| n)
        .sum())
}

/// `n(t′, t″; t)`: number of admissible cuts of `t` with `P^c = t′` and `R^c = t″`.
pub fn pair_cut_count(t_prime: &Tree, t_second: &Tree, t: &Tree) -> Result<u64, HopfError> {
    let w = t_prime.weight() + t_second.weight();
    if w != t.weight() {
        return Err(HopfError::WeightMismatch {
            expected: t.weight(),
            found: w,
        });
    }
    let p = Forest::single(t_prime.clone());
    let r = Forest::single(t_second.clone());
    Ok(admissible_cuts(t)
        .into_iter()
        .filter(|c| c.pruned == p && c.trunk == r)
        .count() as u64)
}

/// Single-edge cuts of `t` grouped as `(P, R) -> count`.
pub fn single_edge_cuts(t: &Tree) -> Vec<(Tree, Tree, u64)> {
    let mut acc: FxHashMap<(Tree, Tree), u64> = FxHashMap::default();
    fn rec(t: &Tree, acc: &mut Vec<(Tree, Tree)>) {
        let children = t.children();
        for k in 0..children.len() {
            let mut rest = children.to_vec();
            let child = rest.remove(k);
            acc.push((child.clone(), Tree::from_sorted(t.root(), rest.clone())));
            let mut inner = Vec::new();
            rec(&child, &mut inner);
            for (p, c2) in inner {
                let mut v = rest.clone();
                v.push(c2);
                acc.push((p, Tree::canonicalize(t.root(), v)));
            }
        }
    }
    let mut list = Vec::new();
    rec(t, &mut list);
    for pair in list {
        *acc.entry(pair).or_default() += 1;
    }
    let mut out: Vec<_> = acc.into_iter().map(|((p, r), n)| (p, r, n)).collect();
    out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    out
}

/// `f_t ⋆ f_{t′}`: `t` grafted on every vertex of `t′`.
pub fn graft_product(t: &Tree, t_prime: &Tree) -> TreePoly {
    let mut out = TreePoly::zero();
    for (s, n) in graft_everywhere(t, t_prime) {
        out.add_term(Forest::single(s), int(n as i64));
    }
    out
}

fn graft_everywhere(t: &Tree, host: &Tree) -> Vec<(Tree, u64)> {
    let mut acc: FxHashMap<Tree, u64> = FxHashMap::default();
    let mut kids = host.children().to_vec();
    kids.push(t.clone());
    *acc.entry(Tree::canonicalize(host.root(), kids)).or_default() += 1;
    let children = host.children();
    let mut k = 0;
    while k < children.len() {
        let mut m = 1;
        while k + m < children.len() && children[k + m] == children[k] {
            m += 1;
        }
        for (c2, n) in graft_everywhere(t, &children[k]) {
            let mut v = children.to_vec();
            v.remove(k);
            v.push(c2);
            *acc.entry(Tree::canonicalize(host.root(), v)).or_default() += m as u64 * n;
        }
        k += m;
    }
    acc.into_iter().collect()
}

/// Bilinear extension of [`graft_product`] to linear combinations of trees.
/// Forests with more than one tree are ignored.
pub fn graft_product_poly(x: &TreePoly, y: &TreePoly) -> TreePoly {
    let mut out = TreePoly::zero();
    for (f, a) in x.iter() {
        let Some(t) = f.as_tree() else { continue };
        for (g, b) in y.iter() {
            let Some(s) = g.as_tree() else { continue };
            out.add_assign(&graft_product(t, s).scale(&(a * b)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::enumerate_trees;

    fn al() -> Alphabet {
        Alphabet::new(&["a", "b", "c", "d"]).unwrap()
    }

    fn t(s: &str) -> Tree {
        Tree::parse(s, &al()).unwrap()
    }

    fn f(s: &str) -> Forest {
        Forest::parse(s, &al()).unwrap()
    }

    #[test]
    fn single_vertex() {
        assert_eq!(admissible_cuts(&t("a")).len(), 2);
        let d = tree_coproduct(&t("a"));
        assert_eq!(d.len(), 2);
        assert_eq!(d.coeff(&f("a"), &f("()")), int(1));
        assert_eq!(d.coeff(&f("()"), &f("a")), int(1));
        assert_eq!(tree_antipode(&t("a")), TreePoly::from_forest(f("a"), int(-1)));
    }

    #[test]
    fn chain_antipode() {
        let s = tree_antipode(&t("a[b]"));
        let mut expect = TreePoly::from_forest(f("a[b]"), int(-1));
        expect.add_term(f("a*b"), int(1));
        assert_eq!(s, expect);
    }

    #[test]
    fn ladder_cut_count() {
        let decos = [Decoration(0), Decoration(1), Decoration(2), Decoration(0)];
        for n in 1..=4 {
            let l = Tree::ladder(&decos[..n]);
            assert_eq!(admissible_cuts(&l).len(), n + 1);
        }
    }

    #[test]
    fn leaf_counts() {
        assert_eq!(leaf_cut_count(&t("a[b,b]"), &t("a[b]"), Decoration(1)), Ok(2));
        assert_eq!(leaf_cut_count(&t("a[b[c]]"), &t("a[b]"), Decoration(2)), Ok(1));
        assert_eq!(leaf_cut_count(&t("a[b[c]]"), &t("a[b]"), Decoration(1)), Ok(0));
        assert!(leaf_cut_count(&t("a[b]"), &t("a[b]"), Decoration(1)).is_err());
    }

    #[test]
    fn pair_counts() {
        assert_eq!(pair_cut_count(&t("a"), &t("b"), &t("b[a]")), Ok(1));
        assert_eq!(pair_cut_count(&t("a"), &t("a"), &t("a[a]")), Ok(1));
        assert_eq!(pair_cut_count(&t("a"), &t("a[a]"), &t("a[a,a]")), Ok(2));
        assert!(pair_cut_count(&t("a"), &t("a"), &t("a")).is_err());
    }

    #[test]
    fn graft_examples() {
        assert_eq!(graft_product(&t("a"), &t("b")), TreePoly::from_tree(t("b[a]")));
        let g = graft_product(&t("a"), &t("b[c]"));
        assert_eq!(g.len(), 2);
        assert_eq!(g.coeff(&f("b[a,c]")), int(1));
        assert_eq!(g.coeff(&f("b[c[a]]")), int(1));
        let g = graft_product(&t("a"), &t("b[c,c]"));
        assert_eq!(g.coeff(&f("b[c,c[a]]")), int(2));
    }

    #[test]
    fn single_edge_cuts_match_pair_counts() {
        let decos = [Decoration(0), Decoration(1)];
        for w in 2..=5 {
            for tr in enumerate_trees(&decos, w, None).unwrap() {
                for (p, r, n) in single_edge_cuts(&tr) {
                    assert_eq!(pair_cut_count(&p, &r, &tr), Ok(n));
                }
            }
        }
    }
}
