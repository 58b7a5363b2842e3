use std::collections::{BTreeSet, VecDeque};

use num_traits::One;

use super::{prelie_product, PathAlgebraElem, PreLieElem, PreLieError};
use crate::classify::{dep_graph, DepGraph};
use crate::rational::Q;
use crate::sdse::{LambdaTable, Sdse, Solution};
use crate::trees::{Decoration, Tree};

/// Outcome of the graph condition under which the `P_i(n)` form a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConditionC {
    Holds,
    /// A vertex without direct descendant.
    NoDirectDescendant(Decoration),
    /// Two direct descendants of `ascendant` with different direct descendants.
    DescendantsDiffer {
        ascendant: Decoration,
        first: Decoration,
        second: Decoration,
    },
}

impl ConditionC {
    pub fn holds(&self) -> bool {
        *self == ConditionC::Holds
    }
}

/// The path algebra `A_G`: `P_j(n) P_i(m) = P_i(m+n)` if there is a path of
/// length `m` from `i` to `j`, and `0` otherwise; `P_i(n) = 0` when no path
/// of length `n − 1` starts at `i`.
#[derive(Clone, Debug)]
pub struct PathAlgebra {
    graph: DepGraph,
}

impl PathAlgebra {
    pub fn new(graph: DepGraph) -> PathAlgebra {
        PathAlgebra { graph }
    }

    pub fn graph(&self) -> &DepGraph {
        &self.graph
    }

    pub fn condition_c(&self) -> ConditionC {
        let g = &self.graph;
        let vertices: Vec<Decoration> = (0..g.len() as u32).map(Decoration).collect();
        if let Some(&v) = vertices.iter().find(|&&v| g.successors(v).is_empty()) {
            return ConditionC::NoDirectDescendant(v);
        }
        for &a in &vertices {
            let succ = g.successors(a);
            for (k, &x) in succ.iter().enumerate() {
                for &y in &succ[k + 1..] {
                    if g.successors(x) != g.successors(y) {
                        return ConditionC::DescendantsDiffer {
                            ascendant: a,
                            first: x,
                            second: y,
                        };
                    }
                }
            }
        }
        ConditionC::Holds
    }

    /// Endpoints of the paths of length exactly `m` from `i`.
    pub fn endpoints(&self, i: Decoration, m: u32) -> BTreeSet<Decoration> {
        let mut layer = BTreeSet::from([i]);
        for _ in 0..m {
            layer = layer.iter().flat_map(|&v| self.graph.successors(v)).collect();
        }
        layer
    }

    pub fn reaches(&self, i: Decoration, m: u32, j: Decoration) -> bool {
        self.endpoints(i, m).contains(&j)
    }

    /// `P_i(n) ≠ 0`.
    pub fn is_nonzero(&self, i: Decoration, n: u32) -> bool {
        n >= 1 && !self.endpoints(i, n - 1).is_empty()
    }

    pub fn mul(&self, x: &PathAlgebraElem, y: &PathAlgebraElem) -> PathAlgebraElem {
        let mut out = PathAlgebraElem::zero();
        for (&(j, n), a) in x.terms() {
            if !self.is_nonzero(j, n) {
                continue;
            }
            for (&(i, m), b) in y.terms() {
                if self.is_nonzero(i, m) && self.reaches(i, m, j) {
                    out.add_term(i, m + n, a * b);
                }
            }
        }
        out
    }
}

/// Why `A_G → g_(S)` fails to be an isomorphism of graded algebras.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsoMismatch {
    /// `P_i(n)` and `X_i(n)` are not both zero or both nonzero.
    ZeroPattern { i: Decoration, n: u32 },
    /// No rescaling `f_j(1) ↦ c_j f_j(1)` makes `c_j a^{(i)}_j` independent
    /// of the direct descendant `j` of `i`.
    NoNormalization {
        ascendant: Decoration,
        first: Decoration,
        second: Decoration,
    },
    /// `Θ(P_j(n) P_i(m)) ≠ Θ(P_j(n)) ⋆ Θ(P_i(m))`.
    Product {
        left: (Decoration, u32),
        right: (Decoration, u32),
        via_path: PreLieElem,
        via_prelie: PreLieElem,
    },
}

// c with c_j a^{(i)}_j = c_k a^{(i)}_k whenever j, k are direct descendants of i,
// where a^{(i)}_j is the coefficient of the ladder l(i, j) in X_i(2)
fn normalization(g: &DepGraph, sol: &Solution) -> Result<Vec<Q>, IsoMismatch> {
    let n = g.len();
    let edge = |i: Decoration, j: Decoration| sol.coeff(&Tree::ladder(&[i, j]));
    // constraints c_j = r * c_k, as an undirected weighted graph
    let mut links: Vec<Vec<(usize, Q, Decoration)>> = vec![Vec::new(); n];
    for i in (0..n as u32).map(Decoration) {
        let succ = g.successors(i);
        if let Some((&first, rest)) = succ.split_first() {
            for &k in rest {
                let r = edge(i, first) / edge(i, k);
                links[first.index()].push((k.index(), r.clone(), i));
                links[k.index()].push((first.index(), Q::one() / r, i));
            }
        }
    }
    let mut c: Vec<Option<Q>> = vec![None; n];
    for root in 0..n {
        if c[root].is_some() {
            continue;
        }
        c[root] = Some(Q::one());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let cv = c[v].clone().expect("assigned");
            for (w, r, asc) in &links[v] {
                let want = &cv * r;
                match &c[*w] {
                    None => {
                        c[*w] = Some(want);
                        queue.push_back(*w);
                    }
                    Some(cw) if *cw != want => {
                        return Err(IsoMismatch::NoNormalization {
                            ascendant: *asc,
                            first: Decoration(v as u32),
                            second: Decoration(*w as u32),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(c.into_iter().map(|x| x.expect("assigned")).collect())
}

/// Checks that `A_G ≅ g_(S)` on grades up to `grade_bound`: with `c` the
/// rescaling of the generators computed from the ladder coefficients of the
/// solution, `P_i(n) ↦ (Π_k c_{i_k}) a_{l(i,i_2,…,i_n)} f_i(n)` for any path
/// `i → i_2 → … → i_n` must match zero patterns and intertwine products of
/// total grade at most `grade_bound`.
pub fn check_path_isomorphism(
    s: &Sdse,
    sol: &Solution,
    table: &LambdaTable,
    grade_bound: u32,
) -> Result<Option<IsoMismatch>, PreLieError> {
    if sol.bound() < grade_bound {
        return Err(PreLieError::SolutionBound {
            have: sol.bound(),
            bound: grade_bound,
        });
    }
    let alg = PathAlgebra::new(dep_graph(s));
    let c = match normalization(alg.graph(), sol) {
        Ok(c) => c,
        Err(m) => return Ok(Some(m)),
    };
    let theta = |i: Decoration, n: u32| -> PreLieElem {
        let ladder = sol
            .component(i, n)
            .iter()
            .find_map(|(t, a)| t.as_ladder().map(|p| (p, a)));
        match ladder {
            Some((path, a)) if alg.is_nonzero(i, n) => {
                let scale = path.iter().fold(a.clone(), |acc, v| acc * &c[v.index()]);
                PreLieElem::from_terms([(i, n, scale)])
            }
            _ => PreLieElem::zero(),
        }
    };
    let theta_elem = |x: &PathAlgebraElem| -> PreLieElem {
        let mut out = PreLieElem::zero();
        for (&(i, n), k) in x.terms() {
            out = out.add(&theta(i, n).scale(k));
        }
        out
    };
    let vertices: Vec<Decoration> = s.indices();
    for &i in &vertices {
        for n in 1..=grade_bound {
            if alg.is_nonzero(i, n) == sol.component(i, n).is_empty() {
                return Ok(Some(IsoMismatch::ZeroPattern { i, n }));
            }
        }
    }
    for &j in &vertices {
        for &i in &vertices {
            for n in 1..grade_bound {
                for m in 1..=grade_bound - n {
                    let pj = PathAlgebraElem::basis(j, n);
                    let pi = PathAlgebraElem::basis(i, m);
                    let via_path = theta_elem(&alg.mul(&pj, &pi));
                    let via_prelie = prelie_product(table, &theta(j, n), &theta(i, m))?;
                    if via_path != via_prelie {
                        return Ok(Some(IsoMismatch::Product {
                            left: (j, n),
                            right: (i, m),
                            via_path,
                            via_prelie,
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}
