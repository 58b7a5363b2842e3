//! The pre-Lie algebra `g_(S)` on the basis `f_i(k)`, its path-algebra model
//! in the associative case, the dilated product and the unit group.

mod elem;
mod group;
mod path;

pub use elem::{GradedElem, PathAlgebraElem, PreLieElem};
pub use group::{UnitElem, UnitGroup};
pub use path::{check_path_isomorphism, ConditionC, IsoMismatch, PathAlgebra};

use std::fmt::Write as _;

use num_traits::Zero;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::classify::LevelAssignment;
use crate::hopf::single_edge_cuts;
use crate::rational::{format_rational, int, Q};
use crate::sdse::{Lambda, LambdaTable, Solution};
use crate::trees::{Alphabet, Decoration, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreLieError {
    #[error("λ_{k}^(#{i},#{j}) is beyond the table (max n = {max_n})")]
    OutOfRange { i: u32, j: u32, k: u32, max_n: u32 },
    #[error("λ_{k}^(#{i},#{j}) is undetermined")]
    Undetermined { i: u32, j: u32, k: u32 },
    #[error("grade bound {bound} needs λ up to n = {needed}, but the table stops at {max_n}")]
    GradeBound { bound: u32, needed: u32, max_n: u32 },
    #[error("the product is not associative: {0}")]
    NotAssociative(String),
    #[error("index #{index} is outside the {len} indices")]
    Index { index: u32, len: usize },
    #[error("solution bound {have} is below the grade bound {bound}")]
    SolutionBound { have: u32, bound: u32 },
}

/// Where structure constants come from.
#[derive(Clone, Copy, Debug)]
pub enum Constants<'a> {
    /// Only the table's entries; anything beyond is an error.
    Exact(&'a LambdaTable),
    /// Beyond the table, rows of finite-level vertices continue affinely.
    AssumeAffine(&'a LambdaTable, &'a LevelAssignment),
}

impl<'a> Constants<'a> {
    pub fn table(&self) -> &'a LambdaTable {
        match self {
            Constants::Exact(t) | Constants::AssumeAffine(t, _) => t,
        }
    }

    /// `λ_k^{(i,j)}`.
    pub fn lambda(&self, i: Decoration, j: Decoration, k: u32) -> Result<Q, PreLieError> {
        let table = self.table();
        let n = table.num_indices();
        for d in [i, j] {
            if d.index() >= n {
                return Err(PreLieError::Index { index: d.0, len: n });
            }
        }
        match table.get(i, j, k) {
            Some(Lambda::Value(q)) => return Ok(q.clone()),
            Some(Lambda::Undetermined) => return Err(PreLieError::Undetermined { i: i.0, j: j.0, k }),
            None => {}
        }
        if let Constants::AssumeAffine(_, levels) = self {
            let level = levels.get(i);
            if let (Some(a), Some(b)) = (level.intercept(j), level.slope(j)) {
                return Ok(a + b * int(k as i64 - 1));
            }
        }
        Err(PreLieError::OutOfRange {
            i: i.0,
            j: j.0,
            k,
            max_n: table.max_n(),
        })
    }

    /// `f_j(l) ⋆ f_i(k) = λ_k^{(i,j)} f_i(k+l)`, extended bilinearly.
    pub fn product(&self, x: &PreLieElem, y: &PreLieElem) -> Result<PreLieElem, PreLieError> {
        let mut out = PreLieElem::zero();
        for (&(j, l), a) in x.terms() {
            for (&(i, k), b) in y.terms() {
                let lambda = self.lambda(i, j, k)?;
                if !lambda.is_zero() {
                    out.add_term(i, k + l, lambda * a * b);
                }
            }
        }
        Ok(out)
    }
}

/// The product of `g_(S)` using only the table's entries.
pub fn prelie_product(table: &LambdaTable, x: &PreLieElem, y: &PreLieElem) -> Result<PreLieElem, PreLieError> {
    Constants::Exact(table).product(x, y)
}

/// As [`prelie_product`], but rows of vertices with a certified finite level
/// are extended affinely past the table.
pub fn prelie_product_affine(
    table: &LambdaTable,
    levels: &LevelAssignment,
    x: &PreLieElem,
    y: &PreLieElem,
) -> Result<PreLieElem, PreLieError> {
    Constants::AssumeAffine(table, levels).product(x, y)
}

/// Basis elements `f_i(k)` with `k ≤ max_grade` that are nonzero according
/// to the table (`X_i(k) ≠ 0`, i.e. the `λ_k^{(i,·)}` entries are determined).
pub fn basis(table: &LambdaTable, max_grade: u32) -> Vec<(Decoration, u32)> {
    let mut out = Vec::new();
    for i in 0..table.num_indices() as u32 {
        let i = Decoration(i);
        for k in 1..=max_grade {
            if matches!(table.get(i, Decoration(0), k), Some(Lambda::Value(_))) {
                out.push((i, k));
            }
        }
    }
    out
}

type Basis = (Decoration, u32);

/// A basis triple on which an identity fails, with both sides expanded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleWitness {
    pub x: Basis,
    pub y: Basis,
    pub z: Basis,
    pub lhs: PreLieElem,
    pub rhs: PreLieElem,
}

impl TripleWitness {
    pub fn to_text(&self, alphabet: &Alphabet, lhs_form: &str, rhs_form: &str) -> String {
        let f = |(i, k): Basis| format!("f_{}({k})", alphabet.name(i));
        let subst = |form: &str| {
            form.replace('x', &f(self.x))
                .replace('y', &f(self.y))
                .replace('z', &f(self.z))
        };
        let mut out = String::new();
        let _ = writeln!(out, "{} = {}", subst(lhs_form), self.lhs.to_text(alphabet));
        let _ = writeln!(out, "{} = {}", subst(rhs_form), self.rhs.to_text(alphabet));
        out
    }
}

fn triples(table: &LambdaTable, grade_bound: u32) -> Result<Vec<(Basis, Basis, Basis)>, PreLieError> {
    let needed = grade_bound.saturating_sub(1);
    if needed > table.max_n() {
        return Err(PreLieError::GradeBound {
            bound: grade_bound,
            needed,
            max_n: table.max_n(),
        });
    }
    let b = basis(table, grade_bound.saturating_sub(2));
    let mut out = Vec::new();
    for &x in &b {
        for &y in &b {
            for &z in &b {
                if x.1 + y.1 + z.1 <= grade_bound {
                    out.push((x, y, z));
                }
            }
        }
    }
    Ok(out)
}

fn scan<F>(table: &LambdaTable, grade_bound: u32, sides: F) -> Result<Option<TripleWitness>, PreLieError>
where
    F: Fn(&Constants, &PreLieElem, &PreLieElem, &PreLieElem) -> Result<(PreLieElem, PreLieElem), PreLieError> + Sync,
{
    let c = Constants::Exact(table);
    let list = triples(table, grade_bound)?;
    list.par_iter()
        .map(|&(x, y, z)| {
            let (ex, ey, ez) = (
                PreLieElem::basis(x.0, x.1),
                PreLieElem::basis(y.0, y.1),
                PreLieElem::basis(z.0, z.1),
            );
            let (lhs, rhs) = sides(&c, &ex, &ey, &ez)?;
            Ok((lhs != rhs).then_some(TripleWitness { x, y, z, lhs, rhs }))
        })
        .find_map_first(|r: Result<Option<TripleWitness>, PreLieError>| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .transpose()
        .map(Option::flatten)
}

pub const PRELIE_LHS: &str = "(x ⋆ y) ⋆ z - x ⋆ (y ⋆ z)";
pub const PRELIE_RHS: &str = "(y ⋆ x) ⋆ z - y ⋆ (x ⋆ z)";
pub const ASSOC_LHS: &str = "(x ⋆ y) ⋆ z";
pub const ASSOC_RHS: &str = "x ⋆ (y ⋆ z)";

/// Exhaustive check of `(x⋆y)⋆z − x⋆(y⋆z) = (y⋆x)⋆z − y⋆(x⋆z)` over basis
/// triples of total grade at most `grade_bound`. Returns the least failing
/// triple in lexicographic order.
pub fn check_prelie_identity(table: &LambdaTable, grade_bound: u32) -> Result<Option<TripleWitness>, PreLieError> {
    scan(table, grade_bound, |c, x, y, z| {
        let lhs = c.product(&c.product(x, y)?, z)?.sub(&c.product(x, &c.product(y, z)?)?);
        let rhs = c.product(&c.product(y, x)?, z)?.sub(&c.product(y, &c.product(x, z)?)?);
        Ok((lhs, rhs))
    })
}

/// Exhaustive check of `(x⋆y)⋆z = x⋆(y⋆z)` over basis triples of total
/// grade at most `grade_bound`.
pub fn check_associative(table: &LambdaTable, grade_bound: u32) -> Result<Option<TripleWitness>, PreLieError> {
    scan(table, grade_bound, |c, x, y, z| {
        Ok((c.product(&c.product(x, y)?, z)?, c.product(x, &c.product(y, z)?)?))
    })
}

/// `e_a · e_b = e_b`: the permutative product on the basis of `A_I`.
pub fn permutative_mul(_a: usize, b: usize) -> usize {
    b
}

/// The product of the pre-Lie algebra `g_(S) ⊗ A_I` on the basis
/// `f_x(k) = f_{parent(x)}(k) ⊗ e_x`:
/// `(f_{p(y)}(l) ⊗ e_y) ⋆ (f_{p(x)}(k) ⊗ e_x) = λ_k^{(p(x),p(y))} f_x(k+l)`.
pub fn dilated_product(
    table: &LambdaTable,
    parent: &[Decoration],
    x: &PreLieElem,
    y: &PreLieElem,
) -> Result<PreLieElem, PreLieError> {
    let c = Constants::Exact(table);
    let base = |d: Decoration| {
        parent.get(d.index()).copied().ok_or(PreLieError::Index {
            index: d.0,
            len: parent.len(),
        })
    };
    let mut out = PreLieElem::zero();
    for (&(b, l), u) in x.terms() {
        for (&(a, k), v) in y.terms() {
            let lambda = c.lambda(base(a)?, base(b)?, k)?;
            if !lambda.is_zero() {
                let e = Decoration(permutative_mul(b.index(), a.index()) as u32);
                out.add_term(e, k + l, lambda * u * v);
            }
        }
    }
    Ok(out)
}

/// A pair of trees where `Σ_t n(t′,t″;t) a_t ≠ λ_k^{(i,j)} a_{t′} a_{t″}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualityMismatch {
    pub pruned: Tree,
    pub trunk: Tree,
    pub from_cuts: Q,
    pub from_table: Option<Q>,
}

/// Checks the table against single-edge cuts of the solution: for all
/// `t′ ∈ T^{(j)}(l)`, `t″ ∈ T^{(i)}(k)` with `k + l ≤ max_grade`,
/// `Σ_{t ∈ T^{(i)}(k+l)} n(t′,t″;t) a_t = λ_k^{(i,j)} a_{t′} a_{t″}`.
pub fn check_structure_duality(
    sol: &Solution,
    table: &LambdaTable,
    max_grade: u32,
) -> Result<Option<DualityMismatch>, PreLieError> {
    if sol.bound() < max_grade {
        return Err(PreLieError::SolutionBound {
            have: sol.bound(),
            bound: max_grade,
        });
    }
    if max_grade.saturating_sub(1) > table.max_n() {
        return Err(PreLieError::GradeBound {
            bound: max_grade,
            needed: max_grade - 1,
            max_n: table.max_n(),
        });
    }
    let num = sol.num_indices() as u32;
    for i in (0..num).map(Decoration) {
        for w in 2..=max_grade {
            let mut cuts: FxHashMap<(Tree, Tree), Q> = FxHashMap::default();
            for (t, a) in sol.component(i, w) {
                for (p, r, n) in single_edge_cuts(t) {
                    *cuts.entry((p, r)).or_insert_with(Q::zero) += a * int(n as i64);
                }
            }
            let mut pairs: Vec<(Tree, Tree)> = cuts.keys().cloned().collect();
            for k in 1..w {
                for j in (0..num).map(Decoration) {
                    for (t1, _) in sol.component(j, w - k) {
                        for (t2, _) in sol.component(i, k) {
                            pairs.push((t1.clone(), t2.clone()));
                        }
                    }
                }
            }
            pairs.sort();
            pairs.dedup();
            for (p, r) in pairs {
                let from_cuts = cuts.get(&(p.clone(), r.clone())).cloned().unwrap_or_else(Q::zero);
                let product = sol.coeff(&p) * sol.coeff(&r);
                let lambda = table.value(i, p.root(), r.weight()).cloned();
                let expected = match &lambda {
                    Some(l) => l * &product,
                    None if product.is_zero() => Q::zero(),
                    None => {
                        return Ok(Some(DualityMismatch {
                            pruned: p,
                            trunk: r,
                            from_cuts,
                            from_table: None,
                        }))
                    }
                };
                if from_cuts != expected {
                    return Ok(Some(DualityMismatch {
                        pruned: p,
                        trunk: r,
                        from_cuts,
                        from_table: lambda,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// Structure constants as rows `i j k λ`.
pub fn structure_constants_text(table: &LambdaTable, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for ((i, j, k), l) in table.entries() {
        let value = match l {
            Lambda::Value(q) => format_rational(q),
            Lambda::Undetermined => "⊥".to_string(),
        };
        let _ = writeln!(out, "{}\t{}\t{k}\t{value}", alphabet.name(*i), alphabet.name(*j));
    }
    out
}
