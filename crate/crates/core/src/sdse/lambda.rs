use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{LambdaTable, Sdse, SdseError};
use crate::rational::{int, Q};
use crate::series::{MultiIndex, Series};
use crate::trees::{Alphabet, Decoration};

/// `λ_n^{(i,j)}` along a path `i = i_1 → … → i_n`:
/// `a^{(i_n)}_j + Σ_p (1 + δ_{j,i_{p+1}}) a^{(i_p)}_{j,i_{p+1}} / a^{(i_p)}_{i_{p+1}}`.
pub fn lambda_from_path(s: &Sdse, path: &[Decoration], j: Decoration) -> Result<Q, SdseError> {
    let Some(&last) = path.last() else {
        return Err(SdseError::EmptyPath);
    };
    for &v in path {
        if !s.equation(v).constant_term().is_one() {
            return Err(SdseError::NotNormalized {
                index: s.name(v).to_string(),
            });
        }
    }
    let mut acc = s.linear(last, j);
    for w in path.windows(2) {
        let (from, to) = (w[0], w[1]);
        let step = s.linear(from, to);
        if step.is_zero() {
            return Err(SdseError::ZeroPathStep {
                from: s.name(from).to_string(),
                to: s.name(to).to_string(),
            });
        }
        let factor = if j == to { int(2) } else { int(1) };
        acc += factor * s.quadratic(from, j, to) / step;
    }
    Ok(acc)
}

/// Rebuilds `F_i` to `degree` from the recursion
/// `a_{p+ε_j} = (λ_{|p|+1}^{(i,j)} − Σ_l p_l a^{(l)}_j) a_p / (p_j + 1)`, `a_0 = 1`,
/// using for each monomial the smallest index with positive exponent as `j`.
/// `linear[l][j]` is `a^{(l)}_j`. Degrees above `table.max_n()` are not reachable.
pub fn reconstruct_series(
    table: &LambdaTable,
    linear: &[Vec<Q>],
    i: Decoration,
    degree: u32,
    alphabet: &Alphabet,
) -> Result<Series, SdseError> {
    let degree = degree.min(table.max_n());
    let num = linear.len() as u32;
    let mut out = Series::one(degree);
    let mut level: BTreeMap<MultiIndex, Q> = BTreeMap::new();
    level.insert(MultiIndex::zero(), Q::one());
    for k in 0..degree {
        let mut next: BTreeMap<MultiIndex, Q> = BTreeMap::new();
        for (p, a_p) in &level {
            let max_j = p.entries().first().map_or(num - 1, |&(d, _)| d.0);
            for j in (0..=max_j).map(Decoration) {
                let lambda = match table.get(i, j, k + 1) {
                    Some(super::Lambda::Value(q)) => q.clone(),
                    other => {
                        return Err(SdseError::MissingLambda {
                            i: alphabet.name(i).to_string(),
                            j: alphabet.name(j).to_string(),
                            n: k + 1,
                            reason: if other.is_some() { "undetermined" } else { "absent" },
                        })
                    }
                };
                let mut shift = Q::zero();
                for &(l, e) in p.entries() {
                    shift += &linear[l.index()][j.index()] * int(e as i64);
                }
                let c = (lambda - shift) * a_p / int(p.exponent(j) as i64 + 1);
                if !c.is_zero() {
                    next.insert(p.plus_unit(j), c);
                }
            }
        }
        for (m, c) in &next {
            out.set(m.clone(), c.clone());
        }
        level = next;
    }
    Ok(out)
}

/// A tuple violating the additive compatibility of the λ's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditivityViolation {
    pub i: Decoration,
    pub j: Decoration,
    /// `(d_l, n_l)` pairs.
    pub parts: Vec<(Decoration, u32)>,
    pub lhs: Q,
    pub rhs: Q,
}

/// Checks `λ_{n_1+…+n_p+1}^{(i,j)} = λ_{p+1}^{(i,j)} + Σ_l (λ_{n_l}^{(d_l,j)} − a^{(d_l)}_j)`
/// for every `i, j`, every monomial `h_{d_1}…h_{d_p}` in the support of `F_i` and
/// every grading `n_l ≥ 1` whose λ's lie in the table. Tuples touching missing
/// or `⊥` entries are skipped. Returns the first violation in scan order.
pub fn check_additive_lambdas(s: &Sdse, table: &LambdaTable) -> Option<AdditivityViolation> {
    let max_n = table.max_n();
    for i in s.indices() {
        for (m, _) in s.equation(i).terms() {
            let p = m.degree();
            if p == 0 || p + 1 > max_n {
                continue;
            }
            let mut gradings = Vec::new();
            grade_assignments(m.entries(), max_n - 1, &mut Vec::new(), &mut gradings);
            for parts in gradings {
                let total: u32 = parts.iter().map(|&(_, n)| n).sum();
                for j in s.indices() {
                    let Some(lhs) = table.value(i, j, total + 1) else {
                        continue;
                    };
                    let Some(base) = table.value(i, j, p + 1) else { continue };
                    let mut rhs = base.clone();
                    let mut known = true;
                    for &(d, n) in &parts {
                        match table.value(d, j, n) {
                            Some(l) => rhs += l - s.linear(d, j),
                            None => {
                                known = false;
                                break;
                            }
                        }
                    }
                    if known && lhs != &rhs {
                        return Some(AdditivityViolation {
                            i,
                            j,
                            parts,
                            lhs: lhs.clone(),
                            rhs,
                        });
                    }
                }
            }
        }
    }
    None
}

// every way to give each of the d's (with multiplicity) a grade ≥ 1, as
// non-decreasing grades per variable, with total at most `budget`
fn grade_assignments(
    vars: &[(Decoration, u32)],
    budget: u32,
    current: &mut Vec<(Decoration, u32)>,
    out: &mut Vec<Vec<(Decoration, u32)>>,
) {
    let Some((&(d, e), rest)) = vars.split_first() else {
        out.push(current.clone());
        return;
    };
    fn seqs(
        d: Decoration,
        left: u32,
        min: u32,
        budget: u32,
        rest: &[(Decoration, u32)],
        current: &mut Vec<(Decoration, u32)>,
        out: &mut Vec<Vec<(Decoration, u32)>>,
    ) {
        if left == 0 {
            grade_assignments(rest, budget, current, out);
            return;
        }
        let mut n = min;
        // the remaining `left − 1` entries need at least `n` each
        while n * left <= budget {
            current.push((d, n));
            seqs(d, left - 1, n, budget - n, rest, current, out);
            current.pop();
            n += 1;
        }
    }
    seqs(d, e, 1, budget, rest, current, out);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::sdse::check_hopf;
    use crate::series::parse_expr;

    fn system(eqs: &[&str], d: u32) -> Sdse {
        let al = Alphabet::numeric(eqs.len());
        let fs = eqs.iter().map(|e| parse_expr(e, &al, d).unwrap()).collect();
        Sdse::normalized(al, fs, d).unwrap()
    }

    #[test]
    fn path_formula() {
        let s = system(&["(1 - h1)^(-1)"], 6);
        for n in 1..=5 {
            let path = vec![Decoration(0); n];
            assert_eq!(
                lambda_from_path(&s, &path, Decoration(0)).unwrap(),
                int(2 * n as i64 - 1)
            );
        }
        let c = system(&["1 + h2", "1 + h3", "1 + h4", "1 + h1"], 4);
        let path = [Decoration(0), Decoration(1), Decoration(2)];
        assert_eq!(lambda_from_path(&c, &path, Decoration(3)).unwrap(), int(1));
        assert!(matches!(
            lambda_from_path(&c, &[Decoration(0), Decoration(2)], Decoration(3)),
            Err(SdseError::ZeroPathStep { .. })
        ));
        assert_eq!(lambda_from_path(&c, &[], Decoration(0)), Err(SdseError::EmptyPath));
    }

    #[test]
    fn reconstructs_geometric() {
        let s = system(&["(1 - h1)^(-1)"], 8);
        let v = check_hopf(&s, 8).unwrap();
        let f = reconstruct_series(&v.table, &s.linear_matrix(), Decoration(0), 8, s.alphabet()).unwrap();
        assert_eq!(f, s.equation(Decoration(0)).truncate(7));
    }

    #[test]
    fn reconstructs_from_closed_form_table() {
        // λ_n = 1 + 2(n − 1) with linear coefficient 1 gives (1 − h)^{-1}; slope 3/2 gives f_{1/2}
        let al = Alphabet::numeric(1);
        let t = LambdaTable::from_fn(1, 6, |_, _, n| int(1) + ratio(3, 2) * int(n as i64 - 1));
        let f = reconstruct_series(&t, &[vec![int(1)]], Decoration(0), 6, &al).unwrap();
        let expect = parse_expr("fb(1/2, h1)", &al, 6).unwrap();
        assert_eq!(f, expect);
    }

    #[test]
    fn missing_entries_are_reported() {
        let al = Alphabet::numeric(1);
        let mut t = LambdaTable::new(1, 3);
        t.insert(Decoration(0), Decoration(0), 1, crate::sdse::Lambda::Value(int(1)));
        t.insert(Decoration(0), Decoration(0), 2, crate::sdse::Lambda::Undetermined);
        let r = reconstruct_series(&t, &[vec![int(1)]], Decoration(0), 3, &al);
        assert!(matches!(
            r,
            Err(SdseError::MissingLambda {
                n: 2,
                reason: "undetermined",
                ..
            })
        ));
    }

    #[test]
    fn additive_lambdas_on_hopf_and_affine() {
        let s = system(&["(1 - h1)^(-1)*fb(1/2, 2*h2)", "fb(1/2, 2*h1)*(1 - h2)^(-1)"], 7);
        let v = check_hopf(&s, 7).unwrap();
        assert!(v.is_hopf());
        assert_eq!(check_additive_lambdas(&s, &v.table), None);
        let c = system(&["1 + h2", "1 + h1"], 7);
        let v = check_hopf(&c, 7).unwrap();
        assert_eq!(check_additive_lambdas(&c, &v.table), None);
    }

    #[test]
    fn grade_enumeration() {
        let mut out = Vec::new();
        grade_assignments(&[(Decoration(0), 2), (Decoration(1), 1)], 4, &mut Vec::new(), &mut out);
        // (1,1|1) (1,1|2) (1,2|1)
        assert_eq!(out.len(), 3);
    }
}
