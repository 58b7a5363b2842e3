use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use super::{Sdse, SdseError};
use crate::rational::{factorial, format_rational, Q};
use crate::series::MultiIndex;
use crate::trees::{for_each_multiset, Alphabet, Decoration, Forest, Tree, TreePoly};

/// Homogeneous components `X_i(n)` of the solution, for `n ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    bound: u32,
    // components[i][n - 1]: nonzero terms in canonical tree order
    components: Vec<Vec<Vec<(Tree, Q)>>>,
}

impl Solution {
    fn from_maps(bound: u32, maps: Vec<Vec<FxHashMap<Tree, Q>>>) -> Solution {
        let components = maps
            .into_iter()
            .map(|per_i| {
                per_i
                    .into_iter()
                    .map(|m| {
                        let mut v: Vec<(Tree, Q)> = m.into_iter().filter(|(_, c)| !c.is_zero()).collect();
                        v.sort_by(|a, b| a.0.cmp(&b.0));
                        v
                    })
                    .collect()
            })
            .collect();
        Solution { bound, components }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn num_indices(&self) -> usize {
        self.components.len()
    }

    /// Nonzero terms of `X_i(n)` in canonical order; empty beyond the bound.
    pub fn component(&self, i: Decoration, n: u32) -> &[(Tree, Q)] {
        if n == 0 || n > self.bound {
            return &[];
        }
        &self.components[i.index()][n as usize - 1]
    }

    /// `a_t`.
    pub fn coeff(&self, t: &Tree) -> Q {
        let comp = self.component(t.root(), t.weight());
        match comp.binary_search_by(|(s, _)| s.cmp(t)) {
            Ok(k) => comp[k].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn poly(&self, i: Decoration, n: u32) -> TreePoly {
        let mut p = TreePoly::zero();
        for (t, c) in self.component(i, n) {
            p.add_term(Forest::single(t.clone()), c.clone());
        }
        p
    }

    /// `X_i` truncated at the bound.
    pub fn series(&self, i: Decoration) -> TreePoly {
        let mut p = TreePoly::zero();
        for n in 1..=self.bound {
            p.add_assign(&self.poly(i, n));
        }
        p
    }

    /// Lines `index<TAB>weight<TAB>tree<TAB>coefficient`, ordered by index, weight, tree.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (k, per_i) in self.components.iter().enumerate() {
            let name = alphabet.name(Decoration(k as u32));
            for (w, comp) in per_i.iter().enumerate() {
                for (t, c) in comp {
                    out.push_str(&format!(
                        "{name}\t{}\t{}\t{}\n",
                        w + 1,
                        t.display(alphabet),
                        format_rational(c)
                    ));
                }
            }
        }
        out
    }
}

/// Solves by the closed coefficient formula: for `t = B⁺_i(Π s^{r_s})` with
/// `p_j` children rooted at `j`,
/// `a_t = a^{(i)}_p · Π_j p_j! / Π_s r_s! · Π_s a_s^{r_s}`.
pub fn solve_closed_form(s: &Sdse, bound: u32) -> Result<Solution, SdseError> {
    s.check_budget(bound)?;
    let n_idx = s.len();
    let mut maps: Vec<Vec<FxHashMap<Tree, Q>>> = vec![vec![FxHashMap::default(); bound as usize]; n_idx];
    // every nonzero tree found so far, in canonical order (hence weight order)
    let mut support: Vec<(Tree, Q)> = Vec::new();
    for i in s.indices() {
        let c = s.equation(i).constant_term();
        maps[i.index()][0].insert(Tree::leaf(i), c);
    }
    let mut layer: Vec<(Tree, Q)> = (0..n_idx)
        .flat_map(|k| maps[k][0].iter().map(|(t, c)| (t.clone(), c.clone())))
        .collect();
    for n in 2..=bound {
        layer.sort_by(|a, b| a.0.cmp(&b.0));
        support.append(&mut layer);
        let weights: Vec<u32> = support.iter().map(|(t, _)| t.weight()).collect();
        let mut counts = vec![0u32; n_idx];
        for_each_multiset(&weights, n - 1, &mut |sel| {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut prod = Q::one();
            let mut denom = Q::one();
            let mut children = Vec::new();
            for &(k, m) in sel {
                let (t, a) = &support[k];
                counts[t.root().index()] += m;
                for _ in 0..m {
                    prod *= a;
                    children.push(t.clone());
                }
                denom *= factorial(m);
            }
            let mut multinomial = Q::one();
            for &p in &counts {
                multinomial *= factorial(p);
            }
            let mi = MultiIndex::new(counts.iter().enumerate().map(|(j, &p)| (Decoration(j as u32), p)));
            let base = prod * multinomial / denom;
            for i in 0..n_idx {
                let a = s.equations()[i].coeff(&mi);
                if a.is_zero() {
                    continue;
                }
                let t = Tree::from_sorted(Decoration(i as u32), children.clone());
                layer.push((t, &base * a));
            }
        });
        for (t, c) in &layer {
            maps[t.root().index()][n as usize - 1].insert(t.clone(), c.clone());
        }
    }
    Ok(Solution::from_maps(bound, maps))
}

/// Solves by iterated substitution: `X_i(n) = B⁺_i([F_i(X)]_{n−1})`, with the
/// graded powers `Π_j X_j^{p_j}` maintained incrementally.
pub fn solve_subst(s: &Sdse, bound: u32) -> Result<Solution, SdseError> {
    s.check_budget(bound)?;
    let n_idx = s.len();
    // every multi-index in some F_i, closed under removing one unit of the smallest index
    let mut needed: BTreeMap<MultiIndex, ()> = BTreeMap::new();
    for f in s.equations() {
        for (m, _) in f.terms() {
            if m.degree() < bound {
                let mut cur = m.clone();
                while !cur.is_zero() {
                    needed.insert(cur.clone(), ());
                    let j = cur.entries()[0].0;
                    cur = cur.minus_unit(j).unwrap();
                }
            }
        }
    }
    // powers[p][w] = weight-w part of X^p, as forests
    let mut powers: BTreeMap<MultiIndex, Vec<TreePoly>> = BTreeMap::new();
    let mut unit = vec![TreePoly::zero(); bound as usize];
    unit[0] = TreePoly::one();
    powers.insert(MultiIndex::zero(), unit);
    for p in needed.keys() {
        powers.insert(p.clone(), vec![TreePoly::zero(); bound as usize]);
    }
    // x[j][w] = X_j(w) as a polynomial of single trees
    let mut x: Vec<Vec<TreePoly>> = vec![vec![TreePoly::zero(); bound as usize + 1]; n_idx];
    for n in 1..=bound {
        let w = n - 1;
        // bring every power up to date at weight w
        if w > 0 {
            for p in needed.keys() {
                if p.degree() > w {
                    continue;
                }
                let j = p.entries()[0].0;
                let prev = p.minus_unit(j).unwrap();
                let mut acc = TreePoly::zero();
                for w2 in 1..=w + 1 - p.degree() {
                    let w1 = w - w2;
                    let left = &powers[&prev][w1 as usize];
                    let right = &x[j.index()][w2 as usize];
                    if left.is_zero() || right.is_zero() {
                        continue;
                    }
                    acc.add_assign(&left.mul(right));
                }
                powers.get_mut(p).unwrap()[w as usize] = acc;
            }
        }
        for i in s.indices() {
            let mut comp = TreePoly::zero();
            for (m, a) in s.equation(i).terms() {
                if m.degree() > w {
                    break;
                }
                if let Some(pw) = powers.get(m) {
                    comp.add_assign(&pw[w as usize].scale(a));
                }
            }
            let mut grafted = TreePoly::zero();
            for (forest, c) in comp.iter() {
                grafted.add_term(Forest::single(Tree::from_sorted(i, forest.trees().to_vec())), c.clone());
            }
            x[i.index()][n as usize] = grafted;
        }
    }
    let maps = x
        .into_iter()
        .map(|per_i| {
            per_i
                .into_iter()
                .skip(1)
                .map(|p| {
                    p.iter()
                        .map(|(f, c)| (f.as_tree().expect("single tree").clone(), c.clone()))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(Solution::from_maps(bound, maps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::series::parse_expr;

    fn system(eqs: &[&str], d: u32) -> Sdse {
        let al = Alphabet::numeric(eqs.len());
        let fs = eqs.iter().map(|e| parse_expr(e, &al, d).unwrap()).collect();
        Sdse::normalized(al, fs, d).unwrap()
    }

    #[test]
    fn cycle_ladders() {
        let s = system(&["1 + h2", "1 + h3", "1 + h4", "1 + h1"], 8);
        let sol = solve_closed_form(&s, 8).unwrap();
        for i in 0..4u32 {
            for n in 1..=8u32 {
                let comp = sol.component(Decoration(i), n);
                assert_eq!(comp.len(), 1);
                let ladder: Vec<u32> = comp[0].0.as_ladder().unwrap().iter().map(|d| d.0).collect();
                let expect: Vec<u32> = (0..n).map(|k| (i + k) % 4).collect();
                assert_eq!(ladder, expect);
                assert_eq!(comp[0].1, int(1));
            }
        }
        assert_eq!(sol, solve_subst(&s, 8).unwrap());
    }

    #[test]
    fn geometric_self_loop() {
        let s = system(&["(1 - h1)^(-1)"], 6);
        let sol = solve_closed_form(&s, 6).unwrap();
        let counts: Vec<usize> = (1..=6).map(|n| sol.component(Decoration(0), n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 20]);
        let al = s.alphabet().clone();
        let cherry = Tree::parse("1[1,1]", &al).unwrap();
        assert_eq!(sol.coeff(&cherry), int(1));
        assert_eq!(sol, solve_subst(&s, 6).unwrap());
    }

    #[test]
    fn multinomial_factors() {
        // F = 1 + h^2: a_{1[1,1]} = 1, a_{1[1[1,1],1[1,1]]} = 1
        let s = system(&["1 + 2*h1^(2)"], 6);
        let sol = solve_closed_form(&s, 5).unwrap();
        let al = s.alphabet().clone();
        assert_eq!(sol.coeff(&Tree::parse("1[1,1]", &al).unwrap()), int(2));
        assert_eq!(sol.coeff(&Tree::parse("1[1,1[1,1]]", &al).unwrap()), int(8));
        assert_eq!(sol, solve_subst(&s, 5).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let s = system(&["1 + h1"], 3);
        assert!(solve_closed_form(&s, 4).is_ok());
        assert!(matches!(
            solve_closed_form(&s, 5),
            Err(SdseError::TruncationBudget { .. })
        ));
        assert!(matches!(solve_subst(&s, 5), Err(SdseError::TruncationBudget { .. })));
    }

    #[test]
    fn text_output() {
        let s = system(&["1 + h2", "1 + h1"], 3);
        let sol = solve_closed_form(&s, 2).unwrap();
        assert_eq!(
            sol.to_text(s.alphabet()),
            "1\t1\t1\t1\n1\t2\t1[2]\t1\n2\t1\t2\t1\n2\t2\t2[1]\t1\n"
        );
    }
}
