use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::{format_rational, Q};
use crate::trees::{Alphabet, Decoration};

/// A finite combination of graded basis vectors `b_i(k)`, `k ≥ 1`, with no
/// explicit zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedElem {
    terms: BTreeMap<(Decoration, u32), Q>,
}

/// Elements of `g_(S)` on the basis `f_i(k)`.
pub type PreLieElem = GradedElem;
/// Elements of `A_G` on the basis `P_i(n)`.
pub type PathAlgebraElem = GradedElem;

impl GradedElem {
    pub fn zero() -> GradedElem {
        GradedElem::default()
    }

    pub fn basis(i: Decoration, k: u32) -> GradedElem {
        let mut e = GradedElem::zero();
        e.add_term(i, k, Q::one());
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Decoration, u32, Q)>) -> GradedElem {
        let mut e = GradedElem::zero();
        for (i, k, c) in terms {
            e.add_term(i, k, c);
        }
        e
    }

    pub fn add_term(&mut self, i: Decoration, k: u32, c: Q) {
        assert!(k >= 1, "grades start at 1");
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, k)).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, k));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Decoration, u32), &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: Decoration, k: u32) -> Q {
        self.terms.get(&(i, k)).cloned().unwrap_or_else(Q::zero)
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

    pub fn max_grade(&self) -> u32 {
        self.terms.keys().map(|&(_, k)| k).max().unwrap_or(0)
    }

    pub fn add(&self, other: &GradedElem) -> GradedElem {
        let mut out = self.clone();
        for (&(i, k), c) in &other.terms {
            out.add_term(i, k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &GradedElem) -> GradedElem {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> GradedElem {
        GradedElem::from_terms(self.terms.iter().map(|(&(i, k), a)| (i, k, a * c)))
    }

    /// The homogeneous part of grade `k`.
    pub fn component(&self, k: u32) -> GradedElem {
        GradedElem::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, g), _)| g == k)
                .map(|(&(i, g), a)| (i, g, a.clone())),
        )
    }

    /// Drops every term of grade above `bound`.
    pub fn truncate(&self, bound: u32) -> GradedElem {
        GradedElem::from_terms(
            self.terms
                .iter()
                .filter(|(&(_, g), _)| g <= bound)
                .map(|(&(i, g), a)| (i, g, a.clone())),
        )
    }

    /// `c*f_i(k) + …` in grade-then-index order; `0` when empty.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.to_text_with(alphabet, "f")
    }

    pub fn to_text_with(&self, alphabet: &Alphabet, symbol: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut keys: Vec<&(Decoration, u32)> = self.terms.keys().collect();
        keys.sort_by_key(|&&(i, k)| (k, i));
        let mut out = String::new();
        for (n, key) in keys.into_iter().enumerate() {
            let c = &self.terms[key];
            let basis = format!("{symbol}_{}({})", alphabet.name(key.0), key.1);
            let (neg, mag) = if c < &Q::zero() { (true, -c) } else { (false, c.clone()) };
            let sign = match (n, neg) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            out.push_str(sign);
            if !mag.is_one() {
                out.push_str(&format_rational(&mag));
                out.push('*');
            }
            out.push_str(&basis);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn arithmetic_and_text() {
        let d = Decoration;
        let x = GradedElem::from_terms([(d(0), 2, int(3)), (d(1), 1, int(1)), (d(0), 1, ratio(-1, 2))]);
        let al = Alphabet::numeric(2);
        assert_eq!(x.to_text(&al), "-1/2*f_1(1) + f_2(1) + 3*f_1(2)");
        assert!(x.sub(&x).is_zero());
        assert_eq!(x.component(1).len(), 2);
        assert_eq!(x.truncate(1), x.component(1));
        assert_eq!(x.max_grade(), 2);
        assert_eq!(GradedElem::zero().to_text(&al), "0");
        assert_eq!(GradedElem::basis(d(1), 3).to_text_with(&al, "P"), "P_2(3)");
    }
}
