use super::{check_associative, prelie_product, PreLieElem, PreLieError};
use crate::sdse::LambdaTable;
use crate::trees::Alphabet;

/// `1 + Σ_k x_k` with `x_k` of grade `k`, truncated at the group's bound.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitElem {
    pub x: PreLieElem,
}

impl UnitElem {
    pub fn one() -> UnitElem {
        UnitElem::default()
    }

    pub fn is_one(&self) -> bool {
        self.x.is_zero()
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        if self.x.is_zero() {
            return "1".to_string();
        }
        let rest = self.x.to_text(alphabet);
        match rest.strip_prefix('-') {
            Some(r) => format!("1 - {r}"),
            None => format!("1 + {rest}"),
        }
    }
}

/// Units `1 + x` of the unitized completion of an associative `g_(S)`,
/// computed modulo grades above `bound`, with `(1+x)(1+y) = 1 + x + y + x⋆y`.
#[derive(Clone, Debug)]
pub struct UnitGroup<'a> {
    table: &'a LambdaTable,
    bound: u32,
}

impl<'a> UnitGroup<'a> {
    /// Rejects tables whose product is not associative up to `bound`.
    pub fn new(table: &'a LambdaTable, bound: u32) -> Result<UnitGroup<'a>, PreLieError> {
        if let Some(w) = check_associative(table, bound)? {
            return Err(PreLieError::NotAssociative(format!(
                "basis triple (#{}, {}), (#{}, {}), (#{}, {})",
                w.x.0 .0, w.x.1, w.y.0 .0, w.y.1, w.z.0 .0, w.z.1
            )));
        }
        Ok(UnitGroup { table, bound })
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn element(&self, x: PreLieElem) -> UnitElem {
        UnitElem {
            x: x.truncate(self.bound),
        }
    }

    fn star(&self, x: &PreLieElem, y: &PreLieElem) -> Result<PreLieElem, PreLieError> {
        // only pairs landing at or below the bound are needed
        let mut out = PreLieElem::zero();
        for (&(j, l), a) in x.terms() {
            for (&(i, k), b) in y.terms() {
                if k + l <= self.bound {
                    let xl = PreLieElem::from_terms([(j, l, a.clone())]);
                    let yk = PreLieElem::from_terms([(i, k, b.clone())]);
                    out = out.add(&prelie_product(self.table, &xl, &yk)?);
                }
            }
        }
        Ok(out)
    }

    pub fn mul(&self, a: &UnitElem, b: &UnitElem) -> Result<UnitElem, PreLieError> {
        let x = a.x.add(&b.x).add(&self.star(&a.x, &b.x)?);
        Ok(self.element(x))
    }

    /// The two-sided inverse, solved grade by grade from
    /// `y_k = −x_k − Σ_{p+q=k} x_p ⋆ y_q`.
    pub fn inverse(&self, a: &UnitElem) -> Result<UnitElem, PreLieError> {
        let mut y = PreLieElem::zero();
        for k in 1..=self.bound {
            let mut yk = a.x.component(k).scale(&-crate::rational::one());
            let cross = self.star(&a.x, &y)?.component(k);
            yk = yk.sub(&cross);
            y = y.add(&yk);
        }
        Ok(UnitElem { x: y })
    }
}
