//! Truncated multivariate formal power series over ℚ.
//!
//! A [`Series`] carries its truncation degree `D` explicitly; every stored
//! monomial has total degree at most `D` and arithmetic never exceeds it.

mod expr;
mod substitute;

pub use expr::{parse_expr, Atom, Expr, Factor, SignedTerm};
pub use substitute::substitute;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::{factorial, format_rational, int, Q};
use crate::trees::{Alphabet, Decoration};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("parse error at position {pos}: expected {expected}")]
    Parse { pos: usize, expected: String },
    #[error("unknown index `{name}` at position {pos}")]
    UnknownIndex { name: String, pos: usize },
    #[error("malformed rational `{text}` at position {pos}")]
    MalformedRational { text: String, pos: usize },
    #[error("series with zero constant term is not invertible")]
    NotInvertible,
    #[error("composition needs an inner series with zero constant term")]
    NonzeroConstant,
    #[error("substituted element for index {0} has a weight-0 part")]
    WeightZeroPart(u32),
}

/// Exponent vector `(p_1, ..., p_N)` stored sparsely without zero entries.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    exps: Vec<(Decoration, u32)>,
    degree: u32,
}

impl MultiIndex {
    pub fn zero() -> MultiIndex {
        MultiIndex::default()
    }

    /// `ε_d`.
    pub fn unit(d: Decoration) -> MultiIndex {
        MultiIndex {
            exps: vec![(d, 1)],
            degree: 1,
        }
    }

    pub fn new(entries: impl IntoIterator<Item = (Decoration, u32)>) -> MultiIndex {
        let mut map: BTreeMap<Decoration, u32> = BTreeMap::new();
        for (d, e) in entries {
            *map.entry(d).or_default() += e;
        }
        let exps: Vec<_> = map.into_iter().filter(|&(_, e)| e > 0).collect();
        let degree = exps.iter().map(|&(_, e)| e).sum();
        MultiIndex { exps, degree }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponent(&self, d: Decoration) -> u32 {
        self.exps.iter().find(|&&(x, _)| x == d).map_or(0, |&(_, e)| e)
    }

    pub fn entries(&self) -> &[(Decoration, u32)] {
        &self.exps
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex::new(self.exps.iter().chain(other.exps.iter()).copied())
    }

    pub fn plus_unit(&self, d: Decoration) -> MultiIndex {
        self.add(&MultiIndex::unit(d))
    }

    /// `p − ε_d`, if `p_d > 0`.
    pub fn minus_unit(&self, d: Decoration) -> Option<MultiIndex> {
        if self.exponent(d) == 0 {
            return None;
        }
        Some(MultiIndex::new(self.exps.iter().map(|&(x, e)| {
            if x == d {
                (x, e - 1)
            } else {
                (x, e)
            }
        })))
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        self.exps
            .iter()
            .map(|&(d, e)| {
                if e == 1 {
                    format!("h{}", alphabet.name(d))
                } else {
                    format!("h{}^({})", alphabet.name(d), e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            // within a degree, larger exponents of earlier variables come first
            let (mut a, mut b) = (self.exps.iter(), other.exps.iter());
            loop {
                match (a.next(), b.next()) {
                    (None, None) => return Ordering::Equal,
                    (Some(_), None) => return Ordering::Less,
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(&(da, ea)), Some(&(db, eb))) => {
                        if da != db {
                            return da.cmp(&db);
                        }
                        if ea != eb {
                            return eb.cmp(&ea);
                        }
                    }
                }
            }
        })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps.iter().map(|(d, e)| (d.0, *e)).collect::<Vec<_>>())
    }
}

/// Truncated power series `Σ_p a_p h^p` with `|p| ≤ D`.
#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    degree: u32,
    coeffs: BTreeMap<MultiIndex, Q>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(D={}, {{", self.degree)?;
        for (k, (m, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m:?}: {}", format_rational(c))?;
        }
        f.write_str("})")
    }
}

impl Series {
    pub fn zero(degree: u32) -> Series {
        Series {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: Q, degree: u32) -> Series {
        let mut s = Series::zero(degree);
        s.set(MultiIndex::zero(), c);
        s
    }

    pub fn one(degree: u32) -> Series {
        Series::constant(Q::one(), degree)
    }

    /// The variable `h_d`.
    pub fn var(d: Decoration, degree: u32) -> Series {
        let mut s = Series::zero(degree);
        s.set(MultiIndex::unit(d), Q::one());
        s
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, Q)>, degree: u32) -> Series {
        let mut s = Series::zero(degree);
        for (m, c) in terms {
            s.add_coeff(m, c);
        }
        s
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeff(&self, m: &MultiIndex) -> Q {
        self.coeffs.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&MultiIndex::zero())
    }

    /// `a_{ε_d}`.
    pub fn linear(&self, d: Decoration) -> Q {
        self.coeff(&MultiIndex::unit(d))
    }

    /// Sets a coefficient; monomials above the truncation degree are dropped.
    pub fn set(&mut self, m: MultiIndex, c: Q) {
        if m.degree() > self.degree || c.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
    }

    pub fn add_coeff(&mut self, m: MultiIndex, c: Q) {
        if m.degree() > self.degree || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(m.clone()).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Q)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(MultiIndex::is_zero)
    }

    /// Every monomial has total degree at most 1.
    pub fn is_affine(&self) -> bool {
        self.coeffs.keys().all(|m| m.degree() <= 1)
    }

    /// Some stored monomial has a positive exponent of `h_d`.
    pub fn depends_on(&self, d: Decoration) -> bool {
        self.coeffs.keys().any(|m| m.exponent(d) > 0)
    }

    /// Variables appearing in the series, sorted.
    pub fn variables(&self) -> Vec<Decoration> {
        let mut v: Vec<Decoration> = self
            .coeffs
            .keys()
            .flat_map(|m| m.entries().iter().map(|&(d, _)| d))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn truncate(&self, degree: u32) -> Series {
        let degree = degree.min(self.degree);
        Series {
            degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| m.degree() <= degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous part of total degree `k`.
    pub fn homogeneous(&self, k: u32) -> Series {
        Series {
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.truncate(other.degree);
        for (m, c) in &other.coeffs {
            out.add_coeff(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Series {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> Series {
        if c.is_zero() {
            return Series::zero(self.degree);
        }
        Series {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let degree = self.degree.min(other.degree);
        let mut acc: BTreeMap<MultiIndex, Q> = BTreeMap::new();
        // both maps iterate in increasing total degree, so inner loops can stop early
        for (m1, c1) in &self.coeffs {
            if m1.degree() > degree {
                break;
            }
            for (m2, c2) in &other.coeffs {
                if m1.degree() + m2.degree() > degree {
                    break;
                }
                *acc.entry(m1.add(m2)).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Series { degree, coeffs: acc }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn inverse(&self) -> Result<Series, SeriesError> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let cinv = c.recip();
        // F = c(1 + u), 1/F = c^{-1} Σ (−u)^k
        let mut minus_u = self.scale(&cinv);
        minus_u.set(MultiIndex::zero(), Q::zero());
        let minus_u = minus_u.neg();
        let one = Series::one(self.degree);
        let mut acc = one.clone();
        for _ in 0..self.degree {
            acc = one.add(&minus_u.mul(&acc));
        }
        Ok(acc.scale(&cinv))
    }

    /// Integer power; negative exponents invert first.
    pub fn pow(&self, k: i64) -> Result<Series, SeriesError> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut result = Series::one(self.degree);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(result)
    }

    /// `Σ_k c_k · self^k` for a univariate coefficient list; needs zero constant term.
    pub fn compose_univariate(&self, coeffs: &[Q]) -> Result<Series, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonzeroConstant);
        }
        let mut acc = Series::zero(self.degree);
        for c in coeffs.iter().rev() {
            acc = acc.mul(self);
            acc.add_coeff(MultiIndex::zero(), c.clone());
        }
        Ok(acc)
    }

    /// Replaces each `h_d` by `images[d]` (variables without an image map to themselves).
    pub fn substitute_series(&self, images: &BTreeMap<Decoration, Series>) -> Result<Series, SeriesError> {
        for s in images.values() {
            if !s.constant_term().is_zero() {
                return Err(SeriesError::NonzeroConstant);
            }
        }
        let degree = images.values().map(Series::degree).fold(self.degree, u32::min);
        let mut powers: BTreeMap<(Decoration, u32), Series> = BTreeMap::new();
        let mut out = Series::zero(degree);
        for (m, c) in &self.coeffs {
            if m.degree() > degree {
                break;
            }
            let mut term = Series::constant(c.clone(), degree);
            for &(d, e) in m.entries() {
                let p = powers
                    .entry((d, e))
                    .or_insert_with(|| {
                        let base = images.get(&d).cloned().unwrap_or_else(|| Series::var(d, degree));
                        base.pow(e as i64).expect("positive power")
                    })
                    .clone();
                term = term.mul(&p);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// `∂/∂h_d`, truncated at `D − 1`.
    pub fn derivative(&self, d: Decoration) -> Series {
        let degree = self.degree.saturating_sub(1);
        let mut out = Series::zero(degree);
        for (m, c) in &self.coeffs {
            let e = m.exponent(d);
            if e > 0 {
                out.add_coeff(m.minus_unit(d).unwrap(), c * int(e as i64));
            }
        }
        out
    }

    /// Sum of monomials `coeff*h..` in the expression grammar.
    pub fn to_expr_text(&self, alphabet: &Alphabet) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.coeffs.iter().enumerate() {
            let neg = c < &Q::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_zero() {
                s.push_str(&format_rational(&abs));
            } else if abs.is_one() {
                s.push_str(&m.to_text(alphabet));
            } else {
                s.push_str(&format_rational(&abs));
                s.push('*');
                s.push_str(&m.to_text(alphabet));
            }
        }
        s
    }
}

/// Coefficients `λ(λ+β)…(λ+(k−1)β)/k!` of `f_{β/λ}(λh)` for `k ≤ degree`.
pub fn scaled_f_coeffs(beta: &Q, lambda: &Q, degree: u32) -> Vec<Q> {
    let mut out = Vec::with_capacity(degree as usize + 1);
    let mut rising = Q::one();
    for k in 0..=degree {
        out.push(&rising / factorial(k));
        rising *= lambda + beta * int(k as i64);
    }
    out
}

/// `f_β(inner)` with `f_β(h) = Σ (1+β)…(1+(k−1)β)/k! h^k`.
pub fn f_beta(beta: &Q, inner: &Series, degree: u32) -> Result<Series, SeriesError> {
    scaled_f(beta, &Q::one(), inner, degree)
}

/// `f_{β/λ}(λ·inner)`, which is `1` when `λ = 0`.
pub fn scaled_f(beta: &Q, lambda: &Q, inner: &Series, degree: u32) -> Result<Series, SeriesError> {
    let inner = inner.truncate(degree);
    inner.compose_univariate(&scaled_f_coeffs(beta, lambda, inner.degree()))
}

/// `−ln(1 − inner) = Σ_{k≥1} inner^k / k`.
pub fn log1m(inner: &Series, degree: u32) -> Result<Series, SeriesError> {
    let inner = inner.truncate(degree);
    let mut coeffs = vec![Q::zero()];
    for k in 1..=inner.degree() {
        coeffs.push(Q::new(1.into(), (k as i64).into()));
    }
    inner.compose_univariate(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const H: Decoration = Decoration(0);
    const H2: Decoration = Decoration(1);

    fn mono(e: &[(u32, u32)]) -> MultiIndex {
        MultiIndex::new(e.iter().map(|&(d, k)| (Decoration(d), k)))
    }

    #[test]
    fn geometric_inverse() {
        let one_minus_h = Series::one(6).sub(&Series::var(H, 6));
        let inv = one_minus_h.inverse().unwrap();
        for k in 0..=6 {
            assert_eq!(inv.coeff(&mono(&[(0, k)])), int(1));
        }
        assert_eq!(inv.mul(&one_minus_h), Series::one(6));
        assert_eq!(Series::var(H, 4).inverse(), Err(SeriesError::NotInvertible));
    }

    #[test]
    fn product_of_geometrics() {
        let g2 = Series::one(5).sub(&Series::var(H2, 5)).pow(-1).unwrap();
        let g3 = Series::one(5).sub(&Series::var(Decoration(2), 5)).pow(-1).unwrap();
        assert_eq!(g2.mul(&g3).coeff(&mono(&[(1, 1), (2, 1)])), int(1));
    }

    #[test]
    fn f_beta_examples() {
        let h = Series::var(H, 6);
        let f1 = f_beta(&int(1), &h, 6).unwrap();
        let geo = Series::one(6).sub(&h).inverse().unwrap();
        assert_eq!(f1, geo);
        let f0 = f_beta(&int(0), &h, 4).unwrap();
        let expect = [int(1), int(1), ratio(1, 2), ratio(1, 6), ratio(1, 24)];
        for (k, c) in expect.iter().enumerate() {
            assert_eq!(&f0.coeff(&mono(&[(0, k as u32)])), c);
        }
        let fm1 = f_beta(&int(-1), &h, 6).unwrap();
        assert_eq!(fm1, Series::one(6).add(&h));
        let sq = f1.mul(&f1);
        assert_eq!(sq.coeff(&mono(&[(0, 2)])), int(3));
        assert_eq!(sq, scaled_f(&int(1), &int(2), &h, 6).unwrap());
    }

    #[test]
    fn log1m_examples() {
        let h = Series::var(H, 5);
        let l = log1m(&h, 5).unwrap();
        for k in 1..=4 {
            assert_eq!(l.coeff(&mono(&[(0, k)])), ratio(1, k as i64));
        }
        let geo = Series::one(4).sub(&Series::var(H, 4)).inverse().unwrap();
        assert_eq!(l.derivative(H), geo);
        let s = Series::var(H, 4).add(&Series::var(H2, 4));
        assert_eq!(log1m(&s, 4).unwrap().coeff(&mono(&[(0, 1), (1, 1)])), int(1));
        assert_eq!(log1m(&Series::one(3), 3), Err(SeriesError::NonzeroConstant));
    }

    #[test]
    fn truncation_keeps_min_degree() {
        let a = Series::var(H, 3);
        let b = Series::var(H, 5);
        assert_eq!(a.add(&b).degree(), 3);
        assert_eq!(a.mul(&b).degree(), 3);
        assert_eq!(Series::var(H, 2).pow(3).unwrap(), Series::zero(2));
    }

    #[test]
    fn substitution_of_series() {
        let f = Series::one(4).sub(&Series::var(H, 4)).inverse().unwrap();
        let mut images = BTreeMap::new();
        images.insert(H, Series::var(H, 4).add(&Series::var(H2, 4)));
        let g = f.substitute_series(&images).unwrap();
        assert_eq!(g.coeff(&mono(&[(0, 1), (1, 1)])), int(2));
        assert_eq!(g.coeff(&mono(&[(0, 2), (1, 2)])), int(6));
    }

    #[test]
    fn multi_index_ops() {
        let m = mono(&[(0, 2), (3, 1)]);
        assert_eq!(m.degree(), 3);
        assert_eq!(m.exponent(Decoration(3)), 1);
        assert_eq!(m.minus_unit(Decoration(3)).unwrap(), mono(&[(0, 2)]));
        assert_eq!(m.minus_unit(Decoration(1)), None);
        assert_eq!(mono(&[(0, 0)]), MultiIndex::zero());
    }
}
