use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{check_hopf, Sdse, SdseError};
use crate::rational::Q;
use crate::series::{MultiIndex, Series};
use crate::trees::{Alphabet, Decoration};

/// The system of `μ_i F_i(λ_j h_j, j ∈ I)`. The result is not renormalized.
pub fn change_vars(s: &Sdse, lambda: &[Q], mu: &[Q]) -> Result<Sdse, SdseError> {
    let n = s.len();
    if lambda.len() != n || mu.len() != n {
        return Err(SdseError::EquationCount {
            expected: n,
            found: lambda.len().min(mu.len()),
        });
    }
    for (k, q) in lambda.iter().chain(mu.iter()).enumerate() {
        if q.is_zero() {
            return Err(SdseError::ZeroScalar {
                index: s.name(Decoration((k % n) as u32)).to_string(),
            });
        }
    }
    let equations = s
        .equations()
        .iter()
        .zip(mu)
        .map(|(f, m)| {
            Series::from_terms(
                f.terms().map(|(p, c)| {
                    let mut scale = c * m;
                    for &(d, e) in p.entries() {
                        for _ in 0..e {
                            scale *= &lambda[d.index()];
                        }
                    }
                    (p.clone(), scale)
                }),
                s.truncation(),
            )
        })
        .collect();
    Sdse::new(s.alphabet().clone(), equations, s.truncation())
}

/// Keeps the indices in `subset` and sets `h_j = 0` for the others.
pub fn restrict(s: &Sdse, subset: &[Decoration]) -> Result<Sdse, SdseError> {
    let keep: BTreeSet<Decoration> = subset.iter().copied().collect();
    if keep.is_empty() {
        return Err(SdseError::EmptySubset);
    }
    let renumber: BTreeMap<Decoration, Decoration> = keep
        .iter()
        .enumerate()
        .map(|(k, &d)| (d, Decoration(k as u32)))
        .collect();
    let names: Vec<&str> = keep.iter().map(|&d| s.name(d)).collect();
    let alphabet = Alphabet::new(&names)?;
    let mut equations = Vec::new();
    for &i in &keep {
        let f = Series::from_terms(
            s.equation(i).terms().filter_map(|(p, c)| {
                let mut entries = Vec::new();
                for &(d, e) in p.entries() {
                    entries.push((*renumber.get(&d)?, e));
                }
                Some((MultiIndex::new(entries), c.clone()))
            }),
            s.truncation(),
        );
        if f.is_constant() {
            return Err(SdseError::Degenerate {
                index: s.name(i).to_string(),
            });
        }
        equations.push(f);
    }
    Sdse::new(alphabet, equations, s.truncation())
}

/// Replaces index `i` by the block `parts[i]`: `F′_x = F_i(Σ_{y ∈ J_j} h_y, j ∈ I)` for `x ∈ J_i`.
pub fn dilate<S: AsRef<str>>(s: &Sdse, parts: &[Vec<S>]) -> Result<Sdse, SdseError> {
    if parts.len() != s.len() {
        return Err(SdseError::Partition(format!(
            "{} blocks for {} indices",
            parts.len(),
            s.len()
        )));
    }
    let mut names: Vec<&str> = Vec::new();
    for (k, block) in parts.iter().enumerate() {
        if block.is_empty() {
            return Err(SdseError::Partition(format!(
                "block for index `{}` is empty",
                s.name(Decoration(k as u32))
            )));
        }
        names.extend(block.iter().map(AsRef::as_ref));
    }
    let alphabet = Alphabet::new(&names).map_err(|e| SdseError::Partition(e.to_string()))?;
    let d = s.truncation();
    let mut images = BTreeMap::new();
    let mut next = 0u32;
    let mut owner = Vec::new();
    for (k, block) in parts.iter().enumerate() {
        let mut sum = Series::zero(d);
        for _ in block {
            sum = sum.add(&Series::var(Decoration(next), d));
            owner.push(k);
            next += 1;
        }
        images.insert(Decoration(k as u32), sum);
    }
    let mut equations = Vec::with_capacity(owner.len());
    let mut cache: BTreeMap<usize, Series> = BTreeMap::new();
    for &k in &owner {
        if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(k) {
            e.insert(s.equations()[k].substitute_series(&images)?);
        }
        equations.push(cache[&k].clone());
    }
    Sdse::new(alphabet, equations, d)
}

/// Adjoins `F_0 = 1 + Σ a_i h_i` under the new name. The flag is true exactly
/// when `s` passes the Hopf check to `bound` and all `F_i` with `a_i ≠ 0` coincide.
pub fn extend(s: &Sdse, coeffs: &[(Decoration, Q)], name: &str, bound: u32) -> Result<(Sdse, bool), SdseError> {
    if s.alphabet().lookup(name).is_some() {
        return Err(SdseError::DuplicateIndex(name.to_string()));
    }
    let mut names: Vec<String> = s.alphabet().names().to_vec();
    names.push(name.to_string());
    let alphabet = Alphabet::new(&names)?;
    let d = s.truncation();
    let mut f0 = Series::one(d);
    for (i, a) in coeffs {
        f0.add_coeff(MultiIndex::unit(*i), a.clone());
    }
    let mut equations = s.equations().to_vec();
    equations.push(f0);
    let extended = Sdse::new(alphabet, equations, d)?;
    let support: Vec<Decoration> = coeffs.iter().filter(|(_, a)| !a.is_zero()).map(|&(i, _)| i).collect();
    let equal = support.windows(2).all(|w| s.equation(w[0]) == s.equation(w[1]));
    let valid = equal && check_hopf(s, bound)?.is_hopf();
    Ok((extended, valid))
}
