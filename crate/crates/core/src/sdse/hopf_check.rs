use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{solve_closed_form, Sdse, SdseError, Solution};
use crate::hopf::leaf_deletions;
use crate::rational::{format_rational, parse_rational, Q};
use crate::trees::{Alphabet, Decoration, Tree};

/// A structure coefficient `λ_n^{(i,j)}`, or `⊥` when both sides of the
/// colinearity test vanish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lambda {
    Value(Q),
    Undetermined,
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Value(q) => f.write_str(&format_rational(q)),
            Lambda::Undetermined => f.write_str("⊥"),
        }
    }
}

/// Entries `λ_n^{(i,j)}` for `1 ≤ n ≤ max_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTable {
    num_indices: usize,
    max_n: u32,
    entries: BTreeMap<(Decoration, Decoration, u32), Lambda>,
}

impl LambdaTable {
    pub fn new(num_indices: usize, max_n: u32) -> LambdaTable {
        LambdaTable {
            num_indices,
            max_n,
            entries: BTreeMap::new(),
        }
    }

    /// A complete table from a closed form.
    pub fn from_fn(num_indices: usize, max_n: u32, f: impl Fn(Decoration, Decoration, u32) -> Q) -> LambdaTable {
        let mut t = LambdaTable::new(num_indices, max_n);
        for i in 0..num_indices as u32 {
            for j in 0..num_indices as u32 {
                for n in 1..=max_n {
                    let (i, j) = (Decoration(i), Decoration(j));
                    t.insert(i, j, n, Lambda::Value(f(i, j, n)));
                }
            }
        }
        t
    }

    pub fn num_indices(&self) -> usize {
        self.num_indices
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn insert(&mut self, i: Decoration, j: Decoration, n: u32, value: Lambda) {
        self.entries.insert((i, j, n), value);
    }

    pub fn get(&self, i: Decoration, j: Decoration, n: u32) -> Option<&Lambda> {
        self.entries.get(&(i, j, n))
    }

    /// The value, if the entry exists and is not `⊥`.
    pub fn value(&self, i: Decoration, j: Decoration, n: u32) -> Option<&Q> {
        match self.get(i, j, n) {
            Some(Lambda::Value(q)) => Some(q),
            _ => None,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(Decoration, Decoration, u32), &Lambda)> {
        self.entries.iter()
    }

    /// Every entry up to `max_n` is present and determined.
    pub fn is_complete(&self) -> bool {
        self.entries.len() == self.num_indices * self.num_indices * self.max_n as usize
            && self.entries.values().all(|l| matches!(l, Lambda::Value(_)))
    }

    /// `n ↦ λ_n^{(i,j)}` for `n = 1..=max_n`.
    pub fn row(&self, i: Decoration, j: Decoration) -> Vec<Option<Q>> {
        (1..=self.max_n).map(|n| self.value(i, j, n).cloned()).collect()
    }

    /// Lines `i<TAB>j<TAB>n<TAB>value` with `⊥` for undetermined entries.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for ((i, j, n), l) in &self.entries {
            out.push_str(&format!("{}\t{}\t{n}\t{l}\n", alphabet.name(*i), alphabet.name(*j)));
        }
        out
    }

    pub fn parse(text: &str, alphabet: &Alphabet, max_n: u32) -> Result<LambdaTable, SdseError> {
        let mut t = LambdaTable::new(alphabet.len(), max_n);
        for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || SdseError::File(format!("line {}: expected `i j n value`", k + 1));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(bad());
            }
            let idx = |s: &str| alphabet.lookup(s).ok_or_else(|| SdseError::UnknownIndex(s.to_string()));
            let n: u32 = parts[2].parse().map_err(|_| bad())?;
            let value = if parts[3] == "⊥" {
                Lambda::Undetermined
            } else {
                Lambda::Value(parse_rational(parts[3]).map_err(|_| bad())?)
            };
            t.insert(idx(parts[0])?, idx(parts[1])?, n, value);
        }
        Ok(t)
    }
}

/// One tree of a colinearity witness with `a_{t′}` and `v(t′) = Σ_t n_j(t,t′) a_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessEntry {
    pub tree: Tree,
    pub a: Q,
    pub v: Q,
}

/// A failure of the colinearity criterion at `(n, i, j)`.
///
/// With a reference tree the two ratios `v/a` disagree (or `a` vanishes at the
/// offending tree while `v` does not); without one, `a(·)` is identically zero
/// on `T^{(i)}(n)` but `v` is not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub n: u32,
    pub i: Decoration,
    pub j: Decoration,
    pub reference: Option<WitnessEntry>,
    pub offending: WitnessEntry,
}

impl Witness {
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let entry = |e: &WitnessEntry| {
            let ratio = if e.a.is_zero() {
                "undefined".to_string()
            } else {
                format_rational(&(&e.v / &e.a))
            };
            format!(
                "{}\ta={}\tv={}\tv/a={}",
                e.tree.display(alphabet),
                format_rational(&e.a),
                format_rational(&e.v),
                ratio
            )
        };
        let mut out = format!(
            "witness n={} i={} j={}\n",
            self.n,
            alphabet.name(self.i),
            alphabet.name(self.j)
        );
        match &self.reference {
            Some(r) => out.push_str(&format!("reference\t{}\n", entry(r))),
            None => out.push_str("reference\tnone (a vanishes on every tree of this weight)\n"),
        }
        out.push_str(&format!("offending\t{}\n", entry(&self.offending)));
        out
    }
}

/// Outcome of the colinearity scan up to weight `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HopfVerdict {
    pub bound: u32,
    pub table: LambdaTable,
    pub witness: Option<Witness>,
}

impl HopfVerdict {
    pub fn is_hopf(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        match &self.witness {
            None => format!("hopf_up_to {}\n", self.bound),
            Some(w) => format!("failed\n{}", w.to_text(alphabet)),
        }
    }
}

/// Solves to weight `bound` and runs the colinearity scan, stopping after the
/// first degree that fails.
pub fn check_hopf(s: &Sdse, bound: u32) -> Result<HopfVerdict, SdseError> {
    let sol = solve_closed_form(s, bound)?;
    Ok(scan_hopf(&sol, true))
}

/// The colinearity scan on a solution: for every `n < bound` and pair `(i, j)`,
/// `v(t′) = Σ_t n_j(t,t′) a_t` over `t′ ∈ T^{(i)}(n)` must be a multiple of `a(t′)`.
/// Degrees are scanned in increasing order; with `fail_fast` the scan stops
/// after the first failing degree. The witness is the least failing `(n, i, j)`
/// and, within it, the least offending tree in canonical order.
pub fn scan_hopf(sol: &Solution, fail_fast: bool) -> HopfVerdict {
    let num = sol.num_indices();
    let max_n = sol.bound().saturating_sub(1);
    let mut table = LambdaTable::new(num, max_n);
    let mut witness: Option<Witness> = None;
    for n in 1..=max_n {
        let results: Vec<Vec<(Decoration, Result<Lambda, Witness>)>> = (0..num as u32)
            .into_par_iter()
            .map(|i| scan_root(sol, Decoration(i), n, num))
            .collect();
        for (i, per_j) in results.into_iter().enumerate() {
            for (j, r) in per_j {
                match r {
                    Ok(l) => table.insert(Decoration(i as u32), j, n, l),
                    Err(w) => {
                        if witness.is_none() {
                            witness = Some(w);
                        }
                    }
                }
            }
        }
        if fail_fast && witness.is_some() {
            break;
        }
    }
    HopfVerdict {
        bound: sol.bound(),
        table,
        witness,
    }
}

fn scan_root(sol: &Solution, i: Decoration, n: u32, num: usize) -> Vec<(Decoration, Result<Lambda, Witness>)> {
    let mut v: Vec<FxHashMap<Tree, Q>> = vec![FxHashMap::default(); num];
    for (t, a) in sol.component(i, n + 1) {
        for (j, t2, mult) in leaf_deletions(t) {
            *v[j.index()].entry(t2).or_insert_with(Q::zero) += a * Q::from_integer(mult.into());
        }
    }
    let a_vec = sol.component(i, n);
    v.into_iter()
        .enumerate()
        .map(|(j, vj)| {
            let j = Decoration(j as u32);
            (j, colinear(i, j, n, a_vec, &vj))
        })
        .collect()
}

#[allow(clippy::result_large_err)]
fn colinear(
    i: Decoration,
    j: Decoration,
    n: u32,
    a_vec: &[(Tree, Q)],
    v: &FxHashMap<Tree, Q>,
) -> Result<Lambda, Witness> {
    let v_at = |t: &Tree| v.get(t).cloned().unwrap_or_else(Q::zero);
    let nonzero_v = |t: &&Tree| !v[*t].is_zero();
    let Some((t0, a0)) = a_vec.first() else {
        return match v.keys().filter(nonzero_v).min() {
            None => Ok(Lambda::Undetermined),
            Some(t) => Err(Witness {
                n,
                i,
                j,
                reference: None,
                offending: WitnessEntry {
                    tree: t.clone(),
                    a: Q::zero(),
                    v: v[t].clone(),
                },
            }),
        };
    };
    let lambda = v_at(t0) / a0;
    let a_of = |t: &Tree| match a_vec.binary_search_by(|(s, _)| s.cmp(t)) {
        Ok(k) => a_vec[k].1.clone(),
        Err(_) => Q::zero(),
    };
    let bad_in_support = a_vec
        .iter()
        .find(|(t, a)| v_at(t) != &lambda * a)
        .map(|(t, _)| t.clone());
    let bad_outside = v.keys().filter(nonzero_v).filter(|t| a_of(t).is_zero()).min().cloned();
    let bad = match (bad_in_support, bad_outside) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    match bad {
        None => Ok(Lambda::Value(lambda)),
        Some(t) => Err(Witness {
            n,
            i,
            j,
            reference: Some(WitnessEntry {
                tree: t0.clone(),
                a: a0.clone(),
                v: v_at(t0),
            }),
            offending: WitnessEntry {
                a: a_of(&t),
                v: v_at(&t),
                tree: t,
            },
        }),
    }
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
    fn cycle_table() {
        let s = system(&["1 + h2", "1 + h3", "1 + h1"], 8);
        let v = check_hopf(&s, 8).unwrap();
        assert!(v.is_hopf());
        assert!(v.table.is_complete());
        for ((i, j, n), l) in v.table.entries() {
            let expect = if (i.0 + n) % 3 == j.0 { int(1) } else { int(0) };
            assert_eq!(l, &Lambda::Value(expect));
        }
    }

    #[test]
    fn self_loop_odd_lambdas() {
        let s = system(&["(1 - h1)^(-1)"], 8);
        let v = check_hopf(&s, 8).unwrap();
        assert!(v.is_hopf());
        for n in 1..=7 {
            assert_eq!(
                v.table.value(Decoration(0), Decoration(0), n),
                Some(&int(2 * n as i64 - 1))
            );
        }
    }

    #[test]
    fn mixed_two_cycle_fails() {
        let s = system(&["1 + h2 + h2^(2)", "1 + h1"], 6);
        let v = check_hopf(&s, 6).unwrap();
        let w = v.witness.expect("not Hopf");
        assert!(w.n <= 4);
    }

    #[test]
    fn table_text_round_trip() {
        let s = system(&["1 + h2", "1 + h1"], 4);
        let v = check_hopf(&s, 4).unwrap();
        let text = v.table.to_text(s.alphabet());
        assert!(text.starts_with("1\t1\t1\t0\n1\t1\t2\t1\n"));
        assert_eq!(LambdaTable::parse(&text, s.alphabet(), 3).unwrap(), v.table);
    }
}
