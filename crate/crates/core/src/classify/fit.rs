use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::rational::{format_rational, int, Q};
use crate::series::{f_beta, log1m, MultiIndex, Series};
use crate::trees::{Alphabet, Decoration};

/// `f_β(Σ w_l h_l)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorGroup {
    pub beta: Q,
    pub weights: Vec<(Decoration, Q)>,
}

impl FactorGroup {
    pub fn vars(&self) -> Vec<Decoration> {
        self.weights.iter().map(|(d, _)| *d).collect()
    }

    pub fn contains(&self, d: Decoration) -> bool {
        self.weights.iter().any(|(e, _)| *e == d)
    }

    pub fn weight(&self, d: Decoration) -> Option<&Q> {
        self.weights.iter().find(|(e, _)| *e == d).map(|(_, w)| w)
    }

    fn inner(&self, degree: u32) -> Series {
        Series::from_terms(
            self.weights.iter().map(|(d, w)| (MultiIndex::unit(*d), w.clone())),
            degree,
        )
    }

    fn text(&self, alphabet: &Alphabet) -> String {
        let inner: Vec<String> = self
            .weights
            .iter()
            .map(|(d, w)| format!("{}*h{}", format_rational(w), alphabet.name(*d)))
            .collect();
        format!("{}; {}", format_rational(&self.beta), inner.join(" + "))
    }
}

/// A recognized shape of a series with constant term 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProductFit {
    /// `Π_p f_{β_p}(Σ_{l ∈ I_p} w_l h_l)`.
    Product { groups: Vec<FactorGroup> },
    /// `(1/ν) Π_p f_{β_p}(Σ w_l h_l) + Σ a_l h_l + 1 − 1/ν`, where the `a_l`
    /// variables occur only linearly.
    Shifted {
        nu: Q,
        groups: Vec<FactorGroup>,
        linear: Vec<(Decoration, Q)>,
    },
    /// `1 + Σ_p ln(1 − β_p x_p)·(−1/β_p)` with `x_p = Σ w_l h_l` (`x_p` itself when `β_p = 0`).
    Log { groups: Vec<FactorGroup> },
}

impl ProductFit {
    pub fn groups(&self) -> &[FactorGroup] {
        match self {
            ProductFit::Product { groups } | ProductFit::Log { groups } => groups,
            ProductFit::Shifted { groups, .. } => groups,
        }
    }

    /// The group containing `d`, if any.
    pub fn group_of(&self, d: Decoration) -> Option<&FactorGroup> {
        self.groups().iter().find(|g| g.contains(d))
    }

    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let groups = |gs: &[FactorGroup]| {
            gs.iter()
                .map(|g| format!("[{}]", g.text(alphabet)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            ProductFit::Product { groups: g } => format!("product {}", groups(g)),
            ProductFit::Log { groups: g } => format!("log {}", groups(g)),
            ProductFit::Shifted { nu, groups: g, linear } => {
                let lin: Vec<String> = linear
                    .iter()
                    .map(|(d, a)| format!("{}*h{}", format_rational(a), alphabet.name(*d)))
                    .collect();
                format!(
                    "shifted nu={} {} linear [{}]",
                    format_rational(nu),
                    groups(g),
                    lin.join(" + ")
                )
            }
        }
    }
}

fn pair(l: Decoration, m: Decoration) -> MultiIndex {
    if l == m {
        MultiIndex::new([(l, 2)])
    } else {
        MultiIndex::new([(l, 1), (m, 1)])
    }
}

// partition `vars` into classes of the relation `same`, in order of least element
fn partition(vars: &[Decoration], same: impl Fn(Decoration, Decoration) -> bool) -> Vec<Vec<Decoration>> {
    let mut groups: Vec<Vec<Decoration>> = Vec::new();
    for &v in vars {
        match groups.iter_mut().find(|g| same(g[0], v)) {
            Some(g) => g.push(v),
            None => groups.push(vec![v]),
        }
    }
    groups
}

/// Weights of the variables occurring in `f`; `None` if one of them has no linear term.
fn weights(f: &Series) -> Option<Vec<(Decoration, Q)>> {
    let vars = f.variables();
    let w: Vec<(Decoration, Q)> = vars.iter().map(|&d| (d, f.linear(d))).collect();
    if w.iter().any(|(_, x)| x.is_zero()) {
        None
    } else {
        Some(w)
    }
}

fn fit_plain_product(g: &Series) -> Option<Vec<FactorGroup>> {
    let d = g.degree();
    if !g.constant_term().is_one() || d < 2 {
        return None;
    }
    let w = weights(g)?;
    let wt = |v: Decoration| w.iter().find(|(e, _)| *e == v).map(|(_, x)| x.clone()).unwrap();
    let beta = |v: Decoration| int(2) * g.coeff(&pair(v, v)) / (wt(v) * wt(v)) - Q::one();
    let vars: Vec<Decoration> = w.iter().map(|(v, _)| *v).collect();
    let classes = partition(&vars, |l, m| {
        let b = beta(l);
        !b.is_zero() && b == beta(m) && g.coeff(&pair(l, m)) == (Q::one() + &b) * wt(l) * wt(m)
    });
    let groups: Vec<FactorGroup> = classes
        .into_iter()
        .map(|c| FactorGroup {
            beta: beta(c[0]),
            weights: c.iter().map(|&v| (v, wt(v))).collect(),
        })
        .collect();
    let mut prod = Series::one(d);
    for grp in &groups {
        prod = prod.mul(&f_beta(&grp.beta, &grp.inner(d), d).ok()?);
    }
    (prod == *g).then_some(groups)
}

fn fit_log(f: &Series) -> Option<Vec<FactorGroup>> {
    let d = f.degree();
    if !f.constant_term().is_one() || d < 2 {
        return None;
    }
    let w = weights(f)?;
    let wt = |v: Decoration| w.iter().find(|(e, _)| *e == v).map(|(_, x)| x.clone()).unwrap();
    let beta = |v: Decoration| int(2) * f.coeff(&pair(v, v)) / (wt(v) * wt(v));
    let vars: Vec<Decoration> = w.iter().map(|(v, _)| *v).collect();
    let classes = partition(&vars, |l, m| !f.coeff(&pair(l, m)).is_zero());
    let groups: Vec<FactorGroup> = classes
        .into_iter()
        .map(|c| FactorGroup {
            beta: beta(c[0]),
            weights: c.iter().map(|&v| (v, wt(v))).collect(),
        })
        .collect();
    let mut sum = Series::one(d);
    for grp in &groups {
        let x = grp.inner(d);
        let term = if grp.beta.is_zero() {
            x
        } else {
            log1m(&x.scale(&grp.beta), d).ok()?.scale(&grp.beta.recip())
        };
        sum = sum.add(&term);
    }
    (sum == *f).then_some(groups)
}

fn fit_shifted(f: &Series) -> Option<ProductFit> {
    let d = f.degree();
    if !f.constant_term().is_one() || d < 2 {
        return None;
    }
    // variables occurring only in degree one
    let mut nonlinear = BTreeSet::new();
    for (m, _) in f.terms() {
        if m.degree() >= 2 {
            nonlinear.extend(m.entries().iter().map(|(v, _)| *v));
        }
    }
    let linear: Vec<(Decoration, Q)> = f
        .variables()
        .into_iter()
        .filter(|v| !nonlinear.contains(v))
        .map(|v| (v, f.linear(v)))
        .collect();
    let mut rest = f.clone();
    for (v, _) in &linear {
        rest.set(MultiIndex::unit(*v), Q::zero());
    }
    let w = weights(&rest)?;
    let a = |v: Decoration| w.iter().find(|(e, _)| *e == v).map(|(_, x)| x.clone()).unwrap();
    let mut candidates: Vec<Q> = Vec::new();
    if !linear.is_empty() {
        candidates.push(Q::one());
    }
    for (k, (l, _)) in w.iter().enumerate() {
        for (m, _) in &w[k + 1..] {
            let c = rest.coeff(&pair(*l, *m));
            if !c.is_zero() {
                candidates.push(c / (a(*l) * a(*m)));
            }
        }
        if d >= 3 {
            let s = int(2) * rest.coeff(&pair(*l, *l)) / (a(*l) * a(*l));
            let t = int(6) * rest.coeff(&MultiIndex::new([(*l, 3)])) / (a(*l) * a(*l) * a(*l));
            if !s.is_zero() {
                candidates.push(int(2) * &s - t / &s);
            }
        }
    }
    let mut seen = BTreeSet::new();
    for nu in candidates {
        if nu.is_zero() || (nu.is_one() && linear.is_empty()) || !seen.insert(nu.clone()) {
            continue;
        }
        let g = rest.sub(&Series::one(d)).scale(&nu).add(&Series::one(d));
        if let Some(groups) = fit_plain_product(&g) {
            return Some(ProductFit::Shifted { nu, groups, linear });
        }
    }
    None
}

/// Recognizes `F` (with `F(0) = 1`) as a product of `f_β`'s of linear forms,
/// a ν-shifted such product plus linear terms, or a sum of logarithms.
/// Every candidate is expanded back and compared exactly to the truncation.
pub fn fit_product_form(f: &Series) -> Option<ProductFit> {
    if let Some(groups) = fit_plain_product(f) {
        return Some(ProductFit::Product { groups });
    }
    if let Some(groups) = fit_log(f) {
        return Some(ProductFit::Log { groups });
    }
    fit_shifted(f)
}

/// Expands a fit back to a series of the given degree.
pub fn expand_fit(fit: &ProductFit, degree: u32) -> Series {
    let product = |groups: &[FactorGroup]| {
        let mut p = Series::one(degree);
        for g in groups {
            p = p.mul(&f_beta(&g.beta, &g.inner(degree), degree).expect("weight-one argument"));
        }
        p
    };
    match fit {
        ProductFit::Product { groups } => product(groups),
        ProductFit::Shifted { nu, groups, linear } => {
            let inv = nu.recip();
            let mut s = product(groups).scale(&inv);
            s = s.add(&Series::constant(Q::one() - inv, degree));
            for (v, a) in linear {
                s.add_coeff(MultiIndex::unit(*v), a.clone());
            }
            s
        }
        ProductFit::Log { groups } => {
            let mut s = Series::one(degree);
            for g in groups {
                let x = g.inner(degree);
                let term = if g.beta.is_zero() {
                    x
                } else {
                    log1m(&x.scale(&g.beta), degree)
                        .expect("weight-one argument")
                        .scale(&g.beta.recip())
                };
                s = s.add(&term);
            }
            s
        }
    }
}
