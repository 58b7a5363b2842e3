//! Closed-form generators for the Hopf families and the dilatation/extension
//! combinators on system files.

use num_traits::{One, Zero};

use super::{LambdaTable, SdseError, SystemFile};
use crate::rational::{int, Q};
use crate::series::Expr;
use crate::trees::{Alphabet, Decoration};

fn numeric_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| k.to_string()).collect()
}

fn one() -> Expr {
    Expr::num(Q::one())
}

fn product(parts: Vec<Expr>) -> Expr {
    if parts.is_empty() {
        one()
    } else {
        Expr::product(parts)
    }
}

/// `(1 − Σ_{y ∈ block} h_y)^{-1}`.
fn geometric(block: &[String]) -> Expr {
    let mut terms = vec![one()];
    terms.extend(block.iter().map(|y| Expr::scaled_var(&-Q::one(), y)));
    Expr::term(false, vec![Expr::sum(terms).into_factor().pow(-1)])
}

/// `f_{β/λ}(λ h)`, which is `1` when `λ = 0`.
fn scaled_fb(beta: &Q, lambda: &Q, var: &str) -> Option<Expr> {
    if lambda.is_zero() {
        return None;
    }
    Some(Expr::fb(beta / lambda, Expr::scaled_var(lambda, var)))
}

fn file(names: Vec<String>, truncation: u32, equations: Vec<Expr>) -> SystemFile {
    SystemFile {
        alphabet: Alphabet::new(&names).expect("generated names are valid"),
        truncation,
        equations,
    }
}

/// `F_i = 1 + h_{i+1}` on `ℤ/nℤ`, indices `1..n`.
pub fn cycle(n: usize, truncation: u32) -> Result<SystemFile, SdseError> {
    multicycle(&vec![1; n], truncation)
}

/// The cycle on `sizes.len()` classes dilated by blocks of the given sizes:
/// `F_x = 1 + Σ_{y in the next class} h_y`. Indices are numbered consecutively.
pub fn multicycle(sizes: &[usize], truncation: u32) -> Result<SystemFile, SdseError> {
    if sizes.len() < 2 {
        return Err(SdseError::Spec("a cycle needs at least 2 classes".into()));
    }
    let blocks = blocks(sizes)?;
    let names: Vec<String> = blocks.concat();
    let mut equations = Vec::new();
    for k in 0..blocks.len() {
        let next = &blocks[(k + 1) % blocks.len()];
        let mut terms = vec![one()];
        terms.extend(next.iter().map(|y| Expr::var(y)));
        for _ in &blocks[k] {
            equations.push(Expr::sum(terms.clone()));
        }
    }
    Ok(file(names, truncation, equations))
}

/// `F_x = Π_{j ≠ i} (1 − Σ_{y ∈ J_j} h_y)^{-1}` for `x ∈ J_i`.
pub fn complete(sizes: &[usize], truncation: u32) -> Result<SystemFile, SdseError> {
    if sizes.len() < 2 {
        return Err(SdseError::Spec("a complete system needs at least 2 parts".into()));
    }
    let blocks = blocks(sizes)?;
    let names: Vec<String> = blocks.concat();
    let mut equations = Vec::new();
    for k in 0..blocks.len() {
        let f = product(
            (0..blocks.len())
                .filter(|&j| j != k)
                .map(|j| geometric(&blocks[j]))
                .collect(),
        );
        for _ in &blocks[k] {
            equations.push(f.clone());
        }
    }
    Ok(file(names, truncation, equations))
}

fn blocks(sizes: &[usize]) -> Result<Vec<Vec<String>>, SdseError> {
    let mut next = 1;
    let mut out = Vec::new();
    for &s in sizes {
        if s == 0 {
            return Err(SdseError::Spec("empty block".into()));
        }
        out.push((next..next + s).map(|k| k.to_string()).collect());
        next += s;
    }
    Ok(out)
}

/// A vertex of `I₁`: `ν` and the coefficients `a_j` over `I₀ ∪ J₀ ∪ K₀` (in index order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct I1Vertex {
    pub nu: Q,
    pub coeffs: Vec<Q>,
}

/// A vertex of `J₁`: `ν ≠ 0` and the coefficients `a_j` over `I₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct J1Vertex {
    pub nu: Q,
    pub i1_coeffs: Vec<Q>,
}

/// Parameters of a fundamental system. Indices are numbered `1..` in the
/// order `I₀` (one `β` each), `J₀`, `K₀`, `I₁`, `J₁`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FundamentalSpec {
    pub i0: Vec<Q>,
    pub j0: usize,
    pub k0: usize,
    pub i1: Vec<I1Vertex>,
    pub j1: Vec<J1Vertex>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    I0,
    J0,
    K0,
    I1,
    J1,
}

impl FundamentalSpec {
    fn base_len(&self) -> usize {
        self.i0.len() + self.j0 + self.k0
    }

    pub fn len(&self) -> usize {
        self.base_len() + self.i1.len() + self.j1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn role(&self, k: usize) -> (Role, usize) {
        let mut k = k;
        for (role, n) in [
            (Role::I0, self.i0.len()),
            (Role::J0, self.j0),
            (Role::K0, self.k0),
            (Role::I1, self.i1.len()),
            (Role::J1, self.j1.len()),
        ] {
            if k < n {
                return (role, k);
            }
            k -= n;
        }
        panic!("index out of range")
    }

    fn beta(&self, k: usize) -> Q {
        match self.role(k) {
            (Role::I0, m) => self.i0[m].clone(),
            _ => Q::zero(),
        }
    }

    /// Coefficients `b^{(i)}_t` shared by the `I₁` vertices supporting a `J₁` vertex.
    fn j1_base(&self, v: &J1Vertex) -> &[Q] {
        let m = v.i1_coeffs.iter().position(|a| !a.is_zero()).expect("validated");
        &self.i1[m].coeffs
    }

    pub fn validate(&self) -> Result<(), SdseError> {
        let err = |s: String| Err(SdseError::Spec(s));
        if self.i0.is_empty() && self.j0 == 0 {
            return err("I0 and J0 cannot both be empty".into());
        }
        let base = self.base_len();
        for (m, v) in self.i1.iter().enumerate() {
            if v.coeffs.len() != base {
                return err(format!("I1 vertex {} needs {base} coefficients", m + 1));
            }
            let canonical = (0..base).all(|k| {
                let expect = match self.role(k).0 {
                    Role::I0 => Q::one() + self.beta(k),
                    Role::J0 => Q::one(),
                    _ => Q::zero(),
                };
                v.coeffs[k] == expect
            });
            if v.nu.is_one() && canonical {
                return err(format!(
                    "I1 vertex {} has ν = 1 and the K0 coefficients; it is a K0 vertex",
                    m + 1
                ));
            }
            if v.nu.is_zero() && v.coeffs.iter().all(Zero::is_zero) {
                return err(format!("I1 vertex {} would have a constant series", m + 1));
            }
        }
        for (m, v) in self.j1.iter().enumerate() {
            if v.nu.is_zero() {
                return err(format!("J1 vertex {} needs ν ≠ 0", m + 1));
            }
            if v.i1_coeffs.len() != self.i1.len() {
                return err(format!("J1 vertex {} needs {} coefficients", m + 1, self.i1.len()));
            }
            let support: Vec<usize> = (0..self.i1.len()).filter(|&k| !v.i1_coeffs[k].is_zero()).collect();
            if support.is_empty() {
                return err(format!("J1 vertex {} has an empty I1 support", m + 1));
            }
            for &k in &support {
                if !self.i1[k].nu.is_one() {
                    return err(format!("J1 vertex {} is supported by an I1 vertex with ν ≠ 1", m + 1));
                }
                if self.i1[k] != self.i1[support[0]] {
                    return err(format!("J1 vertex {} is supported by unequal I1 vertices", m + 1));
                }
            }
        }
        Ok(())
    }

    /// `a^{(v)}_u`, `ã^{(v)}_u` and `b_u` for vertex `v` and variable `u`.
    fn arrays(&self, v: usize, u: usize) -> (Q, Q, Q) {
        let (rv, mv) = self.role(v);
        let (ru, mu) = self.role(u);
        let delta = if u == v { Q::one() } else { Q::zero() };
        let beta_u = self.beta(u);
        let b_u = match ru {
            Role::I0 => Q::one() + &beta_u,
            Role::J0 => Q::one(),
            _ => Q::zero(),
        };
        let (a, at) = match (ru, rv) {
            (Role::I0, Role::I0 | Role::J0 | Role::K0) => {
                let x = Q::one() + &beta_u - &delta * &beta_u;
                (x.clone(), x)
            }
            (Role::J0, Role::I0 | Role::J0 | Role::K0) => {
                let x = Q::one() - &delta;
                (x.clone(), x)
            }
            (Role::K0 | Role::I1 | Role::J1, Role::I0 | Role::J0 | Role::K0) => (Q::zero(), Q::zero()),
            (Role::I0 | Role::J0 | Role::K0, Role::I1) => {
                let a = self.i1[mv].coeffs[u].clone();
                (a.clone(), &self.i1[mv].nu * a)
            }
            (Role::I1 | Role::J1, Role::I1) => (Q::zero(), Q::zero()),
            (Role::I0 | Role::J0 | Role::K0, Role::J1) => {
                let j1 = &self.j1[mv];
                let l = self.j1_base(j1)[u].clone() - &b_u;
                (&l / &j1.nu, l)
            }
            (Role::I1, Role::J1) => (self.j1[mv].i1_coeffs[mu].clone(), Q::zero()),
            (Role::J1, Role::J1) => (Q::zero(), Q::zero()),
        };
        (a, at, b_u)
    }

    /// The closed-form table: `λ_1 = a`, `λ_n = ã + b(n − 1)` for `n ≥ 2`.
    pub fn lambda_table(&self, max_n: u32) -> LambdaTable {
        LambdaTable::from_fn(self.len(), max_n, |i, j, n| {
            let (a, at, b) = self.arrays(i.index(), j.index());
            if n == 1 {
                a
            } else {
                at + b * int(n as i64 - 1)
            }
        })
    }

    /// `(a, ã, b)` for vertex `i` and variable `j`.
    pub fn lambda_arrays(&self, i: Decoration, j: Decoration) -> (Q, Q, Q) {
        self.arrays(i.index(), j.index())
    }
}

/// The closed-form λ table of a fundamental system.
pub fn fundamental_lambda(spec: &FundamentalSpec, max_n: u32) -> LambdaTable {
    spec.lambda_table(max_n)
}

/// The fundamental system with the given parameters, written in closed form.
#[allow(clippy::needless_range_loop)]
pub fn fundamental(spec: &FundamentalSpec, truncation: u32) -> Result<SystemFile, SdseError> {
    spec.validate()?;
    let names = numeric_names(spec.len());
    let base = spec.base_len();
    let role = |k: usize| spec.role(k).0;
    // the level-0 factor of a variable: f_{β/(1+β)}((1+β)h) on I₀, f_1(h) on J₀
    let level0 = |k: usize| -> Option<Expr> {
        match role(k) {
            Role::I0 => scaled_fb(&spec.beta(k), &(Q::one() + spec.beta(k)), &names[k]),
            Role::J0 => Some(Expr::fb(Q::one(), Expr::var(&names[k]))),
            _ => None,
        }
    };
    let mut equations = Vec::new();
    for v in 0..spec.len() {
        let (rv, mv) = spec.role(v);
        let eq = match rv {
            Role::I0 | Role::J0 | Role::K0 => {
                let mut parts = Vec::new();
                for k in 0..base {
                    if k == v && rv == Role::I0 {
                        parts.push(Expr::fb(spec.beta(k), Expr::var(&names[k])));
                    } else if k != v {
                        parts.extend(level0(k));
                    }
                }
                product(parts)
            }
            Role::I1 => {
                let vx = &spec.i1[mv];
                if vx.nu.is_zero() {
                    let mut terms = vec![one()];
                    for k in 0..base {
                        let a = &vx.coeffs[k];
                        if a.is_zero() {
                            continue;
                        }
                        let beta = spec.beta(k);
                        let t = match role(k) {
                            Role::I0 if !beta.is_zero() => Expr::product(vec![
                                Expr::num(a / &beta),
                                Expr::ln1m(Expr::scaled_var(&beta, &names[k])),
                            ]),
                            Role::J0 => Expr::product(vec![Expr::num(a.clone()), Expr::ln1m(Expr::var(&names[k]))]),
                            _ => Expr::scaled_var(a, &names[k]),
                        };
                        terms.push(t);
                    }
                    Expr::sum(terms)
                } else {
                    let mut parts = vec![];
                    for k in 0..base {
                        let lambda = &vx.nu * &vx.coeffs[k];
                        let beta_hat = match role(k) {
                            Role::I0 => spec.beta(k),
                            Role::J0 => Q::one(),
                            _ => Q::zero(),
                        };
                        parts.extend(scaled_fb(&beta_hat, &lambda, &names[k]));
                    }
                    shifted(&vx.nu, parts, vec![])
                }
            }
            Role::J1 => {
                let vx = &spec.j1[mv];
                let b = spec.j1_base(vx);
                let mut parts = vec![];
                for k in 0..base {
                    let (beta_hat, l) = match role(k) {
                        Role::I0 => (spec.beta(k), &b[k] - Q::one() - spec.beta(k)),
                        Role::J0 => (Q::one(), &b[k] - Q::one()),
                        _ => (Q::zero(), b[k].clone()),
                    };
                    parts.extend(scaled_fb(&beta_hat, &l, &names[k]));
                }
                let linear = vx
                    .i1_coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| !a.is_zero())
                    .map(|(m, a)| Expr::scaled_var(a, &names[base + m]))
                    .collect();
                shifted(&vx.nu, parts, linear)
            }
        };
        equations.push(eq);
    }
    Ok(file(names, truncation, equations))
}

/// `(1/ν) Π parts + Σ linear + 1 − 1/ν`.
fn shifted(nu: &Q, parts: Vec<Expr>, linear: Vec<Expr>) -> Expr {
    let inv = nu.recip();
    let mut prod = vec![];
    if !inv.is_one() {
        prod.push(Expr::num(inv.clone()));
    }
    prod.extend(parts);
    let mut terms = vec![product(prod)];
    terms.extend(linear);
    let c = Q::one() - inv;
    if !c.is_zero() {
        terms.push(Expr::num(c));
    }
    Expr::sum(terms)
}

impl SystemFile {
    /// Replaces each index by a block of new names, evaluating every equation at block sums.
    pub fn dilate<S: AsRef<str>>(&self, parts: &[Vec<S>]) -> Result<SystemFile, SdseError> {
        if parts.len() != self.alphabet.len() || parts.iter().any(Vec::is_empty) {
            return Err(SdseError::Partition("one nonempty block per index is required".into()));
        }
        let names: Vec<String> = parts.iter().flatten().map(|s| s.as_ref().to_string()).collect();
        let alphabet = Alphabet::new(&names).map_err(|e| SdseError::Partition(e.to_string()))?;
        let block_sum = |old: &str| -> Expr {
            let k = self.alphabet.lookup(old).expect("known index").index();
            Expr::sum(parts[k].iter().map(|y| Expr::var(y.as_ref())).collect())
        };
        let mut equations = Vec::new();
        for (k, block) in parts.iter().enumerate() {
            let e = self.equations[k].map_vars(&block_sum);
            for _ in block {
                equations.push(e.clone());
            }
        }
        Ok(SystemFile {
            alphabet,
            truncation: self.truncation,
            equations,
        })
    }

    /// Renames index `k` to `names[k]` throughout.
    pub fn rename<S: AsRef<str>>(&self, names: &[S]) -> Result<SystemFile, SdseError> {
        if names.len() != self.alphabet.len() {
            return Err(SdseError::Partition(format!(
                "{} names for {} indices",
                names.len(),
                self.alphabet.len()
            )));
        }
        let alphabet = Alphabet::new(names)?;
        let map = |old: &str| -> Expr {
            let k = self.alphabet.lookup(old).expect("known index").index();
            Expr::var(names[k].as_ref())
        };
        Ok(SystemFile {
            alphabet,
            truncation: self.truncation,
            equations: self.equations.iter().map(|e| e.map_vars(&map)).collect(),
        })
    }

    /// Appends an index with `F = 1 + Σ a_i h_i`.
    pub fn extend(&self, coeffs: &[(Decoration, Q)], name: &str) -> Result<SystemFile, SdseError> {
        if self.alphabet.lookup(name).is_some() {
            return Err(SdseError::DuplicateIndex(name.to_string()));
        }
        let mut names = self.alphabet.names().to_vec();
        names.push(name.to_string());
        let alphabet = Alphabet::new(&names)?;
        let mut terms = vec![one()];
        for (d, a) in coeffs {
            if !a.is_zero() {
                terms.push(Expr::scaled_var(a, self.alphabet.name(*d)));
            }
        }
        let mut equations = self.equations.clone();
        equations.push(Expr::sum(terms));
        Ok(SystemFile {
            alphabet,
            truncation: self.truncation,
            equations,
        })
    }
}
