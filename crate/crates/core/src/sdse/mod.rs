//! Systems of combinatorial Dyson–Schwinger equations `X_i = B⁺_i(F_i(X))`.

mod file;
mod generate;
mod hopf_check;
mod lambda;
mod solve;
mod transform;

pub use file::SystemFile;
pub use generate::{complete, cycle, fundamental, fundamental_lambda, multicycle, FundamentalSpec, I1Vertex, J1Vertex};
pub use hopf_check::{check_hopf, scan_hopf, HopfVerdict, Lambda, LambdaTable, Witness, WitnessEntry};
pub use lambda::{check_additive_lambdas, lambda_from_path, reconstruct_series, AdditivityViolation};
pub use solve::{solve_closed_form, solve_subst, Solution};
pub use transform::{change_vars, dilate, extend, restrict};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::Q;
use crate::series::{MultiIndex, Series, SeriesError};
use crate::trees::{Alphabet, Decoration, TreeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdseError {
    #[error("equation count {found} does not match the {expected} indices")]
    EquationCount { expected: usize, found: usize },
    #[error("F_{index} is constant; every equation must depend on some variable")]
    Constant { index: String },
    #[error("F_{index}(0) = 0, so X_{index} = 0; such systems are rejected")]
    ZeroConstant { index: String },
    #[error("solving to weight {weight} needs series to degree {needed}, but the truncation is {have}")]
    TruncationBudget { weight: u32, needed: u32, have: u32 },
    #[error("weight bound must be at least 1")]
    ZeroWeight,
    #[error("system file: {0}")]
    File(String),
    #[error("equation for index `{index}`: {source}")]
    Equation { index: String, source: SeriesError },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("scalar for index `{index}` must be nonzero")]
    ZeroScalar { index: String },
    #[error("restriction makes F_{index} constant")]
    Degenerate { index: String },
    #[error("empty index subset")]
    EmptySubset,
    #[error("unknown index `{0}`")]
    UnknownIndex(String),
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("index `{0}` already exists")]
    DuplicateIndex(String),
    #[error("path is empty")]
    EmptyPath,
    #[error("path step {from} -> {to} has a^({from})_{to} = 0")]
    ZeroPathStep { from: String, to: String },
    #[error("F_{index}(0) must be 1 for this operation")]
    NotNormalized { index: String },
    #[error("λ_{n}^({i},{j}) is needed but {reason}")]
    MissingLambda {
        i: String,
        j: String,
        n: u32,
        reason: &'static str,
    },
    #[error("invalid generator parameters: {0}")]
    Spec(String),
}

/// A system `X_i = B⁺_i(F_i(X_j, j ∈ I))` with every `F_i` truncated at a common degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Sdse {
    alphabet: Alphabet,
    equations: Vec<Series>,
    truncation: u32,
}

impl Sdse {
    /// Builds a system; series are truncated to `truncation`. Constant `F_i` and
    /// `F_i(0) = 0` are rejected; other constant terms are kept as given.
    pub fn new(alphabet: Alphabet, equations: Vec<Series>, truncation: u32) -> Result<Sdse, SdseError> {
        if equations.len() != alphabet.len() {
            return Err(SdseError::EquationCount {
                expected: alphabet.len(),
                found: equations.len(),
            });
        }
        let truncation = equations.iter().map(Series::degree).fold(truncation, u32::min);
        let equations: Vec<Series> = equations.iter().map(|f| f.truncate(truncation)).collect();
        for (k, f) in equations.iter().enumerate() {
            let index = alphabet.names()[k].clone();
            if f.constant_term().is_zero() {
                return Err(SdseError::ZeroConstant { index });
            }
            if f.is_constant() {
                return Err(SdseError::Constant { index });
            }
        }
        Ok(Sdse {
            alphabet,
            equations,
            truncation,
        })
    }

    /// Like [`Sdse::new`], then divides each `F_i` by `F_i(0)`.
    pub fn normalized(alphabet: Alphabet, equations: Vec<Series>, truncation: u32) -> Result<Sdse, SdseError> {
        let mut s = Sdse::new(alphabet, equations, truncation)?;
        for f in &mut s.equations {
            let c = f.constant_term();
            if !c.is_one() {
                *f = f.scale(&c.recip());
            }
        }
        Ok(s)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn indices(&self) -> Vec<Decoration> {
        self.alphabet.decorations()
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn equation(&self, i: Decoration) -> &Series {
        &self.equations[i.index()]
    }

    pub fn equations(&self) -> &[Series] {
        &self.equations
    }

    pub fn name(&self, i: Decoration) -> &str {
        self.alphabet.name(i)
    }

    pub fn is_normalized(&self) -> bool {
        self.equations.iter().all(|f| f.constant_term().is_one())
    }

    /// `a^{(i)}_j`.
    pub fn linear(&self, i: Decoration, j: Decoration) -> Q {
        self.equations[i.index()].linear(j)
    }

    /// `a^{(i)}_{j,k}`, the coefficient of `h_j h_k`.
    pub fn quadratic(&self, i: Decoration, j: Decoration, k: Decoration) -> Q {
        self.equations[i.index()].coeff(&MultiIndex::new([(j, 1), (k, 1)]))
    }

    /// The matrix `a^{(l)}_j` indexed `[l][j]`.
    pub fn linear_matrix(&self) -> Vec<Vec<Q>> {
        let idx = self.indices();
        idx.iter()
            .map(|&l| idx.iter().map(|&j| self.linear(l, j)).collect())
            .collect()
    }

    /// Every `F_i` is affine.
    pub fn is_affine(&self) -> bool {
        self.equations.iter().all(Series::is_affine)
    }

    /// Checks that solving to weight `n` stays inside the truncation.
    pub fn check_budget(&self, n: u32) -> Result<(), SdseError> {
        if n == 0 {
            return Err(SdseError::ZeroWeight);
        }
        if self.truncation + 1 < n {
            return Err(SdseError::TruncationBudget {
                weight: n,
                needed: n - 1,
                have: self.truncation,
            });
        }
        Ok(())
    }

    /// Lowers the truncation degree.
    pub fn truncated(&self, degree: u32) -> Sdse {
        let d = degree.min(self.truncation);
        Sdse {
            alphabet: self.alphabet.clone(),
            equations: self.equations.iter().map(|f| f.truncate(d)).collect(),
            truncation: d,
        }
    }

    /// The system file with each `F_i` written as its truncated polynomial.
    pub fn to_system_file(&self) -> SystemFile {
        SystemFile::from_sdse(self)
    }

    /// `i: F_i` lines, one per index.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for i in self.indices() {
            out.push_str(&format!(
                "F_{} = {}\n",
                self.name(i),
                self.equation(i).to_expr_text(&self.alphabet)
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::series::parse_expr;

    fn system(eqs: &[&str], d: u32) -> Result<Sdse, SdseError> {
        let al = Alphabet::numeric(eqs.len());
        let fs = eqs.iter().map(|e| parse_expr(e, &al, d).unwrap()).collect();
        Sdse::normalized(al, fs, d)
    }

    #[test]
    fn rejects_degenerate_equations() {
        assert!(matches!(system(&["1", "1 + h1"], 3), Err(SdseError::Constant { .. })));
        assert!(matches!(
            system(&["h2", "1 + h1"], 3),
            Err(SdseError::ZeroConstant { .. })
        ));
    }

    #[test]
    fn normalizes_constant_term() {
        let s = system(&["2 + 4*h2", "1 + h1"], 3).unwrap();
        assert!(s.is_normalized());
        assert_eq!(s.linear(Decoration(0), Decoration(1)), int(2));
    }

    #[test]
    fn truncation_budget() {
        let s = system(&["1 + h1"], 3).unwrap();
        assert!(s.check_budget(4).is_ok());
        assert_eq!(
            s.check_budget(5),
            Err(SdseError::TruncationBudget {
                weight: 5,
                needed: 4,
                have: 3
            })
        );
        assert_eq!(s.check_budget(0), Err(SdseError::ZeroWeight));
    }
}
