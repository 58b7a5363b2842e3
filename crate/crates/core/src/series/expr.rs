//! Expression language for equations.
//!
//! ```text
//! expr   := term (('+'|'-') term)*        (a leading '-' is allowed)
//! term   := factor ('*' factor)*
//! factor := atom ['^' '(' signed-int ')']
//! atom   := rational | 'h'<index> | 'fb(' rational ',' expr ')' | 'ln1m(' expr ')' | '(' expr ')'
//! ```
//!
//! `fb(β, x)` is `f_β(x)` and `ln1m(x)` is `−ln(1−x)`.

use std::fmt;

use num_traits::{Signed, Zero};

use super::{f_beta, log1m, Series, SeriesError};
use crate::rational::{format_rational, parse_rational, Q};
use crate::trees::Alphabet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub terms: Vec<SignedTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedTerm {
    pub negative: bool,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub atom: Atom,
    pub power: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// Non-negative rational literal.
    Num(Q),
    Var(String),
    Fb(Q, Box<Expr>),
    Ln1m(Box<Expr>),
    Paren(Box<Expr>),
}

impl Atom {
    pub fn factor(self) -> Factor {
        Factor {
            atom: self,
            power: None,
        }
    }
}

impl Factor {
    pub fn pow(self, k: i64) -> Factor {
        Factor {
            atom: self.atom,
            power: Some(k),
        }
    }
}

impl Expr {
    pub fn term(negative: bool, factors: Vec<Factor>) -> Expr {
        Expr {
            terms: vec![SignedTerm { negative, factors }],
        }
    }

    /// A literal; negative values become a negated term.
    pub fn num(q: Q) -> Expr {
        Expr::term(q.is_negative(), vec![Atom::Num(q.abs()).factor()])
    }

    pub fn var(name: &str) -> Expr {
        Expr::term(false, vec![Atom::Var(name.to_string()).factor()])
    }

    /// `c * h_name`, with the coefficient omitted when it is 1.
    pub fn scaled_var(c: &Q, name: &str) -> Expr {
        let mut factors = Vec::new();
        if c.abs() != Q::from_integer(1.into()) {
            factors.push(Atom::Num(c.abs()).factor());
        }
        factors.push(Atom::Var(name.to_string()).factor());
        Expr::term(c.is_negative(), factors)
    }

    pub fn fb(beta: Q, inner: Expr) -> Expr {
        Expr::term(false, vec![Atom::Fb(beta, Box::new(inner)).factor()])
    }

    pub fn ln1m(inner: Expr) -> Expr {
        Expr::term(false, vec![Atom::Ln1m(Box::new(inner)).factor()])
    }

    /// The expression as a single factor, parenthesized unless already atomic.
    pub fn into_factor(self) -> Factor {
        if self.terms.len() == 1 && !self.terms[0].negative && self.terms[0].factors.len() == 1 {
            let f = self
                .terms
                .into_iter()
                .next()
                .unwrap()
                .factors
                .into_iter()
                .next()
                .unwrap();
            return f;
        }
        Atom::Paren(Box::new(self)).factor()
    }

    pub fn sum(parts: Vec<Expr>) -> Expr {
        Expr {
            terms: parts.into_iter().flat_map(|e| e.terms).collect(),
        }
    }

    pub fn product(parts: Vec<Expr>) -> Expr {
        let mut negative = false;
        let mut factors = Vec::new();
        for p in parts {
            if p.terms.len() == 1 {
                let t = p.terms.into_iter().next().unwrap();
                negative ^= t.negative;
                factors.extend(t.factors);
            } else {
                factors.push(Atom::Paren(Box::new(p)).factor());
            }
        }
        Expr::term(negative, factors)
    }

    /// Parses the grammar; when an alphabet is given, variable names are checked.
    pub fn parse(text: &str, alphabet: Option<&Alphabet>) -> Result<Expr, SeriesError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            alphabet,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.expected("operator or end of input"));
        }
        Ok(e)
    }

    pub fn eval(&self, alphabet: &Alphabet, degree: u32) -> Result<Series, SeriesError> {
        let mut acc = Series::zero(degree);
        for t in &self.terms {
            let mut prod = Series::one(degree);
            for f in &t.factors {
                let mut v = f.atom.eval(alphabet, degree)?;
                if let Some(k) = f.power {
                    v = v.pow(k)?;
                }
                prod = prod.mul(&v);
            }
            acc = if t.negative { acc.sub(&prod) } else { acc.add(&prod) };
        }
        Ok(acc)
    }

    /// Every variable name used, in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        for t in &self.terms {
            for f in &t.factors {
                match &f.atom {
                    Atom::Var(v) => {
                        if !out.contains(v) {
                            out.push(v.clone());
                        }
                    }
                    Atom::Fb(_, e) | Atom::Ln1m(e) | Atom::Paren(e) => e.collect_vars(out),
                    Atom::Num(_) => {}
                }
            }
        }
    }

    /// Replaces every variable by the expression `f(name)`.
    pub fn map_vars(&self, f: &dyn Fn(&str) -> Expr) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| SignedTerm {
                    negative: t.negative,
                    factors: t
                        .factors
                        .iter()
                        .map(|fa| {
                            let atom = match &fa.atom {
                                Atom::Var(v) => match f(v).into_factor() {
                                    Factor { atom, power: None } => atom,
                                    other => Atom::Paren(Box::new(Expr::term(false, vec![other]))),
                                },
                                Atom::Num(q) => Atom::Num(q.clone()),
                                Atom::Fb(b, e) => Atom::Fb(b.clone(), Box::new(e.map_vars(f))),
                                Atom::Ln1m(e) => Atom::Ln1m(Box::new(e.map_vars(f))),
                                Atom::Paren(e) => Atom::Paren(Box::new(e.map_vars(f))),
                            };
                            Factor { atom, power: fa.power }
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl Atom {
    fn eval(&self, alphabet: &Alphabet, degree: u32) -> Result<Series, SeriesError> {
        match self {
            Atom::Num(q) => Ok(Series::constant(q.clone(), degree)),
            Atom::Var(name) => {
                alphabet
                    .lookup(name)
                    .map(|d| Series::var(d, degree))
                    .ok_or_else(|| SeriesError::UnknownIndex {
                        name: name.clone(),
                        pos: 0,
                    })
            }
            Atom::Fb(beta, e) => f_beta(beta, &e.eval(alphabet, degree)?, degree),
            Atom::Ln1m(e) => log1m(&e.eval(alphabet, degree)?, degree),
            Atom::Paren(e) => e.eval(alphabet, degree),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.terms.iter().enumerate() {
            match (k, t.negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            for (m, fa) in t.factors.iter().enumerate() {
                if m > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{fa}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.atom {
            Atom::Num(q) => f.write_str(&format_rational(q))?,
            Atom::Var(v) => write!(f, "h{v}")?,
            Atom::Fb(b, e) => write!(f, "fb({}, {e})", format_rational(b))?,
            Atom::Ln1m(e) => write!(f, "ln1m({e})")?,
            Atom::Paren(e) => write!(f, "({e})")?,
        }
        if let Some(k) = self.power {
            write!(f, "^({k})")?;
        }
        Ok(())
    }
}

/// Parses and evaluates an equation over the index set at truncation `degree`.
pub fn parse_expr(text: &str, alphabet: &Alphabet, degree: u32) -> Result<Series, SeriesError> {
    Expr::parse(text, Some(alphabet))?.eval(alphabet, degree)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    alphabet: Option<&'a Alphabet>,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expected(&self, what: &str) -> SeriesError {
        SeriesError::Parse {
            pos: self.pos,
            expected: what.to_string(),
        }
    }

    fn eat(&mut self, c: u8, what: &str) -> Result<(), SeriesError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.expected(what))
        }
    }

    fn starts_with(&mut self, kw: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(kw.as_bytes())
    }

    fn expr(&mut self) -> Result<Expr, SeriesError> {
        let mut terms = Vec::new();
        let mut negative = false;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                negative = true;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        loop {
            let factors = self.term()?;
            terms.push(SignedTerm { negative, factors });
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    negative = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negative = true;
                }
                _ => break,
            }
        }
        Ok(Expr { terms })
    }

    fn term(&mut self) -> Result<Vec<Factor>, SeriesError> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(factors)
    }

    fn factor(&mut self) -> Result<Factor, SeriesError> {
        let atom = self.atom()?;
        let mut power = None;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.eat(b'(', "`(` after `^`")?;
            self.skip_ws();
            let start = self.pos;
            if self.src.get(self.pos) == Some(&b'-') {
                self.pos += 1;
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: i64 = text.parse().map_err(|_| SeriesError::Parse {
                pos: start,
                expected: "signed integer exponent".into(),
            })?;
            self.eat(b')', "`)` closing the exponent")?;
            power = Some(k);
        }
        Ok(Factor { atom, power })
    }

    fn rational(&mut self, allow_sign: bool) -> Result<Q, SeriesError> {
        self.skip_ws();
        let start = self.pos;
        if allow_sign && self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'/') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if text.is_empty() || text == "-" {
            self.pos = start;
            return Err(self.expected("rational"));
        }
        parse_rational(text).map_err(|_| SeriesError::MalformedRational {
            text: text.to_string(),
            pos: start,
        })
    }

    fn atom(&mut self) -> Result<Atom, SeriesError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Atom::Num(self.rational(false)?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(b')', "`)`")?;
                Ok(Atom::Paren(Box::new(e)))
            }
            _ if self.starts_with("fb(") => {
                self.pos += 3;
                let beta = self.rational(true)?;
                self.eat(b',', "`,` after the fb parameter")?;
                let e = self.expr()?;
                self.eat(b')', "`)` closing fb")?;
                Ok(Atom::Fb(beta, Box::new(e)))
            }
            _ if self.starts_with("ln1m(") => {
                self.pos += 5;
                let e = self.expr()?;
                self.eat(b')', "`)` closing ln1m")?;
                Ok(Atom::Ln1m(Box::new(e)))
            }
            Some(b'h') => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(self.expected("index name after `h`"));
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if let Some(al) = self.alphabet {
                    if al.lookup(name).is_none() {
                        return Err(SeriesError::UnknownIndex {
                            name: name.to_string(),
                            pos: start,
                        });
                    }
                }
                Ok(Atom::Var(name.to_string()))
            }
            _ => Err(self.expected("rational, `h<index>`, `fb(`, `ln1m(` or `(`")),
        }
    }
}

impl Expr {
    /// True when the expression is the literal zero.
    pub fn is_literal_zero(&self) -> bool {
        self.terms.len() == 1
            && matches!(self.terms[0].factors.as_slice(), [Factor { atom: Atom::Num(q), power: None }] if q.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::series::MultiIndex;
    use crate::trees::Decoration;

    fn m(e: &[(u32, u32)]) -> MultiIndex {
        MultiIndex::new(e.iter().map(|&(d, k)| (Decoration(d), k)))
    }

    #[test]
    fn affine_cycle_equation() {
        let al = Alphabet::numeric(2);
        let s = parse_expr("1 + h2", &al, 5).unwrap();
        assert_eq!(s.constant_term(), int(1));
        assert_eq!(s.linear(Decoration(1)), int(1));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn f_beta_times_geometric() {
        let al = Alphabet::numeric(3);
        let s = parse_expr("fb(2, h1) * (1 - h3)^(-1)", &al, 4).unwrap();
        assert_eq!(s.coeff(&m(&[(0, 1), (2, 1)])), int(1));
        assert_eq!(s.coeff(&m(&[(0, 1)])), int(1));
        assert_eq!(s.coeff(&m(&[(0, 2)])), ratio(3, 2));
    }

    #[test]
    fn binomial_coefficients() {
        let al = Alphabet::numeric(3);
        let s = parse_expr("(1 - h1 - h3)^(-1)", &al, 6).unwrap();
        assert_eq!(s.coeff(&m(&[(0, 1), (2, 1)])), int(2));
        assert_eq!(s.coeff(&m(&[(0, 2), (2, 3)])), int(10));
    }

    #[test]
    fn errors_carry_positions() {
        let al = Alphabet::numeric(2);
        assert_eq!(
            parse_expr("1 + h7", &al, 3),
            Err(SeriesError::UnknownIndex {
                name: "7".into(),
                pos: 5
            })
        );
        assert_eq!(parse_expr("h1^(-1)", &al, 3), Err(SeriesError::NotInvertible));
        assert!(matches!(
            parse_expr("1/0 + h1", &al, 3),
            Err(SeriesError::MalformedRational { pos: 0, .. })
        ));
        assert!(matches!(
            parse_expr("fb(1/2/3, h1)", &al, 3),
            Err(SeriesError::MalformedRational { pos: 3, .. })
        ));
        assert!(matches!(
            parse_expr("1 + ", &al, 3),
            Err(SeriesError::Parse { pos: 4, .. })
        ));
        assert!(matches!(
            parse_expr("(1 + h1", &al, 3),
            Err(SeriesError::Parse { pos: 7, .. })
        ));
        assert!(matches!(
            parse_expr("h1 h2", &al, 3),
            Err(SeriesError::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            parse_expr("h1^2", &al, 3),
            Err(SeriesError::Parse { pos: 3, .. })
        ));
    }

    #[test]
    fn printing_round_trip() {
        for s in ["1 + h2", "-1/2*h1 - fb(-3/4, 2*h1 + h2)^(2)", "ln1m(h1)*(1 - h2)^(-1)"] {
            let e = Expr::parse(s, None).unwrap();
            assert_eq!(e.to_string(), s);
        }
    }

    #[test]
    fn var_mapping() {
        let e = Expr::parse("fb(2, h1)*h2", None).unwrap();
        let mapped = e.map_vars(&|v| {
            if v == "1" {
                Expr::sum(vec![Expr::var("a"), Expr::var("b")])
            } else {
                Expr::var(v)
            }
        });
        assert_eq!(mapped.to_string(), "fb(2, (ha + hb))*h2");
    }
}
