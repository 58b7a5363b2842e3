use std::collections::BTreeMap;

use serde::Deserialize;

use super::{Sdse, SdseError};
use crate::series::Expr;
use crate::trees::Alphabet;

/// The textual form of a system: index names, a truncation degree and one
/// expression per index.
///
/// ```toml
/// indices = ["1", "2"]
/// truncation = 8
///
/// [equations]
/// "1" = "1 + h2"
/// "2" = "1 + h1"
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemFile {
    pub alphabet: Alphabet,
    pub truncation: u32,
    pub equations: Vec<Expr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    indices: Vec<String>,
    truncation: u32,
    equations: BTreeMap<String, String>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<SystemFile, SdseError> {
        let raw: Raw = toml::from_str(text).map_err(|e| {
            let at = e.span().map(|span| {
                let before = &text[..span.start];
                let line = before.matches('\n').count() + 1;
                let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                format!(" at line {line}, column {column}")
            });
            SdseError::File(format!("{}{}", e.message(), at.unwrap_or_default()))
        })?;
        let alphabet = Alphabet::new(&raw.indices)?;
        for key in raw.equations.keys() {
            if alphabet.lookup(key).is_none() {
                return Err(SdseError::File(format!("equation for undeclared index `{key}`")));
            }
        }
        let mut equations = Vec::with_capacity(alphabet.len());
        for name in alphabet.names() {
            let text = raw
                .equations
                .get(name)
                .ok_or_else(|| SdseError::File(format!("missing equation for index `{name}`")))?;
            let e = Expr::parse(text, Some(&alphabet)).map_err(|source| SdseError::Equation {
                index: name.clone(),
                source,
            })?;
            equations.push(e);
        }
        Ok(SystemFile {
            alphabet,
            truncation: raw.truncation,
            equations,
        })
    }

    /// Evaluates every equation and normalizes `F_i(0)` to 1.
    pub fn build(&self) -> Result<Sdse, SdseError> {
        let mut series = Vec::with_capacity(self.equations.len());
        for (k, e) in self.equations.iter().enumerate() {
            let s = e
                .eval(&self.alphabet, self.truncation)
                .map_err(|source| SdseError::Equation {
                    index: self.alphabet.names()[k].clone(),
                    source,
                })?;
            series.push(s);
        }
        Sdse::normalized(self.alphabet.clone(), series, self.truncation)
    }

    /// Indices `1..=n` with the given equations, in order.
    pub fn from_equations<S: AsRef<str>>(equations: &[S], truncation: u32) -> Result<SystemFile, SdseError> {
        let alphabet = Alphabet::numeric(equations.len());
        let mut exprs = Vec::with_capacity(equations.len());
        for (name, text) in alphabet.names().iter().zip(equations) {
            exprs.push(
                Expr::parse(text.as_ref(), Some(&alphabet)).map_err(|source| SdseError::Equation {
                    index: name.clone(),
                    source,
                })?,
            );
        }
        Ok(SystemFile {
            alphabet,
            truncation,
            equations: exprs,
        })
    }

    pub fn from_sdse(s: &Sdse) -> SystemFile {
        let equations = s
            .equations()
            .iter()
            .map(|f| Expr::parse(&f.to_expr_text(s.alphabet()), None).expect("printed series parses"))
            .collect();
        SystemFile {
            alphabet: s.alphabet().clone(),
            truncation: s.truncation(),
            equations,
        }
    }

    pub fn to_text(&self) -> String {
        let quote = |s: &str| toml::Value::String(s.to_string()).to_string();
        let names: Vec<String> = self.alphabet.names().iter().map(|n| quote(n)).collect();
        let mut out = format!(
            "indices = [{}]\ntruncation = {}\n\n[equations]\n",
            names.join(", "),
            self.truncation
        );
        for (name, e) in self.alphabet.names().iter().zip(&self.equations) {
            out.push_str(&format!("{} = {}\n", quote(name), quote(&e.to_string())));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::Decoration;

    const CYCLE: &str =
        "indices = [\"1\", \"2\"]\ntruncation = 6\n\n[equations]\n\"1\" = \"1 + h2\"\n\"2\" = \"1 + h1\"\n";

    #[test]
    fn round_trip() {
        let f = SystemFile::parse(CYCLE).unwrap();
        assert_eq!(f.to_text(), CYCLE);
        let s = f.build().unwrap();
        assert_eq!(s.truncation(), 6);
        assert!(s.equation(Decoration(0)).depends_on(Decoration(1)));
    }

    #[test]
    fn reports_errors() {
        let missing = "indices = [\"1\", \"2\"]\ntruncation = 3\n[equations]\n\"1\" = \"1 + h2\"\n";
        assert!(matches!(SystemFile::parse(missing), Err(SdseError::File(_))));
        let bad = "indices = [\"1\"]\ntruncation = 3\n[equations]\n\"1\" = \"1 + h9\"\n";
        assert!(matches!(SystemFile::parse(bad), Err(SdseError::Equation { .. })));
        let extra = "indices = [\"1\"]\ntruncation = 3\n[equations]\n\"1\" = \"1 + h1\"\n\"2\" = \"1\"\n";
        assert!(matches!(SystemFile::parse(extra), Err(SdseError::File(_))));
        let syntax = "indices = [\"1\"]\ntruncation = = 3\n";
        let err = SystemFile::parse(syntax).unwrap_err().to_string();
        assert!(err.contains("line 2, column"), "{err}");
        let eq = "indices = [\"1\"]\ntruncation = 3\n[equations]\n\"1\" = \"1 + * h1\"\n";
        assert!(SystemFile::parse(eq).unwrap_err().to_string().contains("position"));
    }

    #[test]
    fn series_form_round_trip() {
        let f = SystemFile::parse(CYCLE).unwrap();
        let s = f.build().unwrap();
        let again = SystemFile::parse(&s.to_system_file().to_text())
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(s, again);
    }
}
