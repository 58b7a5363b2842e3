//! Dependence graphs, vertex levels and recognition of the Hopf families.

mod fit;
mod graph;
mod levels;
mod recognize;

use std::fmt::Write as _;

pub use fit::{expand_fit, fit_product_form, FactorGroup, ProductFit};
pub use graph::{dep_graph, DepGraph};
pub use levels::{vertex_levels, Level, LevelAssignment, MIN_WINDOW};
pub use recognize::{classify_connected, peel_extensions};

use crate::rational::{format_rational, Q};
use crate::sdse::{restrict, FundamentalSpec, Sdse, SdseError, Witness};
use crate::series::{MultiIndex, Series};
use crate::trees::{Alphabet, Decoration};

/// Smallest bound at which every generated system receives its verdict.
pub const MIN_CLASSIFY_BOUND: u32 = MIN_WINDOW + 2;

/// An extension vertex `F_x = 1 + Σ a_y h_y`, with names of the input system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub vertex: String,
    pub coeffs: Vec<(String, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multicyclic {
    pub period: usize,
    /// `I_1̄, …, I_N̄`: every edge goes from one class to the next.
    pub classes: Vec<Vec<String>>,
    /// Peeled extension vertices, in peeling order.
    pub peeled: Vec<Extension>,
    /// The input is the regenerated system with `h_y ↦ c_y h_y`.
    pub scaling: Vec<(String, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fundamental {
    pub spec: FundamentalSpec,
    /// The dilatation block of each index of `spec`, in its order.
    pub blocks: Vec<Vec<String>>,
    pub peeled: Vec<Extension>,
    pub scaling: Vec<(String, Q)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Multicyclic(Multicyclic),
    Fundamental(Fundamental),
    NotHopf(Witness),
    Unknown {
        reason: String,
        required_bound: Option<u32>,
    },
}

/// The verdict for one connected component; decorations inside a witness
/// refer to `alphabet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentClassification {
    pub alphabet: Alphabet,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub bound: u32,
    pub components: Vec<ComponentClassification>,
}

impl Classification {
    pub fn is_not_hopf(&self) -> bool {
        self.components.iter().any(|c| matches!(c.verdict, Verdict::NotHopf(_)))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("bound {}\n", self.bound);
        for c in &self.components {
            let _ = writeln!(out, "component {}", c.alphabet.names().join(" "));
            out.push_str(&c.verdict.to_text(&c.alphabet));
        }
        out
    }

    /// DOT rendering of `s`'s graph with dilatation classes clustered and
    /// peeled extension vertices boxed.
    pub fn to_dot(&self, s: &Sdse) -> String {
        let al = s.alphabet();
        let lookup = |names: &[String]| -> Vec<Decoration> { names.iter().filter_map(|n| al.lookup(n)).collect() };
        let mut clusters = Vec::new();
        let mut boxed = Vec::new();
        for c in &self.components {
            match &c.verdict {
                Verdict::Multicyclic(m) => {
                    clusters.extend(m.classes.iter().map(|k| lookup(k)));
                    boxed.extend(m.peeled.iter().filter_map(|e| al.lookup(&e.vertex)));
                }
                Verdict::Fundamental(f) => {
                    clusters.extend(f.blocks.iter().filter(|b| b.len() > 1).map(|b| lookup(b)));
                    boxed.extend(f.peeled.iter().filter_map(|e| al.lookup(&e.vertex)));
                }
                _ => {}
            }
        }
        dep_graph(s).to_dot(al, &clusters, &boxed)
    }
}

fn q(x: &Q) -> String {
    format_rational(x)
}

fn extension_text(out: &mut String, peeled: &[Extension], scaling: &[(String, Q)]) {
    for e in peeled {
        let terms: Vec<String> = e.coeffs.iter().map(|(y, a)| format!("{}*h{}", q(a), y)).collect();
        let _ = writeln!(out, "extension {} = 1 + {}", e.vertex, terms.join(" + "));
    }
    for (y, c) in scaling {
        let _ = writeln!(out, "scaling {} {}", y, q(c));
    }
}

impl Verdict {
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        match self {
            Verdict::Multicyclic(m) => {
                let _ = writeln!(out, "verdict multicyclic\nperiod {}", m.period);
                for (k, class) in m.classes.iter().enumerate() {
                    let _ = writeln!(out, "class {} {}", k + 1, class.join(" "));
                }
                extension_text(&mut out, &m.peeled, &m.scaling);
            }
            Verdict::Fundamental(f) => {
                out.push_str("verdict fundamental\n");
                let spec = &f.spec;
                let mut k = 0;
                for beta in &spec.i0 {
                    let _ = writeln!(out, "I0 {} beta {}", f.blocks[k].join(" "), q(beta));
                    k += 1;
                }
                for _ in 0..spec.j0 {
                    let _ = writeln!(out, "J0 {}", f.blocks[k].join(" "));
                    k += 1;
                }
                for _ in 0..spec.k0 {
                    let _ = writeln!(out, "K0 {}", f.blocks[k].join(" "));
                    k += 1;
                }
                for v in &spec.i1 {
                    let coeffs: Vec<String> = v.coeffs.iter().map(q).collect();
                    let _ = writeln!(
                        out,
                        "I1 {} nu {} coeffs {}",
                        f.blocks[k].join(" "),
                        q(&v.nu),
                        coeffs.join(" ")
                    );
                    k += 1;
                }
                for v in &spec.j1 {
                    let coeffs: Vec<String> = v.i1_coeffs.iter().map(q).collect();
                    let _ = writeln!(
                        out,
                        "J1 {} nu {} coeffs {}",
                        f.blocks[k].join(" "),
                        q(&v.nu),
                        coeffs.join(" ")
                    );
                    k += 1;
                }
                extension_text(&mut out, &f.peeled, &f.scaling);
            }
            Verdict::NotHopf(w) => {
                out.push_str("verdict not-hopf\n");
                out.push_str(&w.to_text(alphabet));
            }
            Verdict::Unknown { reason, required_bound } => {
                let _ = writeln!(out, "verdict unknown\nreason {reason}");
                if let Some(n) = required_bound {
                    let _ = writeln!(out, "required_bound {n}");
                }
            }
        }
        out
    }
}

/// Classifies every connected component of `s` from its solution to weight `bound`.
pub fn classify(s: &Sdse, bound: u32) -> Result<Classification, SdseError> {
    s.check_budget(bound)?;
    let comps = dep_graph(s).components();
    let mut components = Vec::with_capacity(comps.len());
    for comp in comps {
        let sub = if comp.len() == s.len() {
            s.clone()
        } else {
            restrict(s, &comp)?
        };
        let verdict = classify_connected(&sub, bound)?;
        components.push(ComponentClassification {
            alphabet: sub.alphabet().clone(),
            verdict,
        });
    }
    Ok(Classification { bound, components })
}

/// `series` rewritten over `to`'s indices, matching by name.
pub(crate) fn rename_series(series: &Series, from: &Alphabet, to: &Alphabet) -> Option<Series> {
    let mut terms = Vec::new();
    for (m, c) in series.terms() {
        let mut entries = Vec::new();
        for &(d, e) in m.entries() {
            entries.push((to.lookup(from.name(d))?, e));
        }
        terms.push((MultiIndex::new(entries), c.clone()));
    }
    Some(Series::from_terms(terms, series.degree()))
}

/// Equality of two systems up to the order of their indices.
pub fn same_up_to_order(a: &Sdse, b: &Sdse) -> bool {
    if a.len() != b.len() || a.truncation() != b.truncation() {
        return false;
    }
    a.indices().into_iter().all(|i| {
        let Some(j) = b.alphabet().lookup(a.name(i)) else {
            return false;
        };
        rename_series(b.equation(j), b.alphabet(), a.alphabet()).as_ref() == Some(a.equation(i))
    })
}
