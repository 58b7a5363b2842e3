use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use sdse::classify::{classify, dep_graph, vertex_levels, Level};
use sdse::prelie::{
    check_associative, check_prelie_identity, structure_constants_text, ASSOC_LHS, ASSOC_RHS, PRELIE_LHS, PRELIE_RHS,
};
use sdse::rational::{format_rational, parse_rational, Q};
use sdse::sdse::{
    check_hopf, complete, cycle, fundamental, multicycle, solve_closed_form, FundamentalSpec, I1Vertex, J1Vertex, Sdse,
    SystemFile,
};

/// Combinatorial Dyson–Schwinger systems over exact rationals.
#[derive(Parser)]
#[command(name = "sdse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// System file; `-` or absent reads stdin.
    input: Option<PathBuf>,
    /// Weight bound N.
    #[arg(short = 'N', long = "bound", default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..))]
    bound: u32,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Homogeneous components X_i(n) for n ≤ N.
    Solve(Input),
    /// Colinearity scan to weight N; exit 0 iff the system is Hopf up to N.
    Check(Input),
    /// The λ table with per-vertex affine fits.
    Lambda(Input),
    /// Family, parameters and extensions; exit 1 on a non-Hopf component.
    Classify(Input),
    /// The dependence graph.
    Graph {
        #[command(flatten)]
        io: Input,
        /// Graphviz output with classification clusters.
        #[arg(long)]
        dot: bool,
    },
    /// Pre-Lie scans on the λ table to weight N.
    Prelie {
        #[command(flatten)]
        io: Input,
        #[arg(long)]
        check_identity: bool,
        #[arg(long)]
        check_assoc: bool,
        /// Total grade bound of the scans (default N).
        #[arg(long)]
        grade: Option<u32>,
        /// Also print the structure constants.
        #[arg(long)]
        constants: bool,
    },
    /// Writes a generated system file.
    Gen {
        #[command(subcommand)]
        family: Family,
        #[arg(short = 'D', long, default_value_t = 16, global = true)]
        truncation: u32,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Family {
    /// F_i = 1 + h_{i+1} on n vertices.
    Cycle { n: usize },
    /// Classes of the given sizes, each feeding the next.
    Multicycle {
        #[arg(required = true)]
        sizes: Vec<usize>,
    },
    /// Parts of the given sizes, F_i = Π_{j≠i} (1 − Σ_{J_j} h)^(-1).
    Complete {
        #[arg(required = true)]
        sizes: Vec<usize>,
    },
    /// Fundamental system; --i1 and --j1 take `nu:c1,c2,…`.
    Fundamental {
        /// β of each I₀ vertex.
        #[arg(long = "beta", allow_hyphen_values = true)]
        beta: Vec<String>,
        #[arg(long, default_value_t = 0)]
        j0: usize,
        #[arg(long, default_value_t = 0)]
        k0: usize,
        #[arg(long, allow_hyphen_values = true)]
        i1: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        j1: Vec<String>,
    },
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

fn load(io: &Input) -> Result<Sdse> {
    let text = read_input(&io.input)?;
    let s = SystemFile::parse(&text)?.build()?;
    s.check_budget(io.bound)?;
    Ok(s)
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn q(x: &Q) -> String {
    format_rational(x)
}

fn rational(text: &str) -> Result<Q> {
    parse_rational(text.trim()).map_err(|e| anyhow::anyhow!("`{text}`: {e}"))
}

// `nu:c1,c2,…`
fn vertex_params(text: &str) -> Result<(Q, Vec<Q>)> {
    let (nu, rest) = text
        .split_once(':')
        .with_context(|| format!("`{text}`: expected nu:c1,c2,…"))?;
    let coeffs = if rest.trim().is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(rational).collect::<Result<_>>()?
    };
    Ok((rational(nu)?, coeffs))
}

fn generate(family: &Family, truncation: u32) -> Result<SystemFile> {
    Ok(match family {
        Family::Cycle { n } => cycle(*n, truncation)?,
        Family::Multicycle { sizes } => multicycle(sizes, truncation)?,
        Family::Complete { sizes } => complete(sizes, truncation)?,
        Family::Fundamental { beta, j0, k0, i1, j1 } => {
            let mut spec = FundamentalSpec {
                i0: beta.iter().map(|b| rational(b)).collect::<Result<_>>()?,
                j0: *j0,
                k0: *k0,
                ..Default::default()
            };
            for v in i1 {
                let (nu, coeffs) = vertex_params(v)?;
                spec.i1.push(I1Vertex { nu, coeffs });
            }
            for v in j1 {
                let (nu, i1_coeffs) = vertex_params(v)?;
                spec.j1.push(J1Vertex { nu, i1_coeffs });
            }
            fundamental(&spec, truncation)?
        }
    })
}

fn lambda_text(s: &Sdse, bound: u32) -> Result<String> {
    let v = check_hopf(s, bound)?;
    let al = s.alphabet();
    let mut out = v.to_text(al);
    out.push_str(&v.table.to_text(al));
    let levels = vertex_levels(&v.table);
    for i in s.indices() {
        let name = al.name(i);
        match levels.get(i) {
            Level::Finite {
                level,
                slopes,
                intercepts,
            } => {
                out.push_str(&format!("level\t{name}\t{level}\n"));
                for j in s.indices() {
                    out.push_str(&format!(
                        "fit\t{name}\t{}\tintercept={}\tslope={}\n",
                        al.name(j),
                        q(&intercepts[j.index()]),
                        q(&slopes[j.index()])
                    ));
                }
            }
            Level::NoFinite => out.push_str(&format!("level\t{name}\tnone\n")),
            Level::Undetermined { required } => {
                out.push_str(&format!("level\t{name}\tundetermined\trequired_bound={required}\n"))
            }
        }
    }
    Ok(out)
}

fn prelie_text(
    s: &Sdse,
    bound: u32,
    identity: bool,
    assoc: bool,
    grade: u32,
    constants: bool,
) -> Result<(String, bool)> {
    let v = check_hopf(s, bound)?;
    let al = s.alphabet();
    if !v.is_hopf() {
        bail!("the system is not Hopf up to weight {bound}:\n{}", v.to_text(al));
    }
    let mut out = String::new();
    let mut ok = true;
    if constants {
        out.push_str(&structure_constants_text(&v.table, al));
    }
    if identity {
        match check_prelie_identity(&v.table, grade)? {
            None => out.push_str(&format!("prelie_identity ok grade {grade}\n")),
            Some(w) => {
                ok = false;
                out.push_str(&format!("prelie_identity failed grade {grade}\n"));
                out.push_str(&w.to_text(al, PRELIE_LHS, PRELIE_RHS));
            }
        }
    }
    if assoc {
        let witness = check_associative(&v.table, grade)?;
        let affine = s.is_affine();
        out.push_str(&format!(
            "associative {} grade {grade}\naffine {}\n",
            if witness.is_none() { "yes" } else { "no" },
            if affine { "yes" } else { "no" }
        ));
        if let Some(w) = &witness {
            out.push_str(&w.to_text(al, ASSOC_LHS, ASSOC_RHS));
        }
        if witness.is_none() != affine {
            ok = false;
            out.push_str("associativity and affine equations disagree\n");
        }
    }
    Ok((out, ok))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(io) => {
            let s = load(&io)?;
            let sol = solve_closed_form(&s, io.bound)?;
            write_output(&io.output, &sol.to_text(s.alphabet()))?;
            Ok(true)
        }
        Command::Check(io) => {
            let s = load(&io)?;
            let v = check_hopf(&s, io.bound)?;
            let mut text = v.to_text(s.alphabet());
            text.push_str(&v.table.to_text(s.alphabet()));
            write_output(&io.output, &text)?;
            Ok(v.is_hopf())
        }
        Command::Lambda(io) => {
            let s = load(&io)?;
            let text = lambda_text(&s, io.bound)?;
            write_output(&io.output, &text)?;
            Ok(true)
        }
        Command::Classify(io) => {
            let s = load(&io)?;
            let c = classify(&s, io.bound)?;
            write_output(&io.output, &c.to_text())?;
            Ok(!c.is_not_hopf())
        }
        Command::Graph { io, dot } => {
            let text = read_input(&io.input)?;
            let s = SystemFile::parse(&text)?.build()?;
            let out = if dot {
                let budget_ok = s.check_budget(io.bound).is_ok();
                if budget_ok {
                    classify(&s, io.bound)?.to_dot(&s)
                } else {
                    dep_graph(&s).to_dot(s.alphabet(), &[], &[])
                }
            } else {
                let al = s.alphabet();
                dep_graph(&s)
                    .edges()
                    .iter()
                    .map(|(i, j)| format!("{}\t{}\n", al.name(*i), al.name(*j)))
                    .collect()
            };
            write_output(&io.output, &out)?;
            Ok(true)
        }
        Command::Prelie {
            io,
            check_identity,
            check_assoc,
            grade,
            constants,
        } => {
            if !check_identity && !check_assoc && !constants {
                bail!("prelie needs --check-identity, --check-assoc or --constants");
            }
            let s = load(&io)?;
            let (text, ok) = prelie_text(
                &s,
                io.bound,
                check_identity,
                check_assoc,
                grade.unwrap_or(io.bound),
                constants,
            )?;
            write_output(&io.output, &text)?;
            Ok(ok)
        }
        Command::Gen {
            family,
            truncation,
            output,
        } => {
            let f = generate(&family, truncation)?;
            f.build()?;
            write_output(&output, &f.to_text())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            // sources already quoted by their parent message are skipped
            let mut msg = String::new();
            for cause in e.chain().map(|c| c.to_string()) {
                if !msg.ends_with(&cause) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&cause);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
