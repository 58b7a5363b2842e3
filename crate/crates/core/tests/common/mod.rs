//! Shared corpus and seeded random generators for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdse::classify::{dep_graph, peel_extensions};
use sdse::rational::{int, ratio, Q};
use sdse::sdse::{
    change_vars, complete, cycle, fundamental, multicycle, FundamentalSpec, I1Vertex, J1Vertex, Sdse, SystemFile,
};
use sdse::series::MultiIndex;
use sdse::trees::Decoration;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn system(equations: &[&str], truncation: u32) -> Sdse {
    SystemFile::from_equations(equations, truncation)
        .and_then(|f| f.build())
        .unwrap_or_else(|e| panic!("{equations:?}: {e}"))
}

/// A named system and whether it is known to be Hopf.
pub struct Entry {
    pub name: String,
    pub system: Sdse,
    pub hopf: bool,
}

fn entry(name: &str, file: SystemFile, hopf: bool) -> Entry {
    Entry {
        name: name.to_string(),
        system: file.build().unwrap_or_else(|e| panic!("{name}: {e}")),
        hopf,
    }
}

/// Five vertices: `I₀ = {1, 2}` with `β = 2, 3`, `J₀ = {3, 4}`, `K₀ = {5}`.
pub fn sample_spec() -> FundamentalSpec {
    FundamentalSpec {
        i0: vec![int(2), int(3)],
        j0: 2,
        k0: 1,
        ..Default::default()
    }
}

/// The five-vertex system with three `I₁` vertices (`ν = 3, 0, 1`) and a
/// `J₁` vertex over the `ν = 1` one.
pub fn sample_with_level_one() -> FundamentalSpec {
    let mut spec = sample_spec();
    spec.i1 = vec![
        I1Vertex {
            nu: int(3),
            coeffs: vec![int(1), int(2), int(0), int(1), int(0)],
        },
        I1Vertex {
            nu: int(0),
            coeffs: vec![int(1), ratio(1, 2), int(2), int(0), int(0)],
        },
        I1Vertex {
            nu: int(1),
            coeffs: vec![int(1), int(1), int(1), int(1), int(1)],
        },
    ];
    spec.j1 = vec![J1Vertex {
        nu: int(2),
        i1_coeffs: vec![int(0), int(0), int(1)],
    }];
    spec
}

/// Small fundamental specs used across suites.
pub fn small_specs() -> Vec<(&'static str, FundamentalSpec)> {
    vec![
        (
            "fundamental beta 2, J0, nu 3",
            FundamentalSpec {
                i0: vec![int(2)],
                j0: 1,
                i1: vec![I1Vertex {
                    nu: int(3),
                    coeffs: vec![int(1), int(2)],
                }],
                ..Default::default()
            },
        ),
        (
            "fundamental beta 1/2, nu 0",
            FundamentalSpec {
                i0: vec![ratio(1, 2)],
                i1: vec![I1Vertex {
                    nu: int(0),
                    coeffs: vec![int(3)],
                }],
                ..Default::default()
            },
        ),
        (
            "fundamental beta -1/2, K0",
            FundamentalSpec {
                i0: vec![ratio(-1, 2)],
                k0: 1,
                ..Default::default()
            },
        ),
        (
            "fundamental J0 x2, nu 1, J1",
            FundamentalSpec {
                j0: 2,
                i1: vec![I1Vertex {
                    nu: int(1),
                    coeffs: vec![int(2), int(1)],
                }],
                j1: vec![J1Vertex {
                    nu: int(-1),
                    i1_coeffs: vec![int(1)],
                }],
                ..Default::default()
            },
        ),
    ]
}

/// The named corpus at the given truncation: Hopf systems from every family
/// plus non-Hopf controls.
pub fn corpus(truncation: u32) -> Vec<Entry> {
    let d = truncation;
    let eq = |equations: &[&str]| SystemFile::from_equations(equations, d).unwrap();
    let mut out = vec![
        entry("cycle 2", cycle(2, d).unwrap(), true),
        entry("cycle 3", cycle(3, d).unwrap(), true),
        entry("cycle 4", cycle(4, d).unwrap(), true),
        entry("affine loop", eq(&["1 + h1"]), true),
        entry("multicycle 2 1", multicycle(&[2, 1], d).unwrap(), true),
        entry("multicycle 1 2 1", multicycle(&[1, 2, 1], d).unwrap(), true),
        entry("complete 1 1 1", complete(&[1, 1, 1], d).unwrap(), true),
        entry("complete 1 2", complete(&[1, 2], d).unwrap(), true),
        entry("geometric loop", eq(&["(1 - h1)^(-1)"]), true),
        entry("f_2 loop", eq(&["fb(2, h1)"]), true),
        entry("exponential loop", eq(&["fb(0, h1)"]), true),
        entry("f_-1/2 loop", eq(&["fb(-1/2, h1)"]), true),
        entry(
            "dilated geometric",
            eq(&["(1 - h1 - h2)^(-1)", "(1 - h1 - h2)^(-1)"]),
            true,
        ),
        entry(
            "scaled affine",
            eq(&["1 + 2*h2 + 3*h3", "1 + 1/2*h1", "1 + 1/2*h1"]),
            true,
        ),
        entry(
            "extended cycle",
            cycle(2, d).unwrap().extend(&[(Decoration(1), int(3))], "x").unwrap(),
            true,
        ),
        entry(
            "two vertex fundamental",
            eq(&["(1 - h1)^(-1)*fb(1/2, 2*h2)", "fb(1/2, 2*h1)*(1 - h2)^(-1)"]),
            true,
        ),
        entry("perturbed 2-cycle", eq(&["1 + h2 + h2^(2)", "1 + h1"]), false),
        entry("quadratic loop", eq(&["1 + h1 + h1^(2)"]), false),
        entry(
            "unequal extension",
            eq(&[
                "(1 - h1)^(-1)*(1 - h2)^(-1)",
                "(1 - h2)^(-1)*fb(1/2, 2*h1)",
                "1 + h1 + h2",
            ]),
            false,
        ),
    ];
    for (name, spec) in small_specs() {
        out.push(entry(name, fundamental(&spec, d).unwrap(), true));
    }
    out
}

const BETAS: [(i64, i64); 6] = [(2, 1), (3, 1), (1, 2), (-1, 2), (1, 1), (0, 1)];
const NUS: [(i64, i64); 5] = [(0, 1), (1, 1), (2, 1), (3, 1), (-1, 2)];
const COEFFS: [(i64, i64); 5] = [(1, 1), (2, 1), (-1, 1), (1, 2), (3, 1)];
const SCALES: [(i64, i64); 5] = [(1, 1), (2, 1), (1, 2), (-3, 1), (3, 2)];

fn pick(rng: &mut ChaCha8Rng, table: &[(i64, i64)]) -> Q {
    let &(p, q) = table.choose(rng).expect("nonempty");
    ratio(p, q)
}

fn nonzero_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<Q> {
    loop {
        let row: Vec<Q> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.4) {
                    Q::zero()
                } else {
                    pick(rng, &COEFFS)
                }
            })
            .collect();
        if row.iter().any(|a| !a.is_zero()) {
            return row;
        }
    }
}

/// A random fundamental spec with at most `max_len` indices whose system is
/// connected and has no vertex of extension shape.
pub fn random_spec(rng: &mut ChaCha8Rng, max_len: usize, truncation: u32) -> FundamentalSpec {
    loop {
        let mut spec = FundamentalSpec {
            i0: (0..rng.gen_range(0..=2)).map(|_| pick(rng, &BETAS)).collect(),
            j0: rng.gen_range(0..=2),
            k0: rng.gen_range(0..=1),
            ..Default::default()
        };
        let base = spec.len();
        if base == 0 || base > max_len {
            continue;
        }
        for _ in 0..rng.gen_range(0..=(max_len - base).min(2)) {
            let nu = pick(rng, &NUS);
            spec.i1.push(I1Vertex {
                nu,
                coeffs: nonzero_row(rng, base),
            });
        }
        let ones: Vec<usize> = (0..spec.i1.len()).filter(|&k| spec.i1[k].nu == int(1)).collect();
        if !ones.is_empty() && spec.len() < max_len && rng.gen_bool(0.6) {
            let m = *ones.choose(rng).expect("nonempty");
            let mut i1_coeffs = vec![Q::zero(); spec.i1.len()];
            i1_coeffs[m] = pick(rng, &COEFFS);
            spec.j1.push(J1Vertex {
                nu: pick(rng, &NUS[1..]),
                i1_coeffs,
            });
        }
        let Ok(file) = fundamental(&spec, truncation) else {
            continue;
        };
        let Ok(s) = file.build() else { continue };
        if dep_graph(&s).components().len() == 1 && peel_extensions(&s).0.is_empty() {
            return spec;
        }
    }
}

/// The generating parameters of a [`Case`].
#[derive(Clone, Debug)]
pub enum Family {
    Multicyclic {
        classes: Vec<Vec<String>>,
    },
    Fundamental {
        spec: FundamentalSpec,
        blocks: Vec<Vec<String>>,
    },
}

/// A generated system with everything that went into it.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub family: Family,
    pub system: Sdse,
    /// Extension vertices, in the order they were added.
    pub extensions: Vec<String>,
    /// `h_y ↦ c_y h_y` applied after all extensions.
    pub scaling: BTreeMap<String, Q>,
    /// Non-extension vertices with an ascendant outside the extensions.
    pub observed: Vec<String>,
}

fn dilate_names(rng: &mut ChaCha8Rng, n: usize, max_total: usize) -> Vec<Vec<String>> {
    let mut total = n;
    (1..=n)
        .map(|k| {
            if total < max_total && rng.gen_bool(0.3) {
                total += 1;
                vec![k.to_string(), format!("{k}b")]
            } else {
                vec![k.to_string()]
            }
        })
        .collect()
}

/// Rewrites a dilated fundamental spec so that every block which equals a
/// run of separate vertices becomes that run: blocks of `K0`, `I1` and `J1`
/// vertices, and `I0` blocks with `β = 0`.
pub fn split_free_blocks(spec: &FundamentalSpec, blocks: &[Vec<String>]) -> (FundamentalSpec, Vec<Vec<String>>) {
    let (ni0, nj0, nk0) = (spec.i0.len(), spec.j0, spec.k0);
    let base = ni0 + nj0 + nk0;
    let mut out = FundamentalSpec {
        j0: nj0,
        ..Default::default()
    };
    let mut i0_blocks = Vec::new();
    let mut j0_blocks = Vec::new();
    let mut k0_blocks = Vec::new();
    let mut i1_blocks = Vec::new();
    let mut j1_blocks = Vec::new();
    // origin index of each base column in the output
    let mut columns = Vec::new();
    for (k, block) in blocks.iter().enumerate().take(ni0) {
        if spec.i0[k].is_zero() {
            for y in block {
                out.i0.push(Q::zero());
                i0_blocks.push(vec![y.clone()]);
                columns.push(k);
            }
        } else {
            out.i0.push(spec.i0[k].clone());
            i0_blocks.push(block.clone());
            columns.push(k);
        }
    }
    for (k, block) in blocks.iter().enumerate().take(ni0 + nj0).skip(ni0) {
        j0_blocks.push(block.clone());
        columns.push(k);
    }
    for (k, block) in blocks.iter().enumerate().take(base).skip(ni0 + nj0) {
        for y in block {
            out.k0 += 1;
            k0_blocks.push(vec![y.clone()]);
            columns.push(k);
        }
    }
    let mut i1_origin = Vec::new();
    for (m, v) in spec.i1.iter().enumerate() {
        for y in &blocks[base + m] {
            out.i1.push(I1Vertex {
                nu: v.nu.clone(),
                coeffs: columns.iter().map(|&k| v.coeffs[k].clone()).collect(),
            });
            i1_blocks.push(vec![y.clone()]);
            i1_origin.push(m);
        }
    }
    for (m, v) in spec.j1.iter().enumerate() {
        for y in &blocks[base + spec.i1.len() + m] {
            out.j1.push(J1Vertex {
                nu: v.nu.clone(),
                i1_coeffs: i1_origin.iter().map(|&o| v.i1_coeffs[o].clone()).collect(),
            });
            j1_blocks.push(vec![y.clone()]);
        }
    }
    let blocks = [i0_blocks, j0_blocks, k0_blocks, i1_blocks, j1_blocks].concat();
    (out, blocks)
}

/// A random multicyclic or fundamental system, randomly dilated, extended
/// up to three times and rescaled.
pub fn random_case(rng: &mut ChaCha8Rng, truncation: u32) -> Case {
    let multicyclic = rng.gen_bool(0.5);
    let (base, family_label, sizes, spec) = if multicyclic {
        let sizes: Vec<usize> = (0..rng.gen_range(2..=4)).map(|_| rng.gen_range(1..=2)).collect();
        (
            multicycle(&sizes, truncation).unwrap(),
            format!("multicycle {sizes:?}"),
            sizes,
            None,
        )
    } else {
        let spec = random_spec(rng, 4, truncation);
        (
            fundamental(&spec, truncation).unwrap(),
            format!("{spec:?}"),
            vec![],
            Some(spec),
        )
    };
    let n = base.alphabet.len();
    let blocks = dilate_names(rng, n, 6);
    let mut file = base.dilate(&blocks).unwrap();
    let mut family = match spec {
        Some(spec) => {
            let (spec, blocks) = split_free_blocks(&spec, &blocks);
            Family::Fundamental { spec, blocks }
        }
        None => {
            let mut classes = Vec::new();
            let mut next = 0;
            for &size in &sizes {
                classes.push(blocks[next..next + size].concat());
                next += size;
            }
            Family::Multicyclic { classes }
        }
    };
    let mut extensions = Vec::new();
    for k in 1..=rng.gen_range(0..=3) {
        let s = file.build().unwrap();
        let mut groups: BTreeMap<String, Vec<Decoration>> = BTreeMap::new();
        for i in s.indices() {
            groups.entry(format!("{:?}", s.equation(i))).or_default().push(i);
        }
        let groups: Vec<Vec<Decoration>> = groups.into_values().collect();
        let mut group = groups.choose(rng).expect("nonempty").clone();
        group.shuffle(rng);
        group.truncate(rng.gen_range(1..=2));
        let name = format!("x{k}");
        if let Family::Multicyclic { classes } = &mut family {
            // an extension sits one class before its support
            let support = s.name(group[0]);
            let c = classes
                .iter()
                .position(|cl| cl.iter().any(|y| y == support))
                .expect("classified");
            let len = classes.len();
            classes[(c + len - 1) % len].push(name.clone());
        }
        let coeffs: Vec<(Decoration, Q)> = group.into_iter().map(|d| (d, pick(rng, &COEFFS))).collect();
        file = file.extend(&coeffs, &name).unwrap();
        extensions.push(name);
    }
    let s = file.build().unwrap();
    let mut scaling = BTreeMap::new();
    let s = if rng.gen_bool(0.5) {
        let lambda: Vec<Q> = s.indices().into_iter().map(|_| pick(rng, &SCALES)).collect();
        for i in s.indices() {
            scaling.insert(s.name(i).to_string(), lambda[i.index()].clone());
        }
        change_vars(&s, &lambda, &vec![int(1); s.len()]).unwrap()
    } else {
        s
    };
    let g = dep_graph(&s);
    let is_ext = |d: Decoration| extensions.iter().any(|x| x == s.name(d));
    let observed = s
        .indices()
        .into_iter()
        .filter(|&v| !is_ext(v) && g.predecessors(v).into_iter().any(|p| !is_ext(p)))
        .map(|v| s.name(v).to_string())
        .collect();
    Case {
        label: format!("{family_label} blocks {blocks:?} extensions {extensions:?} scaling {scaling:?}"),
        family,
        system: s,
        extensions,
        scaling,
        observed,
    }
}

/// Random graph on at most six vertices with every out-degree positive.
/// With `condition_c`, successors of a common vertex share their successor
/// sets by construction.
pub fn random_graph(rng: &mut ChaCha8Rng, condition_c: bool) -> (usize, Vec<(usize, usize)>) {
    let n = rng.gen_range(1..=6);
    let mut edges = Vec::new();
    if condition_c {
        // vertices in one group share a successor set drawn from a single group
        let k = rng.gen_range(1..=n);
        let mut group: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.gen_range(0..k) }).collect();
        group.shuffle(rng);
        for g in 0..k {
            let h = rng.gen_range(0..k);
            let members: Vec<usize> = (0..n).filter(|&v| group[v] == h).collect();
            let mut targets: Vec<usize> = members.into_iter().filter(|_| rng.gen_bool(0.6)).collect();
            if targets.is_empty() {
                targets.push(
                    *(0..n)
                        .filter(|&v| group[v] == h)
                        .collect::<Vec<_>>()
                        .choose(rng)
                        .expect("nonempty"),
                );
            }
            for v in (0..n).filter(|&v| group[v] == g) {
                edges.extend(targets.iter().map(|&t| (v, t)));
            }
        }
    } else {
        for v in 0..n {
            let mut succ: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.35)).collect();
            if succ.is_empty() {
                succ.push(rng.gen_range(0..n));
            }
            edges.extend(succ.into_iter().map(|t| (v, t)));
        }
    }
    edges.sort();
    edges.dedup();
    (n, edges)
}

/// `F_i = 1 + Σ_{i → j} h_j`.
pub fn affine_system(n: usize, edges: &[(usize, usize)], truncation: u32) -> Sdse {
    let equations: Vec<String> = (0..n)
        .map(|i| {
            let terms: Vec<String> = edges
                .iter()
                .filter(|e| e.0 == i)
                .map(|e| format!("h{}", e.1 + 1))
                .collect();
            format!("1 + {}", terms.join(" + "))
        })
        .collect();
    SystemFile::from_equations(&equations, truncation)
        .unwrap()
        .build()
        .unwrap()
}

/// A small random system: a generated Hopf one, or one with a random
/// quadratic term added to one equation.
pub fn random_small_system(rng: &mut ChaCha8Rng, truncation: u32) -> Sdse {
    let s = if rng.gen_bool(0.5) {
        let sizes = [&[1, 1][..], &[1, 1, 1], &[2, 1], &[1, 2]]
            .choose(rng)
            .expect("nonempty")
            .to_vec();
        multicycle(&sizes, truncation).unwrap().build().unwrap()
    } else {
        fundamental(&random_spec(rng, 3, truncation), truncation)
            .unwrap()
            .build()
            .unwrap()
    };
    if rng.gen_bool(0.5) {
        return s;
    }
    let i = Decoration(rng.gen_range(0..s.len()) as u32);
    let a = Decoration(rng.gen_range(0..s.len()) as u32);
    let b = Decoration(rng.gen_range(0..s.len()) as u32);
    let mut equations = s.equations().to_vec();
    equations[i.index()].add_coeff(MultiIndex::new([(a, 1)]).plus_unit(b), pick(rng, &COEFFS));
    Sdse::new(s.alphabet().clone(), equations, s.truncation()).unwrap()
}
