use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{
    dep_graph, fit_product_form, same_up_to_order, vertex_levels, DepGraph, Extension, Fundamental, Level,
    LevelAssignment, Multicyclic, ProductFit, Verdict,
};
use crate::rational::Q;
use crate::sdse::{
    change_vars, check_hopf, fundamental, multicycle, FundamentalSpec, I1Vertex, J1Vertex, Sdse, SdseError, SystemFile,
};
use crate::series::{f_beta, scaled_f, MultiIndex, Series};
use crate::trees::Decoration;

/// Repeatedly removes the least vertex that has no ascendant among the
/// remaining ones, an affine series, and a support of vertices with equal
/// series. Returns the peeled vertices in order and the remaining core.
pub fn peel_extensions(s: &Sdse) -> (Vec<Decoration>, Vec<Decoration>) {
    let g = dep_graph(s);
    let mut remaining: BTreeSet<Decoration> = s.indices().into_iter().collect();
    let mut peeled = Vec::new();
    while remaining.len() > 1 {
        let candidate = remaining.iter().copied().find(|&v| {
            let f = s.equation(v);
            let support = f.variables();
            g.predecessors(v).iter().all(|p| !remaining.contains(p))
                && f.is_affine()
                && !support.is_empty()
                && support.iter().all(|y| *y != v && remaining.contains(y))
                && support.windows(2).all(|w| s.equation(w[0]) == s.equation(w[1]))
        });
        match candidate {
            Some(v) => {
                remaining.remove(&v);
                peeled.push(v);
            }
            None => break,
        }
    }
    (peeled, remaining.into_iter().collect())
}

fn unknown(reason: impl Into<String>) -> Verdict {
    Verdict::Unknown {
        reason: reason.into(),
        required_bound: None,
    }
}

/// Classifies a connected system from its solution to weight `bound`:
/// the Hopf check, extension peeling, levels of the remaining core, then the
/// multicyclic or fundamental recognizer. Every positive verdict has been
/// regenerated and compared with the input.
pub fn classify_connected(s: &Sdse, bound: u32) -> Result<Verdict, SdseError> {
    let hopf = check_hopf(s, bound)?;
    if let Some(w) = hopf.witness {
        return Ok(Verdict::NotHopf(w));
    }
    let (peeled, core) = peel_extensions(s);
    let levels = vertex_levels(&hopf.table);
    let required = core
        .iter()
        .filter_map(|&v| match levels.get(v) {
            Level::Undetermined { required } => Some(*required + 1),
            _ => None,
        })
        .max();
    if let Some(n) = required {
        return Ok(Verdict::Unknown {
            reason: "truncation too shallow for level windows".into(),
            required_bound: Some(n),
        });
    }
    let g = dep_graph(s);
    Ok(if levels.all_finite(&core) {
        fundamental_branch(s, &g, &levels, &core, &peeled)?
    } else if levels.none_finite(&core) {
        multicyclic_branch(s, &g, &core, &peeled)?
    } else {
        Verdict::Unknown {
            reason: "mixed finite and non-finite levels".into(),
            required_bound: Some(bound + 1),
        }
    })
}

fn extensions(s: &Sdse, peeled: &[Decoration]) -> Vec<Extension> {
    peeled
        .iter()
        .map(|&x| Extension {
            vertex: s.name(x).to_string(),
            coeffs: s
                .equation(x)
                .variables()
                .into_iter()
                .map(|y| (s.name(y).to_string(), s.linear(x, y)))
                .collect(),
        })
        .collect()
}

fn scaling_list(s: &Sdse, scale: &BTreeMap<Decoration, Q>) -> Vec<(String, Q)> {
    scale
        .iter()
        .filter(|(_, c)| !c.is_one())
        .map(|(v, c)| (s.name(*v).to_string(), c.clone()))
        .collect()
}

/// Adds the peeled vertices back (last peeled first) and compares with the
/// input after undoing the scaling.
fn regenerates(
    s: &Sdse,
    file: SystemFile,
    peeled: &[Decoration],
    scale: &BTreeMap<Decoration, Q>,
) -> Result<bool, SdseError> {
    let c = |v: Decoration| scale.get(&v).cloned().unwrap_or_else(Q::one);
    let mut file = file;
    for &x in peeled.iter().rev() {
        let coeffs: Vec<(Decoration, Q)> = s
            .equation(x)
            .variables()
            .into_iter()
            .map(|y| {
                let d = file.alphabet.lookup(s.name(y)).expect("support already present");
                (d, s.linear(x, y) / c(y))
            })
            .collect();
        file = file.extend(&coeffs, s.name(x))?;
    }
    let inverse: Vec<Q> = s.indices().into_iter().map(|v| c(v).recip()).collect();
    let unscaled = change_vars(s, &inverse, &vec![Q::one(); s.len()])?;
    Ok(same_up_to_order(&unscaled, &file.build()?))
}

fn multicyclic_branch(
    s: &Sdse,
    g: &DepGraph,
    core: &[Decoration],
    peeled: &[Decoration],
) -> Result<Verdict, SdseError> {
    if let Some(v) = s.indices().into_iter().find(|&v| !s.equation(v).is_affine()) {
        return Ok(unknown(format!("series of {} is not affine", s.name(v))));
    }
    let Some((period, residues)) = g.induced(core).period_classes() else {
        return Ok(unknown("core is not strongly connected"));
    };
    if period < 2 {
        return Ok(unknown("core has period 1"));
    }
    let mut class_of: BTreeMap<Decoration, usize> = core.iter().copied().zip(residues).collect();
    let mut core_classes = vec![Vec::new(); period];
    for &v in core {
        core_classes[class_of[&v]].push(v);
    }
    let mut scale = BTreeMap::new();
    for k in 0..period {
        let rep = core_classes[k][0];
        for &y in &core_classes[(k + 1) % period] {
            let a = s.linear(rep, y);
            if a.is_zero() {
                return Ok(unknown(format!("{} does not depend on {}", s.name(rep), s.name(y))));
            }
            scale.insert(y, a);
        }
    }
    for &x in peeled.iter().rev() {
        let targets: BTreeSet<usize> = s.equation(x).variables().iter().map(|y| class_of[y]).collect();
        if targets.len() != 1 {
            return Ok(unknown(format!("extension {} spans several classes", s.name(x))));
        }
        let m = *targets.iter().next().expect("one class");
        class_of.insert(x, (m + period - 1) % period);
    }
    // both partition conditions on the whole system
    for (i, j) in g.edges() {
        if class_of[&j] != (class_of[&i] + 1) % period {
            return Ok(unknown(format!("edge {} -> {} skips a class", s.name(i), s.name(j))));
        }
    }
    for v in s.indices() {
        let succ = g.successors(v);
        if succ.windows(2).any(|w| s.equation(w[0]) != s.equation(w[1])) {
            return Ok(unknown(format!(
                "direct descendants of {} have different series",
                s.name(v)
            )));
        }
    }
    let sizes: Vec<usize> = core_classes.iter().map(Vec::len).collect();
    let names: Vec<&str> = core_classes.iter().flatten().map(|&v| s.name(v)).collect();
    let file = multicycle(&sizes, s.truncation())?.rename(&names)?;
    if !regenerates(s, file, peeled, &scale)? {
        return Ok(unknown("regenerated multicycle differs from the input"));
    }
    let mut classes = vec![Vec::new(); period];
    for v in s.indices() {
        classes[class_of[&v]].push(s.name(v).to_string());
    }
    Ok(Verdict::Multicyclic(Multicyclic {
        period,
        classes,
        peeled: extensions(s, peeled),
        scaling: scaling_list(s, &scale),
    }))
}

fn linear_form(vars: &[(Decoration, Q)], degree: u32) -> Series {
    Series::from_terms(vars.iter().map(|(d, w)| (MultiIndex::unit(*d), w.clone())), degree)
}

fn fundamental_branch(
    s: &Sdse,
    g: &DepGraph,
    levels: &LevelAssignment,
    core: &[Decoration],
    peeled: &[Decoration],
) -> Result<Verdict, SdseError> {
    let name = |v: Decoration| s.name(v).to_string();
    let mut fits = BTreeMap::new();
    for &v in core {
        match fit_product_form(s.equation(v)) {
            Some(f) => {
                fits.insert(v, f);
            }
            None => return Ok(unknown(format!("no product form fits the series of {}", name(v)))),
        }
    }
    let mut level0 = Vec::new();
    let mut level1 = Vec::new();
    for &v in core {
        match levels.get(v).finite() {
            Some(0) => level0.push(v),
            Some(1) => level1.push(v),
            _ => return Ok(unknown(format!("{} has level above 1 and was not peeled", name(v)))),
        }
    }
    let self_dep: BTreeSet<Decoration> = g.self_dependent().into_iter().collect();
    let mut assigned: BTreeSet<Decoration> = BTreeSet::new();
    let mut scale: BTreeMap<Decoration, Q> = BTreeMap::new();

    // self-dependent vertices: the blocks of I₀, read from their own factor
    let mut i0_blocks: Vec<(Vec<Decoration>, Q)> = Vec::new();
    for &x in &level0 {
        if !self_dep.contains(&x) || assigned.contains(&x) {
            continue;
        }
        let fit = &fits[&x];
        let (ProductFit::Product { .. }, Some(group)) = (fit, fit.group_of(x)) else {
            return Ok(unknown(format!("self-dependent {} is not a plain product", name(x))));
        };
        let block = group.vars();
        if block
            .iter()
            .any(|y| !self_dep.contains(y) || assigned.contains(y) || !level0.contains(y))
        {
            return Ok(unknown(format!("inconsistent block around {}", name(x))));
        }
        for (y, w) in &group.weights {
            scale.insert(*y, w.clone());
        }
        assigned.extend(block.iter().copied());
        i0_blocks.push((block, group.beta.clone()));
    }

    // J₀: the other level-0 vertices lying on a cycle of level-0 vertices
    let on_cycle: BTreeSet<Decoration> = g
        .induced(&level0)
        .strong_components()
        .into_iter()
        .filter(|c| c.len() > 1)
        .flatten()
        .map(|k| level0[k.index()])
        .collect();
    let j0_vertices: Vec<Decoration> = level0
        .iter()
        .copied()
        .filter(|v| !self_dep.contains(v) && on_cycle.contains(v))
        .collect();
    let base: BTreeSet<Decoration> = assigned.iter().chain(j0_vertices.iter()).copied().collect();
    let mut j0_blocks: Vec<Vec<Decoration>> = Vec::new();
    for &y in &j0_vertices {
        if assigned.contains(&y) {
            continue;
        }
        let Some(observer) = g.predecessors(y).into_iter().find(|z| base.contains(z)) else {
            return Ok(unknown(format!("no level-0 ascendant of {}", name(y))));
        };
        let Some(group) = fits[&observer].group_of(y) else {
            return Ok(unknown(format!(
                "{} is not grouped in the series of {}",
                name(y),
                name(observer)
            )));
        };
        let block = group.vars();
        if !group.beta.is_one() || block.iter().any(|v| !j0_vertices.contains(v) || assigned.contains(v)) {
            return Ok(unknown(format!("inconsistent block around {}", name(y))));
        }
        for (v, w) in &group.weights {
            scale.insert(*v, w.clone());
        }
        assigned.extend(block.iter().copied());
        j0_blocks.push(block);
    }

    // the common series of K₀
    let d = s.truncation();
    let weighted =
        |block: &[Decoration]| -> Vec<(Decoration, Q)> { block.iter().map(|y| (*y, scale[y].clone())).collect() };
    let mut k0_series = Series::one(d);
    for (block, beta) in &i0_blocks {
        let lambda = Q::one() + beta;
        if !lambda.is_zero() {
            k0_series = k0_series.mul(&scaled_f(beta, &lambda, &linear_form(&weighted(block), d), d)?);
        }
    }
    for block in &j0_blocks {
        k0_series = k0_series.mul(&f_beta(&Q::one(), &linear_form(&weighted(block), d), d)?);
    }

    let mut k0 = Vec::new();
    let mut i1: Vec<(Decoration, Q)> = Vec::new();
    for &v in &level0 {
        if assigned.contains(&v) {
            continue;
        }
        if *s.equation(v) == k0_series {
            k0.push(v);
        } else if matches!(fits[&v], ProductFit::Product { .. }) {
            i1.push((v, Q::one()));
        } else {
            return Ok(unknown(format!("level-0 vertex {} is not a product", name(v))));
        }
    }
    let mut j1: Vec<(Decoration, Q)> = Vec::new();
    for &v in &level1 {
        match &fits[&v] {
            ProductFit::Log { .. } => i1.push((v, Q::zero())),
            ProductFit::Shifted { nu, linear, .. } if linear.is_empty() => i1.push((v, nu.clone())),
            ProductFit::Shifted { nu, .. } => j1.push((v, nu.clone())),
            ProductFit::Product { .. } => {
                return Ok(unknown(format!("level-1 vertex {} is a plain product", name(v))));
            }
        }
    }
    i1.sort();

    let mut base_reps: Vec<Decoration> = Vec::new();
    base_reps.extend(i0_blocks.iter().map(|(b, _)| b[0]));
    base_reps.extend(j0_blocks.iter().map(|b| b[0]));
    base_reps.extend(k0.iter().copied());
    let c = |v: Decoration| scale.get(&v).cloned().unwrap_or_else(Q::one);
    let spec = FundamentalSpec {
        i0: i0_blocks.iter().map(|(_, b)| b.clone()).collect(),
        j0: j0_blocks.len(),
        k0: k0.len(),
        i1: i1
            .iter()
            .map(|(v, nu)| I1Vertex {
                nu: nu.clone(),
                coeffs: base_reps.iter().map(|&r| s.linear(*v, r) / c(r)).collect(),
            })
            .collect(),
        j1: j1
            .iter()
            .map(|(v, nu)| J1Vertex {
                nu: nu.clone(),
                i1_coeffs: i1.iter().map(|(u, _)| s.linear(*v, *u)).collect(),
            })
            .collect(),
    };
    if let Err(e) = spec.validate() {
        return Ok(unknown(format!("recovered parameters are invalid: {e}")));
    }
    let mut blocks: Vec<Vec<Decoration>> = Vec::new();
    blocks.extend(i0_blocks.iter().map(|(b, _)| b.clone()));
    blocks.extend(j0_blocks.iter().cloned());
    blocks.extend(k0.iter().map(|&v| vec![v]));
    blocks.extend(i1.iter().map(|(v, _)| vec![*v]));
    blocks.extend(j1.iter().map(|(v, _)| vec![*v]));
    let block_names: Vec<Vec<String>> = blocks.iter().map(|b| b.iter().map(|&v| name(v)).collect()).collect();
    let file = fundamental(&spec, d)?.dilate(&block_names)?;
    if !regenerates(s, file, peeled, &scale)? {
        return Ok(unknown("regenerated fundamental system differs from the input"));
    }
    Ok(Verdict::Fundamental(Fundamental {
        spec,
        blocks: block_names,
        peeled: extensions(s, peeled),
        scaling: scaling_list(s, &scale),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, Classification};
    use crate::rational::{int, ratio};
    use crate::sdse::{complete, cycle};
    use crate::series::parse_expr;
    use crate::trees::Alphabet;

    fn verdict(file: &SystemFile, bound: u32) -> Verdict {
        let s = file.build().unwrap();
        let c: Classification = classify(&s, bound).unwrap();
        assert_eq!(c.components.len(), 1);
        c.components[0].verdict.clone()
    }

    #[test]
    fn multicycle_partition_recovered() {
        let f = multicycle(&[2, 1, 2], 6).unwrap();
        match verdict(&f, 6) {
            Verdict::Multicyclic(m) => {
                assert_eq!(m.period, 3);
                assert_eq!(m.classes, vec![vec!["1", "2"], vec!["3"], vec!["4", "5"]]);
                assert!(m.peeled.is_empty());
                assert!(m.scaling.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaled_and_extended_cycle() {
        let f = cycle(3, 6).unwrap();
        let f = f.extend(&[(Decoration(1), int(2))], "x").unwrap();
        let s = f.build().unwrap();
        let s = change_vars(&s, &[int(3), int(1), ratio(1, 2), int(1)], &vec![int(1); 4]).unwrap();
        match classify_connected(&s, 6).unwrap() {
            Verdict::Multicyclic(m) => {
                assert_eq!(m.classes, vec![vec!["1", "x"], vec!["2"], vec!["3"]]);
                assert_eq!(m.peeled.len(), 1);
                assert_eq!(
                    m.scaling,
                    vec![("1".to_string(), int(3)), ("3".to_string(), ratio(1, 2))]
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fundamental_with_two_extensions() {
        let spec = FundamentalSpec {
            i0: vec![int(2)],
            j0: 1,
            i1: vec![I1Vertex {
                nu: int(3),
                coeffs: vec![int(1), int(2)],
            }],
            ..Default::default()
        };
        let f = fundamental(&spec, 6).unwrap();
        let f = f.extend(&[(Decoration(2), int(5))], "x").unwrap();
        let f = f.extend(&[(Decoration(3), int(-1))], "y").unwrap();
        match verdict(&f, 6) {
            Verdict::Fundamental(v) => {
                assert_eq!(v.spec, spec);
                assert_eq!(
                    v.peeled.iter().map(|e| e.vertex.as_str()).collect::<Vec<_>>(),
                    vec!["y", "x"]
                );
                assert!(v.scaling.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complete_is_fundamental() {
        match verdict(&complete(&[1, 2, 1], 5).unwrap(), 5) {
            Verdict::Fundamental(v) => {
                assert_eq!(v.spec.j0, 3);
                assert_eq!(v.blocks[1], vec!["2", "3"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perturbed_two_cycle_is_not_hopf() {
        let al = Alphabet::numeric(2);
        let fs = vec![
            parse_expr("1 + h2 + h2^(2)", &al, 5).unwrap(),
            parse_expr("1 + h1", &al, 5).unwrap(),
        ];
        let s = Sdse::normalized(al, fs, 5).unwrap();
        match classify_connected(&s, 5).unwrap() {
            Verdict::NotHopf(w) => assert!(w.n <= 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shallow_bound_is_unknown() {
        let s = cycle(2, 3).unwrap().build().unwrap();
        match classify_connected(&s, 3).unwrap() {
            Verdict::Unknown { required_bound, .. } => assert_eq!(required_bound, Some(4)),
            other => panic!("{other:?}"),
        }
    }
}
