mod common;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use proptest::prelude::*;

use sdse::classify::{classify, Verdict};
use sdse::hopf::{antipode, coproduct, forest_coproduct, tree_coproduct};
use sdse::rational::{int, ratio, Q};
use sdse::sdse::{change_vars, check_hopf, dilate, fundamental, solve_closed_form, solve_subst, Sdse, SystemFile};
use sdse::series::{f_beta, parse_expr, MultiIndex, Series};
use sdse::trees::{enumerate_trees, Alphabet, Decoration, Forest, Tree, TreePoly};

type Triple = BTreeMap<(Forest, Forest, Forest), Q>;

fn add_triple(out: &mut Triple, key: (Forest, Forest, Forest), c: Q) {
    let e = out.entry(key).or_insert_with(Q::zero);
    *e += c;
}

fn nonzero(t: Triple) -> Triple {
    t.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Tree from a parent list: vertex `k ≥ 1` hangs below `parents[k - 1] < k`.
fn build_tree(decos: &[u32], parents: &[usize], v: usize) -> Tree {
    let children = (1..decos.len())
        .filter(|&k| parents[k - 1] == v)
        .map(|k| build_tree(decos, parents, k))
        .collect();
    Tree::canonicalize(Decoration(decos[v]), children)
}

fn tree_strategy(max_size: usize, colours: u32) -> impl Strategy<Value = Tree> {
    (1..=max_size).prop_flat_map(move |n| {
        let decos = prop::collection::vec(0..colours, n);
        let parents: Vec<_> = (1..n).map(|k| 0..k).collect();
        (decos, parents).prop_map(|(decos, parents)| build_tree(&decos, &parents, 0))
    })
}

fn coeff_strategy() -> impl Strategy<Value = Q> {
    (-3i64..=3, 1i64..=3).prop_map(|(p, q)| ratio(p, q))
}

/// A two-index system with unit constant terms and random terms of degree ≤ 2.
fn system_strategy() -> impl Strategy<Value = Sdse> {
    prop::collection::vec(coeff_strategy(), 10).prop_filter_map("constant equation", |c| {
        let a = Decoration(0);
        let b = Decoration(1);
        let monomials = [
            MultiIndex::unit(a),
            MultiIndex::unit(b),
            MultiIndex::new([(a, 2)]),
            MultiIndex::new([(a, 1), (b, 1)]),
            MultiIndex::new([(b, 2)]),
        ];
        let equations = (0..2)
            .map(|i| {
                let terms = monomials.iter().cloned().zip(c[5 * i..5 * i + 5].iter().cloned());
                let mut f = Series::from_terms(terms, 4);
                f.set(MultiIndex::zero(), Q::one());
                f
            })
            .collect();
        Sdse::new(Alphabet::numeric(2), equations, 4).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coproduct_is_coassociative(t in tree_strategy(6, 3)) {
        let delta = tree_coproduct(&t);
        let mut left = Triple::new();
        let mut right = Triple::new();
        for ((a, b), c) in delta.iter() {
            for ((a1, a2), c1) in forest_coproduct(a).iter() {
                add_triple(&mut left, (a1.clone(), a2.clone(), b.clone()), c * c1);
            }
            for ((b1, b2), c2) in forest_coproduct(b).iter() {
                add_triple(&mut right, (a.clone(), b1.clone(), b2.clone()), c * c2);
            }
        }
        prop_assert_eq!(nonzero(left), nonzero(right));
    }

    #[test]
    fn coproduct_has_primitive_ends(t in tree_strategy(6, 3)) {
        let delta = tree_coproduct(&t);
        let single = Forest::single(t.clone());
        prop_assert_eq!(delta.coeff(&single, &Forest::unit()), Q::one());
        prop_assert_eq!(delta.coeff(&Forest::unit(), &single), Q::one());
        for ((a, b), _) in delta.iter() {
            prop_assert_eq!(a.weight() + b.weight(), t.weight());
        }
    }

    #[test]
    fn antipode_inverts_identity(t in tree_strategy(6, 2)) {
        let x = TreePoly::from_tree(t);
        let mut left = TreePoly::zero();
        let mut right = TreePoly::zero();
        for ((a, b), c) in coproduct(&x).iter() {
            let a_poly = TreePoly::from_forest(a.clone(), c.clone());
            let b_poly = TreePoly::from_forest(b.clone(), Q::one());
            left.add_assign(&antipode(&a_poly).mul(&b_poly));
            right.add_assign(&a_poly.mul(&antipode(&b_poly)));
        }
        prop_assert!(left.is_zero());
        prop_assert!(right.is_zero());
    }

    #[test]
    fn antipode_is_involutive(t in tree_strategy(5, 2)) {
        let x = TreePoly::from_tree(t);
        prop_assert_eq!(antipode(&antipode(&x)), x);
    }

    #[test]
    fn tree_text_round_trips(t in tree_strategy(8, 4)) {
        let alphabet = Alphabet::new(&["a", "b", "c", "d"]).unwrap();
        let text = t.to_text(&alphabet);
        prop_assert_eq!(Tree::parse(&text, &alphabet).unwrap(), t);
    }

    #[test]
    fn forest_text_round_trips(ts in prop::collection::vec(tree_strategy(4, 3), 0..4)) {
        let alphabet = Alphabet::numeric(3);
        let f = Forest::from_trees(ts);
        let text = f.to_text(&alphabet);
        prop_assert_eq!(Forest::parse(&text, &alphabet).unwrap(), f);
    }

    #[test]
    fn enumerated_trees_are_distinct_and_canonical(n in 1u32..=6, colours in 1u32..=2) {
        let decorations: Vec<Decoration> = (0..colours).map(Decoration).collect();
        let trees = enumerate_trees(&decorations, n, None).unwrap();
        let distinct: std::collections::BTreeSet<&Tree> = trees.iter().collect();
        prop_assert_eq!(distinct.len(), trees.len());
        for t in &trees {
            prop_assert_eq!(t.weight(), n);
            prop_assert_eq!(&Tree::canonicalize(t.root(), t.children().to_vec()), t);
        }
    }

    #[test]
    fn series_text_round_trips(s in system_strategy()) {
        let alphabet = s.alphabet();
        for f in s.equations() {
            let text = f.to_expr_text(alphabet);
            prop_assert_eq!(&parse_expr(&text, alphabet, f.degree()).unwrap(), f);
        }
    }

    #[test]
    fn system_file_round_trips(s in system_strategy()) {
        let text = SystemFile::from_sdse(&s).to_text();
        let back = SystemFile::parse(&text).unwrap().build().unwrap();
        prop_assert_eq!(back.equations(), s.equations());
        prop_assert_eq!(back.truncation(), s.truncation());
    }

    #[test]
    fn f_beta_solves_its_differential_equation(p in -4i64..=4, q in 1i64..=3) {
        let beta = ratio(p, q);
        let degree = 8;
        let h = Decoration(0);
        let x = Series::var(h, degree);
        let f = f_beta(&beta, &x, degree).unwrap();
        let one_minus = Series::one(degree).sub(&x.scale(&beta));
        let lhs = one_minus.mul(&f.derivative(h)).truncate(degree - 1);
        prop_assert_eq!(lhs, f.truncate(degree - 1));
    }

    #[test]
    fn f_zero_is_multiplicative(c in coeff_strategy()) {
        let degree = 6;
        let x = Series::var(Decoration(0), degree);
        let y = Series::var(Decoration(1), degree).scale(&c);
        let zero = Q::zero();
        let lhs = f_beta(&zero, &x, degree).unwrap().mul(&f_beta(&zero, &y, degree).unwrap());
        prop_assert_eq!(lhs, f_beta(&zero, &x.add(&y), degree).unwrap());
    }

    #[test]
    fn solvers_agree(s in system_strategy()) {
        let a = solve_closed_form(&s, 5).unwrap();
        let b = solve_subst(&s, 5).unwrap();
        for i in s.indices() {
            for n in 1..=5 {
                prop_assert_eq!(a.poly(i, n), b.poly(i, n));
            }
        }
    }

    #[test]
    fn solutions_are_coherent_under_truncation(s in system_strategy(), bound in 1u32..=4) {
        let full = solve_subst(&s, 5).unwrap();
        let short = solve_subst(&s, bound).unwrap();
        for i in s.indices() {
            for n in 1..=bound {
                prop_assert_eq!(full.poly(i, n), short.poly(i, n));
            }
        }
    }

    #[test]
    fn hopf_verdict_survives_rescaling(
        s in system_strategy(),
        lambda in prop::collection::vec(prop::sample::select(vec![int(2), ratio(1, 2), int(-3)]), 2),
        mu in prop::collection::vec(prop::sample::select(vec![int(1), int(2), ratio(-1, 3)]), 2),
    ) {
        let before = check_hopf(&s, 5).unwrap().is_hopf();
        let t = change_vars(&s, &lambda, &mu).unwrap();
        prop_assert_eq!(check_hopf(&t, 5).unwrap().is_hopf(), before);
    }

    #[test]
    fn hopf_verdict_survives_dilation(s in system_strategy(), split in 0usize..2) {
        let before = check_hopf(&s, 5).unwrap().is_hopf();
        let parts: Vec<Vec<String>> = (0..2)
            .map(|k| if k == split { vec![format!("{k}"), format!("{k}b")] } else { vec![format!("{k}")] })
            .collect();
        let d = dilate(&s, &parts).unwrap();
        prop_assert_eq!(check_hopf(&d, 5).unwrap().is_hopf(), before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fundamental_systems_are_hopf_and_classified(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let spec = common::random_spec(&mut rng, 4, 5);
        let s = fundamental(&spec, 5).unwrap().build().unwrap();
        prop_assert!(check_hopf(&s, 5).unwrap().is_hopf());
        let c = classify(&s, 5).unwrap();
        for comp in &c.components {
            prop_assert!(matches!(comp.verdict, Verdict::Fundamental(_)), "{:?}", comp.verdict);
        }
    }
}
