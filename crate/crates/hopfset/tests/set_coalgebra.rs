//! The set coproduct against a brute-force evaluator of split terms.

use std::collections::{BTreeMap, BTreeSet};

use hopfset::hopf::{check_coassoc, check_counit, nilpotence_index, Coalgebra, Q};
use hopfset::nested::{Atom, BlockFamily, NestedSet};
use hopfset::set_coalgebra::{enumerate_elements, SetCoalgebra, SetElement};
use proptest::prelude::*;

/// All set partitions of `0..n` (each as a list of blocks).
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for mut p in set_partitions(n - 1) {
        for i in 0..p.len() {
            let mut q = p.clone();
            q[i].push(n - 1);
            out.push(q);
        }
        p.push(vec![n - 1]);
        out.push(p);
    }
    out
}

/// A split term `left ⊗ right`.
type Split = (SetElement, SetElement);

/// Brute force: partition the atoms of `x` together with a "discard" token;
/// the discard part may hold leaves only; every other part must lie in one
/// block of `x`, have at least two atoms and differ from its block.  The right
/// factor collapses every part to an ideal over its leaf-set.
fn brute_coproduct(x: &SetElement) -> BTreeMap<Split, usize> {
    let unit = SetElement::unit();
    if x.is_unit() {
        return BTreeMap::from([((unit.clone(), unit), 1)]);
    }
    let mut out = BTreeMap::from([((x.clone(), unit.clone()), 1), ((unit, x.clone()), 1)]);
    let atoms: Vec<(usize, Atom)> =
        x.blocks().iter().enumerate().flat_map(|(b, s)| s.atoms().iter().map(move |a| (b, a.clone()))).collect();
    let discard = atoms.len();
    for p in set_partitions(atoms.len() + 1) {
        let mut parts = Vec::new();
        let mut ok = true;
        for part in &p {
            if part.contains(&discard) {
                ok &= part.iter().all(|&i| i == discard || atoms[i].1.is_leaf());
                continue;
            }
            let home = atoms[part[0]].0;
            ok &= part.iter().all(|&i| atoms[i].0 == home);
            ok &= part.len() >= 2 && part.len() < x.blocks()[home].len();
            parts.push(part.clone());
        }
        if !ok || parts.is_empty() {
            continue;
        }
        let left = SetElement::new(
            BlockFamily::new(parts.iter().map(|part| NestedSet::new(part.iter().map(|&i| atoms[i].1.clone())))).unwrap(),
        )
        .unwrap();
        let mut right_blocks: Vec<NestedSet> = Vec::new();
        for b in 0..x.blocks().len() {
            let inside: Vec<&Vec<usize>> = parts.iter().filter(|part| atoms[part[0]].0 == b).collect();
            let used: BTreeSet<usize> = inside.iter().flat_map(|p| p.iter().copied()).collect();
            let mut kept: Vec<Atom> = atoms
                .iter()
                .enumerate()
                .filter(|(i, (home, _))| *home == b && !used.contains(i))
                .map(|(_, (_, a))| a.clone())
                .collect();
            for part in inside {
                let leaves: BTreeSet<u32> = part.iter().flat_map(|&i| atoms[i].1.support()).collect();
                kept.push(Atom::ideal_of_leaves(leaves));
            }
            right_blocks.push(NestedSet::new(kept));
        }
        let right = SetElement::new(BlockFamily::new(right_blocks).unwrap()).unwrap();
        *out.entry((left, right)).or_insert(0) += 1;
    }
    out
}

fn library_coproduct(x: &SetElement) -> BTreeMap<Split, usize> {
    let d = SetCoalgebra::default().coproduct(x);
    d.iter()
        .map(|((l, r), c)| {
            assert!(c.is_integer() && *c > Q::from_integer(0.into()), "coefficient {c}");
            ((l.clone(), r.clone()), c.to_integer().try_into().unwrap())
        })
        .collect()
}

fn element(s: &str) -> SetElement {
    s.parse().unwrap()
}

#[test]
fn split_examples() {
    let term = |x: &str, l: &str, r: &str| library_coproduct(&element(x)).get(&(element(l), element(r))).copied();
    assert_eq!(term("(1 2 3)", "(1 2)", "(3 {1 2})"), Some(1));
    assert_eq!(term("(1 2 3 4)", "((1 2)(3 4))", "({1 2} {3 4})"), Some(1));
    assert_eq!(term("(1 2 {3 4})", "(1 {3 4})", "(2 {1 3 4})"), Some(1));
}

#[test]
fn small_elements_are_primitive() {
    for s in ["(1 2)", "(1 {2 3})", "({1 2} {3 4})", "(7)"] {
        let x = element(s);
        assert_eq!(library_coproduct(&x).len(), 2, "{s}");
    }
}

#[test]
fn coproduct_matches_brute_force_exhaustively() {
    for n in 1..=4 {
        for x in enumerate_elements(n, false) {
            assert_eq!(library_coproduct(&x), brute_coproduct(&x), "Δ{x}");
        }
    }
    for x in enumerate_elements(5, true) {
        assert_eq!(library_coproduct(&x), brute_coproduct(&x), "Δ{x}");
    }
}

#[test]
fn counit_values() {
    let ctx = SetCoalgebra::default();
    assert_eq!(ctx.counit(&SetElement::unit()), Q::from_integer(1.into()));
    assert_eq!(ctx.counit(&element("(1 2 3)")), Q::from_integer(0.into()));
}

/// A once-collapsed state on labels `1..=6` built from a tag per label:
/// 0 = absent, 1 = free leaf, 2.. = member of ideal `tag`.
fn state() -> impl Strategy<Value = SetElement> {
    prop::collection::vec(0..=4u32, 6).prop_map(|tags| {
        let mut leaves = Vec::new();
        let mut ideals: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, t) in tags.into_iter().enumerate() {
            match t {
                0 => {}
                1 => leaves.push(Atom::Leaf(i as u32 + 1)),
                t => ideals.entry(t).or_default().push(i as u32 + 1),
            }
        }
        let atoms = leaves.into_iter().chain(ideals.into_values().map(Atom::ideal_of_leaves));
        SetElement::from_state(NestedSet::new(atoms)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coproduct_matches_brute_force_on_random_states(x in state()) {
        prop_assert_eq!(library_coproduct(&x), brute_coproduct(&x));
    }

    #[test]
    fn coassociative_and_counital(x in state()) {
        let ctx = SetCoalgebra::default();
        prop_assert!(check_coassoc(&ctx, &x).is_none());
        prop_assert!(check_counit(&ctx, &x).is_none());
    }

    #[test]
    fn nilpotent_within_atom_count(x in state()) {
        let ctx = SetCoalgebra::default();
        let m = nilpotence_index(&ctx, &x, x.atom_count() + 1);
        prop_assert!(matches!(m, Some(m) if m <= x.atom_count().max(1)), "index {:?} for {}", m, x);
    }

    #[test]
    fn text_round_trip(x in state()) {
        prop_assert_eq!(x.to_string().parse::<SetElement>().unwrap(), x);
    }
}
