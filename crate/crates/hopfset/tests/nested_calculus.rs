//! Quotient calculus of nested sets against a plain `BTreeSet` model.

use std::collections::BTreeSet;

use hopfset::nested::{
    molecule, quotient, quotient_by_family, reversion, split_parts, Atom, BlockFamily, NestedSet,
};
use proptest::prelude::*;
use serde_json::Value;

type Leaves = BTreeSet<u32>;

/// Model of a once-collapsed state: free leaves plus ideal leaf-sets.
#[derive(Debug, PartialEq, Eq)]
struct Model {
    leaves: Leaves,
    ideals: BTreeSet<Leaves>,
}

fn model(x: &NestedSet) -> Model {
    let mut m = Model { leaves: Leaves::new(), ideals: BTreeSet::new() };
    for a in x.atoms() {
        match a {
            Atom::Leaf(l) => {
                m.leaves.insert(*l);
            }
            Atom::Ideal(s) => {
                assert!(s.is_all_leaves(), "expected a once-collapsed state, got {x}");
                m.ideals.insert(s.leaves().into_iter().collect());
            }
        }
    }
    m
}

fn set(l: &Leaves) -> NestedSet {
    NestedSet::from_leaves(l.iter().copied())
}

/// `U ⧸ (I_1, …)` for pairwise disjoint blocks, straight from the definition.
fn quotient_model(u: &Leaves, blocks: &[Leaves]) -> Model {
    let covered: Leaves = blocks.iter().flatten().copied().collect();
    Model {
        leaves: u.difference(&covered).copied().collect(),
        ideals: blocks
            .iter()
            .map(|b| b.intersection(u).copied().collect::<Leaves>())
            .filter(|b| !b.is_empty())
            .collect(),
    }
}

fn subset(max: u32) -> impl Strategy<Value = Leaves> {
    prop::collection::btree_set(1..=max, 0..=max as usize)
}

/// Pairwise disjoint nonempty blocks inside `1..=max`.
fn disjoint_blocks(max: u32) -> impl Strategy<Value = Vec<Leaves>> {
    prop::collection::vec(0..=3usize, max as usize).prop_map(|tags| {
        let mut blocks = vec![Leaves::new(); 3];
        for (i, t) in tags.into_iter().enumerate() {
            if t < 3 {
                blocks[t].insert(i as u32 + 1);
            }
        }
        blocks.into_iter().filter(|b| !b.is_empty()).collect()
    })
}

/// Arbitrary hereditary sets (depth ≤ 3) for round-trip properties.
fn nested() -> impl Strategy<Value = NestedSet> {
    let leaf = (0u32..20).prop_map(Atom::Leaf);
    let atom = leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            2 => (0u32..20).prop_map(Atom::Leaf),
            1 => prop::collection::vec(inner, 0..4).prop_map(|a| Atom::Ideal(NestedSet::new(a))),
        ]
    });
    prop::collection::vec(atom, 0..5).prop_map(NestedSet::new)
}

#[test]
fn quotient_examples() {
    let q = |u: &str, i: &str| quotient(&u.parse().unwrap(), &i.parse().unwrap()).to_string();
    assert_eq!(q("(1 2 3)", "(2 3)"), "(1 {2 3})");
    assert_eq!(q("(1 2)", "(1 2)"), "({1 2})");
    assert_eq!(q("(1 2)", "(3)"), "(1 2)");
}

#[test]
fn split_and_reversion_examples() {
    let (o, i) = split_parts(&"(1 2 {3 4})".parse().unwrap());
    assert_eq!((o.to_string(), i.to_string()), ("(1 2)".into(), "({3 4})".into()));
    assert_eq!(reversion(&"({1 2} {3})".parse().unwrap()).unwrap().to_string(), "(1 2 3)");
    assert_eq!(reversion(&NestedSet::empty()).unwrap(), NestedSet::empty());
}

#[test]
fn intersection_needs_equal_traces() {
    // Without U∩I = V∩I the two sides differ: the ideal traces disagree.
    let (u, v, i): (NestedSet, NestedSet, NestedSet) =
        ("(1 2)".parse().unwrap(), "(1)".parse().unwrap(), "(1 2)".parse().unwrap());
    let lhs = quotient(&u, &i).intersection(&quotient(&v, &i));
    let rhs = quotient(&u.intersection(&v), &i);
    assert_ne!(lhs, rhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn quotient_matches_definition(u in subset(7), i in subset(7)) {
        let q = quotient(&set(&u), &set(&i));
        let blocks = if i.is_empty() { vec![] } else { vec![i.clone()] };
        prop_assert_eq!(model(&q), quotient_model(&u, &blocks));
    }

    #[test]
    fn family_quotient_matches_definition_in_any_order(u in subset(7), mut blocks in disjoint_blocks(7)) {
        let sets: Vec<NestedSet> = blocks.iter().map(set).collect();
        let q = quotient_by_family(&set(&u), &sets).unwrap();
        prop_assert_eq!(model(&q), quotient_model(&u, &blocks));
        blocks.reverse();
        let rev: Vec<NestedSet> = blocks.iter().map(set).collect();
        prop_assert_eq!(quotient_by_family(&set(&u), &rev).unwrap(), q);
    }

    #[test]
    fn quotient_lattice_with_equal_traces(u in subset(6), v in subset(6), i in subset(6)) {
        let (su, sv, si) = (set(&u), set(&v), set(&i));
        let (qu, qv) = (quotient(&su, &si), quotient(&sv, &si));
        // Union: the ideal parts merge only when the traces agree.
        if u.intersection(&i).eq(v.intersection(&i)) {
            prop_assert_eq!(qu.intersection(&qv), quotient(&su.intersection(&sv), &si));
            prop_assert_eq!(qu.union(&qv), quotient(&su.union(&sv), &si));
        }
        if i.is_subset(&u) && u.is_subset(&v) {
            prop_assert!(qu.is_subset(&qv));
        }
    }

    #[test]
    fn disjoint_quotients_commute(u in subset(7), blocks in disjoint_blocks(7)) {
        prop_assume!(blocks.len() >= 2);
        let (i, j) = (set(&blocks[0]), set(&blocks[1]));
        let su = set(&u);
        let ij = quotient(&quotient(&su, &i), &j);
        let ji = quotient(&quotient(&su, &j), &i);
        prop_assert_eq!(&ij, &ji);
        prop_assert_eq!(ij, quotient_by_family(&su, &[i, j]).unwrap());
    }

    #[test]
    fn molecule_round_trip(u in subset(8), blocks in disjoint_blocks(8)) {
        let covered: Leaves = blocks.iter().flatten().copied().collect();
        let u: Leaves = u.difference(&covered).copied().collect();
        let family = BlockFamily::new(blocks.iter().map(set)).unwrap();
        let v = molecule(&set(&u), &family).unwrap();
        prop_assert_eq!(model(&v).leaves, u.union(&covered).copied().collect::<Leaves>());
        let back = quotient_by_family(&v, family.blocks()).unwrap();
        prop_assert_eq!(model(&back), Model { leaves: u, ideals: blocks.into_iter().collect() });
    }

    #[test]
    fn text_round_trip(x in nested()) {
        let text = x.to_string();
        let back: NestedSet = text.parse().unwrap();
        prop_assert_eq!(&back, &x);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn json_round_trip(x in nested()) {
        let j: Value = x.to_json();
        prop_assert_eq!(NestedSet::from_json(&j).unwrap(), x);
    }

    #[test]
    fn construction_is_idempotent(x in nested()) {
        prop_assert_eq!(NestedSet::new(x.atoms().iter().cloned()), x);
    }

    #[test]
    fn reversion_opens_every_ideal(blocks in disjoint_blocks(8)) {
        let state = NestedSet::new(blocks.iter().map(|b| Atom::Ideal(set(b))));
        let all: Leaves = blocks.iter().flatten().copied().collect();
        prop_assert_eq!(reversion(&state).unwrap(), set(&all));
    }
}
