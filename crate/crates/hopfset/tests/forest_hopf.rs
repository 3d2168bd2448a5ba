//! Forests, the join semilattice and the incidence coproduct, checked
//! against definitions evaluated by brute force over all factorisations.

use std::collections::BTreeMap;

use hopfset::forest::{quo_includes, quo_includes_by_bounds, quo_join, Factorisation, Forest, ForestCoalgebra, QuoElement};
use hopfset::hopf::{Coalgebra, Q};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forest(universe: &[u32], sets: &[&[u32]], uim: bool) -> Forest {
    let spec = serde_json::json!({"universe": universe, "sets": sets, "universe_is_member": uim});
    Forest::from_json_str(&spec.to_string()).unwrap()
}

fn fact(blocks: &[&[u32]]) -> Factorisation {
    let text = format!("({})", blocks.iter().map(|b| format!("({})", b.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))).collect::<String>());
    Factorisation::parse(&text).unwrap()
}

/// `(I,(I_i)) ⊂ (J,(J_j))`: every block of the first lies in a block of the second.
fn included(a: &Factorisation, b: &Factorisation) -> bool {
    a.blocks().iter().all(|&x| b.blocks().iter().any(|&y| x & !y == 0))
}

fn random_primary(seed: u64) -> Forest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 + (seed % 5) as u32;
    Forest::random(&mut rng, n, 2 * n as usize).primary_reduce()
}

fn random_forest(seed: u64) -> Forest {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 + (seed % 5) as u32;
    Forest::random(&mut rng, n, 2 * n as usize)
}

#[test]
fn small_forest_examples() {
    let f = forest(&[1, 2, 3], &[&[1], &[1, 2]], true);
    let ctx = ForestCoalgebra::new(f);
    // A minimal member is primitive.
    let u: QuoElement = "((1|))".parse().unwrap();
    assert_eq!(ctx.coproduct(&u).len(), 2);
    // One proper sub-factorisation below {1,2}.
    let v: QuoElement = "((1 2|))".parse().unwrap();
    let d = ctx.coproduct(&v);
    assert_eq!(d.len(), 3);
    let term = ("((1|))".parse::<QuoElement>().unwrap(), "((1 2|1))".parse::<QuoElement>().unwrap());
    assert_eq!(d.coeff(&term), Q::from_integer(1.into()));
}

#[test]
fn factor_union_examples() {
    let f = forest(&[1, 2, 3, 4, 5], &[&[1], &[1, 2, 3], &[4, 5]], false);
    let m = |b: &[u32]| fact(&[b]).blocks()[0];
    assert_eq!(f.factor_union(&[m(&[1]), m(&[1, 2, 3])]).unwrap(), fact(&[&[1, 2, 3]]));
    assert_eq!(f.factor_union(&[m(&[1]), m(&[4, 5])]).unwrap(), fact(&[&[1], &[4, 5]]));
}

#[test]
fn chain_forest_is_primary_and_stratified() {
    let f = forest(&[1, 2, 3, 4], &[&[1], &[1, 2], &[1, 2, 3]], false);
    assert_eq!(f.primary_reduce(), f);
    let s = f.stratify();
    assert_eq!(s.levels, vec![vec![vec![1, 2, 3]], vec![vec![1, 2]], vec![vec![1]]]);
    assert_eq!(s.minimal, vec![vec![1]]);
}

#[test]
fn reduction_drops_disjoint_unions() {
    let f = forest(&[1, 2, 3], &[&[1], &[2], &[1, 2]], false);
    assert!(!f.is_primary());
    let r = f.primary_reduce();
    assert!(r.is_primary());
    assert_eq!(r, forest(&[1, 2, 3], &[&[1], &[2]], false));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inclusion_matches_definition(seed in any::<u64>()) {
        let f = random_forest(seed);
        let all = f.factorisations();
        for a in &all {
            for b in &all {
                prop_assert_eq!(a.is_below(b), included(a, b), "{} ⊂ {}", a, b);
            }
        }
    }

    #[test]
    fn join_is_least_upper_bound(seed in any::<u64>()) {
        let f = random_primary(seed);
        let all = f.factorisations();
        for a in &all {
            for b in &all {
                let j = a.join(b);
                prop_assert!(all.contains(&j), "{} ∨ {} = {} is not a factorisation", a, b, j);
                prop_assert!(included(a, &j) && included(b, &j));
                for c in all.iter().filter(|c| included(a, c) && included(b, c)) {
                    prop_assert!(included(&j, c), "{} ∨ {} = {} is not below the upper bound {}", a, b, j, c);
                }
                let mut mins = a.minimal_members(&f);
                mins.extend(b.minimal_members(&f));
                mins.sort_unstable();
                mins.dedup();
                prop_assert_eq!(j.minimal_members(&f), mins);
            }
        }
    }

    #[test]
    fn quotient_inclusion_two_ways(seed in any::<u64>()) {
        let f = random_forest(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..40 {
            let a = f.random_element(&mut rng);
            let b = f.random_element(&mut rng);
            prop_assert_eq!(quo_includes(&a, &b), quo_includes_by_bounds(&a, &b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn recognition_round_trip(seed in any::<u64>()) {
        let f = random_forest(seed);
        let r = Forest::recognize(&f.factorisations(), Some(f.universe())).unwrap();
        prop_assert_eq!(r.primary, f.is_primary());
        let sorted = |mut v: Vec<u64>| {
            v.sort_unstable();
            v
        };
        prop_assert_eq!(sorted(r.forest.members()), sorted(f.members()));
    }

    #[test]
    fn quotient_is_a_join_morphism(seed in any::<u64>()) {
        let f = random_primary(seed);
        let all = f.factorisations();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..40 {
            let (a, b, c) = (all.choose(&mut rng).unwrap(), all.choose(&mut rng).unwrap(), all.choose(&mut rng).unwrap());
            if !(included(c, a) && included(c, b)) {
                continue;
            }
            let lhs = a.join(b).quotient(c).unwrap();
            let rhs = quo_join(&a.quotient(c).unwrap(), &b.quotient(c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs, "({} ∨ {}) / {}", a, b, c);
        }
    }

    #[test]
    fn coproduct_is_the_interval_sum(seed in any::<u64>()) {
        let f = random_forest(seed);
        let all = f.factorisations();
        let ctx = ForestCoalgebra::new(f.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            let x = f.random_element(&mut rng);
            let (lo, hi) = (x.lower(), x.upper());
            let mut expected: BTreeMap<(QuoElement, QuoElement), i64> = BTreeMap::new();
            for m in all.iter().filter(|m| included(&lo, m) && included(m, &hi)) {
                let key = (QuoElement::from_bounds(&lo, m).unwrap(), QuoElement::from_bounds(m, &hi).unwrap());
                *expected.entry(key).or_insert(0) += 1;
            }
            let got: BTreeMap<(QuoElement, QuoElement), i64> = ctx
                .coproduct(&x)
                .iter()
                .map(|(k, c)| (k.clone(), c.to_integer().try_into().unwrap()))
                .collect();
            prop_assert_eq!(got, expected, "Δ{}", x);
        }
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let f = random_forest(seed);
        prop_assert_eq!(Forest::from_json_str(&f.to_json().to_string()).unwrap(), f);
    }

    #[test]
    fn quo_element_text_round_trip(seed in any::<u64>()) {
        let f = random_forest(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = f.random_element(&mut rng);
        prop_assert_eq!(x.to_string().parse::<QuoElement>().unwrap(), x);
    }
}
