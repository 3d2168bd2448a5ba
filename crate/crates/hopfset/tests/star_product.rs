//! Star products of monomials against closed forms and brute-force sums.

use hopfset::hopf::Q;
use hopfset::nested::Atom;
use hopfset::star::{
    enumerate_subordinate, expectation, leading_term_check, power_factor, quotient_starpoly, star, star_by_operator,
    star_iterated, star_jets, star_monomials, star_quotient, state_of_blocks, substitute_jets, KSym, StarPoly, Term,
};
use num_traits::One;
use proptest::prelude::*;

fn factorial(n: u32) -> Q {
    (1..=n).fold(Q::one(), |a, k| a * Q::from_integer(k.into()))
}

fn falling(n: u32, k: u32) -> Q {
    (0..k).fold(Q::one(), |a, i| a * Q::from_integer((n - i).into()))
}

/// `z1^a ⋆ z2^b = Σ_k ℏ^k K12^k / k! · a^(k) b^(k) z1^(a−k) z2^(b−k)`.
fn two_factor_closed_form(a: u32, b: u32, order: u32) -> StarPoly {
    let terms = (0..=a.min(b).min(order)).map(|k| {
        let vars: Vec<(Atom, u32)> =
            [(Atom::Leaf(1), a - k), (Atom::Leaf(2), b - k)].into_iter().filter(|(_, e)| *e > 0).collect();
        let ks = if k > 0 { vec![(KSym::leaves(1, 2), k)] } else { vec![] };
        (Term { hbar: k, vars, ks }, falling(a, k) * falling(b, k) / factorial(k))
    });
    StarPoly::from_terms(order, terms)
}

/// Number of symmetric natural zero-diagonal matrices with row sums `n`.
fn count_subordinate(n: &[u32]) -> usize {
    let m = n.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    fn rec(pairs: &[(usize, usize)], k: usize, left: &mut Vec<u32>) -> usize {
        if k == pairs.len() {
            return usize::from(left.iter().all(|&x| x == 0));
        }
        let (i, j) = pairs[k];
        let mut total = 0;
        for v in 0..=left[i].min(left[j]) {
            left[i] -= v;
            left[j] -= v;
            total += rec(pairs, k + 1, left);
            left[i] += v;
            left[j] += v;
        }
        total
    }
    rec(&pairs, 0, &mut n.to_vec())
}

fn powers() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..=3, 1..=4)
}

#[test]
fn expectation_examples() {
    let two = expectation(&[2, 2], false);
    assert_eq!(two.len(), 1);
    assert_eq!(two.coeff(&vec![(KSym::leaves(1, 2), 2)]), Q::from_integer(2.into()));
    let three = expectation(&[2, 2, 2], false);
    let key = vec![(KSym::leaves(1, 2), 1), (KSym::leaves(1, 3), 1), (KSym::leaves(2, 3), 1)];
    assert_eq!(three.coeff(&key), Q::from_integer(8.into()));
    assert!(expectation(&[1, 2], false).is_zero());
    assert!(expectation(&[3, 1], false).is_zero());
}

#[test]
fn quotient_of_a_pair_state() {
    // z1·z2 collapsed to ζ{1 2}, next to z3.
    let state = hopfset::nested::parse_xi_pair("((3)|{(1 2)})").unwrap();
    let p = star_quotient(&state, &[1, 1, 1], 3, false).unwrap();
    assert_eq!(p.to_string(), "z3·ζ{1 2}^2 + 2·ℏ·K[3,{1 2}]·ζ{1 2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_factors_match_closed_form(a in 0u32..=5, b in 0u32..=5, order in 0u32..=5) {
        let f = power_factor(order, Atom::Leaf(1), a, false);
        let g = power_factor(order, Atom::Leaf(2), b, false);
        prop_assert_eq!(star(&f, &g), two_factor_closed_form(a, b, order));
    }

    #[test]
    fn three_evaluations_agree(n in powers(), order in 0u32..=4, normalized in any::<bool>()) {
        let direct = star_monomials(&n, order, normalized);
        prop_assert_eq!(&star_by_operator(&n, order, normalized), &direct);
        prop_assert_eq!(&star_iterated(&n, order, normalized), &direct);
    }

    #[test]
    fn jets_specialise_to_monomials(n in powers(), order in 0u32..=3) {
        let jets = star_jets(n.len(), order);
        prop_assert_eq!(substitute_jets(&jets, &n, order, true), star_monomials(&n, order, true));
    }

    #[test]
    fn subordinate_enumeration_is_complete(n in powers()) {
        let ms = enumerate_subordinate(&n);
        prop_assert_eq!(ms.len(), count_subordinate(&n));
        let distinct: std::collections::BTreeSet<String> = ms.iter().map(|m| m.matrix().to_string()).collect();
        prop_assert_eq!(distinct.len(), ms.len());
        for m in &ms {
            prop_assert_eq!(m.row_sums(), n.clone());
        }
    }

    #[test]
    fn leading_term_is_the_expectation(n in powers()) {
        let r = leading_term_check(&n);
        prop_assert!(r.ok, "{:?}", r);
    }

    #[test]
    fn collapsing_variables_is_the_chain_rule(n in prop::collection::vec(1u32..=2, 2..=5), split in 1usize..=4, order in 1u32..=3) {
        let m = n.len() as u32;
        let cut = (split as u32).min(m - 1) + 1;
        let block: Vec<u32> = (1..=cut).collect();
        let merged = quotient_starpoly(
            &star_monomials(&n, order, false),
            &[block.iter().map(|&l| Atom::Leaf(l)).collect()],
        )
        .unwrap();
        let state = state_of_blocks(m, &[block]).unwrap();
        let direct = star_quotient(&state, &n, order, false).unwrap();
        // Vandermonde: Σ_{e1+e2=e} e!/(e1!e2!) n1^(e1) n2^(e2) = (n1+n2)^(e).
        prop_assert_eq!(merged, direct);
    }
}
