//! Exhaustive and seeded law sweeps shared by the acceptance harness and
//! the command-line `verify` subcommands.
//!
//! Every sweep returns a [`LawReport`]: the number of individual checks and
//! the failures with both sides rendered.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::forest::{forest_shapes, quo_join, Factorisation, Forest, ForestCoalgebra, ForestHopf, ForestMonomial, QuoElement};
use crate::hopf::{
    check_antipode, check_coassoc, check_compat, check_counit, nilpotence_index, verify_coalgebra_law, Antipode,
    render_tensor2, Bialgebra, Coalgebra, Law, LawFailure, LawReport, LinComb, Q,
};
use crate::matrix::{lift_partition, random_matrix, AdjMatrix, MatClass, MatCoalgebra, MatHopf, ZeroDiagMatrix};
use crate::set_coalgebra::{enumerate_elements, SetCoalgebra, SetElement, SetHopf, SetWord};
use crate::star::{leading_term_check, render_kpoly, quotient_starpoly, star, star_monomials, star_quotient, StarPoly};
use crate::nested::{
    induced_quotient, molecule, quotient, quotient_by_family, quotient_family_by_family, reversion, Atom,
    BlockFamily, NestedSet,
};

/// Every family of disjoint nonempty blocks drawn from `items` (the blocks
/// need not cover `items`), blocks in canonical restricted-growth order.
pub fn partial_partitions<T: Clone>(items: &[T]) -> Vec<Vec<Vec<T>>> {
    fn rec<T: Clone>(items: &[T], k: usize, blocks: &mut Vec<Vec<T>>, out: &mut Vec<Vec<Vec<T>>>) {
        if k == items.len() {
            out.push(blocks.clone());
            return;
        }
        rec(items, k + 1, blocks, out);
        for b in 0..blocks.len() {
            blocks[b].push(items[k].clone());
            rec(items, k + 1, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![items[k].clone()]);
        rec(items, k + 1, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(items, 0, &mut Vec::new(), &mut out);
    out
}

/// Every family whose blocks are nonempty subfamilies of blocks of `outer`:
/// each block of `outer` independently contributes a partial partition of
/// its own items.
pub fn refinements<T: Clone>(outer: &[Vec<T>]) -> Vec<Vec<Vec<T>>> {
    let mut acc: Vec<Vec<Vec<T>>> = vec![Vec::new()];
    for b in outer {
        let parts = partial_partitions(b);
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for a in &acc {
            for p in &parts {
                let mut f = a.clone();
                f.extend(p.iter().cloned());
                next.push(f);
            }
        }
        acc = next;
    }
    acc
}

/// All subsets of `{1, …, n}` as leaf sets.
fn leaf_subsets(n: u32) -> Vec<NestedSet> {
    (0u32..1 << n)
        .map(|m| NestedSet::from_leaves((0..n).filter(|i| m >> i & 1 == 1).map(|i| i + 1)))
        .collect()
}

fn leaf_blocks(blocks: &[Vec<u32>]) -> Vec<NestedSet> {
    blocks.iter().map(|b| NestedSet::from_leaves(b.iter().copied())).collect()
}

fn atom_blocks(blocks: &[Vec<Atom>]) -> Vec<NestedSet> {
    blocks.iter().map(|b| NestedSet::new(b.iter().cloned())).collect()
}

fn family(blocks: Vec<NestedSet>) -> BlockFamily {
    BlockFamily::new(blocks).expect("blocks are disjoint by construction")
}

fn fail(out: &mut Vec<LawFailure>, element: String, lhs: impl ToString, rhs: impl ToString) {
    out.push(LawFailure { element, lhs: lhs.to_string(), rhs: rhs.to_string() });
}

/// Unions and intersections of single quotients over `{1, …, n}`: the
/// ∩/∪ identities whenever both sets meet the collapsed set in the same
/// part, monotonicity for `I ⊆ U ⊆ V`, and absorption when `V ∩ I = ∅`.
pub fn sweep_quotient_lattice(n: u32) -> LawReport {
    let subsets = leaf_subsets(n);
    let mut total = 0;
    let mut failures = Vec::new();
    for u in &subsets {
        for v in &subsets {
            for i in &subsets {
                let (ui, vi) = (quotient(u, i), quotient(v, i));
                let tag = || format!("U={u} V={v} I={i}");
                if u.intersection(i) == v.intersection(i) {
                    total += 2;
                    let lhs = ui.intersection(&vi);
                    let rhs = quotient(&u.intersection(v), i);
                    if lhs != rhs {
                        fail(&mut failures, tag(), lhs, rhs);
                    }
                    let lhs = ui.union(&vi);
                    let rhs = quotient(&u.union(v), i);
                    if lhs != rhs {
                        fail(&mut failures, tag(), lhs, rhs);
                    }
                }
                if i.is_subset(u) && u.is_subset(v) {
                    total += 1;
                    if !ui.is_subset(&vi) {
                        fail(&mut failures, tag(), &ui, &vi);
                    }
                }
                if v.intersection(i).is_empty() {
                    total += 1;
                    let lhs = ui.union(&vi);
                    let rhs = ui.union(v);
                    if lhs != rhs {
                        fail(&mut failures, tag(), lhs, rhs);
                    }
                }
            }
        }
    }
    LawReport { law: "quotient-lattice".into(), total, failures }
}

/// Molecule uniqueness over `{1, …, n}`: for every set `V`, every family of
/// disjoint blocks `F` and every leaf set `U` disjoint from `⋃F`,
/// `V⧸(F) = U ∪ {F_i}` holds exactly when `V = U ∪ ⋃F`.
pub fn sweep_molecule(n: u32) -> LawReport {
    let labels: Vec<u32> = (1..=n).collect();
    let subsets = leaf_subsets(n);
    let mut total = 0;
    let mut failures = Vec::new();
    for f in partial_partitions(&labels) {
        let blocks = leaf_blocks(&f);
        let fam = family(blocks.clone());
        let covered: NestedSet = NestedSet::new(blocks.iter().flat_map(|b| b.atoms().to_vec()));
        let targets: Vec<(NestedSet, NestedSet, NestedSet)> = subsets
            .iter()
            .filter(|u| u.intersection(&covered).is_empty())
            .map(|u| {
                let target = NestedSet::new(u.atoms().iter().cloned().chain(blocks.iter().cloned().map(Atom::Ideal)));
                let mol = molecule(u, &fam).expect("disjoint leaves");
                (u.clone(), target, mol)
            })
            .collect();
        for v in &subsets {
            let q = quotient_by_family(v, &blocks).expect("disjoint blocks");
            for (u, target, mol) in &targets {
                total += 1;
                if (q == *target) != (v == mol) {
                    fail(&mut failures, format!("V={v} F={fam} U={u}"), &q, target);
                }
            }
        }
    }
    LawReport { law: "molecule".into(), total, failures }
}

/// The induced quotient of a twice-collapsed set over `{1, …, n}`.
///
/// For `U`, a family `(I_i)` in `U` and a family `(J_j)` in `U⧸(I_i)`, with
/// `(I_i')` the blocks untouched by `(J_j)` and `(K) = (I_i') ∪ (R₁(J_j))`:
/// * `ind{(U⧸(I))⧸(J)} = U⧸(K) = (U⧸(I_i'))⧸(R₁(J_j))`;
/// * `(K)⧸(I) = (J)` exactly when `(I_i')` is empty.
pub fn sweep_induced_quotient(n: u32) -> LawReport {
    let mut total = 0;
    let mut failures = Vec::new();
    for u in leaf_subsets(n) {
        for ib in partial_partitions(&u.leaves()) {
            let i_blocks = leaf_blocks(&ib);
            let i_fam = family(i_blocks.clone());
            let x = quotient_by_family(&u, &i_blocks).expect("disjoint blocks");
            for jb in partial_partitions(x.atoms()) {
                let j_blocks = atom_blocks(&jb);
                let j_fam = family(j_blocks.clone());
                let tag = || format!("U={u} I={i_fam} J={j_fam}");
                let touched: Vec<&NestedSet> = j_blocks.iter().flat_map(|b| b.ideals()).collect();
                let untouched: Vec<NestedSet> =
                    i_blocks.iter().filter(|b| !touched.contains(b)).cloned().collect();
                let r1: Vec<NestedSet> = j_blocks.iter().map(|b| reversion(b).expect("degree ≤ 1")).collect();
                let k_blocks: Vec<NestedSet> = untouched.iter().chain(&r1).cloned().collect();
                let k_fam = family(k_blocks.clone());

                let twice = quotient_by_family(&x, &j_blocks).expect("disjoint blocks");
                let ind = induced_quotient(&twice).expect("degree ≤ 2");
                let direct = quotient_by_family(&u, &k_blocks).expect("disjoint blocks");
                let staged =
                    quotient_by_family(&quotient_by_family(&u, &untouched).expect("disjoint"), &r1).expect("disjoint");
                total += 3;
                if ind != direct {
                    fail(&mut failures, tag(), &ind, &direct);
                }
                if direct != staged {
                    fail(&mut failures, tag(), &direct, &staged);
                }
                let back = quotient_family_by_family(&k_fam, &i_fam, false).expect("(I) ⊂ (K)");
                if (back == j_fam) != untouched.is_empty() {
                    fail(&mut failures, tag(), format!("(K)/(I) = {back}"), format!("untouched = {}", untouched.len()));
                }
            }
        }
    }
    LawReport { law: "induced-quotient".into(), total, failures }
}

/// The converse direction over `{1, …, n}`: for `(I) ⊂ (K) ⊂ U` and
/// `(J) = (K)⧸(I)`, the family `(I_i') ∪ (R₁(J_j))` recovers `(K)` and
/// `U⧸(K) = ind{(U⧸(I))⧸(J)}`.
pub fn sweep_induced_recovery(n: u32) -> LawReport {
    let mut total = 0;
    let mut failures = Vec::new();
    for u in leaf_subsets(n) {
        for kb in partial_partitions(&u.leaves()) {
            let k_blocks = leaf_blocks(&kb);
            let k_fam = family(k_blocks.clone());
            let uk = quotient_by_family(&u, &k_blocks).expect("disjoint blocks");
            for ib in refinements(&kb) {
                let i_blocks = leaf_blocks(&ib);
                let i_fam = family(i_blocks.clone());
                let j_fam = quotient_family_by_family(&k_fam, &i_fam, false).expect("(I) ⊂ (K)");
                let tag = || format!("U={u} K={k_fam} I={i_fam}");
                let touched: Vec<&NestedSet> = j_fam.blocks().iter().flat_map(|b| b.ideals()).collect();
                let untouched: Vec<NestedSet> =
                    i_blocks.iter().filter(|b| !touched.contains(b)).cloned().collect();
                let recovered = family(
                    untouched
                        .iter()
                        .cloned()
                        .chain(j_fam.blocks().iter().map(|b| reversion(b).expect("degree ≤ 1")))
                        .collect(),
                );
                total += 2;
                if recovered != k_fam {
                    fail(&mut failures, tag(), &recovered, &k_fam);
                }
                let x = quotient_by_family(&u, &i_blocks).expect("disjoint blocks");
                let ind = induced_quotient(&quotient_by_family(&x, j_fam.blocks()).expect("disjoint"))
                    .expect("degree ≤ 2");
                if ind != uk {
                    fail(&mut failures, tag(), &ind, &uk);
                }
            }
        }
    }
    LawReport { law: "induced-recovery".into(), total, failures }
}

/// Quotients of families by families over `{1, …, n}`: for chains
/// `(I) ⊂ (W) ⊂ (V)` with `(K) = (W)⧸(I)` and `(J) = (V)⧸(I)`,
/// `ind{(J)⧸(K)} = (V)⧸(W)`.
pub fn sweep_family_chain(n: u32) -> LawReport {
    let labels: Vec<u32> = (1..=n).collect();
    let mut total = 0;
    let mut failures = Vec::new();
    for vb in partial_partitions(&labels) {
        let v_fam = family(leaf_blocks(&vb));
        for wb in refinements(&vb) {
            let w_fam = family(leaf_blocks(&wb));
            let vw = quotient_family_by_family(&v_fam, &w_fam, false).expect("(W) ⊂ (V)");
            for ib in refinements(&wb) {
                let i_fam = family(leaf_blocks(&ib));
                let k = quotient_family_by_family(&w_fam, &i_fam, false).expect("(I) ⊂ (W)");
                let j = quotient_family_by_family(&v_fam, &i_fam, false).expect("(I) ⊂ (V)");
                total += 1;
                match quotient_family_by_family(&j, &k, true) {
                    Ok(lhs) if lhs == vw => {}
                    Ok(lhs) => fail(&mut failures, format!("I={i_fam} W={w_fam} V={v_fam}"), lhs, &vw),
                    Err(e) => fail(&mut failures, format!("I={i_fam} W={w_fam} V={v_fam}"), e, &vw),
                }
            }
        }
    }
    LawReport { law: "family-chain".into(), total, failures }
}

/// Every once-collapsed state `U ∪ {I_i}` with support in `{1, …, n}`.
pub fn xi_states(n: u32) -> Vec<NestedSet> {
    let labels: Vec<u32> = (1..=n).collect();
    let mut out = Vec::new();
    for u in leaf_subsets(n) {
        let rest: Vec<u32> = labels.iter().copied().filter(|l| !u.contains(&Atom::Leaf(*l))).collect();
        for ib in partial_partitions(&rest) {
            out.push(NestedSet::new(
                u.atoms().iter().cloned().chain(ib.iter().map(|b| Atom::ideal_of_leaves(b.iter().copied()))),
            ));
        }
    }
    out
}

/// Staged induced quotients of once-collapsed states over `{1, …, n}`: for
/// `X = U ∪ {I_i}` and `(D ∪ E) ⊂ (K ∪ L) ⊂ X`,
/// * `ind{X⧸(K∪L)} = (U ∪ ⋃I)⧸(J)` with
///   `(J) = (I_i untouched by L) ∪ (K_λ ∪ R(L_λ))`;
/// * `ind{X⧸(K∪L)} = ind{ind{X⧸(D∪E)} ⧸ ind{(K∪L)⧸(D∪E)}}`.
pub fn sweep_staged_quotient(n: u32) -> LawReport {
    let mut total = 0;
    let mut failures = Vec::new();
    for x in xi_states(n) {
        let opened = reversion(&x).expect("degree ≤ 1");
        for kl in partial_partitions(x.atoms()) {
            let kl_blocks = atom_blocks(&kl);
            let kl_fam = family(kl_blocks.clone());
            let lhs = induced_quotient(&quotient_by_family(&x, &kl_blocks).expect("disjoint")).expect("degree ≤ 2");

            let touched: Vec<&NestedSet> = kl_blocks.iter().flat_map(|b| b.ideals()).collect();
            let j_blocks: Vec<NestedSet> = x
                .ideals()
                .into_iter()
                .filter(|i| !touched.contains(i))
                .cloned()
                .chain(kl_blocks.iter().map(|b| reversion(b).expect("degree ≤ 1")))
                .collect();
            total += 1;
            let flat = quotient_by_family(&opened, &j_blocks).expect("disjoint");
            if lhs != flat {
                fail(&mut failures, format!("X={x} KL={kl_fam}"), &lhs, &flat);
            }

            for de in refinements(&kl) {
                let de_blocks = atom_blocks(&de);
                let de_fam = family(de_blocks.clone());
                let y = induced_quotient(&quotient_by_family(&x, &de_blocks).expect("disjoint")).expect("degree ≤ 2");
                let z = quotient_family_by_family(&kl_fam, &de_fam, true).expect("(D∪E) ⊂ (K∪L)");
                total += 1;
                let rhs = quotient_by_family(&y, z.blocks()).and_then(|s| induced_quotient(&s));
                match rhs {
                    Ok(r) if r == lhs => {}
                    Ok(r) => fail(&mut failures, format!("X={x} KL={kl_fam} DE={de_fam}"), &lhs, r),
                    Err(e) => fail(&mut failures, format!("X={x} KL={kl_fam} DE={de_fam}"), &lhs, e),
                }
            }
        }
    }
    LawReport { law: "staged-quotient".into(), total, failures }
}

/// All quotient-calculus sweeps over `{1, …, n}`.
pub fn sweep_quotient_calculus(n: u32) -> Vec<LawReport> {
    vec![
        sweep_quotient_lattice(n),
        sweep_molecule(n),
        sweep_induced_quotient(n),
        sweep_induced_recovery(n),
        sweep_family_chain(n),
        sweep_staged_quotient(n),
    ]
}

// ---------------------------------------------------------------------------
// Set coalgebra
// ---------------------------------------------------------------------------

/// The set-coalgebra sample of the exhaustive sweeps: every element over
/// `max_all` labels and every single-block element over `max_single` labels.
pub fn set_sample(max_all: u32, max_single: u32) -> Vec<SetElement> {
    let mut all: BTreeSet<SetElement> = enumerate_elements(max_all, false).into_iter().collect();
    if max_single > max_all {
        all.extend(enumerate_elements(max_single, true));
    }
    all.into_iter().collect()
}

/// Coassociativity and both counit laws on a set-coalgebra sample.
pub fn sweep_set_coassoc(sample: &[SetElement]) -> Vec<LawReport> {
    let ctx = SetCoalgebra::default();
    vec![verify_coalgebra_law(&ctx, Law::Coassoc, sample), verify_coalgebra_law(&ctx, Law::Counit, sample)]
}

/// Conilpotence: for every non-unit element the iterated reduced coproduct
/// vanishes after at most (atom count) steps.
pub fn sweep_set_nilpotence(sample: &[SetElement]) -> LawReport {
    let ctx = SetCoalgebra::default();
    let failures = sample
        .par_iter()
        .filter(|x| !x.is_unit())
        .filter_map(|x| {
            let bound = x.atom_count();
            match nilpotence_index(&ctx, x, bound) {
                Some(_) => None,
                None => Some(LawFailure {
                    element: x.to_string(),
                    lhs: format!("(Δ′)^{bound} ≠ 0"),
                    rhs: format!("bound {bound}"),
                }),
            }
        })
        .collect();
    LawReport { law: "nilpotence".into(), total: sample.iter().filter(|x| !x.is_unit()).count(), failures }
}

// ---------------------------------------------------------------------------
// Forests
// ---------------------------------------------------------------------------

/// Elements checked per forest: every quotient element, or only the top
/// element, the interval above the minimal members and each `[∅, (m)]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestScope {
    /// Every quotient element of the forest.
    All,
    /// The top element, `top ⧸ Min` and every single member.
    Spine,
}

fn forest_elements(f: &Forest, scope: ForestScope) -> Vec<QuoElement> {
    match scope {
        ForestScope::All => f.quo_elements(),
        ForestScope::Spine => {
            let top = Factorisation::maximal_of(f.members());
            let min = Factorisation::maximal_of(f.minimal());
            let mut out = BTreeSet::new();
            out.insert(QuoElement::from_bounds(&Factorisation::empty(), &top).expect("∅ ≤ top"));
            if min.is_below(&top) {
                out.insert(QuoElement::from_bounds(&min, &top).expect("Min ≤ top"));
            }
            for m in f.members() {
                let fm = Factorisation::new(vec![m]).expect("single block");
                out.insert(QuoElement::from_bounds(&Factorisation::empty(), &fm).expect("∅ ≤ (m)"));
            }
            out.into_iter().collect()
        }
    }
}

/// Coassociativity and both counit laws on a list of forests.
pub fn sweep_forests(forests: &[Forest], scope: ForestScope) -> LawReport {
    let parts: Vec<(usize, Vec<LawFailure>)> = forests
        .par_iter()
        .map(|f| {
            let ctx = ForestCoalgebra::new(f.clone());
            let elements = forest_elements(f, scope);
            let tag = |e: LawFailure| LawFailure { element: format!("{} in {}", e.element, f.to_json()), ..e };
            let failures = elements
                .iter()
                .flat_map(|x| check_coassoc(&ctx, x).into_iter().chain(check_counit(&ctx, x)))
                .map(tag)
                .collect();
            (2 * elements.len(), failures)
        })
        .collect();
    collect_parts("forest-coassoc", parts)
}

fn collect_parts(law: &str, parts: Vec<(usize, Vec<LawFailure>)>) -> LawReport {
    let mut report = LawReport { law: law.into(), total: 0, failures: Vec::new() };
    for (n, f) in parts {
        report.total += n;
        report.failures.extend(f);
    }
    report
}

/// Nilpotence on every quotient element of a list of forests: the least
/// `m` with `(Δ′)^m x = 0` equals the longest strict chain in the interval
/// of `x` and is at most the number of members it adds.
pub fn sweep_forest_nilpotence(forests: &[Forest]) -> LawReport {
    let parts: Vec<(usize, Vec<LawFailure>)> = forests
        .par_iter()
        .map(|f| {
            let ctx = ForestCoalgebra::new(f.clone());
            let elements: Vec<QuoElement> = f.quo_elements().into_iter().filter(|x| !x.is_unit()).collect();
            let mut failures = Vec::new();
            for x in &elements {
                let bound = ctx.nilpotence_bound(x);
                let chain = ctx.longest_chain(x);
                let index = nilpotence_index(&ctx, x, bound + 1);
                if index != Some(chain) || chain > bound {
                    failures.push(LawFailure {
                        element: format!("{x} in {}", f.to_json()),
                        lhs: format!("index {index:?}, longest chain {chain}"),
                        rhs: format!("bound {bound}"),
                    });
                }
            }
            (elements.len(), failures)
        })
        .collect();
    collect_parts("forest-nilpotence", parts)
}

/// Exhaustive forest sweep: one forest per isomorphism class on every
/// universe of size `1..=max_n` with at most `max_members` proper members.
pub fn sweep_forest_shapes(max_n: u32, max_members: usize, scope: ForestScope) -> LawReport {
    let forests: Vec<Forest> = (1..=max_n).flat_map(|n| forest_shapes(n, max_members)).collect();
    sweep_forests(&forests, scope)
}

/// Seeded random forests on universes of size `3..=max_n`.
pub fn random_forests(seed: u64, count: usize, max_n: u32) -> Vec<Forest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=max_n.max(3));
            let members = rng.gen_range(1..=2 * n as usize);
            Forest::random(&mut rng, n, members)
        })
        .collect()
}

/// A seeded random pair of non-unit elements with disjoint supports.
fn disjoint_pair<R: Rng>(rng: &mut R, f: &Forest) -> Option<(QuoElement, QuoElement)> {
    for _ in 0..64 {
        let a = f.random_element(rng);
        let b = f.random_element(rng);
        if !a.is_unit() && !b.is_unit() && a.support() & b.support() == 0 {
            return Some((a, b));
        }
    }
    None
}

/// Multiplicativity on seeded disjoint-support pairs:
/// `Δ(a∨b) = Δa ∨ Δb` leg-wise, and every middle of `a∨b` splits into
/// middles of `a` and `b`.
pub fn sweep_forest_multiplicativity(seed: u64, pairs: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    let mut failures = Vec::new();
    while total < pairs {
        let n = rng.gen_range(3..=7);
        let members = rng.gen_range(2..=2 * n as usize);
        let f = Forest::random(&mut rng, n, members);
        let Some((a, b)) = disjoint_pair(&mut rng, &f) else { continue };
        total += 1;
        let ctx = ForestCoalgebra::new(f.clone());
        let tag = format!("{a} ∨ {b} in {}", f.to_json());
        let ab = match quo_join(&a, &b) {
            Ok(x) => x,
            Err(e) => {
                fail(&mut failures, tag, e, "");
                continue;
            }
        };
        let lhs = ctx.coproduct(&ab);
        let mut rhs = LinComb::zero();
        for ((a1, a2), c) in ctx.coproduct(&a).iter() {
            for ((b1, b2), e) in ctx.coproduct(&b).iter() {
                let l = quo_join(a1, b1).expect("disjoint supports");
                let r = quo_join(a2, b2).expect("disjoint supports");
                rhs.add_term((l, r), c * e);
            }
        }
        if lhs != rhs {
            fail(&mut failures, tag.clone(), render_tensor2(&lhs), render_tensor2(&rhs));
        }
        if !ctx.split_check(&a, &b).unwrap_or(false) {
            fail(&mut failures, tag, "middles of a∨b", "do not split");
        }
    }
    LawReport { law: "forest-multiplicativity".into(), total, failures }
}

/// Unique factorisation on seeded primary forests: for random families of
/// members, the maximal-representative factorisation is the only disjoint
/// cover of their union by members.
pub fn sweep_factor_union(seed: u64, forests: usize) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    let mut failures = Vec::new();
    let mut made = 0;
    while made < forests {
        let n = rng.gen_range(3..=8);
        let members = rng.gen_range(2..=2 * n as usize);
        let f = Forest::random(&mut rng, n, members).primary_reduce();
        if !f.is_primary() {
            fail(&mut failures, f.to_json().to_string(), "primary_reduce", "not primary");
            made += 1;
            continue;
        }
        made += 1;
        let all = f.members();
        for _ in 0..5 {
            let k = rng.gen_range(1..=all.len().min(4));
            let picked: Vec<u64> = all.choose_multiple(&mut rng, k).copied().collect();
            total += 1;
            let fact = match f.factor_union(&picked) {
                Ok(x) => x,
                Err(e) => {
                    fail(&mut failures, format!("{picked:?} in {}", f.to_json()), e, "");
                    continue;
                }
            };
            let covers = f.covers_of(fact.total());
            if covers.len() != 1 || covers[0] != fact {
                let shown: Vec<String> = covers.iter().map(|c| c.to_string()).collect();
                fail(&mut failures, format!("{picked:?} in {}", f.to_json()), &fact, shown.join(" "));
            }
        }
    }
    LawReport { law: "factor-union".into(), total, failures }
}

// ---------------------------------------------------------------------------
// Antipodes
// ---------------------------------------------------------------------------

fn antipode_report<C: Bialgebra>(ctx: &C, law: &str, sample: &[C::Basis]) -> LawReport {
    let mut anti = Antipode::new(ctx);
    let failures = sample.iter().filter_map(|x| check_antipode(ctx, &mut anti, x)).collect();
    LawReport { law: law.into(), total: sample.len(), failures }
}

/// Seeded words of one or two letters over the set coalgebra on 4 labels.
pub fn set_antipode_sample(seed: u64, count: usize) -> Vec<SetWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<SetElement> = enumerate_elements(4, false).into_iter().filter(|x| !x.is_unit()).collect();
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=2);
            SetWord((0..len).map(|_| pool.choose(&mut rng).expect("nonempty").clone()).collect())
        })
        .collect()
}

/// Seeded forest monomials paired with their forests.
pub fn forest_antipode_sample(seed: u64, count: usize) -> Vec<(Forest, ForestMonomial)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=6);
            let f = Forest::random(&mut rng, n, 2 * n as usize);
            let x = f.random_element(&mut rng);
            (f, ForestMonomial::of(&x))
        })
        .collect()
}

/// Seeded matrix classes of order 2 to 4.
pub fn matrix_antipode_sample(seed: u64, count: usize) -> Vec<MatClass> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.gen_range(2..=4);
            MatClass::normalized(&random_matrix(&mut rng, d)).expect("small order")
        })
        .collect()
}

/// Both antipode axioms on seeded elements of the set, forest and matrix
/// Hopf algebras.
pub fn sweep_antipodes(seed: u64, count: usize) -> Vec<LawReport> {
    let set = antipode_report(&SetHopf::default(), "antipode-set", &set_antipode_sample(seed, count));
    let mut forest = LawReport { law: "antipode-forest".into(), total: 0, failures: Vec::new() };
    for (f, x) in forest_antipode_sample(seed, count) {
        let r = antipode_report(&ForestHopf::new(f), "antipode-forest", &[x]);
        forest = LawReport::merge("antipode-forest", [forest, r]);
    }
    let matrix = antipode_report(&MatHopf::default(), "antipode-matrix", &matrix_antipode_sample(seed, count));
    vec![set, forest, matrix]
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

/// The matrix sample: every adjacency matrix of order `≤ max_d` with entries
/// `≤ max_entry`, and `random_per_order` seeded random matrices of each
/// order in `random_orders`.
pub fn matrix_sample(
    max_d: usize,
    max_entry: u32,
    seed: u64,
    random_per_order: usize,
    random_orders: &[usize],
) -> Result<Vec<ZeroDiagMatrix>> {
    let mut out: Vec<ZeroDiagMatrix> = Vec::new();
    let mut seen = BTreeSet::new();
    for d in 0..=max_d {
        for m in AdjMatrix::all(d, max_entry) {
            if seen.insert(MatClass::of(m.matrix())?) {
                out.push(m.matrix().clone());
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &d in random_orders {
        for _ in 0..random_per_order {
            out.push(random_matrix(&mut rng, d));
        }
    }
    Ok(out)
}

/// Coassociativity, counit and `(Δ′)^{d−1} = 0` on labelled matrices.
pub fn sweep_matrices(sample: &[ZeroDiagMatrix]) -> Result<LawReport> {
    let ctx = MatCoalgebra::default();
    let classes: Vec<(usize, MatClass)> =
        sample.iter().map(|m| Ok((m.order(), ctx.class_of(m)?))).collect::<Result<_>>()?;
    let failures: Vec<LawFailure> = classes
        .par_iter()
        .flat_map_iter(|(d, x)| {
            let mut out: Vec<LawFailure> = Vec::new();
            out.extend(check_coassoc(&ctx, x));
            out.extend(check_counit(&ctx, x));
            let bound = d.saturating_sub(1).max(1);
            if nilpotence_index(&ctx, x, bound).is_none() {
                out.push(LawFailure { element: x.to_string(), lhs: format!("(Δ′)^{bound} ≠ 0"), rhs: format!("d = {d}") });
            }
            out
        })
        .collect();
    Ok(LawReport { law: "matrix-coassoc".into(), total: 3 * classes.len(), failures })
}

/// `Δ(x ⊙ y) = Δx ⊙ Δy` on seeded pairs of classes of order `≤ max_d`.
pub fn sweep_matrix_compat(seed: u64, pairs: usize, max_d: usize) -> LawReport {
    let ctx = MatHopf::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for _ in 0..pairs {
        let pick = |rng: &mut ChaCha8Rng| {
            let d = rng.gen_range(1..=max_d);
            MatClass::normalized(&random_matrix(rng, d)).expect("small order")
        };
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        failures.extend(check_compat(&ctx, &a, &b));
    }
    LawReport { law: "matrix-compat".into(), total: pairs, failures }
}

// ---------------------------------------------------------------------------
// Star products
// ---------------------------------------------------------------------------

/// Every monomial of degree `≤ max_deg` in the variables `z_{offset+1} …
/// z_{offset+vars}`.
pub fn monomials(vars: u32, max_deg: u32, offset: u32, order: u32) -> Vec<StarPoly> {
    fn rec(v: u32, vars: u32, left: u32, cur: &mut Vec<(Atom, u32)>, offset: u32, out: &mut Vec<Vec<(Atom, u32)>>) {
        if v == vars {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            if e > 0 {
                cur.push((Atom::Leaf(offset + v + 1), e));
            }
            rec(v + 1, vars, left - e, cur, offset, out);
            if e > 0 {
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(0, vars, max_deg, &mut Vec::new(), offset, &mut out);
    out.into_iter().map(|m| StarPoly::monomial(order, m, Q::from_integer(1.into()))).collect()
}

/// `(a⋆b)⋆c = a⋆(b⋆c)` to `ℏ^order` for all triples of monomials of degree
/// `≤ max_deg`, each factor in its own group of `vars` variables.
pub fn sweep_star_assoc(vars: u32, max_deg: u32, order: u32) -> LawReport {
    let groups: Vec<Vec<StarPoly>> = (0..3).map(|g| monomials(vars, max_deg, g * vars, order)).collect();
    let mut triples: Vec<(&StarPoly, &StarPoly, &StarPoly)> = Vec::new();
    for a in &groups[0] {
        for b in &groups[1] {
            for c in &groups[2] {
                triples.push((a, b, c));
            }
        }
    }
    let failures: Vec<LawFailure> = triples
        .par_iter()
        .filter_map(|(a, b, c)| {
            let l = star(&star(a, b), c);
            let r = star(a, &star(b, c));
            (l != r).then(|| LawFailure { element: format!("{a} ⋆ {b} ⋆ {c}"), lhs: l.to_string(), rhs: r.to_string() })
        })
        .collect();
    LawReport { law: "star-assoc".into(), total: triples.len(), failures }
}

/// The admissibility theorem for every degree sequence of length `1..=max_m`
/// with entries `≤ max_n`.
pub fn sweep_admissibility(max_m: usize, max_n: u32) -> LawReport {
    let mut seqs: Vec<Vec<u32>> = Vec::new();
    for m in 1..=max_m {
        let count = (max_n as usize + 1).pow(m as u32);
        for mut code in 0..count {
            let mut s = Vec::with_capacity(m);
            for _ in 0..m {
                s.push((code % (max_n as usize + 1)) as u32);
                code /= max_n as usize + 1;
            }
            seqs.push(s);
        }
    }
    let failures: Vec<LawFailure> = seqs
        .par_iter()
        .filter_map(|n| {
            let r = leading_term_check(n);
            (!r.ok).then(|| LawFailure {
                element: format!("{n:?}"),
                lhs: render_kpoly(&r.top_constant),
                rhs: render_kpoly(&r.expectation),
            })
        })
        .collect();
    LawReport { law: "admissibility".into(), total: seqs.len(), failures }
}

/// A seeded nested-quotient instance: powers on labels `1..=m`, a family
/// `(I)` of leaf blocks and a family `(J)` of atom blocks of `U⧸(I)`.
#[derive(Clone, Debug)]
pub struct QuotientInstance {
    /// Powers `n_1 … n_m`.
    pub powers: Vec<u32>,
    /// First collapse, in leaves.
    pub inner: Vec<Vec<Atom>>,
    /// Second collapse, in atoms of the first quotient.
    pub outer: Vec<Vec<Atom>>,
}

/// Seeded nested-quotient instances with `m ≤ max_m` labels.
pub fn quotient_instances(seed: u64, count: usize, max_m: u32) -> Vec<QuotientInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(2..=max_m);
            let powers: Vec<u32> = (0..m).map(|_| rng.gen_range(0..=3)).collect();
            let leaves: Vec<Atom> = (1..=m).map(Atom::Leaf).collect();
            let inner = random_blocks(&mut rng, &leaves);
            let state = quotient_by_family(&NestedSet::new(leaves.clone()), &atom_blocks(&inner)).expect("disjoint");
            let outer = random_blocks(&mut rng, state.atoms());
            QuotientInstance { powers, inner, outer }
        })
        .collect()
}

fn random_blocks<R: Rng>(rng: &mut R, items: &[Atom]) -> Vec<Vec<Atom>> {
    let k = items.len();
    let mut blocks: Vec<Vec<Atom>> = vec![Vec::new(); k];
    for a in items {
        // Each item joins one of k blocks or stays outside.
        let slot = rng.gen_range(0..=k);
        if slot < k {
            blocks[slot].push(a.clone());
        }
    }
    blocks.retain(|b| b.len() >= 2);
    blocks
}

/// Collapse coherence of star products on seeded instances:
/// `(f⧸(I))⧸(J) = f⧸(K)` with `(K)` the lift of `(J)` through `(I)`, both
/// for the collapsed polynomial and for the star product of the collapsed
/// factors, and the induced quotient of states agrees with `U⧸(K)`.
pub fn sweep_star_quotient(seed: u64, count: usize, max_m: u32, order: u32) -> LawReport {
    let mut failures = Vec::new();
    let instances = quotient_instances(seed, count, max_m);
    for inst in &instances {
        let m = inst.powers.len() as u32;
        let tag = format!("powers {:?} I {:?} J {:?}", inst.powers, inst.inner, inst.outer);
        let lifted = lift_partition(&inst.inner, &inst.outer);
        let leaves = NestedSet::new((1..=m).map(Atom::Leaf));
        let s1 = quotient_by_family(&leaves, &atom_blocks(&inst.inner)).expect("disjoint");
        let sk = quotient_by_family(&leaves, &atom_blocks(&lifted)).expect("disjoint");
        let ind = quotient_by_family(&s1, &atom_blocks(&inst.outer)).and_then(|s| induced_quotient(&s));
        if ind.as_ref() != Ok(&sk) {
            fail(&mut failures, tag.clone(), format!("{ind:?}"), &sk);
        }
        // Atoms of the first quotient are already its variable names.
        let outer_vars = &inst.outer;
        let f = star_monomials(&inst.powers, order, true);
        let twice = quotient_starpoly(&f, &inst.inner).and_then(|p| quotient_starpoly(&p, outer_vars));
        let once = quotient_starpoly(&f, &lifted);
        let direct = star_quotient(&sk, &inst.powers, order, true);
        let staged = star_quotient(&s1, &inst.powers, order, true).and_then(|p| quotient_starpoly(&p, outer_vars));
        match (twice, once, direct, staged) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => {
                if a != b {
                    fail(&mut failures, tag.clone(), &a, &b);
                }
                if b != c {
                    fail(&mut failures, tag.clone(), &b, &c);
                }
                if c != d {
                    fail(&mut failures, tag, &c, &d);
                }
            }
            (a, b, c, d) => fail(&mut failures, tag, format!("{:?} {:?}", a.err(), b.err()), format!("{:?} {:?}", c.err(), d.err())),
        }
    }
    LawReport { law: "star-quotient".into(), total: instances.len(), failures }
}
