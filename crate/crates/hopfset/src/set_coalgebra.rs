//! The coalgebra spanned by families of once-collapsed states.
//!
//! A basis element is a [`SetElement`]: a family of blocks with pairwise
//! disjoint supports, each block consisting of leaves and all-leaf ideals.
//! The empty family is the group-like unit.  The coproduct sums, over all
//! admissible *split candidates* `Q`, the term `Q ⊗ ind(x ⧸ Q)`, together with
//! the two unit terms.
//!
//! A candidate is a nonempty family of disjoint atom sets such that every
//! candidate block has at least two atoms and is a proper subset of a single
//! block of `x`, and every ideal atom of `x` lies in some candidate block.
//! This joint rule is coassociative; two alternative rules are kept behind
//! [`SetRule`] for comparison.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::One;

use crate::error::{HopfError, Result};
use crate::hopf::{Bialgebra, Coalgebra, LinComb, Q};
use crate::nested::{induced_quotient, quotient_by_family, Atom, BlockFamily, NestedSet, Parser};

/// A basis element: a family of once-collapsed blocks (empty = unit).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetElement {
    family: BlockFamily,
}

impl SetElement {
    /// Validates a family: every block must be a once-collapsed state.
    pub fn new(family: BlockFamily) -> Result<SetElement> {
        for b in family.blocks() {
            if !b.is_xi_state() {
                return Err(HopfError::WrongDegree(format!(
                    "block {b} is not made of leaves and all-leaf ideals with disjoint supports"
                )));
            }
        }
        Ok(SetElement { family })
    }

    /// Single-block element.
    pub fn from_state(state: NestedSet) -> Result<SetElement> {
        if state.is_empty() {
            return Ok(SetElement::unit());
        }
        SetElement::new(BlockFamily::new([state])?)
    }

    /// The unit (empty family).
    pub fn unit() -> SetElement {
        SetElement::default()
    }

    /// True for the unit.
    pub fn is_unit(&self) -> bool {
        self.family.is_empty()
    }

    /// Underlying block family.
    pub fn family(&self) -> &BlockFamily {
        &self.family
    }

    /// Blocks in canonical order.
    pub fn blocks(&self) -> &[NestedSet] {
        self.family.blocks()
    }

    /// Total number of atoms.
    pub fn atom_count(&self) -> usize {
        self.family.atom_count()
    }

    /// Union with a support-disjoint element.
    pub fn disjoint_union(&self, other: &SetElement) -> Result<SetElement> {
        SetElement::new(BlockFamily::new(self.blocks().iter().chain(other.blocks()).cloned())?)
    }
}

impl fmt::Display for SetElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.blocks() {
            [single] => write!(f, "{single}"),
            _ => write!(f, "{}", self.family),
        }
    }
}

impl FromStr for SetElement {
    type Err = HopfError;
    /// Accepts a nested set `(1 2 {3 4})` (one block) or a family
    /// `((1 2)(3 {4 5}))`; `()` is the unit.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        if p.peek() == Some(b'(') && p.peek2() == Some(b'(') {
            let blocks = p.family()?;
            p.finish()?;
            SetElement::new(BlockFamily::new(blocks)?)
        } else {
            let set = p.nset()?;
            p.finish()?;
            SetElement::from_state(set)
        }
    }
}

/// Which split candidates enter the coproduct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SetRule {
    /// Candidates chosen jointly across the blocks of `x` (coassociative).
    #[default]
    Joint,
    /// Single-block rule extended multiplicatively over the blocks of `x`.
    PerBlock,
    /// Literal per-block conditions: a candidate block may not contain all
    /// leaves, nor all ideals, of its enclosing block; no size condition.
    Literal,
}

/// Enumerates the local candidate families inside one block: families of
/// disjoint atom subsets covering every ideal atom of the block, with the
/// block conditions of the chosen rule.  The empty family is included iff
/// the block has no ideal atoms.
fn local_candidates(block: &NestedSet, rule: SetRule) -> Vec<Vec<NestedSet>> {
    let atoms = block.atoms();
    let n = atoms.len();
    // assignment[i] = None (unused leaf) or Some(block id); restricted growth.
    let mut out = Vec::new();
    let mut assign: Vec<Option<usize>> = Vec::with_capacity(n);
    fn rec(
        atoms: &[Atom],
        assign: &mut Vec<Option<usize>>,
        next_id: usize,
        block: &NestedSet,
        rule: SetRule,
        out: &mut Vec<Vec<NestedSet>>,
    ) {
        let i = assign.len();
        if i == atoms.len() {
            let mut groups: Vec<Vec<Atom>> = vec![Vec::new(); next_id];
            for (a, g) in atoms.iter().zip(assign.iter()) {
                if let Some(g) = g {
                    groups[*g].push(a.clone());
                }
            }
            let groups: Vec<NestedSet> = groups.into_iter().map(NestedSet::new).collect();
            let ok = groups.iter().all(|g| match rule {
                SetRule::Joint | SetRule::PerBlock => g.len() >= 2 && g != block,
                // K ≠ U and L ≠ {I_i}, read literally (an empty part equals
                // an empty whole and is excluded as well).
                SetRule::Literal => g.leaves() != block.leaves() && g.ideals() != block.ideals(),
            });
            if ok {
                out.push(groups);
            }
            return;
        }
        if atoms[i].is_leaf() {
            assign.push(None);
            rec(atoms, assign, next_id, block, rule, out);
            assign.pop();
        }
        for g in 0..=next_id {
            assign.push(Some(g));
            rec(atoms, assign, next_id.max(g + 1), block, rule, out);
            assign.pop();
        }
    }
    rec(atoms, &mut assign, 0, block, rule, &mut out);
    out
}

/// Right factor of a split: every block collapsed by the candidate blocks
/// inside it, followed by the induced quotient.
pub fn split_remainder(x: &SetElement, candidate: &[NestedSet]) -> Result<SetElement> {
    let mut blocks = Vec::with_capacity(x.blocks().len());
    for b in x.blocks() {
        let inside: Vec<NestedSet> = candidate.iter().filter(|c| c.is_subset(b)).cloned().collect();
        blocks.push(induced_quotient(&quotient_by_family(b, &inside)?)?);
    }
    SetElement::new(BlockFamily::new(blocks)?)
}

/// Checks the joint candidate conditions for `candidate` against `x`.
pub fn is_split_candidate(x: &SetElement, candidate: &BlockFamily) -> bool {
    if candidate.is_empty() {
        return false;
    }
    let blocks_ok = candidate.blocks().iter().all(|c| {
        c.len() >= 2 && x.blocks().iter().any(|b| c.is_subset(b) && c != b)
    });
    let covered: BTreeSet<&Atom> = candidate.blocks().iter().flat_map(|c| c.atoms()).collect();
    let ideals_ok = x
        .blocks()
        .iter()
        .flat_map(|b| b.atoms())
        .filter(|a| !a.is_leaf())
        .all(|a| covered.contains(a));
    blocks_ok && ideals_ok
}

/// One split term `Q ⊗ ind(x ⧸ Q)` for a valid candidate.
pub fn sub_coproduct(x: &SetElement, candidate: &BlockFamily) -> Result<(SetElement, SetElement)> {
    if !is_split_candidate(x, candidate) {
        return Err(HopfError::Invalid(format!("{candidate} is not a split candidate of {x}")));
    }
    let left = SetElement::new(candidate.clone())?;
    let right = split_remainder(x, candidate.blocks())?;
    Ok((left, right))
}

/// All split candidates of `x` under a rule (joint and literal rules).
pub fn split_candidates(x: &SetElement, rule: SetRule) -> Vec<BlockFamily> {
    let per_block: Vec<Vec<Vec<NestedSet>>> = x.blocks().iter().map(|b| local_candidates(b, rule)).collect();
    let mut out = Vec::new();
    let mut cur: Vec<NestedSet> = Vec::new();
    fn rec(per: &[Vec<Vec<NestedSet>>], k: usize, cur: &mut Vec<NestedSet>, out: &mut Vec<BlockFamily>) {
        if k == per.len() {
            if !cur.is_empty() {
                out.push(BlockFamily::new(cur.iter().cloned()).expect("candidate blocks are disjoint"));
            }
            return;
        }
        for choice in &per[k] {
            let len = cur.len();
            cur.extend(choice.iter().cloned());
            rec(per, k + 1, cur, out);
            cur.truncate(len);
        }
    }
    rec(&per_block, 0, &mut cur, &mut out);
    out
}

/// The coalgebra on [`SetElement`]s.
#[derive(Clone, Copy, Debug, Default)]
pub struct SetCoalgebra {
    /// Candidate rule.
    pub rule: SetRule,
}

impl SetCoalgebra {
    /// Coalgebra with the given rule.
    pub fn with_rule(rule: SetRule) -> Self {
        SetCoalgebra { rule }
    }

    fn single_rule_coproduct(&self, x: &SetElement, rule: SetRule) -> LinComb<(SetElement, SetElement)> {
        let mut out = LinComb::zero();
        if x.is_unit() {
            out.add_term((SetElement::unit(), SetElement::unit()), Q::one());
            return out;
        }
        out.add_term((x.clone(), SetElement::unit()), Q::one());
        out.add_term((SetElement::unit(), x.clone()), Q::one());
        for c in split_candidates(x, rule) {
            let right = split_remainder(x, c.blocks()).expect("candidates lie inside blocks");
            let left = SetElement::new(c).expect("candidate blocks are once-collapsed");
            out.add_term((left, right), Q::one());
        }
        out
    }
}

impl Coalgebra for SetCoalgebra {
    type Basis = SetElement;

    fn unit(&self) -> SetElement {
        SetElement::unit()
    }

    fn coproduct(&self, x: &SetElement) -> LinComb<(SetElement, SetElement)> {
        match self.rule {
            SetRule::Joint | SetRule::Literal => self.single_rule_coproduct(x, self.rule),
            SetRule::PerBlock => {
                let mut acc: LinComb<(SetElement, SetElement)> =
                    LinComb::basis((SetElement::unit(), SetElement::unit()));
                for b in x.blocks() {
                    let xb = SetElement::from_state(b.clone()).expect("blocks are valid states");
                    let db = self.single_rule_coproduct(&xb, SetRule::Joint);
                    let mut next = LinComb::zero();
                    for ((l, r), c) in acc.iter() {
                        for ((bl, br), e) in db.iter() {
                            let key = (
                                l.disjoint_union(bl).expect("disjoint blocks"),
                                r.disjoint_union(br).expect("disjoint blocks"),
                            );
                            next.add_term(key, c * e);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
}

/// Enumerates every basis element whose support lies in `{0, …, n−1}`
/// (the unit included).  With `single_block` only one-block elements are
/// produced.
pub fn enumerate_elements(n: u32, single_block: bool) -> Vec<SetElement> {
    let labels: Vec<u32> = (0..n).collect();
    let mut out = BTreeSet::new();
    // Step 1: assign each label to "unused" or to an atom group (restricted growth).
    let mut assign: Vec<Option<usize>> = Vec::new();
    fn groups_rec(
        labels: &[u32],
        assign: &mut Vec<Option<usize>>,
        next: usize,
        single_block: bool,
        out: &mut BTreeSet<SetElement>,
    ) {
        if assign.len() == labels.len() {
            let mut groups: Vec<Vec<u32>> = vec![Vec::new(); next];
            for (l, g) in labels.iter().zip(assign.iter()) {
                if let Some(g) = g {
                    groups[*g].push(*l);
                }
            }
            emit_atom_choices(&groups, single_block, out);
            return;
        }
        assign.push(None);
        groups_rec(labels, assign, next, single_block, out);
        assign.pop();
        for g in 0..=next {
            assign.push(Some(g));
            groups_rec(labels, assign, next.max(g + 1), single_block, out);
            assign.pop();
        }
    }
    groups_rec(&labels, &mut assign, 0, single_block, &mut out);
    out.into_iter().collect()
}

fn emit_atom_choices(groups: &[Vec<u32>], single_block: bool, out: &mut BTreeSet<SetElement>) {
    // Step 2: each group becomes a leaf (singletons only) or an ideal.
    let k = groups.len();
    let mut choices: Vec<Vec<Atom>> = Vec::with_capacity(k);
    for g in groups {
        let mut opts = vec![Atom::ideal_of_leaves(g.iter().copied())];
        if g.len() == 1 {
            opts.push(Atom::Leaf(g[0]));
        }
        choices.push(opts);
    }
    let mut pick = vec![0usize; k];
    loop {
        let atoms: Vec<Atom> = (0..k).map(|i| choices[i][pick[i]].clone()).collect();
        emit_block_partitions(&atoms, single_block, out);
        // odometer
        let mut i = 0;
        loop {
            if i == k {
                return;
            }
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

fn emit_block_partitions(atoms: &[Atom], single_block: bool, out: &mut BTreeSet<SetElement>) {
    // Step 3: partition the atoms into blocks.
    if single_block {
        let e = SetElement::from_state(NestedSet::new(atoms.iter().cloned())).expect("valid state");
        out.insert(e);
        return;
    }
    let mut assign: Vec<usize> = Vec::new();
    fn rec(atoms: &[Atom], assign: &mut Vec<usize>, next: usize, out: &mut BTreeSet<SetElement>) {
        if assign.len() == atoms.len() {
            let mut blocks: Vec<Vec<Atom>> = vec![Vec::new(); next];
            for (a, g) in atoms.iter().zip(assign.iter()) {
                blocks[*g].push(a.clone());
            }
            let fam = BlockFamily::new(blocks.into_iter().map(NestedSet::new)).expect("disjoint");
            out.insert(SetElement::new(fam).expect("valid blocks"));
            return;
        }
        for g in 0..=next {
            assign.push(g);
            rec(atoms, assign, next.max(g + 1), out);
            assign.pop();
        }
    }
    rec(atoms, &mut assign, 0, out);
}

/// A word in the free tensor algebra over non-unit basis elements.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SetWord(pub Vec<SetElement>);

impl SetWord {
    /// The word with one letter (the empty word for the unit).
    pub fn letter(x: SetElement) -> SetWord {
        if x.is_unit() {
            SetWord(Vec::new())
        } else {
            SetWord(vec![x])
        }
    }
}

impl fmt::Display for SetWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join("·"))
    }
}

/// Hopf algebra: the free tensor algebra on the set coalgebra, with the
/// coproduct extended multiplicatively over concatenation.
#[derive(Clone, Copy, Debug, Default)]
pub struct SetHopf {
    /// Underlying coalgebra.
    pub coalgebra: SetCoalgebra,
}

impl Coalgebra for SetHopf {
    type Basis = SetWord;

    fn unit(&self) -> SetWord {
        SetWord::default()
    }

    fn coproduct(&self, w: &SetWord) -> LinComb<(SetWord, SetWord)> {
        let mut acc: LinComb<(SetWord, SetWord)> = LinComb::basis((SetWord::default(), SetWord::default()));
        for x in &w.0 {
            let dx = self.coalgebra.coproduct(x);
            let mut next = LinComb::zero();
            for ((l, r), c) in acc.iter() {
                for ((a, b), e) in dx.iter() {
                    let mut l2 = l.clone();
                    let mut r2 = r.clone();
                    if !a.is_unit() {
                        l2.0.push(a.clone());
                    }
                    if !b.is_unit() {
                        r2.0.push(b.clone());
                    }
                    next.add_term((l2, r2), c * e);
                }
            }
            acc = next;
        }
        acc
    }
}

impl Bialgebra for SetHopf {
    fn product(&self, a: &SetWord, b: &SetWord) -> Result<SetWord> {
        let mut w = a.0.clone();
        w.extend(b.0.iter().cloned());
        Ok(SetWord(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{check_coassoc, nilpotence_index};

    fn el(s: &str) -> SetElement {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_render() {
        assert_eq!(el("(1 2 {3 4})").to_string(), "(1 2 {3 4})");
        assert_eq!(el("((1 2))"), el("(1 2)"));
        assert_eq!(el("((3 4)(1 2))").to_string(), "((1 2)(3 4))");
        assert!(el("()").is_unit());
        assert!("(1 {2 {3}})".parse::<SetElement>().is_err());
    }

    #[test]
    fn sub_coproduct_examples() {
        let x = el("(1 2 3)");
        let (l, r) = sub_coproduct(&x, &"((1 2))".parse().unwrap()).unwrap();
        assert_eq!((l, r), (el("(1 2)"), el("(3 {1 2})")));
        let x = el("(1 2 3 4)");
        let (l, r) = sub_coproduct(&x, &"((1 2)(3 4))".parse().unwrap()).unwrap();
        assert_eq!((l, r), (el("((1 2)(3 4))"), el("({1 2} {3 4})")));
        let x = el("(1 2 {3 4})");
        let (l, r) = sub_coproduct(&x, &"((1 {3 4}))".parse().unwrap()).unwrap();
        assert_eq!((l, r), (el("(1 {3 4})"), el("(2 {1 3 4})")));
        assert!(sub_coproduct(&el("(1 2 {3 4})"), &"((1 2))".parse().unwrap()).is_err());
    }

    #[test]
    fn coproduct_examples() {
        let ctx = SetCoalgebra::default();
        let u = SetElement::unit();
        assert_eq!(ctx.coproduct(&u), LinComb::basis((u.clone(), u.clone())));
        let x = el("(1 2)");
        assert!(ctx.reduced_coproduct(&x).is_zero());
        let d = ctx.reduced_coproduct(&el("(1 2 3)"));
        assert_eq!(d.len(), 3);
        assert_eq!(d.coeff(&(el("(2 3)"), el("(1 {2 3})"))), num_traits::One::one());
        assert_eq!(ctx.reduced_coproduct(&el("(1 2 {3 4})")).len(), 2);
        assert!(ctx.reduced_coproduct(&el("(3 {1 2})")).is_zero());
    }

    #[test]
    fn per_block_rule_is_not_coassociative() {
        let x = el("(1 2 3 4)");
        assert!(check_coassoc(&SetCoalgebra::with_rule(SetRule::PerBlock), &x).is_some());
        assert!(check_coassoc(&SetCoalgebra::default(), &x).is_none());
    }

    #[test]
    fn nilpotence_bound_small() {
        let ctx = SetCoalgebra::default();
        let x = el("(1 2 3)");
        let m = nilpotence_index(&ctx, &x, 10).unwrap();
        assert!(m <= 3);
        assert_eq!(m, 2);
    }

    #[test]
    fn enumeration_counts() {
        // n = 1: unit, (0), ({0}).
        assert_eq!(enumerate_elements(1, false).len(), 3);
        // n = 2 single blocks: (0),({0}),(1),({1}),(0 1),(0 {1}),({0} 1),({0} {1}),({0 1}) + unit.
        assert_eq!(enumerate_elements(2, true).len(), 10);
        assert!(enumerate_elements(3, false).iter().all(|e| e.to_string().parse::<SetElement>().unwrap() == *e));
    }
}
