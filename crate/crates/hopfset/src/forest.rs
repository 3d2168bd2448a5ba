//! Forests of subsets, factorisations and the incidence Hopf algebra of
//! quotient pairs.
//!
//! A [`Forest`] is a family of subsets of a finite universe any two of which
//! are disjoint or nested.  Subsets are stored as 64-bit masks, so leaf labels
//! must be below 64.  A [`Factorisation`] is a family of pairwise disjoint
//! forest members; factorisations are ordered blockwise (`a ≤ b` iff every
//! block of `a` lies in a block of `b`) and form an upper semilattice under
//! [`Factorisation::join`].
//!
//! A [`QuoElement`] is a list of pairs `(U_k, {I_i^(k)})`: disjoint members
//! `U_k`, each with a family of disjoint members collapsed inside it.  It is
//! the quotient `(U,(U_k)) ⧸ (I,(I_i))` of two comparable factorisations.
//! Pairs whose collapsed family is `U_k` itself are trivial and dropped, so the
//! empty element is the unit.  The coproduct sums over all factorisations `K`
//! between the collapsed part and the total:
//! `Δ (U⧸I) = Σ_{I ≤ K ≤ U} (K⧸I) ⊗ (U⧸K)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{HopfError, Result};
use crate::hopf::{Bialgebra, Coalgebra, LinComb, Q};
use crate::nested::{quotient_by_family, NestedSet, Parser};

/// Largest admissible leaf label plus one.
pub const MAX_LABEL: u32 = 64;

/// Mask of a list of labels.
pub fn mask_of(labels: &[u32]) -> Result<u64> {
    let mut m = 0u64;
    for &l in labels {
        if l >= MAX_LABEL {
            return Err(HopfError::Invalid(format!("label {l} exceeds the forest label limit {}", MAX_LABEL - 1)));
        }
        m |= 1u64 << l;
    }
    Ok(m)
}

/// Labels of a mask in ascending order.
pub fn labels_of(m: u64) -> Vec<u32> {
    (0..MAX_LABEL).filter(|i| m >> i & 1 == 1).collect()
}

/// Space-separated labels of a mask.
pub fn fmt_mask(m: u64) -> String {
    labels_of(m).iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

fn is_subset(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// Serialized forest, e.g. `{"universe":[1,2,3],"sets":[[1],[1,2]],"universe_is_member":true}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestSpec {
    /// Universe labels.
    pub universe: Vec<u32>,
    /// Member sets (the empty set may be listed; it is implicit anyway).
    pub sets: Vec<Vec<u32>>,
    /// Whether the universe itself is a member.
    #[serde(default)]
    pub universe_is_member: bool,
}

/// A validated forest.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Forest {
    universe: u64,
    /// Nonempty proper members in ascending mask order.
    sets: Vec<u64>,
    universe_is_member: bool,
    /// All nonempty members (universe last when it is a member).
    all: Vec<u64>,
    /// Maximal members strictly inside `all[i]`.
    kids: Vec<Vec<u64>>,
}

/// Stratification data of a forest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Strata {
    /// `levels[k]` lists the members at level `k + 1` (the universe excluded).
    pub levels: Vec<Vec<Vec<u32>>>,
    /// Minimal nonempty members.
    pub minimal: Vec<Vec<u32>>,
    /// For every member (universe excluded) its chain up to level 1.
    pub chains: Vec<Vec<Vec<u32>>>,
}

impl Forest {
    /// Validates a family of masks: every member must lie in the universe and
    /// any two members must be disjoint or nested.
    pub fn new(universe: u64, sets: &[u64], universe_is_member: bool) -> Result<Forest> {
        let mut members: BTreeSet<u64> = BTreeSet::new();
        let mut uim = universe_is_member;
        for &s in sets {
            if !is_subset(s, universe) {
                return Err(HopfError::Invalid(format!("member ({}) is not inside the universe", fmt_mask(s))));
            }
            if s == 0 {
                continue;
            }
            if s == universe {
                uim = true;
            } else {
                members.insert(s);
            }
        }
        let v: Vec<u64> = members.into_iter().collect();
        for (i, &a) in v.iter().enumerate() {
            for &b in &v[i + 1..] {
                if a & b != 0 && !is_subset(a, b) && !is_subset(b, a) {
                    return Err(HopfError::Invalid(format!(
                        "members ({}) and ({}) overlap without nesting",
                        fmt_mask(a),
                        fmt_mask(b)
                    )));
                }
            }
        }
        Ok(Forest::build(universe, v, uim))
    }

    fn build(universe: u64, sets: Vec<u64>, universe_is_member: bool) -> Forest {
        let mut all = sets.clone();
        if universe_is_member && universe != 0 {
            all.push(universe);
        }
        let kids = all
            .iter()
            .map(|&m| {
                let inside: Vec<u64> = all.iter().copied().filter(|&x| x != m && is_subset(x, m)).collect();
                inside.iter().copied().filter(|&x| !inside.iter().any(|&y| y != x && is_subset(x, y))).collect()
            })
            .collect();
        Forest { universe, sets, universe_is_member, all, kids }
    }

    /// Builds a forest from its serialized form.
    pub fn from_spec(spec: &ForestSpec) -> Result<Forest> {
        let universe = mask_of(&spec.universe)?;
        let sets = spec.sets.iter().map(|s| mask_of(s)).collect::<Result<Vec<_>>>()?;
        Forest::new(universe, &sets, spec.universe_is_member)
    }

    /// Serialized form.
    pub fn to_spec(&self) -> ForestSpec {
        ForestSpec {
            universe: labels_of(self.universe),
            sets: self.sets.iter().map(|&s| labels_of(s)).collect(),
            universe_is_member: self.universe_is_member,
        }
    }

    /// Parses forest JSON.
    pub fn from_json_str(s: &str) -> Result<Forest> {
        let spec: ForestSpec = serde_json::from_str(s).map_err(|e| HopfError::parse(e.column(), e.to_string()))?;
        Forest::from_spec(&spec)
    }

    /// Forest JSON.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.to_spec()).expect("forest spec serializes")
    }

    /// Universe mask.
    pub fn universe(&self) -> u64 {
        self.universe
    }

    /// Whether the universe is a member.
    pub fn universe_is_member(&self) -> bool {
        self.universe_is_member
    }

    /// Nonempty proper members.
    pub fn proper_members(&self) -> &[u64] {
        &self.sets
    }

    /// All nonempty members (the universe included when it is a member).
    pub fn members(&self) -> Vec<u64> {
        self.all.clone()
    }

    /// True if the nonempty set `m` is a member.
    pub fn is_member(&self, m: u64) -> bool {
        m != 0 && (self.sets.binary_search(&m).is_ok() || (self.universe_is_member && m == self.universe))
    }

    /// Maximal members strictly inside `m`.
    pub fn children(&self, m: u64) -> Vec<u64> {
        match self.all.iter().position(|&x| x == m) {
            Some(i) => self.kids[i].clone(),
            None => {
                let inside: Vec<u64> = self.all.iter().copied().filter(|&x| x != m && is_subset(x, m)).collect();
                inside.iter().copied().filter(|&x| !inside.iter().any(|&y| y != x && is_subset(x, y))).collect()
            }
        }
    }

    /// Maximal members of the whole forest.
    pub fn roots(&self) -> Vec<u64> {
        let all = self.members();
        all.iter().copied().filter(|&x| !all.iter().any(|&y| y != x && is_subset(x, y))).collect()
    }

    /// A member is composite if its maximal sub-members cover it.
    pub fn is_composite(&self, m: u64) -> bool {
        let ch = self.children(m);
        !ch.is_empty() && ch.iter().fold(0, |a, &b| a | b) == m
    }

    /// True if no member is a disjoint union of other members.
    pub fn is_primary(&self) -> bool {
        self.members().into_iter().all(|m| !self.is_composite(m))
    }

    /// Drops every composite member; the generated factorisations are unchanged.
    pub fn primary_reduce(&self) -> Forest {
        let sets: Vec<u64> = self.sets.iter().copied().filter(|&m| !self.is_composite(m)).collect();
        let uim = self.universe_is_member && !self.is_composite(self.universe);
        Forest::build(self.universe, sets, uim)
    }

    /// Level of a proper member: the number of proper members containing it.
    pub fn level(&self, m: u64) -> usize {
        self.sets.iter().filter(|&&x| is_subset(m, x)).count()
    }

    /// Minimal nonempty members.
    pub fn minimal(&self) -> Vec<u64> {
        let all = self.members();
        all.iter().copied().filter(|&x| !all.iter().any(|&y| y != x && is_subset(y, x))).collect()
    }

    /// Levels, minimal members and chains.
    pub fn stratify(&self) -> Strata {
        let depth = self.sets.iter().map(|&m| self.level(m)).max().unwrap_or(0);
        let mut levels = vec![Vec::new(); depth];
        for &m in &self.sets {
            levels[self.level(m) - 1].push(labels_of(m));
        }
        let chains = self
            .sets
            .iter()
            .map(|&m| {
                let mut c: Vec<u64> = self.sets.iter().copied().filter(|&x| is_subset(m, x)).collect();
                c.sort_by_key(|&x| x.count_ones());
                c.into_iter().map(labels_of).collect()
            })
            .collect();
        Strata { levels, minimal: self.minimal().into_iter().map(labels_of).collect(), chains }
    }

    /// Depth: the maximal level of a proper member.
    pub fn depth(&self) -> usize {
        self.sets.iter().map(|&m| self.level(m)).max().unwrap_or(0)
    }

    /// Sub-forest of members meeting the union of the selected minimal members.
    pub fn sub_forest(&self, minimal_indices: &[usize]) -> Result<Forest> {
        let mins = self.minimal();
        let mut sel = 0u64;
        for &i in minimal_indices {
            sel |= *mins.get(i).ok_or_else(|| HopfError::Invalid(format!("no minimal member #{i}")))?;
        }
        let sets: Vec<u64> = self.sets.iter().copied().filter(|&m| m & sel != 0).collect();
        Forest::new(self.universe, &sets, self.universe_is_member && self.universe & sel != 0)
    }

    /// Restriction to the members inside `m` (with `m` as universe and member).
    pub fn restrict(&self, m: u64) -> Forest {
        let sets: Vec<u64> = self.members().into_iter().filter(|&x| is_subset(x, m)).collect();
        Forest::new(m, &sets, true).expect("restriction of a forest is a forest")
    }

    /// All disjoint families of members inside `region` (the empty family included).
    pub fn families_within(&self, region: u64) -> Vec<Factorisation> {
        let inside: Vec<u64> = self.members().into_iter().filter(|&x| is_subset(x, region)).collect();
        let roots: Vec<u64> =
            inside.iter().copied().filter(|&x| !inside.iter().any(|&y| y != x && is_subset(x, y))).collect();
        let fams = self.families_under(&roots, &|_| true);
        fams.into_iter().map(Factorisation::from_disjoint).collect()
    }

    /// All factorisations generated by the forest.
    pub fn factorisations(&self) -> Vec<Factorisation> {
        self.families_within(self.universe)
    }

    /// Disjoint families drawn from the subtrees of `roots`, keeping only
    /// nodes accepted by `ok`.
    fn families_under(&self, roots: &[u64], ok: &dyn Fn(u64) -> bool) -> Vec<Vec<u64>> {
        let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
        for &r in roots {
            let sub = self.subtree_families(r, ok);
            let mut next = Vec::with_capacity(acc.len() * sub.len());
            for a in &acc {
                for s in &sub {
                    let mut v = a.clone();
                    v.extend_from_slice(s);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc
    }

    fn subtree_families(&self, r: u64, ok: &dyn Fn(u64) -> bool) -> Vec<Vec<u64>> {
        let kids = match self.all.iter().position(|&x| x == r) {
            Some(i) => &self.kids[i],
            None => return if ok(r) { vec![Vec::new(), vec![r]] } else { vec![Vec::new()] },
        };
        let mut out = self.families_under(kids, ok);
        if ok(r) {
            out.push(vec![r]);
        }
        out
    }

    /// Factorisation of a union of members per the maximal-representative
    /// construction: the maximal sets among `members`.
    pub fn factor_union(&self, members: &[u64]) -> Result<Factorisation> {
        for &m in members {
            if m != 0 && !self.is_member(m) {
                return Err(HopfError::Invalid(format!("({}) is not a member", fmt_mask(m))));
            }
        }
        Ok(Factorisation::maximal_of(members.iter().copied().filter(|&m| m != 0)))
    }

    /// Every disjoint family of members whose union is exactly `target`.
    pub fn covers_of(&self, target: u64) -> Vec<Factorisation> {
        self.families_within(target).into_iter().filter(|f| f.total() == target).collect()
    }

    /// Quotient of every member by a factorisation: members strictly inside a
    /// collapsed block are dropped, the others are collapsed by the blocks
    /// they contain.
    pub fn quotient_by(&self, by: &Factorisation) -> Result<Vec<NestedSet>> {
        self.check_blocks(by)?;
        let mut out = BTreeSet::new();
        for m in self.members() {
            if by.blocks().iter().any(|&b| m != b && is_subset(m, b)) {
                continue;
            }
            let inside: Vec<NestedSet> =
                by.blocks().iter().filter(|&&b| is_subset(b, m)).map(|&b| mask_set(b)).collect();
            out.insert(quotient_by_family(&mask_set(m), &inside)?);
        }
        Ok(out.into_iter().collect())
    }

    /// Checks that every block of a factorisation is a member.
    pub fn check_blocks(&self, f: &Factorisation) -> Result<()> {
        for &b in f.blocks() {
            if !self.is_member(b) {
                return Err(HopfError::Invalid(format!("({}) is not a forest member", fmt_mask(b))));
            }
        }
        Ok(())
    }

    /// Validates a quotient element against the forest.
    pub fn check_element(&self, x: &QuoElement) -> Result<()> {
        for p in x.pairs() {
            if !self.is_member(p.total) {
                return Err(HopfError::Invalid(format!("({}) is not a forest member", fmt_mask(p.total))));
            }
            for &b in &p.collapsed {
                if !self.is_member(b) {
                    return Err(HopfError::Invalid(format!("({}) is not a forest member", fmt_mask(b))));
                }
            }
        }
        Ok(())
    }

    /// Every quotient element `U ⧸ I` with `I ≤ U` factorisations of the forest.
    pub fn quo_elements(&self) -> Vec<QuoElement> {
        let mut out = BTreeSet::new();
        for u in self.factorisations() {
            for i in self.middles(&Factorisation::empty(), &u) {
                out.insert(QuoElement::from_bounds(&i, &u).expect("bounds are comparable"));
            }
        }
        out.into_iter().collect()
    }

    /// All factorisations `K` with `lower ≤ K ≤ upper`.
    pub fn middles(&self, lower: &Factorisation, upper: &Factorisation) -> Vec<Factorisation> {
        let mut acc: Vec<Vec<u64>> = vec![Vec::new()];
        for &u in upper.blocks() {
            let inner: Vec<u64> = lower.blocks().iter().copied().filter(|&b| is_subset(b, u)).collect();
            // A K-block meeting a lower block must contain it.
            let ok = |k: u64| inner.iter().all(|&b| b & k == 0 || is_subset(b, k));
            let fams: Vec<Vec<u64>> = self
                .families_under(&[u], &ok)
                .into_iter()
                .filter(|fam| inner.iter().all(|&b| fam.iter().any(|&k| is_subset(b, k))))
                .collect();
            let mut next = Vec::with_capacity(acc.len() * fams.len());
            for a in &acc {
                for f in &fams {
                    let mut v = a.clone();
                    v.extend_from_slice(f);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc.into_iter().map(Factorisation::from_disjoint).collect()
    }

    /// Decides whether a set of factorisations is the set generated by a
    /// forest; on success returns that forest (over `universe`, or the union of
    /// all blocks when `None`).
    pub fn recognize(omega: &[Factorisation], universe: Option<u64>) -> std::result::Result<Recognized, String> {
        let set: BTreeSet<&Factorisation> = omega.iter().collect();
        let blocks: BTreeSet<u64> = omega.iter().flat_map(|f| f.blocks().iter().copied()).collect();
        for f in omega {
            for &b in f.blocks() {
                if !set.contains(&Factorisation::from_disjoint(vec![b])) {
                    return Err(format!(
                        "condition 1 violated: block ({}) of {f} has no trivial factorisation",
                        fmt_mask(b)
                    ));
                }
            }
        }
        for a in omega {
            for b in omega {
                let pool: BTreeSet<u64> = a.blocks().iter().chain(b.blocks()).copied().collect();
                let total = a.total() | b.total();
                let ok = omega
                    .iter()
                    .any(|c| c.total() == total && c.blocks().iter().all(|x| pool.contains(x)));
                if !ok {
                    return Err(format!("condition 2 violated for {a} and {b}"));
                }
            }
        }
        let all = blocks.iter().fold(0, |x, &y| x | y);
        let universe = universe.unwrap_or(all);
        if !is_subset(all, universe) {
            return Err("blocks leave the universe".into());
        }
        let bl: Vec<u64> = blocks.iter().copied().collect();
        let forest = Forest::new(universe, &bl, false).map_err(|e| e.to_string())?;
        let mut generated: BTreeSet<Factorisation> = forest.factorisations().into_iter().collect();
        generated.remove(&Factorisation::empty());
        let mut given: BTreeSet<Factorisation> = omega.iter().cloned().collect();
        given.remove(&Factorisation::empty());
        if generated != given {
            return Err("the set is not closed: it differs from the factorisations generated by its blocks".into());
        }
        let mut totals = BTreeMap::new();
        let mut unique = true;
        for f in omega {
            if totals.insert(f.total(), f).is_some() {
                unique = false;
            }
        }
        Ok(Recognized { primary: unique && forest.is_primary(), forest })
    }

    /// A seeded random forest on `n` labels (universe is a member).
    pub fn random<R: Rng>(rng: &mut R, n: u32, max_members: usize) -> Forest {
        let universe = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let mut sets: Vec<u64> = Vec::new();
        let attempts = 4 * max_members + 8;
        for _ in 0..attempts {
            if sets.len() >= max_members {
                break;
            }
            let m: u64 = rng.gen::<u64>() & universe;
            // Bias towards small sets.
            let m = if rng.gen_bool(0.5) { m & rng.gen::<u64>() } else { m };
            if m == 0 || m == universe || sets.contains(&m) {
                continue;
            }
            if sets.iter().all(|&s| s & m == 0 || is_subset(s, m) || is_subset(m, s)) {
                sets.push(m);
            }
        }
        Forest::new(universe, &sets, true).expect("laminar by construction")
    }

    /// A seeded random quotient element of this forest.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> QuoElement {
        let facts = self.factorisations();
        let u = facts.choose(rng).expect("the empty factorisation exists").clone();
        let lows = self.middles(&Factorisation::empty(), &u);
        let i = lows.choose(rng).expect("the empty factorisation is below").clone();
        QuoElement::from_bounds(&i, &u).expect("comparable")
    }
}

/// Result of [`Forest::recognize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recognized {
    /// The reconstructed forest.
    pub forest: Forest,
    /// True if every total has a unique factorisation in the set.
    pub primary: bool,
}

/// Leaves of a mask as a nested set.
pub fn mask_set(m: u64) -> NestedSet {
    NestedSet::from_leaves(labels_of(m))
}

/// A family of pairwise disjoint nonempty member masks, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Factorisation {
    blocks: Vec<u64>,
}

impl Factorisation {
    /// The empty factorisation `(∅,(∅))`.
    pub fn empty() -> Factorisation {
        Factorisation::default()
    }

    /// Builds from blocks, checking disjointness.
    pub fn new(blocks: Vec<u64>) -> Result<Factorisation> {
        let mut seen = 0u64;
        for &b in &blocks {
            if b & seen != 0 {
                return Err(HopfError::Overlap(format!("block ({}) overlaps another block", fmt_mask(b))));
            }
            seen |= b;
        }
        Ok(Factorisation::from_disjoint(blocks))
    }

    fn from_disjoint(mut blocks: Vec<u64>) -> Factorisation {
        blocks.retain(|&b| b != 0);
        blocks.sort_unstable();
        Factorisation { blocks }
    }

    /// Maximal sets among a collection of laminar sets.
    pub fn maximal_of<I: IntoIterator<Item = u64>>(sets: I) -> Factorisation {
        let v: BTreeSet<u64> = sets.into_iter().filter(|&b| b != 0).collect();
        let max: Vec<u64> = v.iter().copied().filter(|&x| !v.iter().any(|&y| y != x && is_subset(x, y))).collect();
        Factorisation::from_disjoint(max)
    }

    /// Blocks in ascending mask order.
    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    /// Union of the blocks.
    pub fn total(&self) -> u64 {
        self.blocks.iter().fold(0, |a, &b| a | b)
    }

    /// True for `(∅,(∅))`.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blockwise inclusion: every block of `self` lies inside a block of `other`.
    pub fn is_below(&self, other: &Factorisation) -> bool {
        self.blocks.iter().all(|&a| other.blocks.iter().any(|&b| is_subset(a, b)))
    }

    /// Least upper bound (blocks of a common forest).
    pub fn join(&self, other: &Factorisation) -> Factorisation {
        Factorisation::maximal_of(self.blocks.iter().chain(other.blocks.iter()).copied())
    }

    /// Blocks of `self` lying inside `region`.
    pub fn restrict(&self, region: u64) -> Factorisation {
        Factorisation::from_disjoint(self.blocks.iter().copied().filter(|&b| is_subset(b, region)).collect())
    }

    /// Minimal members of the forest lying inside the total.
    pub fn minimal_members(&self, forest: &Forest) -> Vec<u64> {
        let t = self.total();
        forest.minimal().into_iter().filter(|&m| is_subset(m, t)).collect()
    }

    /// Parses `((1 2)(3))`.
    pub fn parse(s: &str) -> Result<Factorisation> {
        let mut p = Parser::new(s);
        let fam = p.family()?;
        p.finish()?;
        let blocks = fam
            .iter()
            .map(|b| {
                if !b.is_all_leaves() {
                    return Err(HopfError::WrongDegree(format!("block {b} must consist of labels")));
                }
                mask_of(&b.leaves())
            })
            .collect::<Result<Vec<_>>>()?;
        Factorisation::new(blocks)
    }

    /// Quotient `self ⧸ by`: blocks of `by` outside the total are ignored; a
    /// block that meets a block of `self` without lying inside it is an error.
    pub fn quotient(&self, by: &Factorisation) -> Result<QuoElement> {
        for &c in by.blocks() {
            for &a in &self.blocks {
                if c & a != 0 && !is_subset(c, a) {
                    return Err(HopfError::NotIncluded(format!(
                        "block ({}) straddles block ({})",
                        fmt_mask(c),
                        fmt_mask(a)
                    )));
                }
            }
        }
        QuoElement::from_bounds(&by.restrict(self.total()), self)
    }
}

impl fmt::Display for Factorisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for &b in &self.blocks {
            write!(f, "({})", fmt_mask(b))?;
        }
        f.write_str(")")
    }
}

/// One pair `(U, {I_i})` of a quotient element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuoPair {
    /// The member `U`.
    pub total: u64,
    /// Disjoint members collapsed inside `U`, ascending.
    pub collapsed: Vec<u64>,
}

impl QuoPair {
    fn is_trivial(&self) -> bool {
        self.collapsed.len() == 1 && self.collapsed[0] == self.total
    }
}

/// A quotient element: disjoint pairs `(U_k, {I_i^(k)})`, trivial pairs removed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuoElement {
    pairs: Vec<QuoPair>,
}

impl QuoElement {
    /// The unit (no pairs).
    pub fn unit() -> QuoElement {
        QuoElement::default()
    }

    /// Validates and normalizes a list of pairs.
    pub fn new(pairs: Vec<QuoPair>) -> Result<QuoElement> {
        let mut seen = 0u64;
        let mut out = Vec::with_capacity(pairs.len());
        for mut p in pairs {
            if p.total == 0 {
                return Err(HopfError::Invalid("empty total in a quotient pair".into()));
            }
            if p.total & seen != 0 {
                return Err(HopfError::Overlap(format!("pair ({}) overlaps another pair", fmt_mask(p.total))));
            }
            seen |= p.total;
            let mut inner = 0u64;
            for &b in &p.collapsed {
                if b == 0 || !is_subset(b, p.total) {
                    return Err(HopfError::NotIncluded(format!(
                        "collapsed block ({}) is not inside ({})",
                        fmt_mask(b),
                        fmt_mask(p.total)
                    )));
                }
                if b & inner != 0 {
                    return Err(HopfError::Overlap(format!("collapsed block ({}) overlaps another", fmt_mask(b))));
                }
                inner |= b;
            }
            p.collapsed.sort_unstable();
            if !p.is_trivial() {
                out.push(p);
            }
        }
        out.sort();
        Ok(QuoElement { pairs: out })
    }

    /// The quotient `upper ⧸ lower` of comparable factorisations.
    pub fn from_bounds(lower: &Factorisation, upper: &Factorisation) -> Result<QuoElement> {
        if !lower.is_below(upper) {
            return Err(HopfError::NotIncluded(format!("{lower} is not below {upper}")));
        }
        QuoElement::new(
            upper.blocks().iter().map(|&u| QuoPair { total: u, collapsed: lower.restrict(u).blocks }).collect(),
        )
    }

    /// Pairs in canonical order.
    pub fn pairs(&self) -> &[QuoPair] {
        &self.pairs
    }

    /// True for the unit.
    pub fn is_unit(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Union of the totals.
    pub fn support(&self) -> u64 {
        self.pairs.iter().fold(0, |a, p| a | p.total)
    }

    /// The total factorisation `(U,(U_k))`.
    pub fn upper(&self) -> Factorisation {
        Factorisation::from_disjoint(self.pairs.iter().map(|p| p.total).collect())
    }

    /// The collapsed factorisation `(I,(I_i))`.
    pub fn lower(&self) -> Factorisation {
        Factorisation::from_disjoint(self.pairs.iter().flat_map(|p| p.collapsed.iter().copied()).collect())
    }

    /// Splits into single-pair elements.
    pub fn components(&self) -> Vec<QuoElement> {
        self.pairs.iter().map(|p| QuoElement { pairs: vec![p.clone()] }).collect()
    }

    /// JSON: list of `{"total":[..],"collapsed":[[..],..]}`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.pairs
                .iter()
                .map(|p| {
                    json!({"total": labels_of(p.total),
                           "collapsed": p.collapsed.iter().map(|&b| labels_of(b)).collect::<Vec<_>>()})
                })
                .collect(),
        )
    }
}

impl fmt::Display for QuoElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for p in &self.pairs {
            let inner: Vec<String> = p.collapsed.iter().map(|&b| fmt_mask(b)).collect();
            write!(f, "({}|{})", fmt_mask(p.total), inner.join(","))?;
        }
        f.write_str(")")
    }
}

impl FromStr for QuoElement {
    type Err = HopfError;
    /// Parses `((1 2 3|1 2,3)(4 5|))`.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        p.expect(b'(')?;
        let mut pairs = Vec::new();
        while !p.eat(b')') {
            p.expect(b'(')?;
            let mut total = Vec::new();
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                total.push(p.uint()?);
            }
            p.expect(b'|')?;
            let mut collapsed = Vec::new();
            let mut cur = Vec::new();
            loop {
                match p.peek() {
                    Some(c) if c.is_ascii_digit() => cur.push(p.uint()?),
                    Some(b',') => {
                        p.expect(b',')?;
                        if cur.is_empty() {
                            return Err(HopfError::parse(0, "empty collapsed block"));
                        }
                        collapsed.push(mask_of(&std::mem::take(&mut cur))?);
                    }
                    Some(b')') => {
                        p.expect(b')')?;
                        if !cur.is_empty() {
                            collapsed.push(mask_of(&cur)?);
                        } else if !collapsed.is_empty() {
                            return Err(HopfError::parse(0, "empty collapsed block"));
                        }
                        break;
                    }
                    Some(c) => return Err(HopfError::parse(0, format!("unexpected '{}'", c as char))),
                    None => return Err(HopfError::parse(0, "unterminated pair")),
                }
            }
            pairs.push(QuoPair { total: mask_of(&total)?, collapsed });
        }
        p.finish()?;
        QuoElement::new(pairs)
    }
}

/// Join of quotient elements: `(U ∨ V) ⧸ (I ∨ J)`.
pub fn quo_join(a: &QuoElement, b: &QuoElement) -> Result<QuoElement> {
    QuoElement::from_bounds(&a.lower().join(&b.lower()), &a.upper().join(&b.upper()))
}

/// Inclusion of quotient elements by the two pair conditions: the totals
/// are included, and whenever a total `V_μ` of `a` lies in a total `U_λ` of
/// `b`, the collapsed family of `V_μ` is included in that of `U_λ`.
pub fn quo_includes(a: &QuoElement, b: &QuoElement) -> bool {
    if !a.upper().is_below(&b.upper()) {
        return false;
    }
    a.pairs().iter().all(|pa| {
        b.pairs().iter().filter(|pb| is_subset(pa.total, pb.total)).all(|pb| {
            let fa = Factorisation::from_disjoint(pa.collapsed.clone());
            let fb = Factorisation::from_disjoint(pb.collapsed.clone());
            fa.is_below(&fb)
        })
    })
}

/// Inclusion characterised through bounds: `V ≤ U` and `J ≤ I`.
pub fn quo_includes_by_bounds(a: &QuoElement, b: &QuoElement) -> bool {
    a.upper().is_below(&b.upper()) && a.lower().is_below(&b.lower())
}

/// The coalgebra of quotient elements of a fixed forest.
#[derive(Clone, Debug)]
pub struct ForestCoalgebra {
    /// Underlying forest.
    pub forest: Forest,
}

impl ForestCoalgebra {
    /// Coalgebra of a forest.
    pub fn new(forest: Forest) -> Self {
        ForestCoalgebra { forest }
    }

    /// Nilpotence bound: the number of members inside the total minus the
    /// number inside the collapsed part (every strict step adds a member).
    pub fn nilpotence_bound(&self, x: &QuoElement) -> usize {
        let count = |f: &Factorisation| {
            self.forest.members().into_iter().filter(|&m| f.blocks().iter().any(|&b| is_subset(m, b))).count()
        };
        count(&x.upper()) - count(&x.lower())
    }

    /// Length of the longest strict chain `I = K_0 < … < K_L = U`.
    pub fn longest_chain(&self, x: &QuoElement) -> usize {
        let lower = x.lower();
        let upper = x.upper();
        let mids = self.forest.middles(&lower, &upper);
        // Longest chain from `lower` to each middle; process in a linear
        // extension (sizes of the member-closure grow along chains).
        let weight = |f: &Factorisation| {
            self.forest.members().into_iter().filter(|&m| f.blocks().iter().any(|&b| is_subset(m, b))).count()
        };
        let mut order: Vec<&Factorisation> = mids.iter().collect();
        order.sort_by_key(|f| weight(f));
        let mut best: BTreeMap<&Factorisation, usize> = BTreeMap::new();
        for (i, k) in order.iter().enumerate() {
            let mut v = 0;
            for j in &order[..i] {
                if j.is_below(k) && *j != *k {
                    v = v.max(best[j] + 1);
                }
            }
            best.insert(k, v);
        }
        best.get(&upper).copied().unwrap_or(0)
    }

    /// Checks that every middle factorisation of `a ∨ b` (disjoint supports)
    /// splits into a middle of `a` and a middle of `b`, and conversely.
    pub fn split_check(&self, a: &QuoElement, b: &QuoElement) -> Result<bool> {
        if a.support() & b.support() != 0 {
            return Err(HopfError::UndefinedProduct("supports are not disjoint".into()));
        }
        let ab = quo_join(a, b)?;
        let joint: BTreeSet<Factorisation> = self.forest.middles(&ab.lower(), &ab.upper()).into_iter().collect();
        let ma = self.forest.middles(&a.lower(), &a.upper());
        let mb = self.forest.middles(&b.lower(), &b.upper());
        let mut glued = BTreeSet::new();
        for ka in &ma {
            for kb in &mb {
                glued.insert(ka.join(kb));
            }
        }
        let parts_ok = joint.iter().all(|k| {
            let ka = k.restrict(a.support());
            let kb = k.restrict(b.support());
            ka.join(&kb) == *k && ma.contains(&ka) && mb.contains(&kb)
        });
        Ok(parts_ok && glued == joint)
    }
}

impl Coalgebra for ForestCoalgebra {
    type Basis = QuoElement;

    fn unit(&self) -> QuoElement {
        QuoElement::unit()
    }

    fn coproduct(&self, x: &QuoElement) -> LinComb<(QuoElement, QuoElement)> {
        let lower = x.lower();
        let upper = x.upper();
        let mut out = LinComb::zero();
        for k in self.forest.middles(&lower, &upper) {
            let left = QuoElement::from_bounds(&lower, &k).expect("lower ≤ middle");
            let right = QuoElement::from_bounds(&k, &upper).expect("middle ≤ upper");
            out.add_term((left, right), Q::one());
        }
        out
    }
}

/// A commutative monomial of connected quotient elements (single pairs).
/// Disjoint-support joins are exactly products of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ForestMonomial(pub Vec<QuoPair>);

impl ForestMonomial {
    /// Monomial of an element: its pairs.
    pub fn of(x: &QuoElement) -> ForestMonomial {
        ForestMonomial(x.pairs().to_vec())
    }

    /// Product of monomials (multiset union).
    pub fn times(&self, other: &ForestMonomial) -> ForestMonomial {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        v.sort();
        ForestMonomial(v)
    }
}

impl fmt::Display for ForestMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> =
            self.0.iter().map(|p| QuoElement { pairs: vec![p.clone()] }.to_string()).collect();
        f.write_str(&parts.join("·"))
    }
}

/// Hopf algebra: the free commutative algebra on connected quotient
/// elements with the forest coproduct extended multiplicatively.  A
/// disjoint-support join is the product of the corresponding monomials.
#[derive(Clone, Debug)]
pub struct ForestHopf {
    /// Underlying coalgebra.
    pub coalgebra: ForestCoalgebra,
}

impl ForestHopf {
    /// Hopf algebra of a forest.
    pub fn new(forest: Forest) -> Self {
        ForestHopf { coalgebra: ForestCoalgebra::new(forest) }
    }
}

impl Coalgebra for ForestHopf {
    type Basis = ForestMonomial;

    fn unit(&self) -> ForestMonomial {
        ForestMonomial::default()
    }

    fn coproduct(&self, m: &ForestMonomial) -> LinComb<(ForestMonomial, ForestMonomial)> {
        let mut acc: LinComb<(ForestMonomial, ForestMonomial)> =
            LinComb::basis((ForestMonomial::default(), ForestMonomial::default()));
        for p in &m.0 {
            let x = QuoElement { pairs: vec![p.clone()] };
            let dx = self.coalgebra.coproduct(&x);
            let mut next = LinComb::zero();
            for ((l, r), c) in acc.iter() {
                for ((a, b), e) in dx.iter() {
                    let key = (l.times(&ForestMonomial::of(a)), r.times(&ForestMonomial::of(b)));
                    next.add_term(key, c * e);
                }
            }
            acc = next;
        }
        acc
    }
}

impl Bialgebra for ForestHopf {
    fn product(&self, a: &ForestMonomial, b: &ForestMonomial) -> Result<ForestMonomial> {
        Ok(a.times(b))
    }
}

/// Enumerates every laminar family of nonempty proper subsets of an
/// `n`-element universe with at most `max_members` members, calling `f` on
/// each (as a forest whose universe is a member).
pub fn for_each_forest<F: FnMut(&Forest)>(n: u32, max_members: usize, mut f: F) {
    let universe: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let candidates: Vec<u64> = (1..universe).collect();
    let mut chosen: Vec<u64> = Vec::new();
    fn rec<F: FnMut(&Forest)>(
        cands: &[u64],
        start: usize,
        chosen: &mut Vec<u64>,
        max: usize,
        universe: u64,
        f: &mut F,
    ) {
        let forest = Forest::build(universe, sorted(chosen), true);
        f(&forest);
        if chosen.len() == max {
            return;
        }
        for i in start..cands.len() {
            let m = cands[i];
            if chosen.iter().all(|&s| s & m == 0 || is_subset(s, m) || is_subset(m, s)) {
                chosen.push(m);
                rec(cands, i + 1, chosen, max, universe, f);
                chosen.pop();
            }
        }
    }
    fn sorted(v: &[u64]) -> Vec<u64> {
        let mut v = v.to_vec();
        v.sort_unstable();
        v
    }
    if n == 0 {
        f(&Forest::build(0, Vec::new(), false));
        return;
    }
    rec(&candidates, 0, &mut chosen, max_members, universe, &mut f);
}

impl Forest {
    /// Isomorphism-invariant key: the nested shape of the member tree, each
    /// node recording how many of its points lie in no child.
    pub fn shape_key(&self) -> String {
        fn enc(f: &Forest, m: u64, kids: &[u64]) -> String {
            let covered: u32 = kids.iter().map(|k| k.count_ones()).sum();
            let mut parts: Vec<String> = kids.iter().map(|&k| enc(f, k, &f.children(k))).collect();
            parts.sort();
            format!("({}{})", m.count_ones() - covered, parts.concat())
        }
        let roots: Vec<u64> = self.roots().into_iter().filter(|&r| r != self.universe).collect();
        let top = if self.universe_is_member { self.children(self.universe) } else { roots };
        format!("{}{}", if self.universe_is_member { "U" } else { "u" }, enc(self, self.universe, &top))
    }
}

/// One representative per isomorphism class of the forests produced by
/// [`for_each_forest`].  Every coproduct identity is invariant under
/// relabelling, so checking representatives is equivalent to checking all.
pub fn forest_shapes(n: u32, max_members: usize) -> Vec<Forest> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for_each_forest(n, max_members, |f| {
        if seen.insert(f.shape_key()) {
            out.push(f.clone());
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::check_coassoc;

    fn forest(universe: &[u32], sets: &[&[u32]], uim: bool) -> Result<Forest> {
        Forest::from_spec(&ForestSpec {
            universe: universe.to_vec(),
            sets: sets.iter().map(|s| s.to_vec()).collect(),
            universe_is_member: uim,
        })
    }

    fn m(labels: &[u32]) -> u64 {
        mask_of(labels).unwrap()
    }

    #[test]
    fn validation_examples() {
        let f = forest(&[1, 2, 3], &[&[], &[1], &[2], &[1, 2, 3]], true).unwrap();
        assert!(f.is_primary());
        assert!(forest(&[1, 2, 3], &[&[1, 2], &[2, 3]], false).is_err());
        let g = forest(&[1, 2], &[&[], &[1], &[2], &[1, 2]], true).unwrap();
        assert!(!g.is_primary());
        let r = g.primary_reduce();
        assert!(r.is_primary());
        assert_eq!(r.members(), vec![m(&[1]), m(&[2])]);
        assert_eq!(r.factorisations(), g.factorisations().into_iter().filter(|x| x.blocks() != [m(&[1, 2])]).collect::<Vec<_>>());
    }

    #[test]
    fn chain_forest_strata() {
        let f = forest(&[1, 2, 3, 4], &[&[], &[1], &[1, 2], &[1, 2, 3]], false).unwrap();
        assert_eq!(f.primary_reduce(), f);
        let s = f.stratify();
        assert_eq!(s.levels, vec![vec![vec![1, 2, 3]], vec![vec![1, 2]], vec![vec![1]]]);
        assert_eq!(s.minimal, vec![vec![1]]);
        assert_eq!(f.depth(), 3);
    }

    #[test]
    fn two_maximal_sets_are_level_one() {
        let f = forest(&[1, 2, 3, 4], &[&[1, 2], &[3, 4], &[1]], true).unwrap();
        assert_eq!(f.stratify().levels[0], vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn factor_union_examples() {
        let f = forest(&[1, 2, 3, 4, 5], &[&[1], &[1, 2, 3], &[4, 5]], true).unwrap();
        assert_eq!(f.factor_union(&[m(&[1]), m(&[1, 2, 3])]).unwrap().blocks(), &[m(&[1, 2, 3])]);
        let fu = f.factor_union(&[m(&[1]), m(&[4, 5])]).unwrap();
        assert_eq!(fu.blocks(), &[m(&[1]), m(&[4, 5])]);
        assert_eq!(f.covers_of(fu.total()), vec![fu]);
    }

    #[test]
    fn join_is_least_upper_bound() {
        let f = forest(&[0, 1, 2, 3, 4, 5], &[&[0], &[1], &[0, 1, 2], &[3, 4], &[3]], true).unwrap();
        let all = f.factorisations();
        for a in &all {
            for b in &all {
                let j = a.join(b);
                assert!(a.is_below(&j) && b.is_below(&j));
                for c in &all {
                    if a.is_below(c) && b.is_below(c) {
                        assert!(j.is_below(c));
                    }
                }
            }
        }
    }

    #[test]
    fn quo_element_text() {
        let x: QuoElement = "((1 2 3|1 2,3)(4 5|))".parse().unwrap();
        assert_eq!(x.to_string(), "((1 2 3|1 2,3)(4 5|))");
        assert_eq!(x.pairs().len(), 2);
        let y: QuoElement = x.to_string().parse().unwrap();
        assert_eq!(x, y);
        let t: QuoElement = "((1 2|1 2))".parse().unwrap();
        assert!(t.is_unit());
    }

    #[test]
    fn coproduct_examples() {
        let f = forest(&[1, 2], &[&[1], &[1, 2]], false).unwrap();
        let ctx = ForestCoalgebra::new(f);
        let min: QuoElement = "((1|))".parse().unwrap();
        assert!(ctx.reduced_coproduct(&min).is_zero());
        let top: QuoElement = "((1 2|))".parse().unwrap();
        let d = ctx.reduced_coproduct(&top);
        assert_eq!(d.len(), 1);
        assert_eq!(d.coeff(&(min, "((1 2|1))".parse().unwrap())), Q::one());
        // A depth-3 chain below the universe: three strict middle factorisations.
        let g = forest(&[1, 2, 3, 4], &[&[1], &[1, 2], &[1, 2, 3]], true).unwrap();
        assert_eq!(g.depth(), 3);
        let ctx = ForestCoalgebra::new(g);
        let x: QuoElement = "((1 2 3 4|))".parse().unwrap();
        assert_eq!(ctx.reduced_coproduct(&x).len(), 3);
        assert!(check_coassoc(&ctx, &x).is_none());
    }

    #[test]
    fn nilpotence_index_can_exceed_member_depth() {
        // U with two disjoint minimal members: chain ∅ < (a) < (a)(b) < (U).
        let f = forest(&[1, 2, 3], &[&[1], &[2]], true).unwrap();
        let ctx = ForestCoalgebra::new(f.clone());
        let x: QuoElement = "((1 2 3|))".parse().unwrap();
        let idx = crate::hopf::nilpotence_index(&ctx, &x, 10).unwrap();
        assert_eq!(idx, 3);
        assert_eq!(ctx.longest_chain(&x), 3);
        assert!(idx <= ctx.nilpotence_bound(&x));
        assert_eq!(f.depth(), 1);
    }

    #[test]
    fn recognize_examples() {
        let f = forest(&[1, 2, 3, 4], &[&[1], &[2], &[1, 2, 3]], false).unwrap();
        let omega = f.factorisations();
        let r = Forest::recognize(&omega, Some(f.universe())).unwrap();
        assert_eq!(r.forest, f);
        assert!(r.primary);
        let mut missing = omega.clone();
        missing.retain(|x| x.blocks() != [m(&[2])]);
        let err = Forest::recognize(&missing, None).unwrap_err();
        assert!(err.contains("condition 1"), "{err}");
        let r = Forest::recognize(&[Factorisation::empty()], Some(m(&[1, 2]))).unwrap();
        assert!(r.forest.members().is_empty());
    }

    #[test]
    fn quotient_fact_examples() {
        let f = forest(&[1, 2, 3], &[&[1], &[1, 2, 3]], false).unwrap();
        let u = Factorisation::new(vec![m(&[1, 2, 3])]).unwrap();
        let i = Factorisation::new(vec![m(&[1])]).unwrap();
        let q = u.quotient(&i).unwrap();
        assert_eq!(q.to_string(), "((1 2 3|1))");
        let far = Factorisation::new(vec![m(&[5])]).unwrap();
        assert_eq!(u.quotient(&far).unwrap(), QuoElement::from_bounds(&Factorisation::empty(), &u).unwrap());
        let big = Factorisation::new(vec![m(&[1, 2, 3, 4])]).unwrap();
        assert!(i.quotient(&big).is_err());
        let qs = f.quotient_by(&i).unwrap();
        assert!(qs.contains(&"(2 3 {1})".parse().unwrap()));
    }

    #[test]
    fn split_check_small() {
        let f = forest(&[1, 2, 3, 4], &[&[1], &[1, 2], &[3], &[3, 4]], false).unwrap();
        let ctx = ForestCoalgebra::new(f);
        let a: QuoElement = "((1 2|))".parse().unwrap();
        let b: QuoElement = "((3 4|3))".parse().unwrap();
        assert!(ctx.split_check(&a, &b).unwrap());
    }

    #[test]
    fn forest_enumeration_counts() {
        let mut c = 0;
        for_each_forest(3, 10, |_| c += 1);
        // Laminar families of proper nonempty subsets of a 3-set.
        assert_eq!(c, 32);
        // Shapes on 3 points: no sets, one singleton, two, three singletons,
        // one pair, pair + inner singleton, pair + outer singleton, pair + both
        // inner singletons, pair + inner + outer, pair + all three singletons.
        assert_eq!(forest_shapes(3, 10).len(), 10);
    }
}
