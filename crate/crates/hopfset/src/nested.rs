//! Hereditary finite sets over integer leaf labels and the collapsing calculus.
//!
//! A [`NestedSet`] is a canonically ordered, duplicate-free collection of
//! [`Atom`]s.  An atom is either a leaf label or an *ideal*, i.e. a nested set
//! that has been collapsed into a single element.  Collapsing `I` inside `U`
//! produces `(U \ I) ∪ {U ∩ I}`; an empty ideal is never stored, so collapsing
//! by a disjoint set is the identity.
//!
//! Families of blocks with pairwise disjoint supports are represented by
//! [`BlockFamily`]; they are stored sorted so that quotients by a family are
//! independent of the order in which its blocks were listed.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{HopfError, Result};

/// A single element of a nested set: a leaf label or a collapsed ideal.
///
/// The derived order puts every leaf before every ideal, leaves ascending by
/// label and ideals by the lexicographic order of their atom lists.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// A bare element of the underlying universe.
    Leaf(u32),
    /// A collapsed subset, itself a nested set (never empty).
    Ideal(NestedSet),
}

impl Atom {
    /// Power degree: 0 for a leaf, `1 + max degree of contents` for an ideal.
    pub fn degree(&self) -> usize {
        match self {
            Atom::Leaf(_) => 0,
            Atom::Ideal(s) => 1 + s.atoms.iter().map(Atom::degree).max().unwrap_or(0),
        }
    }

    /// Set of leaf labels reachable from this atom.
    pub fn support(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_support(&mut out);
        out
    }

    fn collect_support(&self, out: &mut BTreeSet<u32>) {
        match self {
            Atom::Leaf(l) => {
                out.insert(*l);
            }
            Atom::Ideal(s) => s.atoms.iter().for_each(|a| a.collect_support(out)),
        }
    }

    /// True for leaf atoms.
    pub fn is_leaf(&self) -> bool {
        matches!(self, Atom::Leaf(_))
    }

    /// Ideal atom whose contents are the given leaves.
    pub fn ideal_of_leaves<I: IntoIterator<Item = u32>>(leaves: I) -> Atom {
        Atom::Ideal(NestedSet::from_leaves(leaves))
    }

    /// JSON form: a number for a leaf, `{"set":[...]}` for an ideal.
    pub fn to_json(&self) -> Value {
        match self {
            Atom::Leaf(l) => json!(l),
            Atom::Ideal(s) => s.to_json(),
        }
    }

    /// Parses the JSON form of [`Atom::to_json`].
    pub fn from_json(v: &Value) -> Result<Atom> {
        match v {
            Value::Number(n) => n
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .map(Atom::Leaf)
                .ok_or_else(|| HopfError::parse(0, format!("bad leaf label {n}"))),
            Value::Object(_) => Ok(Atom::Ideal(NestedSet::from_json(v)?)),
            other => Err(HopfError::parse(0, format!("unexpected JSON atom {other}"))),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Leaf(l) => write!(f, "{l}"),
            Atom::Ideal(s) => {
                f.write_str("{")?;
                s.write_atoms(f)?;
                f.write_str("}")
            }
        }
    }
}

/// A canonically ordered, duplicate-free finite set of atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NestedSet {
    atoms: Vec<Atom>,
}

impl NestedSet {
    /// Builds a canonical nested set: sorts, removes duplicates and drops
    /// empty ideals.
    pub fn new<I: IntoIterator<Item = Atom>>(atoms: I) -> NestedSet {
        let mut atoms: Vec<Atom> = atoms
            .into_iter()
            .filter(|a| !matches!(a, Atom::Ideal(s) if s.is_empty()))
            .collect();
        atoms.sort();
        atoms.dedup();
        NestedSet { atoms }
    }

    /// The empty set.
    pub fn empty() -> NestedSet {
        NestedSet::default()
    }

    /// A set consisting of leaves only.
    pub fn from_leaves<I: IntoIterator<Item = u32>>(leaves: I) -> NestedSet {
        NestedSet::new(leaves.into_iter().map(Atom::Leaf))
    }

    /// Atoms in canonical order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    /// True if there are no atoms.
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Membership test for an atom.
    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.binary_search(a).is_ok()
    }

    /// Atom-level inclusion.
    pub fn is_subset(&self, other: &NestedSet) -> bool {
        self.atoms.iter().all(|a| other.contains(a))
    }

    /// Atom-level union.
    pub fn union(&self, other: &NestedSet) -> NestedSet {
        NestedSet::new(self.atoms.iter().chain(other.atoms.iter()).cloned())
    }

    /// Atom-level intersection.
    pub fn intersection(&self, other: &NestedSet) -> NestedSet {
        NestedSet { atoms: self.atoms.iter().filter(|a| other.contains(a)).cloned().collect() }
    }

    /// Atom-level difference `self \ other`.
    pub fn difference(&self, other: &NestedSet) -> NestedSet {
        NestedSet { atoms: self.atoms.iter().filter(|a| !other.contains(a)).cloned().collect() }
    }

    /// Union of the supports of all atoms.
    pub fn support(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.atoms.iter().for_each(|a| a.collect_support(&mut out));
        out
    }

    /// Maximal power degree of an atom (0 for an empty or all-leaf set).
    pub fn max_atom_degree(&self) -> usize {
        self.atoms.iter().map(Atom::degree).max().unwrap_or(0)
    }

    /// Leaf labels in ascending order.
    pub fn leaves(&self) -> Vec<u32> {
        self.atoms
            .iter()
            .filter_map(|a| match a {
                Atom::Leaf(l) => Some(*l),
                Atom::Ideal(_) => None,
            })
            .collect()
    }

    /// Ideal atoms in canonical order.
    pub fn ideals(&self) -> Vec<&NestedSet> {
        self.atoms
            .iter()
            .filter_map(|a| match a {
                Atom::Ideal(s) => Some(s),
                Atom::Leaf(_) => None,
            })
            .collect()
    }

    /// True if every atom is a leaf.
    pub fn is_all_leaves(&self) -> bool {
        self.atoms.iter().all(Atom::is_leaf)
    }

    /// True if the supports of distinct atoms are pairwise disjoint.
    pub fn has_disjoint_atoms(&self) -> bool {
        let mut seen = BTreeSet::new();
        for a in &self.atoms {
            for l in a.support() {
                if !seen.insert(l) {
                    return false;
                }
            }
        }
        true
    }

    /// True for a once-collapsed state: leaves plus all-leaf ideals, with
    /// pairwise disjoint supports.
    pub fn is_xi_state(&self) -> bool {
        self.atoms.iter().all(|a| a.degree() <= 1) && self.has_disjoint_atoms()
    }

    /// Canonical JSON mirror, e.g. `{"set":[0,1,{"set":[2,3]}]}`.
    pub fn to_json(&self) -> Value {
        json!({ "set": self.atoms.iter().map(Atom::to_json).collect::<Vec<_>>() })
    }

    /// Parses the JSON mirror produced by [`NestedSet::to_json`].
    pub fn from_json(v: &Value) -> Result<NestedSet> {
        let arr = v
            .get("set")
            .and_then(Value::as_array)
            .ok_or_else(|| HopfError::parse(0, "expected an object with a \"set\" array"))?;
        Ok(NestedSet::new(arr.iter().map(Atom::from_json).collect::<Result<Vec<_>>>()?))
    }

    fn write_atoms(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for NestedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        self.write_atoms(f)?;
        f.write_str(")")
    }
}

impl FromStr for NestedSet {
    type Err = HopfError;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let set = p.nset()?;
        p.finish()?;
        Ok(set)
    }
}

impl Serialize for NestedSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NestedSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        NestedSet::from_json(&v).map_err(D::Error::custom)
    }
}

/// A canonical family of nonempty blocks with pairwise disjoint supports.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockFamily {
    blocks: Vec<NestedSet>,
}

/// Shape classification of a block family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Every block consists of leaves only (a partition in the universe).
    Partition,
    /// Blocks mix leaves and all-leaf ideals (a family of once-collapsed states).
    XiFamily,
    /// Some block contains deeper nesting or non-disjoint atoms.
    Other,
}

impl BlockFamily {
    /// Builds a canonical family, rejecting empty blocks and overlapping supports.
    pub fn new<I: IntoIterator<Item = NestedSet>>(blocks: I) -> Result<BlockFamily> {
        let mut blocks: Vec<NestedSet> = blocks.into_iter().collect();
        if blocks.iter().any(NestedSet::is_empty) {
            return Err(HopfError::Invalid("empty block in family".into()));
        }
        let mut seen = BTreeSet::new();
        for b in &blocks {
            for l in b.support() {
                if !seen.insert(l) {
                    return Err(HopfError::Overlap(format!("label {l} occurs in two blocks")));
                }
            }
        }
        blocks.sort();
        Ok(BlockFamily { blocks })
    }

    /// The empty family.
    pub fn empty() -> BlockFamily {
        BlockFamily::default()
    }

    /// Blocks in canonical order.
    pub fn blocks(&self) -> &[NestedSet] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// True for the empty family.
    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of the supports of all blocks.
    pub fn support(&self) -> BTreeSet<u32> {
        self.blocks.iter().flat_map(NestedSet::support).collect()
    }

    /// Total number of atoms over all blocks.
    pub fn atom_count(&self) -> usize {
        self.blocks.iter().map(NestedSet::len).sum()
    }

    /// Classifies the family's shape.
    pub fn classify(&self) -> FamilyKind {
        if self.blocks.iter().all(NestedSet::is_all_leaves) {
            FamilyKind::Partition
        } else if self.blocks.iter().all(NestedSet::is_xi_state) {
            FamilyKind::XiFamily
        } else {
            FamilyKind::Other
        }
    }

    /// JSON: a list of nested-set mirrors.
    pub fn to_json(&self) -> Value {
        Value::Array(self.blocks.iter().map(NestedSet::to_json).collect())
    }

    /// Parses the JSON produced by [`BlockFamily::to_json`].
    pub fn from_json(v: &Value) -> Result<BlockFamily> {
        let arr = v.as_array().ok_or_else(|| HopfError::parse(0, "expected a JSON array of sets"))?;
        BlockFamily::new(arr.iter().map(NestedSet::from_json).collect::<Result<Vec<_>>>()?)
    }
}

impl fmt::Display for BlockFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for b in &self.blocks {
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for BlockFamily {
    type Err = HopfError;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser::new(s);
        let blocks = p.family()?;
        p.finish()?;
        BlockFamily::new(blocks)
    }
}

impl Serialize for BlockFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlockFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        BlockFamily::from_json(&v).map_err(D::Error::custom)
    }
}

/// Recursive-descent parser for the textual set grammar.
pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(s: &'a str) -> Self {
        Parser { src: s.as_bytes(), pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    /// Byte after the next non-whitespace byte, skipping whitespace.
    pub(crate) fn peek2(&mut self) -> Option<u8> {
        self.skip_ws();
        let mut i = self.pos + 1;
        while i < self.src.len() && (self.src[i] as char).is_whitespace() {
            i += 1;
        }
        self.src.get(i).copied()
    }

    pub(crate) fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(HopfError::parse(self.pos, format!("expected '{}', found '{}'", c as char, x as char))),
            None => Err(HopfError::parse(self.pos, format!("expected '{}', found end of input", c as char))),
        }
    }

    pub(crate) fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(x) => Err(HopfError::parse(self.pos, format!("trailing input starting with '{}'", x as char))),
        }
    }

    pub(crate) fn uint(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(HopfError::parse(start, "expected an unsigned integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HopfError::parse(start, "integer out of range"))
    }

    fn atoms_until(&mut self, close: u8) -> Result<Vec<Atom>> {
        let mut atoms = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c == close => {
                    self.pos += 1;
                    return Ok(atoms);
                }
                Some(b'{') => {
                    self.pos += 1;
                    let inner = self.atoms_until(b'}')?;
                    atoms.push(Atom::Ideal(NestedSet::new(inner)));
                }
                Some(c) if c.is_ascii_digit() => atoms.push(Atom::Leaf(self.uint()?)),
                Some(c) => return Err(HopfError::parse(self.pos, format!("unexpected '{}'", c as char))),
                None => return Err(HopfError::parse(self.pos, format!("missing '{}'", close as char))),
            }
        }
    }

    /// `NSET := '(' ATOM* ')'`.
    pub(crate) fn nset(&mut self) -> Result<NestedSet> {
        self.expect(b'(')?;
        Ok(NestedSet::new(self.atoms_until(b')')?))
    }

    /// `FAMILY := '(' NSET* ')'`.
    pub(crate) fn family(&mut self) -> Result<Vec<NestedSet>> {
        self.expect(b'(')?;
        let mut blocks = Vec::new();
        while !self.eat(b')') {
            if self.peek().is_none() {
                return Err(HopfError::parse(self.pos, "missing ')'"));
            }
            blocks.push(self.nset()?);
        }
        Ok(blocks)
    }
}

/// Parses a once-collapsed pair written `(U|{I1 I2 ...})`, e.g.
/// `((3)|{(1 2)})`, into the state `U ∪ {I1, I2, ...}`.  A bare nested set such
/// as `(3 {1 2})` is accepted as well.
pub fn parse_xi_pair(s: &str) -> Result<NestedSet> {
    let mut p = Parser::new(s);
    if p.peek() == Some(b'(') && p.peek2() == Some(b'(') {
        p.expect(b'(')?;
        let u = p.nset()?;
        p.expect(b'|')?;
        p.expect(b'{')?;
        let mut blocks = Vec::new();
        while !p.eat(b'}') {
            if p.peek().is_none() {
                return Err(HopfError::parse(p.pos, "missing '}'"));
            }
            blocks.push(p.nset()?);
        }
        p.expect(b')')?;
        p.finish()?;
        let fam = BlockFamily::new(blocks)?;
        let state = NestedSet::new(
            u.atoms().iter().cloned().chain(fam.blocks().iter().cloned().map(Atom::Ideal)),
        );
        if !state.has_disjoint_atoms() {
            return Err(HopfError::Overlap(format!("state {state} has overlapping atoms")));
        }
        Ok(state)
    } else {
        let set: NestedSet = s.parse()?;
        if !set.has_disjoint_atoms() {
            return Err(HopfError::Overlap(format!("state {set} has overlapping atoms")));
        }
        Ok(set)
    }
}

/// Collapses `I` inside `U`: `(U \ I) ∪ {U ∩ I}` (an empty ideal is dropped).
pub fn quotient(u: &NestedSet, i: &NestedSet) -> NestedSet {
    let inter = u.intersection(i);
    let mut atoms = u.difference(i).atoms;
    atoms.push(Atom::Ideal(inter));
    NestedSet::new(atoms)
}

/// Reduces a general sequence of blocks to disjoint blocks by removing from
/// each block everything covered by earlier blocks.
///
/// Fails with [`HopfError::Degenerate`] when some block is entirely covered
/// by the union of the *other* blocks, since it would then vanish.
pub fn reduce_sequence(blocks: &[NestedSet]) -> Result<Vec<NestedSet>> {
    for (i, b) in blocks.iter().enumerate() {
        let others = NestedSet::new(
            blocks.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, x)| x.atoms().to_vec()),
        );
        if b.is_subset(&others) {
            return Err(HopfError::Degenerate(format!("block {b} is covered by the other blocks")));
        }
    }
    let mut covered = NestedSet::empty();
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        out.push(b.difference(&covered));
        covered = covered.union(b);
    }
    Ok(out)
}

/// Collapses every block of a sequence inside `U`:
/// `(U \ ⋃I_i) ∪ {I_i ∩ U : I_i ∩ U ≠ ∅}`.
///
/// Overlapping blocks are first reduced with [`reduce_sequence`].
pub fn quotient_by_family(u: &NestedSet, blocks: &[NestedSet]) -> Result<NestedSet> {
    let blocks = reduce_sequence(blocks)?;
    let all = NestedSet::new(blocks.iter().flat_map(|b| b.atoms().to_vec()));
    let mut atoms = u.difference(&all).atoms;
    atoms.extend(blocks.iter().map(|b| Atom::Ideal(u.intersection(b))));
    Ok(NestedSet::new(atoms))
}

/// Opens every ideal atom one level: leaves are kept, each ideal is replaced
/// by its contents.
fn open_one_level(x: &NestedSet) -> NestedSet {
    NestedSet::new(x.atoms().iter().flat_map(|a| match a {
        Atom::Leaf(_) => vec![a.clone()],
        Atom::Ideal(s) => s.atoms().to_vec(),
    }))
}

/// One-level reversion: every ideal atom (of degree ≤ 1) is opened into its
/// leaves, so `({1 2} {3})` becomes `(1 2 3)`.
pub fn reversion(x: &NestedSet) -> Result<NestedSet> {
    if let Some(a) = x.atoms().iter().find(|a| a.degree() > 1) {
        return Err(HopfError::WrongDegree(format!("atom {a} has degree {} > 1", a.degree())));
    }
    Ok(open_one_level(x))
}

/// Reversion of a family: the union of its blocks.
pub fn reversion_family(f: &BlockFamily) -> NestedSet {
    NestedSet::new(f.blocks().iter().flat_map(|b| b.atoms().to_vec()))
}

/// Mixed reversion of a block `I ∪ J`: leaves stay and every ideal atom (of
/// degree ≤ 2) is opened one level, so `(1 {{2 3}})` becomes `(1 {2 3})`.
pub fn reversion_mixed(x: &NestedSet) -> Result<NestedSet> {
    if let Some(a) = x.atoms().iter().find(|a| a.degree() > 2) {
        return Err(HopfError::WrongDegree(format!("atom {a} has degree {} > 2", a.degree())));
    }
    Ok(open_one_level(x))
}

/// Mixed reversion applied blockwise to a family.
pub fn reversion_mixed_family(f: &BlockFamily) -> Result<BlockFamily> {
    BlockFamily::new(f.blocks().iter().map(reversion_mixed).collect::<Result<Vec<_>>>()?)
}

/// Splits a state into its original part (leaves) and ideal part (ideals).
pub fn split_parts(x: &NestedSet) -> (NestedSet, NestedSet) {
    let (leaves, ideals): (Vec<Atom>, Vec<Atom>) = x.atoms().iter().cloned().partition(Atom::is_leaf);
    (NestedSet::new(leaves), NestedSet::new(ideals))
}

/// The unique `V = U ∪ ⋃F` whose quotient by `F` is `U ∪ {F_i}`.
pub fn molecule(u: &NestedSet, ideals: &BlockFamily) -> Result<NestedSet> {
    if !u.is_all_leaves() || ideals.classify() != FamilyKind::Partition {
        return Err(HopfError::WrongDegree("molecule expects leaves only".into()));
    }
    let us = u.support();
    if let Some(l) = ideals.support().intersection(&us).next() {
        return Err(HopfError::Overlap(format!("label {l} is both original and collapsed")));
    }
    Ok(u.union(&reversion_family(ideals)))
}

/// Induced quotient of a twice-collapsed state: every ideal atom of degree 2
/// has its inner ideals opened, e.g. `(4 {3 {1 2}})` becomes `(4 {1 2 3})`.
pub fn induced_quotient(state: &NestedSet) -> Result<NestedSet> {
    let atoms = state
        .atoms()
        .iter()
        .map(|a| match a {
            Atom::Leaf(_) => Ok(a.clone()),
            Atom::Ideal(s) => match a.degree() {
                1 => Ok(a.clone()),
                2 => Ok(Atom::Ideal(open_one_level(s))),
                d => Err(HopfError::WrongDegree(format!("atom {a} has degree {d} > 2"))),
            },
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NestedSet::new(atoms))
}

/// Quotient of a family by a finer family: each block of `big` is collapsed
/// by the blocks of `small` lying inside it (optionally followed by the
/// induced quotient).
pub fn quotient_family_by_family(big: &BlockFamily, small: &BlockFamily, ind: bool) -> Result<BlockFamily> {
    let mut used = vec![false; small.len()];
    let mut out = Vec::with_capacity(big.len());
    for b in big.blocks() {
        let bs = b.support();
        let mut inside = Vec::new();
        for (k, s) in small.blocks().iter().enumerate() {
            let ss = s.support();
            if ss.is_disjoint(&bs) {
                continue;
            }
            if !s.is_subset(b) {
                return Err(HopfError::NotIncluded(format!("block {s} is not contained in block {b}")));
            }
            used[k] = true;
            inside.push(s.clone());
        }
        let q = quotient_by_family(b, &inside)?;
        out.push(if ind { induced_quotient(&q)? } else { q });
    }
    if let Some(k) = used.iter().position(|u| !u) {
        return Err(HopfError::NotIncluded(format!("block {} lies in no block of {big}", small.blocks()[k])));
    }
    BlockFamily::new(out)
}

/// Pairwise atom-level intersections of the blocks of `a` and `b`, empty
/// intersections dropped.
pub fn family_joint(a: &BlockFamily, b: &BlockFamily) -> BlockFamily {
    let blocks = a
        .blocks()
        .iter()
        .flat_map(|x| b.blocks().iter().map(move |y| x.intersection(y)))
        .filter(|s| !s.is_empty());
    BlockFamily::new(blocks).expect("intersections of disjoint blocks are disjoint")
}

/// Concatenation of two families with disjoint supports.
pub fn family_union(a: &BlockFamily, b: &BlockFamily) -> Result<BlockFamily> {
    BlockFamily::new(a.blocks().iter().chain(b.blocks()).cloned())
}

/// True iff every block of `a` is contained in some block of `b`.
pub fn family_includes(a: &BlockFamily, b: &BlockFamily) -> bool {
    a.blocks().iter().all(|x| b.blocks().iter().any(|y| x.is_subset(y)))
}
