//! Zero-diagonal matrices, collapsing, the matrix coproduct and permutation
//! classes.
//!
//! A [`ZeroDiagMatrix`] carries exact entries and one [`Atom`] label per
//! index.  Collapsing a set of indices `I` replaces them by a single ideal
//! index whose row (column) is the sum of the collapsed rows (columns); the
//! ideal label records the flat leaf-set of the collapsed labels.  Ideal
//! labels always occupy the leading rows and columns.
//!
//! The coalgebra lives on permutation classes ([`MatClass`]).  Indices whose
//! row and column vanish are stripped (so the zero matrix and every order-1
//! matrix are identified with the empty matrix `∅`, the unit), and
//!
//! `ΔM = Σ_P M_P ⊗ M⧸P`
//!
//! runs over all families `P` of disjoint index blocks of size `≥ 2`, each
//! block connected in the support graph of `M` (`i ~ j` iff `m_ij ≠ 0` or
//! `m_ji ≠ 0`).  `P = ∅` gives `∅ ⊗ M` and `P` = the connected components
//! gives `M ⊗ ∅`.  The connectivity condition is what makes the coproduct
//! coassociative and multiplicative for the block-diagonal product
//! [`MatClass::odot`]; the unrestricted sum over all partitions is kept as
//! [`MatRule::AllPartitions`] for comparison.  Coassociativity is guaranteed
//! when collapsing cannot cancel entries, e.g. for nonnegative matrices.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{HopfError, Result};
use crate::hopf::{Bialgebra, Coalgebra, LinComb, Q};
use crate::nested::{Atom, NestedSet};

/// Default cap on the order of matrices that may be canonicalized.
pub const DEFAULT_MAX_D: usize = 8;

/// Order cap for canonicalization: `HOPFSET_MAX_D` or [`DEFAULT_MAX_D`].
pub fn max_order() -> usize {
    std::env::var("HOPFSET_MAX_D").ok().and_then(|v| v.parse().ok()).unwrap_or(DEFAULT_MAX_D)
}

type Entries = Vec<Vec<Q>>;

fn label_key(a: &Atom) -> (bool, &Atom) {
    (a.is_leaf(), a)
}

/// A square matrix with zero diagonal and labelled indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZeroDiagMatrix {
    labels: Vec<Atom>,
    entries: Entries,
}

impl ZeroDiagMatrix {
    /// The order-0 matrix `∅`.
    pub fn empty() -> Self {
        ZeroDiagMatrix { labels: Vec::new(), entries: Vec::new() }
    }

    /// Builds a matrix with labels `1..=d`.
    pub fn new(entries: Entries) -> Result<Self> {
        let labels = (1..=entries.len() as u32).map(Atom::Leaf).collect();
        Self::with_labels(entries, labels)
    }

    /// Builds a labelled matrix; rows and columns are reordered so that ideal
    /// labels come first (in canonical order), then leaves.
    pub fn with_labels(entries: Entries, labels: Vec<Atom>) -> Result<Self> {
        let d = entries.len();
        if labels.len() != d {
            return Err(HopfError::BadSize(format!("{} labels for order {d}", labels.len())));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != d {
                return Err(HopfError::BadSize(format!("row {} has {} entries, expected {d}", i + 1, row.len())));
            }
            if !row[i].is_zero() {
                return Err(HopfError::Invalid(format!("diagonal entry {} is nonzero", i + 1)));
            }
        }
        let distinct: BTreeSet<&Atom> = labels.iter().collect();
        if distinct.len() != d {
            return Err(HopfError::Invalid("duplicate index labels".into()));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| label_key(&labels[a]).cmp(&label_key(&labels[b])));
        Ok(ZeroDiagMatrix {
            labels: order.iter().map(|&i| labels[i].clone()).collect(),
            entries: order.iter().map(|&i| order.iter().map(|&j| entries[i][j].clone()).collect()).collect(),
        })
    }

    /// Order `d`.
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    /// Index labels in row order.
    pub fn labels(&self) -> &[Atom] {
        &self.labels
    }

    /// Entry rows.
    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    /// Entry at positions (0-based).
    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.entries[i][j]
    }

    fn positions(&self, labels: &[Atom]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self
                .labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| HopfError::Invalid(format!("label {l} is not an index of the matrix")))?;
            if out.contains(&p) {
                return Err(HopfError::Invalid(format!("label {l} repeated")));
            }
            out.push(p);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Diagonal submatrix `M_I` at the given labels.
    pub fn submatrix(&self, labels: &[Atom]) -> Result<Self> {
        let pos = self.positions(labels)?;
        Ok(ZeroDiagMatrix {
            labels: pos.iter().map(|&i| self.labels[i].clone()).collect(),
            entries: pos.iter().map(|&i| pos.iter().map(|&j| self.entries[i][j].clone()).collect()).collect(),
        })
    }

    /// `ι_I`: places this matrix at its labels inside a matrix indexed by
    /// `target` (zeros elsewhere).
    pub fn embed(&self, target: &[Atom]) -> Result<Self> {
        let d = target.len();
        let mut entries = vec![vec![Q::zero(); d]; d];
        let pos: Vec<usize> = self
            .labels
            .iter()
            .map(|l| {
                target.iter().position(|t| t == l).ok_or_else(|| HopfError::Invalid(format!("label {l} not in target")))
            })
            .collect::<Result<_>>()?;
        for (a, &i) in pos.iter().enumerate() {
            for (b, &j) in pos.iter().enumerate() {
                entries[i][j] = self.entries[a][b].clone();
            }
        }
        ZeroDiagMatrix::with_labels(entries, target.to_vec())
    }

    /// `M_{(I_i)} = Σ ι_{I_i} M_{I_i}`: keeps only entries inside blocks.
    pub fn block_part(&self, blocks: &[Vec<Atom>]) -> Result<Self> {
        let mut out = ZeroDiagMatrix { labels: self.labels.clone(), entries: vec![vec![Q::zero(); self.order()]; self.order()] };
        let mut seen = BTreeSet::new();
        for b in blocks {
            let pos = self.positions(b)?;
            for &p in &pos {
                if !seen.insert(p) {
                    return Err(HopfError::Overlap(format!("label {} is in two blocks", self.labels[p])));
                }
            }
            for &i in &pos {
                for &j in &pos {
                    out.entries[i][j] = self.entries[i][j].clone();
                }
            }
        }
        Ok(out)
    }

    /// Collapses one index set.  `M⧸M = ∅` and `M⧸∅ = M`; otherwise
    /// `1 < |I| < d` is required.
    pub fn collapse(&self, labels: &[Atom]) -> Result<Self> {
        let d = self.order();
        if labels.is_empty() {
            return Ok(self.clone());
        }
        if labels.len() == d {
            self.positions(labels)?;
            return Ok(ZeroDiagMatrix::empty());
        }
        if labels.len() < 2 {
            return Err(HopfError::BadSize(format!("cannot collapse {} index (need 1 < |I| < {d})", labels.len())));
        }
        self.collapse_partition(&[labels.to_vec()])
    }

    /// Collapses disjoint blocks simultaneously (each of size ≥ 2).
    pub fn collapse_partition(&self, blocks: &[Vec<Atom>]) -> Result<Self> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut seen = BTreeSet::new();
        for b in blocks {
            if b.len() < 2 {
                return Err(HopfError::BadSize(format!("block of size {} (need at least 2)", b.len())));
            }
            let pos = self.positions(b)?;
            for &p in &pos {
                if !seen.insert(p) {
                    return Err(HopfError::Overlap(format!("label {} is in two blocks", self.labels[p])));
                }
            }
            groups.push(pos);
        }
        let mut labels = Vec::new();
        for g in &groups {
            let mut leaves = BTreeSet::new();
            for &p in g {
                leaves.extend(self.labels[p].support());
            }
            labels.push(Atom::ideal_of_leaves(leaves));
        }
        for p in 0..self.order() {
            if !seen.contains(&p) {
                groups.push(vec![p]);
                labels.push(self.labels[p].clone());
            }
        }
        let entries = collapse_groups(&self.entries, &groups);
        ZeroDiagMatrix::with_labels(entries, labels)
    }

    /// Strips indices whose row and column vanish.
    pub fn normalize(&self) -> Self {
        let keep: Vec<usize> =
            (0..self.order()).filter(|&i| (0..self.order()).any(|j| !self.entries[i][j].is_zero() || !self.entries[j][i].is_zero())).collect();
        ZeroDiagMatrix {
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
            entries: keep.iter().map(|&i| keep.iter().map(|&j| self.entries[i][j].clone()).collect()).collect(),
        }
    }

    /// Simultaneous row/column permutation: index `i` moves to `perm[i]`
    /// (labels travel with their rows).
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let d = self.order();
        let mut entries = vec![vec![Q::zero(); d]; d];
        let mut labels = vec![Atom::Leaf(0); d];
        for i in 0..d {
            labels[perm[i]] = self.labels[i].clone();
            for j in 0..d {
                entries[perm[i]][perm[j]] = self.entries[i][j].clone();
            }
        }
        Ok(ZeroDiagMatrix { labels, entries })
    }

    /// True if every entry is a nonnegative integer and the matrix is symmetric.
    pub fn is_adjacency(&self) -> bool {
        let d = self.order();
        (0..d).all(|i| (0..d).all(|j| self.entries[i][j] == self.entries[j][i] && self.entries[i][j].is_integer() && !self.entries[i][j].is_negative()))
    }

    /// JSON `{"d":n,"entries":[["p/q",..],..],"labels":[..]}`.
    pub fn to_json(&self) -> Value {
        json!({
            "d": self.order(),
            "entries": self.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "labels": self.labels.iter().map(Atom::to_json).collect::<Vec<_>>(),
        })
    }

    /// Parses matrix JSON; entries may be integers or `"p/q"` strings; labels
    /// default to `1..=d`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| HopfError::parse(0, "matrix JSON must be an object"))?;
        let rows = obj.get("entries").and_then(Value::as_array).ok_or_else(|| HopfError::parse(0, "missing \"entries\""))?;
        let entries: Entries = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| HopfError::parse(0, "matrix rows must be arrays"))?
                    .iter()
                    .map(parse_entry)
                    .collect::<Result<Vec<Q>>>()
            })
            .collect::<Result<_>>()?;
        if let Some(d) = obj.get("d") {
            let d = d.as_u64().ok_or_else(|| HopfError::parse(0, "\"d\" must be a natural number"))?;
            if d as usize != entries.len() {
                return Err(HopfError::BadSize(format!("\"d\" is {d} but there are {} rows", entries.len())));
            }
        }
        match obj.get("labels") {
            None | Some(Value::Null) => ZeroDiagMatrix::new(entries),
            Some(Value::Array(ls)) => {
                let labels = ls.iter().map(Atom::from_json).collect::<Result<Vec<_>>>()?;
                ZeroDiagMatrix::with_labels(entries, labels)
            }
            Some(_) => Err(HopfError::parse(0, "\"labels\" must be an array")),
        }
    }
}

fn parse_entry(v: &Value) -> Result<Q> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|x| Q::from_integer(x.into()))
            .ok_or_else(|| HopfError::parse(0, format!("entry {n} is not an integer; use \"p/q\""))),
        Value::String(s) => s.trim().parse::<Q>().map_err(|_| HopfError::parse(0, format!("bad rational \"{s}\""))),
        other => Err(HopfError::parse(0, format!("bad matrix entry {other}"))),
    }
}

impl fmt::Display for ZeroDiagMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels.iter().map(Atom::to_string).collect();
        write!(f, "[{}] ", labels.join(" "))?;
        write_entries(f, &self.entries)
    }
}

fn write_entries(f: &mut fmt::Formatter<'_>, e: &Entries) -> fmt::Result {
    if e.is_empty() {
        return f.write_str("∅");
    }
    f.write_str("[")?;
    for (i, r) in e.iter().enumerate() {
        if i > 0 {
            f.write_str(";")?;
        }
        let cells: Vec<String> = r.iter().map(Q::to_string).collect();
        f.write_str(&cells.join(","))?;
    }
    f.write_str("]")
}

/// Sums the rows and columns of each group; groups become the new indices in
/// the given order.
fn collapse_groups(e: &Entries, groups: &[Vec<usize>]) -> Entries {
    let n = groups.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    for (a, ga) in groups.iter().enumerate() {
        for (b, gb) in groups.iter().enumerate() {
            if a == b {
                continue;
            }
            let mut s = Q::zero();
            for &i in ga {
                for &j in gb {
                    s += &e[i][j];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

/// Lifts a partition of a quotient's labels back to the original labels:
/// every ideal label produced by `blocks` is replaced by that block, and
/// blocks untouched by `inner` are kept.
pub fn lift_partition(blocks: &[Vec<Atom>], inner: &[Vec<Atom>]) -> Vec<Vec<Atom>> {
    let ideal_of = |b: &Vec<Atom>| {
        let mut leaves = BTreeSet::new();
        for a in b {
            leaves.extend(a.support());
        }
        Atom::ideal_of_leaves(leaves)
    };
    let stars: Vec<Atom> = blocks.iter().map(ideal_of).collect();
    let mut used = vec![false; blocks.len()];
    let mut out = Vec::new();
    for j in inner {
        let mut k = Vec::new();
        for a in j {
            match stars.iter().position(|s| s == a) {
                Some(i) => {
                    used[i] = true;
                    k.extend(blocks[i].iter().cloned());
                }
                None => k.push(a.clone()),
            }
        }
        k.sort();
        out.push(k);
    }
    for (i, b) in blocks.iter().enumerate() {
        if !used[i] {
            out.push(b.clone());
        }
    }
    out
}

/// Symmetric adjacency matrix with natural entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdjMatrix(ZeroDiagMatrix);

impl AdjMatrix {
    /// Validates symmetry and natural entries.
    pub fn new(m: ZeroDiagMatrix) -> Result<Self> {
        if !m.is_adjacency() {
            return Err(HopfError::Invalid("adjacency matrices are symmetric with natural entries".into()));
        }
        Ok(AdjMatrix(m))
    }

    /// From natural upper-triangle data, given as full rows.
    pub fn from_naturals(rows: &[Vec<u32>]) -> Result<Self> {
        let e = rows.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
        AdjMatrix::new(ZeroDiagMatrix::new(e)?)
    }

    /// Underlying matrix.
    pub fn matrix(&self) -> &ZeroDiagMatrix {
        &self.0
    }

    /// Entry as a natural number.
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        u32::try_from(self.0.entries[i][j].to_integer()).expect("natural entry")
    }

    /// Degree: half the entry sum (the number of edges).
    pub fn degree(&self) -> u32 {
        let d = self.0.order();
        (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).map(|(i, j)| self.entry(i, j)).sum()
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<u32> {
        let d = self.0.order();
        (0..d).map(|i| (0..d).map(|j| self.entry(i, j)).sum()).collect()
    }

    /// Collapse (adjacency matrices are closed under collapsing).
    pub fn collapse(&self, labels: &[Atom]) -> Result<AdjMatrix> {
        AdjMatrix::new(self.0.collapse(labels)?)
    }

    /// Every adjacency matrix of order `d` with entries `≤ max`.
    pub fn all(d: usize, max: u32) -> Vec<AdjMatrix> {
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        let count = (max as usize + 1).pow(pairs.len() as u32);
        (0..count)
            .map(|mut code| {
                let mut rows = vec![vec![0u32; d]; d];
                for &(i, j) in &pairs {
                    let v = (code % (max as usize + 1)) as u32;
                    code /= max as usize + 1;
                    rows[i][j] = v;
                    rows[j][i] = v;
                }
                AdjMatrix::from_naturals(&rows).expect("valid adjacency")
            })
            .collect()
    }
}

/// A seeded random matrix of order `d` with nonnegative rational entries,
/// about a fifth of them zero.
pub fn random_matrix<R: Rng>(rng: &mut R, d: usize) -> ZeroDiagMatrix {
    let mut e = vec![vec![Q::zero(); d]; d];
    for (i, row) in e.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j && !rng.gen_bool(0.2) {
                *x = Q::new(rng.gen_range(1i64..=9).into(), rng.gen_range(1i64..=5).into());
            }
        }
    }
    ZeroDiagMatrix::new(e).expect("zero diagonal")
}

/// Canonical representative of a class under simultaneous row/column
/// permutation: the row-major lexicographically least entry matrix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatClass {
    entries: Entries,
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(d, &mut cur, &mut out);
    out
}

/// Cached permutation tables for small orders.
fn permutation_table(d: usize) -> &'static [Vec<usize>] {
    static TABLES: [OnceLock<Vec<Vec<usize>>>; 11] = [const { OnceLock::new() }; 11];
    TABLES[d].get_or_init(|| permutations(d))
}

/// Least row-major entry matrix over all orderings (row `r` of the result is
/// row `p[r]` of `e`), with early exit on the first differing entry.
fn canonical_entries(e: &Entries) -> Entries {
    let d = e.len();
    if d <= 1 {
        return e.clone();
    }
    let perms = permutation_table(d);
    let mut best = &perms[0];
    for p in &perms[1..] {
        'cmp: for r in 0..d {
            for c in 0..d {
                match e[p[r]][p[c]].cmp(&e[best[r]][best[c]]) {
                    std::cmp::Ordering::Less => {
                        best = p;
                        break 'cmp;
                    }
                    std::cmp::Ordering::Greater => break 'cmp,
                    std::cmp::Ordering::Equal => {}
                }
            }
        }
    }
    best.iter().map(|&i| best.iter().map(|&j| e[i][j].clone()).collect()).collect()
}

impl MatClass {
    /// The class of `∅`.
    pub fn empty() -> Self {
        MatClass { entries: Vec::new() }
    }

    /// Canonical class of a matrix (labels are forgotten).
    pub fn of(m: &ZeroDiagMatrix) -> Result<Self> {
        Self::of_entries(&m.entries)
    }

    fn of_entries(e: &Entries) -> Result<Self> {
        let cap = max_order().min(10);
        if e.len() > cap {
            return Err(HopfError::SizeLimit(format!("order {} exceeds the canonicalization cap {cap}", e.len())));
        }
        Ok(MatClass { entries: canonical_entries(e) })
    }

    /// Class of the normalized matrix (isolated indices stripped).
    pub fn normalized(m: &ZeroDiagMatrix) -> Result<Self> {
        Self::of(&m.normalize())
    }

    /// Order of the representative.
    pub fn order(&self) -> usize {
        self.entries.len()
    }

    /// Canonical entries.
    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    /// Representative with labels `1..=d`.
    pub fn representative(&self) -> ZeroDiagMatrix {
        ZeroDiagMatrix::new(self.entries.clone()).expect("canonical entries are valid")
    }

    /// Class of the block-diagonal matrix `diag(M, N)`.
    pub fn odot(&self, other: &MatClass) -> Result<MatClass> {
        let (a, b) = (self.order(), other.order());
        let mut e = vec![vec![Q::zero(); a + b]; a + b];
        for i in 0..a {
            for j in 0..a {
                e[i][j] = self.entries[i][j].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                e[a + i][a + j] = other.entries[i][j].clone();
            }
        }
        Self::of_entries(&e)
    }

    /// Brute-force canonical form over all `d!` orderings (reference).
    pub fn brute_force(m: &ZeroDiagMatrix) -> Self {
        let e = &m.entries;
        let best = permutations(e.len())
            .into_iter()
            .map(|p| p.iter().map(|&i| p.iter().map(|&j| e[i][j].clone()).collect::<Vec<_>>()).collect::<Entries>())
            .min()
            .unwrap_or_default();
        MatClass { entries: best }
    }
}

impl fmt::Display for MatClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_entries(f, &self.entries)
    }
}

/// Which partitions enter the matrix coproduct.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MatRule {
    /// Blocks connected in the support graph, isolated indices stripped.
    #[default]
    Connected,
    /// Every family of disjoint blocks of size ≥ 2 (no normalization);
    /// not coassociative in general.
    AllPartitions,
}

/// All set partitions of `0..d` as block lists (restricted growth).
pub fn set_partitions(d: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; d];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        let d = rgs.len();
        if i == d {
            let mut blocks = vec![Vec::new(); if d == 0 { 0 } else { max + 1 }];
            for (k, &b) in rgs.iter().enumerate() {
                blocks[b].push(k);
            }
            out.push(blocks);
            return;
        }
        let lim = if i == 0 { 0 } else { max + 1 };
        for b in 0..=lim {
            rgs[i] = b;
            rec(i + 1, max.max(b), rgs, out);
        }
    }
    rec(0, 0, &mut rgs, &mut out);
    out
}

fn connected(e: &Entries, block: &[usize]) -> bool {
    let mut seen = vec![block[0]];
    let mut stack = vec![block[0]];
    while let Some(v) = stack.pop() {
        for &w in block {
            if !seen.contains(&w) && (!e[v][w].is_zero() || !e[w][v].is_zero()) {
                seen.push(w);
                stack.push(w);
            }
        }
    }
    seen.len() == block.len()
}

fn direct_sum(e: &Entries, blocks: &[Vec<usize>]) -> Entries {
    let idx: Vec<usize> = blocks.iter().flatten().copied().collect();
    let n = idx.len();
    let mut out = vec![vec![Q::zero(); n]; n];
    let mut start = 0;
    for b in blocks {
        for (x, &i) in b.iter().enumerate() {
            for (y, &j) in b.iter().enumerate() {
                out[start + x][start + y] = e[i][j].clone();
            }
        }
        start += b.len();
    }
    out
}

fn strip(e: &Entries) -> Entries {
    let d = e.len();
    let keep: Vec<usize> = (0..d).filter(|&i| (0..d).any(|j| !e[i][j].is_zero() || !e[j][i].is_zero())).collect();
    keep.iter().map(|&i| keep.iter().map(|&j| e[i][j].clone()).collect()).collect()
}

/// The matrix coalgebra on permutation classes.
#[derive(Clone, Copy, Debug, Default)]
pub struct MatCoalgebra {
    /// Partition rule.
    pub rule: MatRule,
}

impl MatCoalgebra {
    /// Coalgebra with the given rule.
    pub fn with_rule(rule: MatRule) -> Self {
        MatCoalgebra { rule }
    }

    /// The basis element of a matrix under this rule.
    pub fn class_of(&self, m: &ZeroDiagMatrix) -> Result<MatClass> {
        match self.rule {
            MatRule::Connected => MatClass::normalized(m),
            MatRule::AllPartitions => MatClass::of(m),
        }
    }

    /// Coproduct of a labelled matrix.
    pub fn coproduct_matrix(&self, m: &ZeroDiagMatrix) -> Result<LinComb<(MatClass, MatClass)>> {
        Ok(self.coproduct(&self.class_of(m)?))
    }
}

impl Coalgebra for MatCoalgebra {
    type Basis = MatClass;

    fn unit(&self) -> MatClass {
        MatClass::empty()
    }

    fn coproduct(&self, x: &MatClass) -> LinComb<(MatClass, MatClass)> {
        let canon = |e: &Entries| MatClass::of_entries(e).expect("orders only decrease");
        let e = match self.rule {
            MatRule::Connected => strip(&x.entries),
            MatRule::AllPartitions => x.entries.clone(),
        };
        let d = e.len();
        let mut out = LinComb::zero();
        if d == 0 {
            out.add_term((MatClass::empty(), MatClass::empty()), Q::from_integer(1.into()));
            return out;
        }
        let one = Q::from_integer(1.into());
        if self.rule == MatRule::AllPartitions {
            out.add_term((canon(&e), MatClass::empty()), one.clone());
            out.add_term((MatClass::empty(), canon(&e)), one.clone());
        }
        for part in set_partitions(d) {
            let blocks: Vec<Vec<usize>> = part.iter().filter(|b| b.len() >= 2).cloned().collect();
            let singles: Vec<Vec<usize>> = part.iter().filter(|b| b.len() < 2).cloned().collect();
            match self.rule {
                MatRule::Connected => {
                    if !blocks.iter().all(|b| connected(&e, b)) {
                        continue;
                    }
                }
                MatRule::AllPartitions => {
                    if blocks.is_empty() || (blocks.len() == 1 && blocks[0].len() == d) {
                        continue;
                    }
                }
            }
            let left = direct_sum(&e, &blocks);
            let mut groups = blocks.clone();
            groups.extend(singles);
            let right = collapse_groups(&e, &groups);
            let (left, right) = match self.rule {
                MatRule::Connected => (strip(&left), strip(&right)),
                MatRule::AllPartitions => (left, right),
            };
            out.add_term((canon(&left), canon(&right)), one.clone());
        }
        out
    }
}

/// The matrix bialgebra: classes with the block-diagonal product.
#[derive(Clone, Copy, Debug, Default)]
pub struct MatHopf {
    /// Underlying coalgebra.
    pub coalgebra: MatCoalgebra,
}

impl Coalgebra for MatHopf {
    type Basis = MatClass;

    fn unit(&self) -> MatClass {
        MatClass::empty()
    }

    fn coproduct(&self, x: &MatClass) -> LinComb<(MatClass, MatClass)> {
        self.coalgebra.coproduct(x)
    }
}

impl Bialgebra for MatHopf {
    fn product(&self, a: &MatClass, b: &MatClass) -> Result<MatClass> {
        let p = a.odot(b)?;
        Ok(match self.coalgebra.rule {
            MatRule::Connected => MatClass::of_entries(&strip(&p.entries))?,
            MatRule::AllPartitions => p,
        })
    }
}

/// Partition blocks as label lists (for the labelled API).
pub fn blocks_as_labels(m: &ZeroDiagMatrix, blocks: &[Vec<usize>]) -> Vec<Vec<Atom>> {
    blocks.iter().map(|b| b.iter().map(|&i| m.labels[i].clone()).collect()).collect()
}

/// Parses a label list such as `1 2 {3 4}`.
pub fn parse_labels(s: &str) -> Result<Vec<Atom>> {
    let set: NestedSet = format!("({s})").parse()?;
    Ok(set.atoms().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{check_coassoc, q};

    fn mat(rows: &[&[i64]]) -> ZeroDiagMatrix {
        ZeroDiagMatrix::new(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
    }

    fn leaves(v: &[u32]) -> Vec<Atom> {
        v.iter().map(|&l| Atom::Leaf(l)).collect()
    }

    #[test]
    fn collapse_sums_rows_and_columns() {
        let m = mat(&[&[0, 2, 3], &[2, 0, 5], &[3, 5, 0]]);
        let c = m.collapse(&leaves(&[2, 3])).unwrap();
        assert_eq!(c.order(), 2);
        assert_eq!(c.labels()[0], Atom::ideal_of_leaves([2, 3]));
        assert_eq!(c.get(0, 1), &q(5));
        assert_eq!(c.get(1, 0), &q(5));
        assert_eq!(m.collapse(&leaves(&[1, 2, 3])).unwrap(), ZeroDiagMatrix::empty());
        assert_eq!(m.collapse(&[]).unwrap(), m);
        assert!(m.collapse(&leaves(&[1])).is_err());
    }

    #[test]
    fn canonical_form_matches_brute_force() {
        let m = mat(&[&[0, 1, 0, 2], &[1, 0, 3, 0], &[0, 0, 0, 1], &[4, 0, 1, 0]]);
        assert_eq!(MatClass::of(&m).unwrap(), MatClass::brute_force(&m));
        let p = m.permute(&[2, 0, 3, 1]).unwrap();
        assert_eq!(MatClass::of(&p).unwrap(), MatClass::of(&m).unwrap());
    }

    #[test]
    fn small_coproducts() {
        let ctx = MatCoalgebra::default();
        let d2 = MatClass::normalized(&mat(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(ctx.reduced_coproduct(&d2).is_zero());
        assert_eq!(ctx.coproduct(&MatClass::empty()).len(), 1);
        let tri = MatClass::normalized(&mat(&[&[0, 1, 2], &[1, 0, 3], &[2, 3, 0]])).unwrap();
        let r = ctx.reduced_coproduct(&tri);
        assert_eq!(r.len(), 3);
        assert!(check_coassoc(&ctx, &tri).is_none());
    }

    #[test]
    fn all_partitions_rule_is_not_coassociative() {
        let ctx = MatCoalgebra::with_rule(MatRule::AllPartitions);
        let path = MatClass::of(&mat(&[&[0, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 0, 1], &[0, 0, 1, 0]])).unwrap();
        assert!(check_coassoc(&ctx, &path).is_some());
    }

    #[test]
    fn set_partition_counts() {
        let bell: Vec<usize> = (0..6).map(|d| set_partitions(d).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52]);
    }
}
