//! Generic exact linear algebra over formal spans of basis values.
//!
//! [`LinComb`] is a finite formal linear combination with exact rational
//! coefficients.  A [`Coalgebra`] supplies a coproduct on basis values and a
//! [`Bialgebra`] adds a product; on top of these this module provides the
//! iterated reduced coproduct, nilpotence indices, the antipode (by the
//! standard recursion and by the alternating series) and law verifiers that
//! report failures as data.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

/// Exact rational scalars.
pub type Q = BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `p/q` as a rational.
pub fn qf(p: i64, d: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(d))
}

/// A finite formal linear combination `Σ c_b · b` with nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinComb<B: Ord> {
    terms: BTreeMap<B, Q>,
}

impl<B: Ord> Default for LinComb<B> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<B: Ord + Clone> LinComb<B> {
    /// The zero combination.
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single basis value with coefficient 1.
    pub fn basis(b: B) -> Self {
        Self::term(b, Q::one())
    }

    /// A single term.
    pub fn term(b: B, c: Q) -> Self {
        let mut out = Self::zero();
        out.add_term(b, c);
        out
    }

    /// Collects terms, merging equal basis values.
    pub fn from_terms<I: IntoIterator<Item = (B, Q)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (b, c) in it {
            out.add_term(b, c);
        }
        out
    }

    /// Adds `c · b`, dropping the term if the coefficient cancels.
    pub fn add_term(&mut self, b: B, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(b) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds `c · other` in place.
    pub fn add_scaled(&mut self, other: &Self, c: &Q) {
        for (b, x) in &other.terms {
            self.add_term(b.clone(), x * c);
        }
    }

    /// Sum of two combinations.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Q::one());
        out
    }

    /// Difference of two combinations.
    pub fn minus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &-Q::one());
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }

    /// Coefficient of a basis value (0 if absent).
    pub fn coeff(&self, b: &B) -> Q {
        self.terms.get(b).cloned().unwrap_or_else(Q::zero)
    }

    /// True if no terms survive.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True if there are no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical basis order.
    pub fn iter(&self) -> impl Iterator<Item = (&B, &Q)> {
        self.terms.iter()
    }

    /// Linear extension of a basis map.
    pub fn map_basis<C: Ord + Clone, F: FnMut(&B) -> C>(&self, mut f: F) -> LinComb<C> {
        LinComb::from_terms(self.terms.iter().map(|(b, c)| (f(b), c.clone())))
    }

    /// Linear extension of a map into combinations.
    pub fn flat_map<C: Ord + Clone, F: FnMut(&B) -> LinComb<C>>(&self, mut f: F) -> LinComb<C> {
        let mut out = LinComb::zero();
        for (b, c) in &self.terms {
            out.add_scaled(&f(b), c);
        }
        out
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor<C: Ord + Clone>(&self, other: &LinComb<C>) -> LinComb<(B, C)> {
        let mut out = LinComb::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term((a.clone(), b.clone()), x * y);
            }
        }
        out
    }

    /// Renders as `c1·b1 + c2·b2`, `0` when empty.
    pub fn render_with<F: Fn(&B) -> String>(&self, f: F) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (b, c)) in self.terms.iter().enumerate() {
            let neg = c < &Q::zero();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let a = c.abs();
            if !a.is_one() {
                s.push_str(&format!("{a}·"));
            }
            s.push_str(&f(b));
        }
        s
    }
}

impl<B: Ord + Clone + Display> Display for LinComb<B> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render_with(|b| b.to_string()))
    }
}

/// Renders a two-fold tensor combination as `c·a ⊗ b + ...`.
pub fn render_tensor2<B: Ord + Clone + Display>(v: &LinComb<(B, B)>) -> String {
    v.render_with(|(a, b)| format!("{a} ⊗ {b}"))
}

/// Renders a three-fold tensor combination.
pub fn render_tensor3<B: Ord + Clone + Display>(v: &LinComb<(B, B, B)>) -> String {
    v.render_with(|(a, b, c)| format!("{a} ⊗ {b} ⊗ {c}"))
}

/// Renders a combination of tensor words.
pub fn render_words<B: Ord + Clone + Display>(v: &LinComb<Vec<B>>) -> String {
    v.render_with(|w| w.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ⊗ "))
}

/// A coalgebra on a span of basis values with a distinguished group-like unit.
pub trait Coalgebra: Sync {
    /// Basis values (canonical, hence comparable and hashable).
    type Basis: Clone + Ord + Hash + Debug + Display + Send + Sync;

    /// The group-like unit element.
    fn unit(&self) -> Self::Basis;

    /// Coproduct of a basis value.
    fn coproduct(&self, x: &Self::Basis) -> LinComb<(Self::Basis, Self::Basis)>;

    /// Counit: 1 on the unit and 0 on every other basis value.
    fn counit(&self, x: &Self::Basis) -> Q {
        if *x == self.unit() {
            Q::one()
        } else {
            Q::zero()
        }
    }

    /// Reduced coproduct `Δx − x⊗1 − 1⊗x`, defined to be 0 on the unit.
    fn reduced_coproduct(&self, x: &Self::Basis) -> LinComb<(Self::Basis, Self::Basis)> {
        let u = self.unit();
        if *x == u {
            return LinComb::zero();
        }
        let mut d = self.coproduct(x);
        d.add_term((x.clone(), u.clone()), -Q::one());
        d.add_term((u, x.clone()), -Q::one());
        d
    }
}

/// A coalgebra with a compatible (possibly partial) associative product.
pub trait Bialgebra: Coalgebra {
    /// Product of two basis values.
    fn product(&self, a: &Self::Basis, b: &Self::Basis) -> Result<Self::Basis>;
}

/// Linear extension of the coproduct.
pub fn coproduct_lin<C: Coalgebra>(ctx: &C, v: &LinComb<C::Basis>) -> LinComb<(C::Basis, C::Basis)> {
    v.flat_map(|b| ctx.coproduct(b))
}

/// Counit of a combination: the coefficient of the unit.
pub fn counit_lin<C: Coalgebra>(ctx: &C, v: &LinComb<C::Basis>) -> Q {
    v.iter().map(|(b, c)| ctx.counit(b) * c).fold(Q::zero(), |a, b| a + b)
}

/// Both sides `(Δ⊗id)Δx` and `(id⊗Δ)Δx` of the coassociativity law.
#[allow(clippy::type_complexity)]
pub fn coassoc_sides<C: Coalgebra>(
    ctx: &C,
    x: &C::Basis,
) -> (LinComb<(C::Basis, C::Basis, C::Basis)>, LinComb<(C::Basis, C::Basis, C::Basis)>) {
    let d = ctx.coproduct(x);
    let mut memo: HashMap<C::Basis, LinComb<(C::Basis, C::Basis)>> = HashMap::new();
    let mut delta = |b: &C::Basis| memo.entry(b.clone()).or_insert_with(|| ctx.coproduct(b)).clone();
    let mut lhs = LinComb::zero();
    let mut rhs = LinComb::zero();
    for ((a, b), c) in d.iter() {
        for ((a1, a2), e) in delta(a).iter() {
            lhs.add_term((a1.clone(), a2.clone(), b.clone()), c * e);
        }
        for ((b1, b2), e) in delta(b).iter() {
            rhs.add_term((a.clone(), b1.clone(), b2.clone()), c * e);
        }
    }
    (lhs, rhs)
}

/// `(Δ′)^n x` as a combination of words of length `n + 1`, obtained by
/// repeatedly applying `Δ′` to the first tensor leg.
pub fn iterate_reduced<C: Coalgebra>(ctx: &C, x: &LinComb<C::Basis>, n: usize) -> LinComb<Vec<C::Basis>> {
    let mut cur: LinComb<Vec<C::Basis>> = x.map_basis(|b| vec![b.clone()]);
    let mut memo: HashMap<C::Basis, LinComb<(C::Basis, C::Basis)>> = HashMap::new();
    for _ in 0..n {
        let mut next = LinComb::zero();
        for (w, c) in cur.iter() {
            let d = memo.entry(w[0].clone()).or_insert_with(|| ctx.reduced_coproduct(&w[0]));
            for ((a, b), e) in d.iter() {
                let mut nw = Vec::with_capacity(w.len() + 1);
                nw.push(a.clone());
                nw.push(b.clone());
                nw.extend_from_slice(&w[1..]);
                next.add_term(nw, c * e);
            }
        }
        cur = next;
        if cur.is_zero() {
            break;
        }
    }
    cur
}

/// Least `n ≥ 1` with `(Δ′)^n x = 0`, searching up to `cap`.
pub fn nilpotence_index<C: Coalgebra>(ctx: &C, x: &C::Basis, cap: usize) -> Option<usize> {
    let mut cur: LinComb<Vec<C::Basis>> = LinComb::basis(vec![x.clone()]);
    let mut memo: HashMap<C::Basis, LinComb<(C::Basis, C::Basis)>> = HashMap::new();
    for n in 1..=cap {
        let mut next = LinComb::zero();
        for (w, c) in cur.iter() {
            let d = memo.entry(w[0].clone()).or_insert_with(|| ctx.reduced_coproduct(&w[0]));
            for ((a, b), e) in d.iter() {
                let mut nw = Vec::with_capacity(w.len() + 1);
                nw.push(a.clone());
                nw.push(b.clone());
                nw.extend_from_slice(&w[1..]);
                next.add_term(nw, c * e);
            }
        }
        if next.is_zero() {
            return Some(n);
        }
        cur = next;
    }
    None
}

/// Bilinear product of two combinations.
pub fn product_lin<C: Bialgebra>(
    ctx: &C,
    a: &LinComb<C::Basis>,
    b: &LinComb<C::Basis>,
) -> Result<LinComb<C::Basis>> {
    let mut out = LinComb::zero();
    for (x, c) in a.iter() {
        for (y, e) in b.iter() {
            out.add_term(ctx.product(x, y)?, c * e);
        }
    }
    Ok(out)
}

/// Product of all letters of a word (the unit for the empty word).
pub fn multiply_word<C: Bialgebra>(ctx: &C, w: &[C::Basis]) -> Result<C::Basis> {
    let mut acc = ctx.unit();
    for b in w {
        acc = ctx.product(&acc, b)?;
    }
    Ok(acc)
}

/// Memoizing antipode evaluator using `S(1) = 1` and
/// `S(x) = −x − Σ S(x′)·x″` over the terms of `Δ′x`.
pub struct Antipode<'a, C: Bialgebra> {
    ctx: &'a C,
    memo: HashMap<C::Basis, LinComb<C::Basis>>,
}

impl<'a, C: Bialgebra> Antipode<'a, C> {
    /// Fresh evaluator with an empty cache.
    pub fn new(ctx: &'a C) -> Self {
        Antipode { ctx, memo: HashMap::new() }
    }

    /// Antipode of a basis value.
    pub fn of(&mut self, x: &C::Basis) -> Result<LinComb<C::Basis>> {
        if let Some(v) = self.memo.get(x) {
            return Ok(v.clone());
        }
        let u = self.ctx.unit();
        let out = if *x == u {
            LinComb::basis(u)
        } else {
            let mut s = LinComb::term(x.clone(), -Q::one());
            for ((a, b), c) in self.ctx.reduced_coproduct(x).iter() {
                let sa = self.of(a)?;
                let p = product_lin(self.ctx, &sa, &LinComb::basis(b.clone()))?;
                s.add_scaled(&p, &-c.clone());
            }
            s
        };
        self.memo.insert(x.clone(), out.clone());
        Ok(out)
    }

    /// Linear extension.
    pub fn of_lin(&mut self, v: &LinComb<C::Basis>) -> Result<LinComb<C::Basis>> {
        let mut out = LinComb::zero();
        for (b, c) in v.iter() {
            out.add_scaled(&self.of(b)?, c);
        }
        Ok(out)
    }
}

/// Antipode of a combination via the recursion.
pub fn antipode<C: Bialgebra>(ctx: &C, v: &LinComb<C::Basis>) -> Result<LinComb<C::Basis>> {
    Antipode::new(ctx).of_lin(v)
}

/// Antipode via the alternating series `S(x) = Σ_{n≥1} (−1)^n m((Δ′)^{n−1}x)`
/// for non-unit `x` (with `m` multiplying all legs of a word).
pub fn antipode_series<C: Bialgebra>(ctx: &C, x: &C::Basis, cap: usize) -> Result<LinComb<C::Basis>> {
    if *x == ctx.unit() {
        return Ok(LinComb::basis(x.clone()));
    }
    let mut out = LinComb::zero();
    let xs = LinComb::basis(x.clone());
    for n in 1..=cap {
        let words = iterate_reduced(ctx, &xs, n - 1);
        if words.is_zero() {
            break;
        }
        let sign = if n % 2 == 0 { Q::one() } else { -Q::one() };
        for (w, c) in words.iter() {
            out.add_term(multiply_word(ctx, w)?, c * &sign);
        }
    }
    Ok(out)
}

/// The series `−x + Σ_{n≥1} (−1)^{n+1} m((Δ′)^{n−1}x)`, i.e. the alternating
/// series with the opposite sign convention.  It is **not** an antipode (it
/// vanishes on primitive elements); it is exposed only so that the sign
/// convention can be compared against [`antipode_series`].
pub fn antipode_shifted_series<C: Bialgebra>(ctx: &C, x: &C::Basis, cap: usize) -> Result<LinComb<C::Basis>> {
    let s = antipode_series(ctx, x, cap)?;
    let mut out = LinComb::term(x.clone(), -Q::one());
    out.add_scaled(&s, &-Q::one());
    Ok(out)
}

/// Both sides of the antipode axioms applied to `x`:
/// `m(S⊗id)Δx`, `m(id⊗S)Δx` and the target `ε(x)·1`.
#[allow(clippy::type_complexity)]
pub fn antipode_sides<C: Bialgebra>(
    ctx: &C,
    anti: &mut Antipode<'_, C>,
    x: &C::Basis,
) -> Result<(LinComb<C::Basis>, LinComb<C::Basis>, LinComb<C::Basis>)> {
    let d = ctx.coproduct(x);
    let mut left = LinComb::zero();
    let mut right = LinComb::zero();
    for ((a, b), c) in d.iter() {
        let sa = anti.of(a)?;
        left.add_scaled(&product_lin(ctx, &sa, &LinComb::basis(b.clone()))?, c);
        let sb = anti.of(b)?;
        right.add_scaled(&product_lin(ctx, &LinComb::basis(a.clone()), &sb)?, c);
    }
    let target = LinComb::term(ctx.unit(), ctx.counit(x));
    Ok((left, right, target))
}

/// Algebraic laws that can be verified on a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    /// `(Δ⊗id)Δ = (id⊗Δ)Δ`.
    Coassoc,
    /// `(ε⊗id)Δ = id = (id⊗ε)Δ`.
    Counit,
    /// `Δ(ab) = Δ(a)Δ(b)` on all ordered pairs of the sample.
    Compat,
    /// `m(S⊗id)Δ = uε = m(id⊗S)Δ`.
    Antipode,
}

impl Law {
    /// Lowercase name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            Law::Coassoc => "coassoc",
            Law::Counit => "counit",
            Law::Compat => "compat",
            Law::Antipode => "antipode",
        }
    }
}

/// One failed check with canonical renderings of both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawFailure {
    /// The element (or pair) that failed.
    pub element: String,
    /// Rendered left-hand side.
    pub lhs: String,
    /// Rendered right-hand side.
    pub rhs: String,
}

/// Outcome of verifying one law on a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawReport {
    /// Law name.
    pub law: String,
    /// Number of checks performed.
    pub total: usize,
    /// Failed checks.
    pub failures: Vec<LawFailure>,
}

impl LawReport {
    /// True if no check failed.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Merges several reports of the same law.
    pub fn merge(law: &str, parts: impl IntoIterator<Item = LawReport>) -> LawReport {
        let mut out = LawReport { law: law.to_string(), total: 0, failures: Vec::new() };
        for p in parts {
            out.total += p.total;
            out.failures.extend(p.failures);
        }
        out
    }
}

/// Checks coassociativity on one basis value.
pub fn check_coassoc<C: Coalgebra>(ctx: &C, x: &C::Basis) -> Option<LawFailure> {
    let (l, r) = coassoc_sides(ctx, x);
    (l != r).then(|| LawFailure { element: x.to_string(), lhs: render_tensor3(&l), rhs: render_tensor3(&r) })
}

/// Checks both counit laws on one basis value.
pub fn check_counit<C: Coalgebra>(ctx: &C, x: &C::Basis) -> Option<LawFailure> {
    let d = ctx.coproduct(x);
    let mut l = LinComb::zero();
    let mut r = LinComb::zero();
    for ((a, b), c) in d.iter() {
        l.add_term(b.clone(), ctx.counit(a) * c);
        r.add_term(a.clone(), ctx.counit(b) * c);
    }
    let id = LinComb::basis(x.clone());
    (l != id || r != id).then(|| LawFailure { element: x.to_string(), lhs: l.to_string(), rhs: r.to_string() })
}

/// Checks `Δ(ab) = Δ(a)Δ(b)` for one pair.
pub fn check_compat<C: Bialgebra>(ctx: &C, a: &C::Basis, b: &C::Basis) -> Option<LawFailure> {
    let element = format!("{a} · {b}");
    let ab = match ctx.product(a, b) {
        Ok(p) => p,
        Err(e) => return Some(LawFailure { element, lhs: e.to_string(), rhs: String::new() }),
    };
    let lhs = ctx.coproduct(&ab);
    let mut rhs = LinComb::zero();
    for ((a1, a2), c) in ctx.coproduct(a).iter() {
        for ((b1, b2), e) in ctx.coproduct(b).iter() {
            match (ctx.product(a1, b1), ctx.product(a2, b2)) {
                (Ok(x), Ok(y)) => rhs.add_term((x, y), c * e),
                (Err(err), _) | (_, Err(err)) => {
                    return Some(LawFailure { element, lhs: render_tensor2(&lhs), rhs: err.to_string() })
                }
            }
        }
    }
    (lhs != rhs).then(|| LawFailure { element, lhs: render_tensor2(&lhs), rhs: render_tensor2(&rhs) })
}

/// Checks both antipode axioms on one basis value.
pub fn check_antipode<C: Bialgebra>(ctx: &C, anti: &mut Antipode<'_, C>, x: &C::Basis) -> Option<LawFailure> {
    match antipode_sides(ctx, anti, x) {
        Ok((l, r, t)) => (l != t || r != t).then(|| LawFailure {
            element: x.to_string(),
            lhs: format!("{l} | {r}"),
            rhs: t.to_string(),
        }),
        Err(e) => Some(LawFailure { element: x.to_string(), lhs: e.to_string(), rhs: String::new() }),
    }
}

/// Verifies a coalgebra law (coassociativity or counit) on every sample
/// element, in parallel with deterministic ordering of failures.
pub fn verify_coalgebra_law<C: Coalgebra>(ctx: &C, law: Law, sample: &[C::Basis]) -> LawReport {
    let failures: Vec<LawFailure> = sample
        .par_iter()
        .filter_map(|x| match law {
            Law::Coassoc => check_coassoc(ctx, x),
            Law::Counit => check_counit(ctx, x),
            Law::Compat | Law::Antipode => Some(LawFailure {
                element: x.to_string(),
                lhs: format!("law {} needs a product", law.name()),
                rhs: String::new(),
            }),
        })
        .collect();
    LawReport { law: law.name().to_string(), total: sample.len(), failures }
}

/// Verifies any law on a sample; `compat` checks all ordered pairs.
pub fn verify_law<C: Bialgebra>(ctx: &C, law: Law, sample: &[C::Basis]) -> LawReport {
    match law {
        Law::Coassoc | Law::Counit => verify_coalgebra_law(ctx, law, sample),
        Law::Compat => {
            let pairs: Vec<(&C::Basis, &C::Basis)> =
                sample.iter().flat_map(|a| sample.iter().map(move |b| (a, b))).collect();
            let failures: Vec<LawFailure> = pairs.par_iter().filter_map(|(a, b)| check_compat(ctx, a, b)).collect();
            LawReport { law: law.name().to_string(), total: pairs.len(), failures }
        }
        Law::Antipode => {
            let failures: Vec<LawFailure> = sample
                .par_iter()
                .filter_map(|x| {
                    let mut anti = Antipode::new(ctx);
                    check_antipode(ctx, &mut anti, x)
                })
                .collect();
            LawReport { law: law.name().to_string(), total: sample.len(), failures }
        }
    }
}
