//! Symbolic star products of monomials with formal constant coefficients.
//!
//! Variables are [`Atom`]s: a leaf `i` is the variable `z_i`, an ideal atom
//! `I` is the collapsed variable `ζ_I` (keyed by its leaf-set).  The
//! coefficients `K_ab` of the bivector `α = Σ K_ab ∂_a ⊗ ∂_b` are independent
//! commuting generators ([`KSym`], unordered pairs), and `ℏ` is a formal
//! parameter truncated at a fixed order.
//!
//! Three independent expansions of `f_1 ⋆ ⋯ ⋆ f_m` for monomials in distinct
//! variables are provided:
//!
//! * [`star_monomials`] — Wick form: a sum over symmetric natural matrices
//!   `M` with row sums `α_i ≤ n_i`, `Σ_k ℏ^k Σ_{|M|=k} (K_M / M!) ∏ z_i^{n_i-α_i}/(n_i-α_i)!`;
//! * [`star`] — the bidifferential operator `μ ∘ exp(ℏα)` applied pairwise
//!   and iterated;
//! * [`star_by_operator`] — `exp(ℏ D)` with `D = Σ_{i<j} K_ij ∂_i ∂_j`
//!   applied to the ordinary product.
//!
//! Degree sequences use 1-based labels: `powers[i-1]` is the exponent of `z_i`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::error::{HopfError, Result};
use crate::hopf::{LinComb, Q};
use crate::matrix::AdjMatrix;
use crate::nested::{Atom, NestedSet};

/// Default ℏ truncation order.
pub const DEFAULT_ORDER: u32 = 4;

/// Unordered pair of variables indexing a coefficient `K_ab`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KSym(Atom, Atom);

impl KSym {
    /// The symbol `K_ab = K_ba`.
    pub fn new(a: Atom, b: Atom) -> KSym {
        if a <= b {
            KSym(a, b)
        } else {
            KSym(b, a)
        }
    }

    /// `K_ij` for leaves.
    pub fn leaves(i: u32, j: u32) -> KSym {
        KSym::new(Atom::Leaf(i), Atom::Leaf(j))
    }

    /// The two indices.
    pub fn ends(&self) -> (&Atom, &Atom) {
        (&self.0, &self.1)
    }
}

impl fmt::Display for KSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K[{},{}]", self.0, self.1)
    }
}

/// Sparse commutative monomial `∏ x^e` with sorted keys and positive exponents.
pub type Mono<K> = Vec<(K, u32)>;

/// A monomial in the `K` generators.
pub type KMono = Mono<KSym>;

fn mono_mul<K: Ord + Clone>(a: &[(K, u32)], b: &[(K, u32)]) -> Mono<K> {
    let mut m: BTreeMap<K, u32> = BTreeMap::new();
    for (k, e) in a.iter().chain(b) {
        *m.entry(k.clone()).or_insert(0) += e;
    }
    m.into_iter().filter(|(_, e)| *e > 0).collect()
}

fn mono_exp<K: Ord>(a: &[(K, u32)], k: &K) -> u32 {
    a.iter().find(|(x, _)| x == k).map_or(0, |(_, e)| *e)
}

fn mono_lower<K: Ord + Clone>(a: &[(K, u32)], k: &K, by: u32) -> Mono<K> {
    a.iter()
        .filter_map(|(x, e)| if x == k { (*e > by).then(|| (x.clone(), e - by)) } else { Some((x.clone(), *e)) })
        .collect()
}

fn factorial(n: u32) -> Q {
    Q::from_integer((1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k)))
}

/// Falling factorial `e (e-1) ⋯ (e-k+1)`.
fn falling(e: u32, k: u32) -> Q {
    if k > e {
        return Q::zero();
    }
    Q::from_integer(((e - k + 1)..=e).fold(BigInt::one(), |a, x| a * BigInt::from(x)))
}

/// Variable name: `z_i` for a leaf, `ζ{..}` for an ideal.
pub fn var_name(a: &Atom) -> String {
    match a {
        Atom::Leaf(i) => format!("z{i}"),
        Atom::Ideal(_) => format!("ζ{a}"),
    }
}

/// One term: `ℏ^hbar · ∏ vars · ∏ K`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    /// Power of ℏ.
    pub hbar: u32,
    /// Variable monomial.
    pub vars: Mono<Atom>,
    /// Coefficient monomial.
    pub ks: KMono,
}

impl Term {
    fn times(&self, other: &Term) -> Term {
        Term { hbar: self.hbar + other.hbar, vars: mono_mul(&self.vars, &other.vars), ks: mono_mul(&self.ks, &other.ks) }
    }

    fn render(&self, field_names: bool) -> String {
        let mut parts = Vec::new();
        if self.hbar == 1 {
            parts.push("ℏ".to_string());
        } else if self.hbar > 1 {
            parts.push(format!("ℏ^{}", self.hbar));
        }
        for (k, e) in &self.ks {
            parts.push(if *e == 1 { k.to_string() } else { format!("{k}^{e}") });
        }
        for (v, e) in &self.vars {
            let name = match (field_names, v) {
                (true, Atom::Leaf(i)) => format!("φ(x{i})"),
                _ => var_name(v),
            };
            parts.push(if *e == 1 { name } else { format!("{name}^{e}") });
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// A polynomial in ℏ, variables and `K` generators, truncated at `ℏ^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarPoly {
    order: u32,
    terms: LinComb<Term>,
}

impl StarPoly {
    /// The zero polynomial.
    pub fn zero(order: u32) -> Self {
        StarPoly { order, terms: LinComb::zero() }
    }

    /// The constant 1.
    pub fn one(order: u32) -> Self {
        StarPoly { order, terms: LinComb::basis(Term::default()) }
    }

    /// `c · ∏ vars`.
    pub fn monomial(order: u32, vars: Mono<Atom>, c: Q) -> Self {
        let vars = mono_mul(&vars, &[]);
        StarPoly { order, terms: LinComb::term(Term { hbar: 0, vars, ks: Vec::new() }, c) }
    }

    /// Builds from terms, dropping those beyond the truncation order.
    pub fn from_terms<I: IntoIterator<Item = (Term, Q)>>(order: u32, it: I) -> Self {
        let mut terms = LinComb::zero();
        for (t, c) in it {
            if t.hbar <= order {
                terms.add_term(t, c);
            }
        }
        StarPoly { order, terms }
    }

    /// Truncation order.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Terms with nonzero coefficients.
    pub fn terms(&self) -> &LinComb<Term> {
        &self.terms
    }

    /// Coefficient of a term.
    pub fn coeff(&self, t: &Term) -> Q {
        self.terms.coeff(t)
    }

    /// True if zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    /// Sum.
    pub fn plus(&self, other: &StarPoly) -> StarPoly {
        StarPoly { order: self.order.min(other.order), terms: self.terms.plus(&other.terms) }
            .truncated(self.order.min(other.order))
    }

    /// Ordinary (commutative) product.
    pub fn mul(&self, other: &StarPoly) -> StarPoly {
        let order = self.order.min(other.order);
        let mut out = LinComb::zero();
        for (a, x) in self.terms.iter() {
            for (b, y) in other.terms.iter() {
                if a.hbar + b.hbar <= order {
                    out.add_term(a.times(b), x * y);
                }
            }
        }
        StarPoly { order, terms: out }
    }

    /// Drops terms above `order`.
    pub fn truncated(&self, order: u32) -> StarPoly {
        StarPoly::from_terms(order.min(self.order), self.terms.iter().map(|(t, c)| (t.clone(), c.clone())))
    }

    /// Part of ℏ-degree `k` with no variables, as a polynomial in the `K`s.
    pub fn constant_at(&self, k: u32) -> LinComb<KMono> {
        LinComb::from_terms(
            self.terms.iter().filter(|(t, _)| t.hbar == k && t.vars.is_empty()).map(|(t, c)| (t.ks.clone(), c.clone())),
        )
    }

    /// `∂/∂v`.
    pub fn derivative(&self, v: &Atom) -> StarPoly {
        let mut out = LinComb::zero();
        for (t, c) in self.terms.iter() {
            let e = mono_exp(&t.vars, v);
            if e > 0 {
                let nt = Term { hbar: t.hbar, vars: mono_lower(&t.vars, v, 1), ks: t.ks.clone() };
                out.add_term(nt, c * Q::from_integer(e.into()));
            }
        }
        StarPoly { order: self.order, terms: out }
    }

    /// Multiplies every term by `ℏ^h ∏ K` and a scalar.
    pub fn times_symbol(&self, h: u32, ks: &KMono, c: &Q) -> StarPoly {
        StarPoly::from_terms(
            self.order,
            self.terms.iter().map(|(t, x)| {
                (Term { hbar: t.hbar + h, vars: t.vars.clone(), ks: mono_mul(&t.ks, ks) }, x * c)
            }),
        )
    }

    /// Rendering with `z_i` shown as scalar fields `φ(x_i)`.
    pub fn render_fields(&self) -> String {
        self.terms.render_with(|t| t.render(true))
    }

    /// Canonical term list `[{hbar, vars:{..}, K:{..}, coeff:"p/q"}]`.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(t, c)| {
                    let vars: Map<String, Value> = t.vars.iter().map(|(v, e)| (var_name(v), json!(e))).collect();
                    let ks: Map<String, Value> =
                        t.ks.iter().map(|(k, e)| (format!("{},{}", k.0, k.1), json!(e))).collect();
                    json!({"hbar": t.hbar, "vars": vars, "K": ks, "coeff": c.to_string()})
                })
                .collect(),
        )
    }
}

impl fmt::Display for StarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.terms.render_with(|t| t.to_string()))
    }
}

/// `μ ∘ exp(ℏ α)(f ⊗ g)` with `α = Σ_{a ∈ vars f, b ∈ vars g} K_ab ∂_a ⊗ ∂_b`,
/// truncated at the smaller order.  For polynomials in disjoint variable
/// sets this is the star product; it is associative for any inputs.
pub fn star(f: &StarPoly, g: &StarPoly) -> StarPoly {
    let order = f.order.min(g.order);
    let mut out = LinComb::zero();
    let mut level: LinComb<(Term, Term)> = f.terms.tensor(&g.terms);
    for k in 0..=order {
        for ((a, b), c) in level.iter() {
            let t = a.times(b);
            if t.hbar + k <= order {
                out.add_term(Term { hbar: t.hbar + k, ..t }, c.clone());
            }
        }
        if k == order {
            break;
        }
        let mut next = LinComb::zero();
        let inv = Q::new(BigInt::one(), BigInt::from(k + 1));
        for ((a, b), c) in level.iter() {
            if a.hbar + b.hbar + k + 1 > order {
                continue;
            }
            for (va, ea) in &a.vars {
                for (vb, eb) in &b.vars {
                    let na = Term {
                        hbar: a.hbar,
                        vars: mono_lower(&a.vars, va, 1),
                        ks: mono_mul(&a.ks, &[(KSym::new(va.clone(), vb.clone()), 1)]),
                    };
                    let nb = Term { hbar: b.hbar, vars: mono_lower(&b.vars, vb, 1), ks: b.ks.clone() };
                    next.add_term((na, nb), c * Q::from_integer((ea * eb).into()) * &inv);
                }
            }
        }
        level = next;
    }
    StarPoly { order, terms: out }
}

/// Left-to-right star product of several factors (the empty product is 1).
pub fn star_all(factors: &[StarPoly], order: u32) -> StarPoly {
    factors.iter().fold(StarPoly::one(order), |acc, f| star(&acc, f))
}

/// The factor `z_i^n` (divided by `n!` when `normalized`).
pub fn power_factor(order: u32, v: Atom, n: u32, normalized: bool) -> StarPoly {
    let c = if normalized { Q::one() / factorial(n) } else { Q::one() };
    if n == 0 {
        return StarPoly::from_terms(order, [(Term::default(), c)]);
    }
    StarPoly::monomial(order, vec![(v, n)], c)
}

fn leaf_factors(powers: &[u32], order: u32, normalized: bool, offset: u32) -> Vec<StarPoly> {
    powers
        .iter()
        .enumerate()
        .map(|(i, &n)| power_factor(order, Atom::Leaf(offset + i as u32 + 1), n, normalized))
        .collect()
}

/// Symmetric natural matrices (as upper-triangle maps) with row sums
/// bounded by `caps` (exactly equal when `exact`) and total degree ≤ `max_deg`.
fn enumerate_matrices(caps: &[u32], exact: bool, max_deg: u32) -> Vec<BTreeMap<(usize, usize), u32>> {
    let m = caps.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let mut cur = BTreeMap::new();
    let mut resid = caps.to_vec();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        p: usize,
        pairs: &[(usize, usize)],
        resid: &mut Vec<u32>,
        cur: &mut BTreeMap<(usize, usize), u32>,
        deg: u32,
        exact: bool,
        max_deg: u32,
        out: &mut Vec<BTreeMap<(usize, usize), u32>>,
    ) {
        let m = resid.len();
        if p == pairs.len() {
            if !exact || resid.iter().all(|&r| r == 0) {
                out.push(cur.clone());
            }
            return;
        }
        let (i, j) = pairs[p];
        // Entering a new row: the previous row is complete.
        if exact && (p == 0 || pairs[p - 1].0 != i) && i > 0 && resid[i - 1] != 0 {
            return;
        }
        if exact {
            // Row i can still receive from columns > i only.
            let avail: u32 = (i + 1..m).map(|k| resid[k]).sum();
            if resid[i] > avail {
                return;
            }
        }
        let lim = resid[i].min(resid[j]).min(max_deg - deg);
        for v in 0..=lim {
            resid[i] -= v;
            resid[j] -= v;
            if v > 0 {
                cur.insert((i, j), v);
            }
            rec(p + 1, pairs, resid, cur, deg + v, exact, max_deg, out);
            cur.remove(&(i, j));
            resid[i] += v;
            resid[j] += v;
        }
    }
    if exact && m == 1 && caps[0] != 0 {
        return out;
    }
    rec(0, &pairs, &mut resid, &mut cur, 0, exact, max_deg, &mut out);
    out
}

/// Wick expansion of `(z_1^{n_1}/n_1!) ⋆ ⋯ ⋆ (z_m^{n_m}/n_m!)` (or of the
/// unnormalized monomials) up to `ℏ^order`.
pub fn star_monomials(powers: &[u32], order: u32, normalized: bool) -> StarPoly {
    let mut terms = Vec::new();
    for mat in enumerate_matrices(powers, false, order) {
        let mut alpha = vec![0u32; powers.len()];
        let mut deg = 0;
        let mut ks = Vec::new();
        let mut c = Q::one();
        for (&(i, j), &v) in &mat {
            alpha[i] += v;
            alpha[j] += v;
            deg += v;
            ks.push((KSym::leaves(i as u32 + 1, j as u32 + 1), v));
            c /= factorial(v);
        }
        let mut vars = Vec::new();
        for (i, &n) in powers.iter().enumerate() {
            let rest = n - alpha[i];
            if rest > 0 {
                vars.push((Atom::Leaf(i as u32 + 1), rest));
            }
            c *= if normalized { Q::one() / factorial(rest) } else { factorial(n) / factorial(rest) };
        }
        terms.push((Term { hbar: deg, vars, ks: mono_mul(&ks, &[]) }, c));
    }
    StarPoly::from_terms(order, terms)
}

/// `exp(ℏD)` applied to the ordinary product, `D = Σ_{i<j} K_ij ∂_i ∂_j`.
pub fn star_by_operator(powers: &[u32], order: u32, normalized: bool) -> StarPoly {
    let product = leaf_factors(powers, order, normalized, 0).iter().fold(StarPoly::one(order), |a, f| a.mul(f));
    let m = powers.len() as u32;
    let mut total = product.clone();
    let mut cur = product;
    for k in 1..=order {
        let mut next = StarPoly::zero(order);
        for i in 1..=m {
            for j in i + 1..=m {
                let d = cur.derivative(&Atom::Leaf(i)).derivative(&Atom::Leaf(j));
                next = next.plus(&d.times_symbol(1, &vec![(KSym::leaves(i, j), 1)], &Q::one()));
            }
        }
        cur = StarPoly::from_terms(order, next.terms.iter().map(|(t, c)| (t.clone(), c / Q::from_integer(k.into()))));
        if cur.is_zero() {
            break;
        }
        total = total.plus(&cur);
    }
    total
}

/// Star product of the leaf monomials, computed by iterating [`star`].
pub fn star_iterated(powers: &[u32], order: u32, normalized: bool) -> StarPoly {
    star_all(&leaf_factors(powers, order, normalized, 0), order)
}

/// `(∏ left) ⋆ (∏ right)` with only cross-cut coefficients; the right group
/// is labelled after the left one.
pub fn bipartite_star(left: &[u32], right: &[u32], order: u32, normalized: bool) -> StarPoly {
    let prod = |fs: Vec<StarPoly>| fs.iter().fold(StarPoly::one(order), |a, f| a.mul(f));
    let l = prod(leaf_factors(left, order, normalized, 0));
    let r = prod(leaf_factors(right, order, normalized, left.len() as u32));
    star(&l, &r)
}

/// Symmetric natural matrices with row sums exactly `n` (complete and
/// duplicate-free).
pub fn enumerate_subordinate(n: &[u32]) -> Vec<AdjMatrix> {
    let total: u32 = n.iter().sum();
    if total % 2 == 1 {
        return Vec::new();
    }
    let m = n.len();
    enumerate_matrices(n, true, total / 2)
        .into_iter()
        .map(|mat| {
            let mut rows = vec![vec![0u32; m]; m];
            for (&(i, j), &v) in &mat {
                rows[i][j] = v;
                rows[j][i] = v;
            }
            AdjMatrix::from_naturals(&rows).expect("symmetric natural")
        })
        .collect()
}

/// True if some adjacency matrix has row sums `n`.
pub fn is_admissible(n: &[u32]) -> bool {
    !enumerate_subordinate(n).is_empty()
}

/// `K_M` for an adjacency matrix with leaf labels.
pub fn k_monomial(m: &AdjMatrix) -> KMono {
    let d = m.matrix().order();
    let labels = m.matrix().labels();
    let mut ks = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            let v = m.entry(i, j);
            if v > 0 {
                ks.push((KSym::new(labels[i].clone(), labels[j].clone()), v));
            }
        }
    }
    mono_mul(&ks, &[])
}

/// `M! = ∏_{i<j} m_ij!`.
pub fn matrix_factorial(m: &AdjMatrix) -> Q {
    let d = m.matrix().order();
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).fold(Q::one(), |a, (i, j)| a * factorial(m.entry(i, j)))
}

/// Renders a polynomial in the `K` symbols, e.g. `2·K[1,2]^2`.
pub fn render_kpoly(p: &LinComb<KMono>) -> String {
    p.render_with(|m| {
        if m.is_empty() {
            "1".to_string()
        } else {
            m.iter().map(|(k, e)| if *e == 1 { k.to_string() } else { format!("{k}^{e}") }).collect::<Vec<_>>().join("·")
        }
    })
}

/// `⟨z^{n_1} ⋆ ⋯⟩ = Σ_{M ≺ n} K_M / M!` (times `∏ n_i!` when unnormalized).
pub fn expectation(n: &[u32], normalized: bool) -> LinComb<KMono> {
    let scale = if normalized { Q::one() } else { n.iter().fold(Q::one(), |a, &x| a * factorial(x)) };
    LinComb::from_terms(enumerate_subordinate(n).iter().map(|m| (k_monomial(m), &scale / matrix_factorial(m))))
}

/// Outcome of comparing the top constant term with the expectation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeadingReport {
    /// Whether a subordinate matrix exists.
    pub admissible: bool,
    /// `Σ n_i / 2` when the total is even.
    pub k: Option<u32>,
    /// Constant term of `ℏ^k` in the unnormalized star expansion.
    pub top_constant: LinComb<KMono>,
    /// Unnormalized expectation.
    pub expectation: LinComb<KMono>,
    /// Top constant equals the expectation, and is nonzero iff admissible.
    pub ok: bool,
}

/// Expands `z_1^{n_1} ⋆ ⋯ ⋆ z_m^{n_m}` by iterated star products to order
/// `Σn_i/2` and compares the constant term there with the expectation.
pub fn leading_term_check(n: &[u32]) -> LeadingReport {
    let total: u32 = n.iter().sum();
    let expectation = expectation(n, false);
    let admissible = !expectation.is_zero();
    if total % 2 == 1 {
        let order = total / 2;
        let p = star_iterated(n, order, false);
        let no_constant = (0..=order).all(|k| p.constant_at(k).is_zero());
        return LeadingReport {
            admissible,
            k: None,
            top_constant: LinComb::zero(),
            ok: no_constant && !admissible,
            expectation,
        };
    }
    let k = total / 2;
    let p = star_iterated(n, k, false);
    let top = p.constant_at(k);
    let ok = top == expectation && (top.is_zero() != admissible);
    LeadingReport { admissible, k: Some(k), top_constant: top, expectation, ok }
}

/// A polydifferential symbol `K_M ∏ ∂_a^{e_a}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyDiff {
    /// Coefficient monomial.
    pub ks: KMono,
    /// Derivative orders per variable.
    pub derivs: Mono<Atom>,
}

impl PolyDiff {
    /// Composition (graph product): coefficients multiply, orders add.
    pub fn compose(&self, other: &PolyDiff) -> PolyDiff {
        PolyDiff { ks: mono_mul(&self.ks, &other.ks), derivs: mono_mul(&self.derivs, &other.derivs) }
    }

    /// True for the identity operator.
    pub fn is_identity(&self) -> bool {
        self.ks.is_empty() && self.derivs.is_empty()
    }

    /// Applies the operator (times `ℏ^degree`) to a polynomial.
    pub fn apply(&self, p: &StarPoly, hbar: u32) -> StarPoly {
        let mut out = p.clone();
        for (v, e) in &self.derivs {
            for _ in 0..*e {
                out = out.derivative(v);
            }
        }
        out.times_symbol(hbar, &self.ks, &Q::one())
    }
}

impl fmt::Display for PolyDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> =
            self.ks.iter().map(|(k, e)| if *e == 1 { k.to_string() } else { format!("{k}^{e}") }).collect();
        for (v, e) in &self.derivs {
            parts.push(if *e == 1 { format!("∂{v}") } else { format!("∂{v}^{e}") });
        }
        if parts.is_empty() {
            f.write_str("id")
        } else {
            f.write_str(&parts.join("·"))
        }
    }
}

/// The operator assigned to the Bernoulli graph of an adjacency matrix:
/// `K_M ∏_i ∂_i^{row sum i}` (labels taken from the matrix).
pub fn pair_bernoulli(m: &AdjMatrix) -> PolyDiff {
    let labels = m.matrix().labels();
    let derivs = m.row_sums().into_iter().enumerate().filter(|(_, s)| *s > 0).map(|(i, s)| (labels[i].clone(), s));
    PolyDiff { ks: k_monomial(m), derivs: mono_mul(&derivs.collect::<Vec<_>>(), &[]) }
}

/// Jet monomial term `ℏ^k ∏ K · ∏ f_i^{(a_i)}(z_i)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetTerm {
    /// Power of ℏ.
    pub hbar: u32,
    /// `(function id, derivative order)` for every factor.
    pub jets: Vec<(u32, u32)>,
    /// Coefficient monomial.
    pub ks: KMono,
}

impl fmt::Display for JetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.hbar == 1 {
            parts.push("ℏ".to_string());
        } else if self.hbar > 1 {
            parts.push(format!("ℏ^{}", self.hbar));
        }
        for (k, e) in &self.ks {
            parts.push(if *e == 1 { k.to_string() } else { format!("{k}^{e}") });
        }
        for (i, a) in &self.jets {
            parts.push(if *a == 0 { format!("f{i}(z{i})") } else { format!("f{i}^({a})(z{i})") });
        }
        f.write_str(&parts.join("·"))
    }
}

/// Generalized Wick expansion of `f_1 ⋆ ⋯ ⋆ f_m` for symbolic functions.
pub fn star_jets(m: usize, order: u32) -> LinComb<JetTerm> {
    let caps = vec![2 * order; m];
    let mut out = LinComb::zero();
    for mat in enumerate_matrices(&caps, false, order) {
        let mut alpha = vec![0u32; m];
        let mut ks = Vec::new();
        let mut deg = 0;
        let mut c = Q::one();
        for (&(i, j), &v) in &mat {
            alpha[i] += v;
            alpha[j] += v;
            deg += v;
            ks.push((KSym::leaves(i as u32 + 1, j as u32 + 1), v));
            c /= factorial(v);
        }
        let jets = alpha.iter().enumerate().map(|(i, &a)| (i as u32 + 1, a)).collect();
        out.add_term(JetTerm { hbar: deg, jets, ks: mono_mul(&ks, &[]) }, c);
    }
    out
}

/// Substitutes `f_i = z_i^{n_i}` (or `/n_i!`) into a jet expansion.
pub fn substitute_jets(jets: &LinComb<JetTerm>, powers: &[u32], order: u32, normalized: bool) -> StarPoly {
    let mut terms = Vec::new();
    for (t, c) in jets.iter() {
        let mut coeff = c.clone();
        let mut vars = Vec::new();
        for &(i, a) in &t.jets {
            let n = powers[i as usize - 1];
            if a > n {
                coeff = Q::zero();
                break;
            }
            coeff *= falling(n, a);
            if normalized {
                coeff /= factorial(n);
            }
            if n > a {
                vars.push((Atom::Leaf(i), n - a));
            }
        }
        if !coeff.is_zero() {
            terms.push((Term { hbar: t.hbar, vars, ks: t.ks.clone() }, coeff));
        }
    }
    StarPoly::from_terms(order, terms)
}

/// The collapsed variable of a set of atoms: `ζ` keyed by the leaf-set.
pub fn collapsed_var(atoms: &[Atom]) -> Atom {
    Atom::ideal_of_leaves(atoms.iter().flat_map(Atom::support))
}

/// The variable of an atom of a state: leaves stay, ideals are keyed by
/// their leaf-set.
fn state_var(a: &Atom) -> Atom {
    match a {
        Atom::Leaf(_) => a.clone(),
        Atom::Ideal(_) => collapsed_var(std::slice::from_ref(a)),
    }
}

/// `f_{(U,{I_i})}`: the star product over the atoms of a state of the
/// factors `z_j^{n_j}` (leaves) and `f_I(ζ_I) = ζ_I^{Σ_{i∈I} n_i}` (ideals),
/// each divided by `∏ n_i!` when `normalized`.
pub fn star_quotient(state: &NestedSet, powers: &[u32], order: u32, normalized: bool) -> Result<StarPoly> {
    if !state.is_xi_state() {
        return Err(HopfError::Invalid(format!("{state} is not a collapsed state (atoms of degree ≤ 1, disjoint)")));
    }
    let mut factors = Vec::new();
    for a in state.atoms() {
        let mut n = 0;
        let mut c = Q::one();
        for l in a.support() {
            let p = *powers
                .get((l as usize).wrapping_sub(1))
                .ok_or_else(|| HopfError::BadSize(format!("no power given for label {l} (labels are 1-based)")))?;
            n += p;
            if normalized {
                c /= factorial(p);
            }
        }
        let f = if n == 0 {
            StarPoly::from_terms(order, [(Term::default(), c)])
        } else {
            StarPoly::monomial(order, vec![(state_var(a), n)], c)
        };
        factors.push(f);
    }
    Ok(star_all(&factors, order))
}

/// Collapses the variables of each block into one variable `ζ_B`: terms
/// containing a coefficient `K_ab` with `a, b` in one block are dropped, the
/// remaining coefficients are renamed and exponents of merged variables add.
/// For star products of one-variable factors this equals the star product of
/// the merged factors (chain rule).
pub fn quotient_starpoly(p: &StarPoly, blocks: &[Vec<Atom>]) -> Result<StarPoly> {
    let mut rename: BTreeMap<Atom, Atom> = BTreeMap::new();
    for b in blocks {
        let z = collapsed_var(b);
        for a in b {
            if rename.insert(a.clone(), z.clone()).is_some() {
                return Err(HopfError::Overlap(format!("variable {} is in two blocks", var_name(a))));
            }
        }
    }
    let r = |a: &Atom| rename.get(a).cloned().unwrap_or_else(|| a.clone());
    let mut terms = Vec::new();
    'terms: for (t, c) in p.terms.iter() {
        let mut ks = Vec::new();
        for (k, e) in &t.ks {
            let (a, b) = (r(&k.0), r(&k.1));
            if a == b {
                continue 'terms;
            }
            ks.push((KSym::new(a, b), *e));
        }
        let vars: Vec<(Atom, u32)> = t.vars.iter().map(|(v, e)| (r(v), *e)).collect();
        terms.push((Term { hbar: t.hbar, vars: mono_mul(&vars, &[]), ks: mono_mul(&ks, &[]) }, c.clone()));
    }
    Ok(StarPoly::from_terms(p.order, terms))
}

/// The state `(U, {I_i})` on labels `1..=m` collapsing the given blocks.
pub fn state_of_blocks(m: u32, blocks: &[Vec<u32>]) -> Result<NestedSet> {
    let mut used = std::collections::BTreeSet::new();
    let mut atoms = Vec::new();
    for b in blocks {
        for &l in b {
            if l == 0 || l > m || !used.insert(l) {
                return Err(HopfError::Invalid(format!("bad block label {l}")));
            }
        }
        atoms.push(Atom::ideal_of_leaves(b.iter().copied()));
    }
    atoms.extend((1..=m).filter(|l| !used.contains(l)).map(Atom::Leaf));
    Ok(NestedSet::new(atoms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopf::{q, qf};

    fn term(hbar: u32, vars: &[(u32, u32)], ks: &[((u32, u32), u32)]) -> Term {
        Term {
            hbar,
            vars: vars.iter().map(|&(v, e)| (Atom::Leaf(v), e)).collect(),
            ks: mono_mul(&ks.iter().map(|&((a, b), e)| (KSym::leaves(a, b), e)).collect::<Vec<_>>(), &[]),
        }
    }

    #[test]
    fn linear_star() {
        let p = star_monomials(&[1, 1], 4, true);
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.coeff(&term(0, &[(1, 1), (2, 1)], &[])), q(1));
        assert_eq!(p.coeff(&term(1, &[], &[((1, 2), 1)])), q(1));
    }

    #[test]
    fn quadratic_star_three_ways() {
        let w = star_monomials(&[2, 2], 4, true);
        assert_eq!(w.coeff(&term(0, &[(1, 2), (2, 2)], &[])), qf(1, 4));
        assert_eq!(w.coeff(&term(1, &[(1, 1), (2, 1)], &[((1, 2), 1)])), q(1));
        assert_eq!(w.coeff(&term(2, &[], &[((1, 2), 2)])), qf(1, 2));
        assert_eq!(w.terms().len(), 3);
        assert_eq!(w, star_by_operator(&[2, 2], 4, true));
        assert_eq!(w, star_iterated(&[2, 2], 4, true));
    }

    #[test]
    fn zero_power_is_constant_slot() {
        let p = star_monomials(&[0, 3], 4, true);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.coeff(&term(0, &[(2, 3)], &[])), qf(1, 6));
    }

    #[test]
    fn bipartite_has_only_cross_terms() {
        let p = bipartite_star(&[1, 1], &[1], 1, false);
        for (t, _) in p.terms().iter() {
            assert!(!t.ks.iter().any(|(k, _)| *k == KSym::leaves(1, 2)));
        }
        assert_eq!(p.coeff(&term(1, &[(2, 1)], &[((1, 3), 1)])), q(1));
        assert_eq!(p.coeff(&term(1, &[(1, 1)], &[((2, 3), 1)])), q(1));
        assert_eq!(bipartite_star(&[], &[2], 3, true), star_monomials(&[2], 3, true));
    }

    #[test]
    fn subordinate_examples() {
        assert!(!is_admissible(&[1, 1, 1]));
        let two = enumerate_subordinate(&[2, 2]);
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].entry(0, 1), 2);
        let three = enumerate_subordinate(&[2, 2, 2]);
        assert_eq!(three.len(), 1);
        assert_eq!(three[0].degree(), 3);
        assert!(!is_admissible(&[3, 1]));
    }

    #[test]
    fn expectation_examples() {
        let e = expectation(&[2, 2], false);
        assert_eq!(e, LinComb::term(vec![(KSym::leaves(1, 2), 2)], q(2)));
        let e3 = expectation(&[2, 2, 2], false);
        let k: KMono = vec![(KSym::leaves(1, 2), 1), (KSym::leaves(1, 3), 1), (KSym::leaves(2, 3), 1)];
        assert_eq!(e3, LinComb::term(k, q(8)));
        assert!(expectation(&[3, 1], false).is_zero());
    }

    #[test]
    fn leading_terms() {
        for n in [&[2u32, 2][..], &[1, 1], &[3, 1], &[1, 1, 1], &[]] {
            assert!(leading_term_check(n).ok, "{n:?}");
        }
    }

    #[test]
    fn bernoulli_operators() {
        let m = AdjMatrix::from_naturals(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(pair_bernoulli(&m).to_string(), "K[1,2]·∂1·∂2");
        let z = AdjMatrix::from_naturals(&[vec![0, 0], vec![0, 0]]).unwrap();
        assert!(pair_bernoulli(&z).is_identity());
        let m2 = AdjMatrix::from_naturals(&[vec![0, 2], vec![2, 0]]).unwrap();
        assert_eq!(pair_bernoulli(&m).compose(&pair_bernoulli(&m)), pair_bernoulli(&m2));
    }

    #[test]
    fn quotient_example() {
        let state = NestedSet::new([Atom::Leaf(3), Atom::ideal_of_leaves([1, 2])]);
        let p = star_quotient(&state, &[1, 1, 1], 1, false).unwrap();
        let zeta = Atom::ideal_of_leaves([1, 2]);
        let main = Term { hbar: 0, vars: vec![(Atom::Leaf(3), 1), (zeta.clone(), 2)], ks: vec![] };
        let corr = Term { hbar: 1, vars: vec![(zeta.clone(), 1)], ks: vec![(KSym::new(Atom::Leaf(3), zeta), 1)] };
        assert_eq!(p.coeff(&main), q(1));
        assert_eq!(p.coeff(&corr), q(2));
        assert_eq!(p.terms().len(), 2);
        let full = star_monomials(&[1, 1, 1], 1, false);
        let collapsed = quotient_starpoly(&full, &[vec![Atom::Leaf(1), Atom::Leaf(2)]]).unwrap();
        assert_eq!(collapsed, p);
    }

    #[test]
    fn jets_specialize_to_monomials() {
        let j = star_jets(3, 3);
        assert_eq!(substitute_jets(&j, &[2, 1, 3], 3, true), star_monomials(&[2, 1, 3], 3, true));
    }
}
