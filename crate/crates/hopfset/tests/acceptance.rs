//! Acceptance harness: one PASS/FAIL line per criterion.
//!
//! Every check is exact (rational arithmetic, structural equality); the only
//! tolerances are the wall-clock budgets pinned below.  Seeds are fixed, so
//! every run checks the same sample.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use hopfset::forest::{forest_shapes, Forest};
use hopfset::hopf::{LawReport, LinComb, Q};
use hopfset::star::{enumerate_subordinate, expectation, KMono, KSym};
use hopfset::verify::*;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock budgets.
const BUDGET_SET_COASSOC: Duration = Duration::from_secs(300);
const BUDGET_QUOTIENT_CALCULUS: Duration = Duration::from_secs(120);
const BUDGET_STAR_ASSOC: Duration = Duration::from_secs(300);

/// Seeds of the sampled criteria.
const SEED_FORESTS: u64 = 0x4f52_4553;
const SEED_MULT: u64 = 0x4d55_4c54;
const SEED_ANTIPODE: u64 = 0x414e_5449;
const SEED_MATRIX: u64 = 0x4d41_5452;
const SEED_COMPAT: u64 = 0x434f_4d50;
const SEED_QUOTIENT: u64 = 0x5155_4f54;
const SEED_PRIMARY: u64 = 0x5052_494d;

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_reports(reports: &[LawReport], elapsed: Duration, budget: Option<Duration>) -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for r in reports {
        parts.push(format!("{} {}/{}", r.law, r.total - r.failures.len(), r.total));
        passed &= r.passed() && r.total > 0;
        if let Some(f) = r.failures.first() {
            parts.push(format!("first failure in {}: {} | {} ≠ {}", r.law, f.element, f.lhs, f.rhs));
        }
    }
    if let Some(b) = budget {
        parts.push(format!("{:.1}s of {}s", elapsed.as_secs_f64(), b.as_secs()));
        passed &= elapsed <= b;
    } else {
        parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    }
    Outcome { passed, detail: parts.join("; ") }
}

fn timed<F: FnOnce() -> Vec<LawReport>>(budget: Option<Duration>, f: F) -> Outcome {
    let t = Instant::now();
    let reports = f();
    from_reports(&reports, t.elapsed(), budget)
}

// --- Criterion 10 oracle: brute force over all symmetric natural matrices.

/// Number of symmetric natural matrices with zero diagonal, entries ≤ `max`
/// and the given row sums, for every row-sum vector of length `m`.
fn subordinate_counts(m: usize, max: u32) -> BTreeMap<Vec<u32>, usize> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut out = BTreeMap::new();
    let base = max as usize + 1;
    for mut code in 0..base.pow(pairs.len() as u32) {
        let mut rows = vec![0u32; m];
        for &(i, j) in &pairs {
            let v = (code % base) as u32;
            code /= base;
            rows[i] += v;
            rows[j] += v;
        }
        *out.entry(rows).or_insert(0) += 1;
    }
    out
}

// --- Criterion 11 oracle: exp(ℏD) on ∏ z_i^{n_i}, D = Σ_{i<j} K_ij ∂_i ∂_j.

/// Constant term of `D^k/k! (∏ z_i^{n_i})` as a map from `K`-exponent
/// vectors (indexed by pairs `i<j`) to coefficients.
fn operator_constant(n: &[u32]) -> BTreeMap<Vec<u32>, Q> {
    let m = n.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let total: u32 = n.iter().sum();
    let k = total / 2;
    // State: (variable exponents, K exponents) → coefficient.
    let mut cur: BTreeMap<(Vec<u32>, Vec<u32>), Q> = BTreeMap::new();
    cur.insert((n.to_vec(), vec![0; pairs.len()]), Q::one());
    for step in 1..=k {
        let mut next: BTreeMap<(Vec<u32>, Vec<u32>), Q> = BTreeMap::new();
        for ((vars, ks), c) in &cur {
            for (p, &(i, j)) in pairs.iter().enumerate() {
                if vars[i] == 0 || vars[j] == 0 {
                    continue;
                }
                let coeff = c * Q::from_integer((vars[i] * vars[j]).into()) / Q::from_integer(step.into());
                let mut v = vars.clone();
                v[i] -= 1;
                v[j] -= 1;
                let mut kk = ks.clone();
                kk[p] += 1;
                *next.entry((v, kk)).or_insert_with(Q::zero) += coeff;
            }
        }
        cur = next;
    }
    cur.into_iter()
        .filter(|((vars, _), c)| vars.iter().all(|&e| e == 0) && !c.is_zero())
        .map(|((_, ks), c)| (ks, c))
        .collect()
}

fn kmono_to_pairs(m: usize, mono: &KMono) -> Vec<u32> {
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let mut out = vec![0; pairs.len()];
    for (k, e) in mono {
        let p = pairs
            .iter()
            .position(|&(i, j)| *k == KSym::leaves(i as u32 + 1, j as u32 + 1))
            .expect("leaf symbol");
        out[p] = *e;
    }
    out
}

fn as_pair_map(m: usize, p: &LinComb<KMono>) -> BTreeMap<Vec<u32>, Q> {
    p.iter().map(|(mono, c)| (kmono_to_pairs(m, mono), c.clone())).collect()
}

// --- Criterion 13 oracle: brute-force disjoint member covers.

fn brute_covers(members: &[u64], target: u64) -> Vec<Vec<u64>> {
    fn rec(ms: &[u64], k: usize, target: u64, used: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if used == target {
            out.push(cur.clone());
        }
        for i in k..ms.len() {
            let m = ms[i];
            if m & !target == 0 && m & used == 0 {
                cur.push(m);
                rec(ms, i + 1, target, used | m, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(members, 0, target, 0, &mut Vec::new(), &mut out);
    out
}

fn criterion_13() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED_PRIMARY);
    let (mut checks, mut bad) = (0usize, Vec::new());
    for _ in 0..100 {
        let n = rng.gen_range(3..=8);
        let members = rng.gen_range(2..=2 * n as usize);
        let f = Forest::random(&mut rng, n, members).primary_reduce();
        if !f.is_primary() {
            bad.push(format!("primary_reduce left a composite member in {}", f.to_json()));
            continue;
        }
        let all = f.members();
        for _ in 0..5 {
            let k = rng.gen_range(1..=all.len().min(4));
            let picked: Vec<u64> = all.choose_multiple(&mut rng, k).copied().collect();
            checks += 1;
            let fact = f.factor_union(&picked).expect("members");
            let covers = brute_covers(&all, fact.total());
            let ok = covers.len() == 1 && {
                let mut c = covers[0].clone();
                c.sort_unstable();
                c == fact.blocks()
            };
            if !ok {
                bad.push(format!("{picked:?} in {}: {fact} vs {covers:?}", f.to_json()));
            }
        }
    }
    Outcome {
        passed: bad.is_empty() && checks > 0,
        detail: format!(
            "factor-union {}/{checks} unique covers; {:.1}s{}",
            checks - bad.len(),
            t.elapsed().as_secs_f64(),
            bad.first().map(|b| format!("; first failure: {b}")).unwrap_or_default()
        ),
    }
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let mut reports = vec![sweep_admissibility(4, 4)];
    let mut failures = Vec::new();
    let mut total = 0;
    for m in 1..=4usize {
        let counts = subordinate_counts(m, 4);
        let max = 5usize.pow(m as u32);
        for mut code in 0..max {
            let mut n = Vec::new();
            for _ in 0..m {
                n.push((code % 5) as u32);
                code /= 5;
            }
            total += 1;
            let expected = counts.get(&n).copied().unwrap_or(0);
            let got = enumerate_subordinate(&n).len();
            if got != expected {
                failures.push(hopfset::hopf::LawFailure {
                    element: format!("{n:?}"),
                    lhs: got.to_string(),
                    rhs: expected.to_string(),
                });
            }
        }
    }
    reports.push(LawReport { law: "subordinate-enumeration".into(), total, failures });
    from_reports(&reports, t.elapsed(), None)
}

fn criterion_11() -> Outcome {
    let t = Instant::now();
    let k = |i, j| KSym::leaves(i, j);
    let two = Q::from_integer(2.into());
    let eight = Q::from_integer(8.into());
    let cases: [(&[u32], LinComb<KMono>); 2] = [
        (&[2, 2], LinComb::term(vec![(k(1, 2), 2)], two)),
        (&[2, 2, 2], LinComb::term(vec![(k(1, 2), 1), (k(1, 3), 1), (k(2, 3), 1)], eight)),
    ];
    let mut lines = Vec::new();
    let mut passed = true;
    for (n, expected) in cases {
        let got = expectation(n, false);
        let oracle = operator_constant(n);
        let ok = got == expected && as_pair_map(n.len(), &got) == oracle;
        passed &= ok;
        lines.push(format!("{n:?}: {} ({})", hopfset::star::render_kpoly(&got), if ok { "ok" } else { "MISMATCH" }));
    }
    Outcome { passed, detail: format!("{}; {:.1}s", lines.join(", "), t.elapsed().as_secs_f64()) }
}

fn main() {
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        (
            "set-coalgebra coassociativity and counit, all elements |A| ≤ 4 and single-block |A| = 5",
            Box::new(|| timed(Some(BUDGET_SET_COASSOC), || sweep_set_coassoc(&set_sample(4, 5)))),
        ),
        (
            "set-coalgebra conilpotence, index ≤ atom count",
            Box::new(|| timed(None, || vec![sweep_set_nilpotence(&set_sample(4, 5))])),
        ),
        (
            "quotient calculus, exhaustive over |A| ≤ 5",
            Box::new(|| timed(Some(BUDGET_QUOTIENT_CALCULUS), || sweep_quotient_calculus(5))),
        ),
        (
            "forest coassociativity, every forest shape on ≤ 6 points and 200 seeded forests on ≤ 8 points",
            Box::new(|| {
                timed(None, || {
                    let shapes: Vec<Forest> = (1..=6).flat_map(|n| forest_shapes(n, 10)).collect();
                    vec![
                        sweep_forests(&shapes, ForestScope::All),
                        sweep_forests(&random_forests(SEED_FORESTS, 200, 8), ForestScope::Spine),
                        sweep_forest_nilpotence(&(1..=5).flat_map(|n| forest_shapes(n, 10)).collect::<Vec<_>>()),
                    ]
                })
            }),
        ),
        (
            "forest multiplicativity on 500 disjoint-support pairs",
            Box::new(|| timed(None, || vec![sweep_forest_multiplicativity(SEED_MULT, 500)])),
        ),
        (
            "antipode axioms on 50 elements each of the set, forest and matrix algebras",
            Box::new(|| timed(None, || sweep_antipodes(SEED_ANTIPODE, 50))),
        ),
        (
            "matrix coassociativity and (Δ′)^(d−1) = 0, adjacency d ≤ 4 entries ≤ 2, 100 random each d = 3, 4, 5",
            Box::new(|| {
                timed(None, || {
                    let sample = matrix_sample(4, 2, SEED_MATRIX, 100, &[3, 4, 5]).expect("orders within limit");
                    vec![sweep_matrices(&sample).expect("orders within limit")]
                })
            }),
        ),
        (
            "matrix class compatibility Δ(x⊙y) = Δx⊙Δy on 100 pairs, d ≤ 4",
            Box::new(|| timed(None, || vec![sweep_matrix_compat(SEED_COMPAT, 100, 4)])),
        ),
        (
            "star associativity to ℏ^4, all monomial triples of degree ≤ 3 in 3 variables per factor",
            Box::new(|| timed(Some(BUDGET_STAR_ASSOC), || vec![sweep_star_assoc(3, 3, 4)])),
        ),
        ("admissibility theorem for every degree sequence m ≤ 4, n_i ≤ 4", Box::new(criterion_10)),
        ("expectation oracle ⟨z1²⋆z2²⟩ and ⟨z1²⋆z2²⋆z3²⟩", Box::new(criterion_11)),
        (
            "star-quotient coherence on 100 nested instances, m ≤ 5, N ≤ 3",
            Box::new(|| timed(None, || vec![sweep_star_quotient(SEED_QUOTIENT, 100, 5, 3)])),
        ),
        ("unique factorisation on 100 primary forests", Box::new(criterion_13)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!("{} criterion {:>2}: {name} — {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
