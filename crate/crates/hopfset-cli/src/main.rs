//! `hopfset`: command-line front end for the collapsed-set Hopf algebras.
//!
//! Every subcommand prints either canonical text (default) or JSON
//! (`--format json`).  Arguments that carry data accept `@path` to read the
//! value from a file.  Exit codes: 0 ok, 1 usage, 2 invalid input,
//! 3 verification failure, 4 size limit.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hopfset::forest::{labels_of, Forest, ForestCoalgebra, QuoElement};
use hopfset::hopf::{nilpotence_index, Coalgebra, LawReport, LinComb, Q};
use hopfset::matrix::{max_order, parse_labels, MatClass, MatCoalgebra, ZeroDiagMatrix};
use hopfset::nested::{induced_quotient, parse_xi_pair, quotient_by_family, BlockFamily, NestedSet};
use hopfset::set_coalgebra::{SetCoalgebra, SetElement, SetRule};
use hopfset::star::{enumerate_subordinate, expectation, is_admissible, k_monomial, render_kpoly, star_monomials, star_quotient, KMono};
use hopfset::verify::*;
use hopfset::HopfError;
use serde_json::{json, Value};

/// Default seed of every randomized verification.
const DEFAULT_SEED: u64 = 2024;

/// Largest universe accepted by the exhaustive sweeps, per algebra.
const MAX_SET_UNIVERSE: u32 = 5;
const MAX_FOREST_UNIVERSE: u32 = 6;
const MAX_MATRIX_ORDER: u32 = 4;

#[derive(Parser, Debug)]
#[command(name = "hopfset", version, about = "Exact Hopf algebras of collapsed sets, forests, matrices and star products")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Seed for randomized verifications.
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Worker threads for verification sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nested sets and the set coalgebra.
    #[command(subcommand)]
    Set(SetCmd),
    /// Forests of factorisations and their Hopf algebra.
    #[command(subcommand)]
    Forest(ForestCmd),
    /// Zero-diagonal matrices and their Hopf algebra.
    #[command(subcommand)]
    Matrix(MatrixCmd),
    /// Symbolic star products.
    #[command(subcommand)]
    Star(StarCmd),
    /// Law verification sweeps.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
enum SetCmd {
    /// Collapses a family of disjoint blocks inside a nested set.
    Quotient {
        /// Nested set, e.g. `(1 2 3)`.
        #[arg(long)]
        set: String,
        /// Block family, e.g. `((2 3))`.
        #[arg(long)]
        blocks: String,
    },
    /// The induced quotient of a once-collapsed state.
    Induced {
        /// State, e.g. `(1 {2 3})` or `((1)|{(2 3)})`.
        #[arg(long)]
        state: String,
    },
    /// Coproduct of a set-coalgebra element.
    Coproduct {
        /// Element: a state `(1 {2 3})` or a family `((1 2)(3 {4 5}))`.
        #[arg(long)]
        element: String,
        /// Candidate rule.
        #[arg(long, value_enum, default_value_t = RuleArg::Joint)]
        rule: RuleArg,
    },
    /// Counit of a set-coalgebra element.
    Counit {
        #[arg(long)]
        element: String,
    },
    /// Smallest m with (Δ′)^m x = 0.
    Nilpotence {
        #[arg(long)]
        element: String,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RuleArg {
    Joint,
    PerBlock,
    Literal,
}

#[derive(Args, Debug)]
struct ForestArg {
    /// Forest JSON `{"universe":[..],"sets":[[..],..],"universe_is_member":bool}`.
    #[arg(long)]
    forest: String,
}

#[derive(Subcommand, Debug)]
enum ForestCmd {
    /// Checks that the input is a forest and reports its members.
    Validate(ForestArg),
    /// Drops members that are disjoint unions of other members.
    Reduce(ForestArg),
    /// Levels, minimal members and chains.
    Stratify(ForestArg),
    /// Coproduct of a quotient element `((U|I1,I2)(V|))`.
    Delta {
        #[command(flatten)]
        forest: ForestArg,
        #[arg(long)]
        element: String,
    },
    /// Coassociativity, counit and nilpotence over every element of the forest.
    Verify(ForestArg),
}

#[derive(Args, Debug)]
struct MatrixArg {
    /// Matrix JSON `{"d":n,"entries":[[..],..],"labels":[..]}`.
    #[arg(long)]
    matrix: String,
}

#[derive(Subcommand, Debug)]
enum MatrixCmd {
    /// Coproduct of the class of a matrix.
    Delta(MatrixArg),
    /// Collapses a set of labels into one index.
    Collapse {
        #[command(flatten)]
        matrix: MatrixArg,
        /// Labels to collapse, e.g. `1 2`.
        #[arg(long)]
        labels: String,
    },
    /// Canonical representative of the permutation class.
    Canon(MatrixArg),
    /// Block-diagonal product of two classes.
    Odot {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
    },
    /// Coassociativity, counit and nilpotence on one matrix.
    Verify(MatrixArg),
}

#[derive(Args, Debug)]
struct PowersArg {
    /// Exponents n_1,…,n_m of z_1,…,z_m.
    #[arg(long, value_delimiter = ',', required = true)]
    powers: Vec<u32>,
    /// Keep the factors z^n instead of z^n/n!.
    #[arg(long)]
    unnormalized: bool,
}

#[derive(Subcommand, Debug)]
enum StarCmd {
    /// Star product of the monomials z_i^{n_i}, truncated at ℏ^order.
    Expand {
        #[command(flatten)]
        powers: PowersArg,
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Expectation: the sum over subordinate matrices.
    Expect {
        #[command(flatten)]
        powers: PowersArg,
    },
    /// Star product over the atoms of a collapsed state.
    Quotient {
        /// State such as `((3)|{(1 2)})`.
        #[arg(long)]
        state: String,
        #[command(flatten)]
        powers: PowersArg,
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Subordinate adjacency matrices of a degree sequence.
    Enum {
        #[arg(long, value_delimiter = ',', required = true)]
        powers: Vec<u32>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Algebra {
    Set,
    Forest,
    Matrix,
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Every law sweep at the given size.
    All {
        #[arg(long, default_value_t = 4)]
        max_universe: u32,
    },
    /// Coassociativity and counit of one algebra, exhaustively.
    Coassoc {
        #[arg(long, value_enum)]
        algebra: Algebra,
        #[arg(long, default_value_t = 4)]
        max_universe: u32,
    },
}

/// Errors of a command, each with its exit code.
#[derive(Debug)]
enum CliError {
    Invalid(String),
    SizeLimit(String),
}

impl From<HopfError> for CliError {
    fn from(e: HopfError) -> Self {
        match e {
            HopfError::SizeLimit(_) => CliError::SizeLimit(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Rendered result: text, JSON, and whether a verification failed.
struct Output {
    text: String,
    json: Value,
    failed: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { text, json, failed: false }
    }
}

/// Reads `@path` arguments from disk.
fn load(arg: &str) -> CliResult<String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

fn load_json(arg: &str) -> CliResult<Value> {
    let s = load(arg)?;
    serde_json::from_str(&s).map_err(|e| CliError::Invalid(format!("bad JSON: {e}")))
}

fn load_forest(arg: &ForestArg) -> CliResult<Forest> {
    Ok(Forest::from_json_str(&load(&arg.forest)?)?)
}

fn load_matrix(arg: &str) -> CliResult<ZeroDiagMatrix> {
    Ok(ZeroDiagMatrix::from_json(&load_json(arg)?)?)
}

fn check_order(m: &ZeroDiagMatrix) -> CliResult<()> {
    if m.order() > max_order() {
        return Err(CliError::SizeLimit(format!("matrix order {} exceeds the cap {} (HOPFSET_MAX_D)", m.order(), max_order())));
    }
    Ok(())
}

fn tensor_json<B: Ord + Clone, F: Fn(&B) -> Value>(v: &LinComb<(B, B)>, f: F) -> Value {
    Value::Array(v.iter().map(|((l, r), c)| json!({"coeff": c.to_string(), "left": f(l), "right": f(r)})).collect())
}

fn tensor_text<B: Ord + Clone, F: Fn(&B) -> String>(v: &LinComb<(B, B)>, f: F) -> String {
    v.render_with(|(l, r)| format!("{} ⊗ {}", f(l), f(r)))
}

fn class_json(c: &MatClass) -> Value {
    let m = c.representative();
    json!({
        "d": m.order(),
        "entries": m.entries().iter().map(|r| r.iter().map(Q::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn class_text(c: &MatClass) -> String {
    if c.order() == 0 {
        "∅".into()
    } else {
        c.to_string()
    }
}

fn kpoly_json(p: &LinComb<KMono>) -> Value {
    Value::Array(
        p.iter()
            .map(|(m, c)| {
                let ks: serde_json::Map<String, Value> = m.iter().map(|(k, e)| {
                    let (a, b) = k.ends();
                    (format!("{a},{b}"), json!(e))
                }).collect();
                json!({"K": ks, "coeff": c.to_string()})
            })
            .collect(),
    )
}

fn reports_output(reports: Vec<LawReport>) -> Output {
    let failed = reports.iter().any(|r| !r.passed());
    let text = reports
        .iter()
        .map(|r| {
            let mut line = format!("{} {}: {}/{} checks passed", if r.passed() { "PASS" } else { "FAIL" }, r.law, r.total - r.failures.len(), r.total);
            if let Some(f) = r.failures.first() {
                line.push_str(&format!("\n  first failure: {}\n    lhs: {}\n    rhs: {}", f.element, f.lhs, f.rhs));
            }
            line
        })
        .collect::<Vec<_>>()
        .join("\n");
    Output { text, json: serde_json::to_value(&reports).expect("reports serialize"), failed }
}

fn run_set(cmd: SetCmd) -> CliResult<Output> {
    let element = |s: &str| -> CliResult<SetElement> { Ok(load(s)?.trim().parse()?) };
    match cmd {
        SetCmd::Quotient { set, blocks } => {
            let u: NestedSet = load(&set)?.trim().parse()?;
            let fam: BlockFamily = load(&blocks)?.trim().parse()?;
            let q = quotient_by_family(&u, fam.blocks())?;
            Ok(Output::ok(q.to_string(), json!({"set": q.to_string(), "json": q.to_json()})))
        }
        SetCmd::Induced { state } => {
            let s = parse_xi_pair(load(&state)?.trim())?;
            let q = induced_quotient(&s)?;
            Ok(Output::ok(q.to_string(), json!({"set": q.to_string(), "json": q.to_json()})))
        }
        SetCmd::Coproduct { element: e, rule } => {
            let x = element(&e)?;
            let rule = match rule {
                RuleArg::Joint => SetRule::Joint,
                RuleArg::PerBlock => SetRule::PerBlock,
                RuleArg::Literal => SetRule::Literal,
            };
            let d = SetCoalgebra::with_rule(rule).coproduct(&x);
            let show = |s: &SetElement| if s.is_unit() { "∅".to_string() } else { s.to_string() };
            Ok(Output::ok(tensor_text(&d, show), tensor_json(&d, |s| json!(s.to_string()))))
        }
        SetCmd::Counit { element: e } => {
            let c = SetCoalgebra::default().counit(&element(&e)?);
            Ok(Output::ok(c.to_string(), json!(c.to_string())))
        }
        SetCmd::Nilpotence { element: e } => {
            let x = element(&e)?;
            let cap = x.atom_count() + 1;
            let m = nilpotence_index(&SetCoalgebra::default(), &x, cap);
            let text = m.map_or_else(|| format!("not nilpotent within {cap} steps"), |m| m.to_string());
            Ok(Output { text, json: json!({"index": m, "atom_count": x.atom_count()}), failed: m.is_none() })
        }
    }
}

fn run_forest(cmd: ForestCmd) -> CliResult<Output> {
    let sets = |ms: Vec<u64>| ms.into_iter().map(labels_of).collect::<Vec<_>>();
    match cmd {
        ForestCmd::Validate(a) => {
            let f = load_forest(&a)?;
            let json = json!({"valid": true, "primary": f.is_primary(), "members": sets(f.members())});
            let text = format!("valid forest; {} members; primary: {}", f.members().len(), f.is_primary());
            Ok(Output::ok(text, json))
        }
        ForestCmd::Reduce(a) => {
            let r = load_forest(&a)?.primary_reduce();
            Ok(Output::ok(r.to_json().to_string(), r.to_json()))
        }
        ForestCmd::Stratify(a) => {
            let s = load_forest(&a)?.stratify();
            let json = serde_json::to_value(&s).expect("strata serialize");
            let mut lines: Vec<String> = s.levels.iter().enumerate().map(|(k, l)| format!("level {}: {:?}", k + 1, l)).collect();
            lines.push(format!("minimal: {:?}", s.minimal));
            Ok(Output::ok(lines.join("\n"), json))
        }
        ForestCmd::Delta { forest, element } => {
            let f = load_forest(&forest)?;
            let x: QuoElement = load(&element)?.trim().parse()?;
            f.check_element(&x)?;
            let d = ForestCoalgebra::new(f).coproduct(&x);
            Ok(Output::ok(tensor_text(&d, QuoElement::to_string), tensor_json(&d, |e| json!(e.to_string()))))
        }
        ForestCmd::Verify(a) => {
            let f = load_forest(&a)?;
            if f.universe().count_ones() > MAX_FOREST_UNIVERSE + 2 {
                return Err(CliError::SizeLimit(format!("forest verification is limited to {} points", MAX_FOREST_UNIVERSE + 2)));
            }
            let fs = [f];
            let reports = vec![sweep_forests(&fs, ForestScope::All), sweep_forest_nilpotence(&fs)];
            Ok(reports_output(reports))
        }
    }
}

fn run_matrix(cmd: MatrixCmd) -> CliResult<Output> {
    let coalg = MatCoalgebra::default();
    match cmd {
        MatrixCmd::Delta(a) => {
            let m = load_matrix(&a.matrix)?;
            check_order(&m)?;
            let d = coalg.coproduct_matrix(&m)?;
            Ok(Output::ok(tensor_text(&d, class_text), tensor_json(&d, class_json)))
        }
        MatrixCmd::Collapse { matrix, labels } => {
            let m = load_matrix(&matrix.matrix)?;
            let c = m.collapse(&parse_labels(&labels)?)?;
            Ok(Output::ok(c.to_string(), c.to_json()))
        }
        MatrixCmd::Canon(a) => {
            let m = load_matrix(&a.matrix)?;
            check_order(&m)?;
            let c = MatClass::of(&m)?;
            Ok(Output::ok(class_text(&c), class_json(&c)))
        }
        MatrixCmd::Odot { left, right } => {
            let (l, r) = (load_matrix(&left)?, load_matrix(&right)?);
            check_order(&l)?;
            check_order(&r)?;
            let p = MatClass::of(&l)?.odot(&MatClass::of(&r)?)?;
            Ok(Output::ok(class_text(&p), class_json(&p)))
        }
        MatrixCmd::Verify(a) => {
            let m = load_matrix(&a.matrix)?;
            check_order(&m)?;
            Ok(reports_output(vec![sweep_matrices(&[m])?]))
        }
    }
}

fn run_star(cmd: StarCmd) -> CliResult<Output> {
    match cmd {
        StarCmd::Expand { powers, order } => {
            let p = star_monomials(&powers.powers, order, !powers.unnormalized);
            Ok(Output::ok(p.to_string(), p.to_json()))
        }
        StarCmd::Expect { powers } => {
            let e = expectation(&powers.powers, !powers.unnormalized);
            Ok(Output::ok(render_kpoly(&e), kpoly_json(&e)))
        }
        StarCmd::Quotient { state, powers, order } => {
            let s = parse_xi_pair(load(&state)?.trim())?;
            let p = star_quotient(&s, &powers.powers, order, !powers.unnormalized)?;
            Ok(Output::ok(p.to_string(), p.to_json()))
        }
        StarCmd::Enum { powers } => {
            let ms = enumerate_subordinate(&powers);
            let rows = |m: &hopfset::matrix::AdjMatrix| {
                let d = m.matrix().order();
                (0..d).map(|i| (0..d).map(|j| m.entry(i, j)).collect::<Vec<_>>()).collect::<Vec<_>>()
            };
            let json = json!({
                "admissible": is_admissible(&powers),
                "matrices": ms.iter().map(|m| json!({"entries": rows(m), "K": render_kpoly(&LinComb::basis(k_monomial(m)))})).collect::<Vec<_>>(),
            });
            let mut lines = vec![format!("{} subordinate matrices; admissible: {}", ms.len(), !ms.is_empty())];
            lines.extend(ms.iter().map(|m| format!("{:?}", rows(m))));
            Ok(Output::ok(lines.join("\n"), json))
        }
    }
}

fn coassoc_reports(algebra: Algebra, n: u32, seed: u64) -> CliResult<Vec<LawReport>> {
    Ok(match algebra {
        Algebra::Set => {
            if n > MAX_SET_UNIVERSE {
                return Err(CliError::SizeLimit(format!("set sweeps are limited to universes of size {MAX_SET_UNIVERSE}")));
            }
            sweep_set_coassoc(&set_sample(n.min(4), n))
        }
        Algebra::Forest => {
            if n > MAX_FOREST_UNIVERSE {
                return Err(CliError::SizeLimit(format!("forest sweeps are limited to universes of size {MAX_FOREST_UNIVERSE}")));
            }
            vec![sweep_forest_shapes(n, 10, ForestScope::All)]
        }
        Algebra::Matrix => {
            if n > MAX_MATRIX_ORDER {
                return Err(CliError::SizeLimit(format!("matrix sweeps are limited to order {MAX_MATRIX_ORDER}")));
            }
            let sample = matrix_sample(n as usize, 2, seed, 10, &[n.max(2) as usize])?;
            vec![sweep_matrices(&sample)?]
        }
    })
}

fn run_verify(cmd: VerifyCmd, seed: u64) -> CliResult<Output> {
    let reports = match cmd {
        VerifyCmd::Coassoc { algebra, max_universe } => coassoc_reports(algebra, max_universe, seed)?,
        VerifyCmd::All { max_universe: n } => {
            if n > MAX_FOREST_UNIVERSE {
                return Err(CliError::SizeLimit(format!("verify all is limited to universes of size {MAX_FOREST_UNIVERSE}")));
            }
            let set_n = n.min(MAX_SET_UNIVERSE);
            let sample = set_sample(set_n.min(4), set_n);
            let mut r = sweep_set_coassoc(&sample);
            r.push(sweep_set_nilpotence(&sample));
            r.extend(sweep_quotient_calculus(set_n));
            r.push(sweep_forest_shapes(n, 10, ForestScope::All));
            r.push(sweep_forest_nilpotence(&(1..=n.min(4)).flat_map(|k| hopfset::forest::forest_shapes(k, 10)).collect::<Vec<_>>()));
            r.push(sweep_forest_multiplicativity(seed, 100));
            r.push(sweep_factor_union(seed, 50));
            r.extend(sweep_antipodes(seed, 20));
            let d = (n as usize).clamp(2, MAX_MATRIX_ORDER as usize);
            r.push(sweep_matrices(&matrix_sample(d, 2, seed, 10, &[3, 4])?)?);
            r.push(sweep_matrix_compat(seed, 20, d));
            r.push(sweep_star_assoc(2, 2, 3));
            r.push(sweep_admissibility(3, 3));
            r.push(sweep_star_quotient(seed, 50, n.clamp(2, 5), 3));
            r
        }
    };
    Ok(reports_output(reports))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(j) = cli.jobs {
        if j == 0 || rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            eprintln!("error: --jobs must be a positive number of threads");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Set(c) => run_set(c),
        Command::Forest(c) => run_forest(c),
        Command::Matrix(c) => run_matrix(c),
        Command::Star(c) => run_star(c),
        Command::Verify(c) => run_verify(c, cli.seed),
    };
    match result {
        Ok(out) => {
            match cli.format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("JSON output")),
            }
            ExitCode::from(if out.failed { 3 } else { 0 })
        }
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::SizeLimit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
