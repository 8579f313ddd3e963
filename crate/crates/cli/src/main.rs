//! `igusa`: command-line front end for the igusa-core library.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use igusa::count::{CountError, CountJob, DEFAULT_BUDGET};
use igusa::example::{check_example, ExampleConfig, ExampleError, ExampleReport, Verdict};
use igusa::gf::FieldConfig;
use igusa::hybrid::{diagonalize, make_hybrid_g, pole_real_parts, reduced_factors, theorem_denominator, theorem_poles, zeta_hybrid, HybridError, HybridParams};
use igusa::mvpoly::MultiPoly;
use igusa::newton::{candidate_poles, gnd_check, newton_of_poly, GndResult, PoleSource};
use igusa::par::Exec;
use igusa::spf::{Domain, SpfError, Solver};
use igusa::symb::{ratfun_to_json, render_ratfun, CharClass, RatFun, RenderStyle};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: u32 = 1;
const GOLDEN: &str = include_str!("../../core/data/hybrid_p3_k3_l2.json");

#[derive(Parser, Debug)]
#[command(name = "igusa", version, about = "Igusa local zeta functions over F_q((pi))")]
struct Cli {
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for exhaustive loops (0 = rayon default, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    p: u32,
    /// Degree of the residue field over F_p.
    #[arg(long, default_value_t = 1)]
    r: u32,
    /// Monic irreducible modulus in `a`, e.g. "a^2+1".
    #[arg(long)]
    modulus: Option<String>,
}

impl FieldArgs {
    fn build(&self) -> anyhow::Result<Arc<FieldConfig>> {
        let mut spec = format!("p={} r={}", self.p, self.r);
        if let Some(m) = &self.modulus {
            spec.push_str(&format!(" modulus={}", m.replace(' ', "")));
        }
        Ok(Arc::new(spec.parse::<FieldConfig>().map_err(|e| usage(format!("--p/--r/--modulus: {e}")))?))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Style {
    Ut,
    #[value(name = "q-s", alias = "qs")]
    #[serde(rename = "q-s")]
    QS,
}

impl From<Style> for RenderStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::Ut => RenderStyle::Ut,
            Style::QS => RenderStyle::QS,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Emit {
    Zeta,
    Pieces,
    Poles,
    Poincare,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Exhaustive solution count N_i of f = 0 mod pi^i.
    Count {
        #[command(flatten)]
        #[serde(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        level: usize,
        /// Evaluation budget (IGUSA_BUDGET overrides the default).
        #[arg(long)]
        budget: Option<u64>,
        /// Use the x^p fibre shortcut (first variable must occur only as c*x^p).
        #[arg(long)]
        structured: bool,
    },
    /// Zeta function of a polynomial on a residue-box domain.
    Zeta {
        #[command(flatten)]
        #[serde(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        /// Comma-separated per-coordinate sets: any, unit, zero, c:<elem>.
        #[arg(long, default_value = "any")]
        domain: String,
        /// Character exponent e (chi(g^j) = zeta^(e j)).
        #[arg(long, default_value_t = 0)]
        char_exp: i64,
        #[arg(long, value_enum, default_value = "ut")]
        style: Style,
        #[arg(long, default_value_t = 64)]
        max_depth: usize,
    },
    /// The three-variable hybrid family through its seven-piece decomposition.
    Hybrid {
        #[command(flatten)]
        #[serde(flatten)]
        field: FieldArgs,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        /// Unit constant t, as an F_q element.
        #[arg(long, default_value = "1")]
        t: String,
        #[arg(long, default_value_t = 0)]
        char_exp: i64,
        #[arg(long, value_enum, default_value = "zeta")]
        emit: Emit,
        #[arg(long, value_enum, default_value = "ut")]
        style: Style,
        /// Series order for `--emit poincare`.
        #[arg(long, default_value_t = 6)]
        order: usize,
    },
    /// Newton polyhedron, candidate poles and the non-degeneracy check.
    Newton {
        #[command(flatten)]
        #[serde(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        /// Largest extension degree searched for degenerate torus points.
        #[arg(long, default_value_t = 3)]
        max_ext: u32,
    },
    /// Recomputes the worked p = 3, k = 3, l = 2 example and compares it with
    /// its printed pieces and the stored golden output.
    CheckExample {
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Sign of the y^4 z^2 coefficient to test: 1, 2 or both.
        #[arg(long, default_value = "both")]
        alpha: String,
        /// Precision of the per-piece brute-force oracle (0 disables it).
        #[arg(long, default_value_t = 3)]
        oracle_prec: usize,
        /// Highest level of the total-versus-counts check (0 disables it).
        #[arg(long, default_value_t = 3)]
        count_order: usize,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Limit(anyhow::Error),
    Other(anyhow::Error),
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn classify(e: anyhow::Error) -> Failure {
    let limit = e.chain().any(|c| {
        matches!(c.downcast_ref::<SpfError>(), Some(SpfError::NonTerminating { .. }))
            || matches!(c.downcast_ref::<CountError>(), Some(CountError::BudgetExceeded { .. }))
            || matches!(c.downcast_ref::<HybridError>(), Some(HybridError::Spf(SpfError::NonTerminating { .. })))
            || matches!(
                c.downcast_ref::<ExampleError>(),
                Some(ExampleError::Count(CountError::BudgetExceeded { .. }) | ExampleError::Hybrid(HybridError::Spf(SpfError::NonTerminating { .. })))
            )
    });
    if limit {
        Failure::Limit(e)
    } else if e.chain().any(|c| c.downcast_ref::<UsageError>().is_some() || c.downcast_ref::<HybridError>().is_some_and(|h| matches!(h, HybridError::ConstraintViolated(_)))) {
        Failure::Usage(e)
    } else {
        Failure::Other(e)
    }
}

fn exec_for(threads: usize) -> Exec {
    match threads {
        0 => Exec::Parallel,
        1 => Exec::Sequential,
        n => Exec::Threads(n),
    }
}

fn budget(flag: Option<u64>) -> anyhow::Result<u64> {
    match std::env::var("IGUSA_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("IGUSA_BUDGET must be a nonnegative integer, got '{v}'"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_BUDGET)),
    }
}

fn parse_poly(field: &Arc<FieldConfig>, src: &str) -> anyhow::Result<MultiPoly> {
    MultiPoly::parse(field.clone(), src).map_err(|e| usage(format!("--poly: {e} (grammar: x, y, z or x1..x8, pi, constants in a, + * ^)")))
}

/// Rendered at its canonical form for this `q`; the exact encoding is kept alongside.
fn ratfun_doc(z: &RatFun, q: u32, style: Style) -> Value {
    let c = z.canonical_at(q);
    json!({ "text": render_ratfun(&c, style.into()), "exact": ratfun_to_json(&c) })
}

fn rational_text(r: &num_rational::BigRational) -> String {
    r.to_string()
}

fn run_count(field: &FieldArgs, poly: &str, level: usize, flag: Option<u64>, structured: bool, exec: Exec) -> anyhow::Result<Value> {
    let fc = field.build()?;
    let f = parse_poly(&fc, poly)?;
    let budget = budget(flag)?;
    let job = CountJob { poly: f, level, budget, structured, exec };
    let r = igusa::count::count_ni(&job).map_err(|e| match e {
        CountError::WrongShape => usage(format!("--structured: {e}")),
        other => anyhow!(other),
    })?;
    Ok(json!({ "level": r.level, "n_i": r.n_i, "evaluations": r.evals, "budget": budget }))
}

fn run_zeta(field: &FieldArgs, poly: &str, domain: &str, char_exp: i64, style: Style, max_depth: usize) -> anyhow::Result<Value> {
    let fc = field.build()?;
    let f = parse_poly(&fc, poly)?;
    let d = Domain::parse(&fc, domain, f.nvars()).map_err(|e| usage(format!("--domain: {e} (grammar: any|unit|zero|c:<elem>, comma-separated)")))?;
    let chi = CharClass::new(fc.q(), char_exp);
    let mut solver = Solver::new(fc.clone(), chi).with_max_depth(max_depth);
    let z = solver.solve(&f, &d)?;
    let s = &solver.stats;
    Ok(json!({
        "zeta": ratfun_doc(&z, fc.q(), style),
        "poles": pole_real_parts(&z, fc.q()).iter().map(rational_text).collect::<Vec<_>>(),
        "stats": { "nodes": s.nodes, "closures": s.closures, "memo_hits": s.memo_hits, "max_depth": s.max_depth_seen },
    }))
}

#[allow(clippy::too_many_arguments)]
fn run_hybrid(field: &FieldArgs, k: u32, l: u32, t: &str, char_exp: i64, emit: Emit, style: Style, order: usize, exec: Exec) -> anyhow::Result<Value> {
    let fc = field.build()?;
    let t = fc.parse_elem(t).map_err(|e| usage(format!("--t: {e}")))?;
    let hp = HybridParams::new(fc.clone(), k, l, t)?;
    let g = make_hybrid_g(&hp);
    let (diag, d) = diagonalize(&g, &hp)?;
    let chi = CharClass::new(fc.q(), char_exp);
    let z = zeta_hybrid(&d, &chi, exec)?;
    let header = json!({
        "g": g.to_string(),
        "diagonalized": diag.to_string(),
        "n": d.n, "l": d.l, "omega": d.omega(),
        "alpha": fc.render(d.alpha), "beta": fc.render(d.beta),
    });
    let body = match emit {
        Emit::Zeta => json!({ "zeta": ratfun_doc(&z.total, fc.q(), style) }),
        Emit::Pieces => {
            let mut m = serde_json::Map::new();
            for (i, p) in z.pieces.iter().enumerate() {
                m.insert(format!("A{}", i + 1), ratfun_doc(p, fc.q(), style));
            }
            json!({ "pieces": m, "zeta": ratfun_doc(&z.total, fc.q(), style) })
        }
        Emit::Poles => {
            let predicted: Vec<Value> = theorem_poles(&d)
                .iter()
                .map(|c| json!({ "real_part": rational_text(&c.real_part), "period": c.period }))
                .collect();
            json!({
                "reduced_denominator": reduced_factors(&z.total, fc.q()),
                "predicted_denominator": theorem_denominator(&d),
                "poles": pole_real_parts(&z.total, fc.q()).iter().map(rational_text).collect::<Vec<_>>(),
                "predicted_poles": predicted,
            })
        }
        Emit::Poincare => {
            if !chi.is_trivial() {
                return Err(usage("--emit poincare needs the trivial character (--char-exp 0)"));
            }
            let q = num_rational::BigRational::from_integer(fc.q().into());
            let p = z.total.poincare_from_zeta()?;
            let series = p.expand_series(&q, order)?;
            let n: Vec<String> = (0..=order).map(|i| igusa::symb::ni_from_poincare(&p, fc.q(), 3, i).map(|v| v.to_string())).collect::<Result<_, _>>()?;
            json!({ "poincare": ratfun_doc(&p, fc.q(), style), "series": series.iter().map(rational_text).collect::<Vec<_>>(), "n_i": n })
        }
    };
    let mut out = header;
    out.as_object_mut().unwrap().extend(body.as_object().unwrap().clone());
    Ok(out)
}

fn run_newton(field: &FieldArgs, poly: &str, max_ext: u32) -> anyhow::Result<Value> {
    let fc = field.build()?;
    let f = parse_poly(&fc, poly)?;
    let nd = newton_of_poly(&f).map_err(|e| usage(format!("--poly: {e}")))?;
    let facets: Vec<Value> = nd.facets.iter().map(|f| json!({ "normal": f.normal, "m": f.m })).collect();
    let poles: Vec<Value> = candidate_poles(&nd)
        .iter()
        .map(|c| {
            let src = match &c.source {
                PoleSource::Facet(n) => json!(n),
                PoleSource::TrivialBranch => json!("trivial"),
            };
            json!({ "real_part": rational_text(&c.real_part), "period": c.period, "source": src })
        })
        .collect();
    let gnd = match gnd_check(&f, max_ext).map_err(|e| usage(format!("--poly: {e}")))? {
        GndResult::NonDegenerate { checked_up_to } => json!({ "result": "non-degenerate", "checked_up_to": checked_up_to }),
        GndResult::OriginNonsingular => json!({ "result": "origin-nonsingular" }),
        GndResult::DegenerateWitness { face, degree, point } => json!({ "result": "degenerate", "face": face, "degree": degree, "point": point }),
    };
    Ok(json!({ "generators": nd.generators, "facets": facets, "candidate_poles": poles, "gnd": gnd }))
}

/// Golden entries keyed by alpha: computed pieces rendered in `ut` style.
fn golden_pieces(alpha: u32) -> anyhow::Result<Vec<String>> {
    let v: Value = serde_json::from_str(GOLDEN).context("golden file")?;
    let arr = v["computed"][alpha.to_string()].as_array().cloned().unwrap_or_default();
    Ok(arr.iter().filter_map(|s| s.as_str().map(str::to_string)).collect())
}

fn print_table(rep: &ExampleReport, golden: &[String]) {
    eprintln!("alpha = {} (q = {})", rep.alpha, rep.q);
    eprintln!("  piece  printed  golden  first-diff  oracle");
    for p in &rep.pieces {
        let g = golden.get(p.piece - 1).map(|s| *s == p.computed);
        let diff = p.first_difference.map(|k| format!("t^{k}")).unwrap_or_else(|| "-".into());
        let oracle = match p.oracle {
            None => "-",
            Some(Verdict::Computed) => "computed",
            Some(Verdict::Printed) => "printed",
            Some(Verdict::Neither) => "neither",
            Some(Verdict::Undecided) => "undecided",
        };
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        eprintln!("  A{}     {:7}  {:6}  {:10}  {}", p.piece, mark(p.equal), g.map_or("-", mark), diff, oracle);
    }
    if let Some(ok) = rep.total_matches_counts {
        eprintln!("  total vs counts to level {}: {}", rep.count_order, if ok { "pass" } else { "FAIL" });
    }
}

fn run_check_example(r: u32, alpha: &str, oracle_prec: usize, count_order: usize, exec: Exec) -> anyhow::Result<(Value, bool)> {
    let alphas: Vec<u32> = match alpha {
        "1" => vec![1],
        "2" | "-1" => vec![2],
        "both" => vec![1, 2],
        other => return Err(usage(format!("--alpha: expected 1, 2 or both, got '{other}'"))),
    };
    let mut reports = Vec::new();
    let mut ok = true;
    for a in alphas {
        let cfg = ExampleConfig { r, alpha: a, oracle_prec, count_order, budget: budget(None)?, exec };
        let rep = check_example(&cfg)?;
        let golden = if r == 1 { golden_pieces(a)? } else { Vec::new() };
        print_table(&rep, &golden);
        // No golden entry (other r, or a fresh checkout being regenerated) is not a failure.
        let golden_ok = (!golden.is_empty()).then(|| golden.len() == 7 && rep.pieces.iter().zip(&golden).all(|(p, g)| p.computed == *g));
        ok &= golden_ok != Some(false) && rep.total_matches_counts != Some(false);
        let mut v = serde_json::to_value(&rep)?;
        v["golden_match"] = json!(golden_ok);
        reports.push(v);
    }
    Ok((json!({ "reports": reports }), ok))
}

fn dispatch(cli: &Cli) -> anyhow::Result<(Value, bool)> {
    let exec = exec_for(cli.threads);
    let one = |v: anyhow::Result<Value>| v.map(|v| (v, true));
    match &cli.cmd {
        Command::Count { field, poly, level, budget, structured } => one(run_count(field, poly, *level, *budget, *structured, exec)),
        Command::Zeta { field, poly, domain, char_exp, style, max_depth } => one(run_zeta(field, poly, domain, *char_exp, *style, *max_depth)),
        Command::Hybrid { field, k, l, t, char_exp, emit, style, order } => one(run_hybrid(field, *k, *l, t, *char_exp, *emit, *style, *order, exec)),
        Command::Newton { field, poly, max_ext } => one(run_newton(field, poly, *max_ext)),
        Command::CheckExample { r, alpha, oracle_prec, count_order } => run_check_example(*r, alpha, *oracle_prec, *count_order, exec),
    }
}

fn emit(cli: &Cli, doc: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)? + "\n";
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = json!({ "command": cli.cmd, "threads": cli.threads, "budget_env": std::env::var("IGUSA_BUDGET").ok() });
    let result = dispatch(&cli);
    let (code, doc) = match result {
        Ok((v, ok)) => (if ok { 0 } else { 1 }, json!({ "schema": SCHEMA, "config": config, "ok": ok, "result": v })),
        Err(e) => {
            let (code, kind) = match classify(e) {
                Failure::Usage(e) => (2, ("validation", e)),
                Failure::Limit(e) => (3, ("limit", e)),
                Failure::Other(e) => (1, ("error", e)),
            };
            eprintln!("igusa: {:#}", kind.1);
            (code, json!({ "schema": SCHEMA, "config": config, "ok": false, "error": { "kind": kind.0, "message": format!("{:#}", kind.1) } }))
        }
    };
    if let Err(e) = emit(&cli, &doc) {
        eprintln!("igusa: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
