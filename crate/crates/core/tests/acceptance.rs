//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Tolerances are exact throughout (rational equality); only wall-clock
//! limits are pinned, and those are measured per criterion.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use igusa::count::{counts_up_to, poincare_truncated, CountJob, DEFAULT_BUDGET};
use igusa::example::{check_example, ExampleConfig, Verdict};
use igusa::gf::{FieldConfig, FqElem};
use igusa::hybrid::{diagonalize, make_hybrid_g, pole_real_parts, reduced_factors, theorem_denominator, zeta_hybrid, DiagParams, HybridParams};
use igusa::mvpoly::MultiPoly;
use igusa::newton::{build_polyhedron, candidate_poles, gnd_check, lemma25_data, GndResult};
use igusa::par::Exec;
use igusa::spf::{unit_power_integral, zeta};
use igusa::symb::{ni_from_poincare, parse_ratfun, CharClass, RatFun};
use num_bigint::BigInt;
use num_rational::BigRational;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Literal check failed, but the prescribed escalation settled it.
    Escalated(String),
}

struct Line {
    id: &'static str,
    limit: Duration,
    outcome: Outcome,
    took: Duration,
}

fn run(id: &'static str, limit_s: u64, f: impl FnOnce() -> Outcome) -> Line {
    let t0 = Instant::now();
    let outcome = f();
    Line { id, limit: Duration::from_secs(limit_s), outcome, took: t0.elapsed() }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn field(p: u32, r: u32) -> Arc<FieldConfig> {
    Arc::new(FieldConfig::new(p, r).unwrap())
}

fn example_reproduction() -> Outcome {
    let mut notes = Vec::new();
    let mut literal_ok = false;
    let mut resolved = true;
    for alpha in [1u32, 2] {
        let rep = match check_example(&ExampleConfig { alpha, count_order: 0, ..ExampleConfig::default() }) {
            Ok(r) => r,
            Err(e) => return Outcome::Fail(format!("alpha={alpha}: {e}")),
        };
        let bad: Vec<String> = rep
            .pieces
            .iter()
            .filter(|p| !p.equal)
            .map(|p| format!("A{}(t^{} oracle={:?})", p.piece, p.first_difference.unwrap_or(0), p.oracle.unwrap_or(Verdict::Undecided)))
            .collect();
        literal_ok |= bad.is_empty();
        if alpha == 1 {
            resolved &= rep.mismatches_resolved();
        }
        notes.push(format!("alpha={alpha}: {}/7 equal{}", 7 - bad.len(), if bad.is_empty() { String::new() } else { format!(", differ: {}", bad.join(" ")) }));
    }
    let msg = notes.join("; ");
    if literal_ok {
        Outcome::Pass(msg)
    } else if resolved {
        Outcome::Escalated(format!("{msg}; every alpha=1 mismatch decided for the computed side by the region oracle"))
    } else {
        Outcome::Fail(msg)
    }
}

fn oracle_agreement(level: usize, exec: Exec) -> Outcome {
    let q = 3u32;
    let qr = BigRational::from_integer(BigInt::from(q));
    let mut parts = Vec::new();
    for alpha in [1u32, 2] {
        let f = field(3, 1);
        let a = if alpha == 2 { FqElem(2) } else { FqElem::ONE };
        let d = DiagParams::new(f.clone(), 4, 2, a, FqElem::ONE).unwrap();
        let z = zeta_hybrid(&d, &CharClass::trivial(q), exec).unwrap().total;
        let g = d.poly();
        let pc = poincare_truncated(&g, level, DEFAULT_BUDGET, exec).unwrap();
        let ps = z.poincare_from_zeta().unwrap().expand_series(&qr, level).unwrap();
        // Level-set measures mu{ord f = i} = P_i - P_{i+1}.
        let zs = z.expand_series(&qr, level - 1).unwrap();
        let level_sets: Vec<BigRational> = (0..level).map(|i| &pc[i] - &pc[i + 1]).collect();
        if ps != pc || zs != level_sets {
            return Outcome::Fail(format!("alpha={alpha}: series {ps:?} vs counts {pc:?}"));
        }
        parts.push(format!("alpha={alpha} ok"));
    }
    let f = MultiPoly::parse(field(3, 1), "x^3+y^4*z^2+z^6").unwrap();
    let counts = counts_up_to(&f, level, DEFAULT_BUDGET, exec).unwrap();
    Outcome::Pass(format!("N_0..N_{level} = {counts:?}; {}", parts.join(", ")))
}

const SWEEP: [(u32, u32, u32); 6] = [(3, 4, 2), (3, 7, 2), (3, 2, 4), (5, 3, 2), (5, 8, 2), (5, 2, 3)];

fn sweep_totals() -> Vec<(DiagParams, RatFun)> {
    SWEEP
        .iter()
        .map(|&(p, n, l)| {
            let d = DiagParams::new(field(p, 1), n, l, FqElem::ONE, FqElem::ONE).unwrap();
            let z = zeta_hybrid(&d, &CharClass::trivial(p), Exec::Parallel).unwrap().total;
            (d, z)
        })
        .collect()
}

fn denominator_divisibility(totals: &[(DiagParams, RatFun)]) -> Outcome {
    let mut desc = Vec::new();
    for (d, z) in totals {
        let allowed = theorem_denominator(d);
        let got = reduced_factors(z, d.p());
        if let Some(extra) = got.iter().find(|f| !allowed.contains(f)) {
            return Outcome::Fail(format!("(p,n,l)=({},{},{}): factor {extra:?} not in {allowed:?}", d.p(), d.n, d.l));
        }
        desc.push(format!("({},{},{}):{got:?}", d.p(), d.n, d.l));
    }
    Outcome::Pass(desc.join(" "))
}

fn pole_subset(totals: &[(DiagParams, RatFun)]) -> Outcome {
    let mut extra_seen = Vec::new();
    for (d, z) in totals {
        let (p, n, l) = (d.p() as i64, d.n as i64, d.l as i64);
        let allowed = [rat(-1, 1), -rat(1, p) - rat(2, n + l), -rat(1, p) - rat(1, n), -rat(1, p) - rat(1, l)];
        for re in pole_real_parts(z, d.p()) {
            if !allowed.contains(&re) {
                return Outcome::Fail(format!("(p,n,l)=({p},{n},{l}): pole {re} outside the predicted list"));
            }
            if re == allowed[3] && re != allowed[1] && re != allowed[2] {
                extra_seen.push(format!("({p},{n},{l})"));
            }
        }
    }
    if extra_seen.is_empty() {
        Outcome::Fail("no parameter set shows the -1/p-1/l pole".into())
    } else {
        Outcome::Pass(format!("-1/p-1/l present for {}", extra_seen.join(" ")))
    }
}

fn unit_power_lemma() -> Outcome {
    let mut cases = 0;
    let one_minus_u = parse_ratfun("1-u", 1).unwrap();
    for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
        let f = FieldConfig::new(p, r).unwrap();
        let q = f.q();
        for e in 0..(q - 1).max(1) {
            let chi = CharClass::new(q, e as i64);
            for m in 1..=12u32 {
                let got = unit_power_integral(&f, m, &chi);
                let want = if (e * m) % (q - 1) == 0 { one_minus_u.clone() } else { RatFun::zero(1) };
                if !got.eq_at(&want, q) {
                    return Outcome::Fail(format!("q={q} e={e} m={m}"));
                }
                cases += 1;
            }
        }
    }
    Outcome::Pass(format!("{cases} (q, e, m) cases"))
}

fn spf_corpus() -> Outcome {
    let mut checked = 0;
    for p in [2u32, 3, 5] {
        let f = field(p, 1);
        let corpus = ["x^2".to_string(), "x^3".into(), "x^2+y^3".into(), "x^2+y^5".into(), "x*y".into(), "x^2*y".into(), format!("x^{p}+y^{p}"), format!("x^{p}+y^{}", p + 1), format!("x^{p}+pi*y")];
        for src in &corpus {
            let g = MultiPoly::parse(f.clone(), src).unwrap();
            let z = match zeta(&g, &CharClass::trivial(p)) {
                Ok(z) => z,
                Err(e) => return Outcome::Fail(format!("{src} over F_{p}: {e}")),
            };
            let pz = z.poincare_from_zeta().unwrap();
            let counts = counts_up_to(&g, 4, DEFAULT_BUDGET, Exec::Parallel).unwrap();
            for (i, &n) in counts.iter().enumerate() {
                if ni_from_poincare(&pz, p, g.nvars() as u32, i).unwrap() != BigInt::from(n) {
                    return Outcome::Fail(format!("{src} over F_{p}: N_{i}"));
                }
            }
            checked += 1;
        }
    }
    Outcome::Pass(format!("{checked} polynomials to level 4"))
}

fn newton_properties() -> Outcome {
    for i0 in 2..=12u32 {
        for j0 in 2..=12u32 {
            let nd = build_polyhedron(&[vec![i0, 0], vec![0, j0]], 2).unwrap();
            let mut got: Vec<BigRational> = candidate_poles(&nd).into_iter().map(|c| c.real_part).collect();
            let mut want = lemma25_data(i0, j0);
            got.sort();
            got.dedup();
            want.sort();
            want.dedup();
            if got != want {
                return Outcome::Fail(format!("(i0,j0)=({i0},{j0}): {got:?} vs {want:?}"));
            }
        }
    }
    let f3 = field(3, 1);
    let kernel = MultiPoly::parse(f3, "pi^4*x^3 + y^2 + pi^4*y^6").unwrap();
    if !matches!(gnd_check(&kernel, 3), Ok(GndResult::NonDegenerate { .. })) {
        return Outcome::Fail("kernel not accepted".into());
    }
    let planted = MultiPoly::parse(field(5, 1), "(x - y)^2 + x^3").unwrap();
    if !matches!(gnd_check(&planted, 3), Ok(GndResult::DegenerateWitness { .. })) {
        return Outcome::Fail("planted degenerate example not rejected".into());
    }
    Outcome::Pass("121 two-term supports; kernel accepted; planted example rejected".into())
}

fn diagonalization_invariance() -> Outcome {
    let f = field(3, 1);
    let mut n = 0;
    for (k, l) in [(3u32, 2u32), (1, 4), (6, 2), (4, 4), (3, 5), (7, 4)] {
        for t in [1u32, 2] {
            let hp = match HybridParams::new(f.clone(), k, l, FqElem(t)) {
                Ok(h) => h,
                Err(e) => return Outcome::Fail(format!("(k,l,t)=({k},{l},{t}): {e}")),
            };
            let g = make_hybrid_g(&hp);
            let (diag, _) = match diagonalize(&g, &hp) {
                Ok(x) => x,
                Err(e) => return Outcome::Fail(format!("(k,l,t)=({k},{l},{t}): {e}")),
            };
            for i in 1..=3 {
                let a = igusa::count::count_ni(&CountJob::new(g.clone(), i)).unwrap().n_i;
                let b = igusa::count::count_ni(&CountJob::new(diag.clone(), i)).unwrap().n_i;
                if a != b {
                    return Outcome::Fail(format!("(k,l,t)=({k},{l},{t}) level {i}: {a} vs {b}"));
                }
            }
            n += 1;
        }
    }
    Outcome::Pass(format!("{n} (k, l, t) triples, identity and N_1..N_3"))
}

fn main() -> ExitCode {
    let mut lines = vec![
        run("1 example reproduction", 10, example_reproduction),
        run("2 oracle agreement (i <= 4, single-threaded)", 60, || oracle_agreement(4, Exec::Sequential)),
    ];
    if cfg!(feature = "long-tests") {
        lines.push(run("2 oracle agreement (i = 5, 4 workers)", 300, || oracle_agreement(5, Exec::Threads(4))));
    }
    let t0 = Instant::now();
    let totals = sweep_totals();
    let sweep_time = t0.elapsed();
    let mut c3 = run("3 denominator divisibility", 120, || denominator_divisibility(&totals));
    c3.took += sweep_time;
    lines.push(c3);
    let mut c4 = run("4 pole subset and extra pole", 60, || pole_subset(&totals));
    c4.took += sweep_time;
    lines.push(c4);
    lines.push(run("5 unit power integral", 10, unit_power_lemma));
    lines.push(run("6 spf corpus", 120, spf_corpus));
    lines.push(run("7 newton properties", 30, newton_properties));
    lines.push(run("8 diagonalization invariance", 120, diagonalization_invariance));

    let mut failed = false;
    for l in &lines {
        let slow = l.took > l.limit;
        let (tag, msg) = match &l.outcome {
            Outcome::Pass(m) if !slow => ("PASS", m.as_str()),
            Outcome::Pass(m) => ("FAIL", m.as_str()),
            Outcome::Escalated(m) => ("FAIL (literal; escalated)", m.as_str()),
            Outcome::Fail(m) => ("FAIL", m.as_str()),
        };
        let time = format!("{:.2}s/{}s", l.took.as_secs_f64(), l.limit.as_secs());
        println!("[{tag}] criterion {} [{time}{}]: {msg}", l.id, if slow { ", over limit" } else { "" });
        failed |= matches!(l.outcome, Outcome::Fail(_)) || (matches!(l.outcome, Outcome::Pass(_)) && slow);
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
