//! Hybrid polynomials `x^p + y z^l sum_i C(k+1, i+1) y^i (t z - y)^(k-i)`,
//! their diagonal form `x^p + alpha y^n z^l + beta z^(n+l)`, and the
//! seven-piece decomposition of `O^3` that computes their zeta function.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::gf::{FieldConfig, FqElem};
use crate::mvpoly::{LinearMap, MultiPoly, MvError, PiPoly};
use crate::newton::{CandidatePole, PoleSource};
use crate::par::{map_vec, Exec};
use crate::spf::{split_unit_variable, Domain, SpfError, Solver, DEFAULT_MAX_DEPTH};
use crate::symb::{CharClass, CycInt, RatFun};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HybridError {
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("diagonalization identity failed: got {got}, expected {expected}")]
    IdentityFailed { got: String, expected: String },
    #[error("pipeline step produced an unexpected shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Spf(#[from] SpfError),
    #[error(transparent)]
    Poly(#[from] MvError),
}

fn violated(msg: impl Into<String>) -> HybridError {
    HybridError::ConstraintViolated(msg.into())
}

/// Parameters of the three-variable hybrid polynomial with `r = 1`.
#[derive(Clone, Debug)]
pub struct HybridParams {
    pub field: Arc<FieldConfig>,
    pub k: u32,
    pub l: u32,
    /// A unit constant, so `t^(k+1)` is automatically a `p`-th power.
    pub t: FqElem,
}

impl HybridParams {
    pub fn new(field: Arc<FieldConfig>, k: u32, l: u32, t: FqElem) -> Result<Self, HybridError> {
        let p = field.p();
        if k == 0 {
            return Err(violated("k must be positive"));
        }
        if l <= 1 {
            return Err(violated(format!("l > 1 is required (got l = {l})")));
        }
        if l.is_multiple_of(p) {
            return Err(violated(format!("p does not divide l (p = {p}, l = {l})")));
        }
        if !(1 + l + k).is_multiple_of(p) {
            return Err(violated(format!("p divides 1 + l + k (p = {p}, 1 + l + k = {})", 1 + l + k)));
        }
        if 1 + l % p > p {
            return Err(violated("residues of r and l add up to at most p"));
        }
        if t.is_zero() || t.0 >= field.q() {
            return Err(violated("t must be a nonzero element of F_q"));
        }
        Ok(HybridParams { field, k, l, t })
    }

    pub fn diagonal(&self) -> DiagParams {
        let f = &self.field;
        let alpha = if self.k.is_multiple_of(2) { FqElem::ONE } else { f.neg(FqElem::ONE) };
        DiagParams { field: f.clone(), n: self.k + 1, l: self.l, alpha, beta: f.pow(self.t, self.k as u64 + 1) }
    }
}

/// Parameters of `x^p + alpha y^n z^l + beta z^(n+l)`.
#[derive(Clone, Debug)]
pub struct DiagParams {
    pub field: Arc<FieldConfig>,
    pub n: u32,
    pub l: u32,
    pub alpha: FqElem,
    pub beta: FqElem,
}

impl DiagParams {
    pub fn new(field: Arc<FieldConfig>, n: u32, l: u32, alpha: FqElem, beta: FqElem) -> Result<Self, HybridError> {
        let p = field.p();
        if n == 0 {
            return Err(violated("n must be positive"));
        }
        if l <= 1 {
            return Err(violated(format!("l > 1 is required (got l = {l})")));
        }
        if l.is_multiple_of(p) {
            return Err(violated(format!("p does not divide l (p = {p}, l = {l})")));
        }
        if !(n + l).is_multiple_of(p) {
            return Err(violated(format!("p divides n + l (p = {p}, n + l = {})", n + l)));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if v.is_zero() || v.0 >= field.q() {
                return Err(violated(format!("{name} must be a unit of F_q")));
            }
        }
        Ok(DiagParams { field, n, l, alpha, beta })
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    /// `(n + l) / p`.
    pub fn omega(&self) -> u32 {
        (self.n + self.l) / self.p()
    }

    pub fn poly(&self) -> MultiPoly {
        let f = &self.field;
        let (p, n, l) = (self.p(), self.n, self.l);
        let mut terms = BTreeMap::new();
        terms.insert(vec![p, 0, 0], PiPoly::one());
        terms.insert(vec![0, n, l], PiPoly::constant(self.alpha));
        terms.insert(vec![0, 0, n + l], PiPoly::constant(self.beta));
        MultiPoly::from_terms(f.clone(), 3, terms).expect("three variables")
    }
}

fn binom_mod(n: u32, k: u32, f: &FieldConfig) -> FqElem {
    let mut c = BigInt::from(1);
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    let p = BigInt::from(f.p());
    let r = ((c % &p) + &p) % &p;
    f.from_int(i64::try_from(r).unwrap())
}

/// The hybrid polynomial itself, expanded exactly.
pub fn make_hybrid_g(params: &HybridParams) -> MultiPoly {
    let f = params.field.clone();
    let var = |i| MultiPoly::var(f.clone(), 3, i).unwrap();
    let (x, y, z) = (var(0), var(1), var(2));
    let tz_minus_y = z.scale(&PiPoly::constant(params.t)).sub(&y).unwrap();
    let mut sum = MultiPoly::zero(f.clone(), 3).unwrap();
    for i in 0..=params.k {
        let c = binom_mod(params.k + 1, i + 1, &f);
        if c.is_zero() {
            continue;
        }
        let term = y.pow(i).mul(&tz_minus_y.pow(params.k - i)).unwrap().scale(&PiPoly::constant(c));
        sum = sum.add(&term).unwrap();
    }
    let lead = y.mul(&z.pow(params.l)).unwrap();
    x.pow(f.p()).add(&lead.mul(&sum).unwrap()).unwrap()
}

/// Applies `(x, y, z) -> (x, t z + y, z)` and checks the result against the
/// diagonal form.
pub fn diagonalize(g: &MultiPoly, params: &HybridParams) -> Result<(MultiPoly, DiagParams), HybridError> {
    let f = &params.field;
    let mut map = LinearMap::identity(3);
    map.matrix[1][2] = PiPoly::constant(params.t);
    let got = g.substitute_linear(&map)?;
    let d = params.diagonal();
    let want = d.poly();
    if got != want {
        return Err(HybridError::IdentityFailed { got: got.to_string(), expected: want.to_string() });
    }
    let _ = f;
    Ok((got, d))
}

/// Which of the seven sets a triple of orders belongs to (0 for the
/// self-similar set `ord x >= omega, ord y >= 1, ord z >= 1`).
pub fn classify_orders(ox: u32, oy: u32, oz: u32, omega: u32) -> usize {
    let y0 = oy == 0;
    let z0 = oz == 0;
    match (ox >= omega, y0, z0) {
        (true, false, false) => 0,
        (true, true, false) => 1,
        (true, false, true) => 2,
        (true, true, true) => 3,
        (false, false, false) => 4,
        (false, true, false) => 5,
        (false, false, true) => 6,
        (false, true, true) => 7,
    }
}

/// One integral of the decomposition: `u^(sum e) * Z_{f o T_e}` on a residue box.
#[derive(Clone, Debug)]
struct Job {
    piece: usize,
    exps: [u32; 3],
    domain: [Residues; 3],
    /// Factor out this variable first (it ranges over units) with the given weights.
    split: Option<(usize, [u32; 3])>,
}

#[derive(Clone, Copy, Debug)]
enum Residues {
    Any,
    Unit,
}

fn jobs(d: &DiagParams) -> Vec<Job> {
    use Residues::{Any, Unit};
    let w = d.omega();
    let mut out = vec![
        Job { piece: 1, exps: [w, 0, 1], domain: [Any, Unit, Any], split: Some((1, [w, 0, 1])) },
        Job { piece: 2, exps: [w, 1, 0], domain: [Any, Any, Unit], split: None },
        Job { piece: 3, exps: [w, 0, 0], domain: [Any, Unit, Unit], split: None },
    ];
    for a in 0..w {
        out.push(Job { piece: 4, exps: [a, 1, 1], domain: [Unit, Any, Any], split: None });
        out.push(Job { piece: 5, exps: [a, 0, 1], domain: [Unit, Unit, Any], split: None });
        let split = (a == 0).then_some((2, [w, 1, 0]));
        out.push(Job { piece: 6, exps: [a, 1, 0], domain: [Unit, Any, Unit], split });
        out.push(Job { piece: 7, exps: [a, 0, 0], domain: [Unit, Unit, Unit], split: None });
    }
    out
}

fn run_job(f: &MultiPoly, job: &Job, chi: &CharClass, max_depth: usize) -> Result<RatFun, HybridError> {
    let field = f.field().clone();
    let q = field.q();
    let (g, jac) = f.substitute_monomial(&job.exps)?;
    let (m, g) = g.extract_pi_power()?;
    let sets = job
        .domain
        .iter()
        .map(|r| match r {
            Residues::Any => Domain::any(q),
            Residues::Unit => Domain::unit(q),
        })
        .collect();
    let dom = Domain::from_sets(sets)?;
    let mut solver = Solver::new(field, *chi).with_max_depth(max_depth);
    let z = match job.split {
        None => solver.solve(&g, &dom)?,
        Some((var, weights)) => {
            let s = split_unit_variable(&g, &dom, var, &weights, chi)?;
            if s.multiplier.is_zero() {
                RatFun::zero(1)
            } else {
                s.multiplier.mul(&solver.solve(&s.poly, &s.domain)?)
            }
        }
    };
    Ok(z.mul_monomial(jac, m as u32))
}

#[derive(Clone, Debug)]
pub struct HybridZeta {
    /// `Z_f(s, chi, A_i)` for `i = 1..=7`.
    pub pieces: Vec<RatFun>,
    pub total: RatFun,
}

/// Builds the seven integrals with the generic machinery and closes the
/// self-similarity `Z = sum A_i + u^(omega+2) t^(n+l) Z`.
pub fn zeta_hybrid(d: &DiagParams, chi: &CharClass, exec: Exec) -> Result<HybridZeta, HybridError> {
    zeta_hybrid_with_depth(d, chi, exec, DEFAULT_MAX_DEPTH)
}

pub fn zeta_hybrid_with_depth(d: &DiagParams, chi: &CharClass, exec: Exec, max_depth: usize) -> Result<HybridZeta, HybridError> {
    let f = d.poly();
    let (g, _) = f.substitute_monomial(&[d.omega(), 1, 1])?;
    let (m, g) = g.extract_pi_power()?;
    if m as u32 != d.n + d.l || g != f {
        return Err(HybridError::Shape("the transform T(omega, 1, 1) does not reproduce f".into()));
    }
    let list = jobs(d);
    let results = map_vec(&list, exec, |j| run_job(&f, j, chi, max_depth));
    let mut pieces = vec![RatFun::zero(1); 7];
    for (job, r) in list.iter().zip(results) {
        pieces[job.piece - 1] = pieces[job.piece - 1].add(&r?);
    }
    let pieces: Vec<RatFun> = pieces.into_iter().map(|p| p.reduce()).collect();
    let sum = pieces.iter().fold(RatFun::zero(1), |acc, p| acc.add(p));
    let total = sum.geometric_closure(d.omega() + 2, d.n + d.l).map_err(SpfError::from)?.reduce();
    Ok(HybridZeta { pieces, total })
}

/// The four denominator factors `(a, b)` of `1 - u^a t^b` predicted for `f`.
pub fn theorem_denominator(d: &DiagParams) -> Vec<(u32, u32)> {
    let (p, n, l) = (d.p(), d.n, d.l);
    vec![(1, 1), (d.omega() + 2, n + l), (p + n, p * n), (p + l, p * l)]
}

/// Predicted pole families: real part and period.
pub fn theorem_poles(d: &DiagParams) -> Vec<CandidatePole> {
    let (p, n, l) = (d.p() as i64, d.n as i64, d.l as i64);
    let r = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let mk = |re: BigRational, period: i64, src: &[u32]| CandidatePole { real_part: re, period: period as u64, source: PoleSource::Facet(src.to_vec()) };
    vec![
        CandidatePole { real_part: r(-1, 1), period: 1, source: PoleSource::TrivialBranch },
        mk(-r(1, p) - r(2, n + l), n + l, &[d.omega() + 2, (n + l) as u32]),
        mk(-r(1, p) - r(1, n), p * n, &[(p + n) as u32, (p * n) as u32]),
        mk(-r(1, p) - r(1, l), p * l, &[(p + l) as u32, (p * l) as u32]),
    ]
}

/// Real parts `-a/b` of the reduced denominator of `z` at this `q`.
pub fn pole_real_parts(z: &RatFun, q: u32) -> Vec<BigRational> {
    z.specialize(q).pole_real_parts()
}

/// Reduced denominator factors of `z` at this `q`.
pub fn reduced_factors(z: &RatFun, q: u32) -> Vec<(u32, u32)> {
    z.specialize(q).reduce().den_factors().into_iter().map(|(a, b, _)| (a, b)).collect()
}

/// `chi(beta)` style constants are exact; this helper exposes the
/// character-sum value of `u * sum_{c in S} chi(c^m)` for tests and tooling.
pub fn unit_sum(field: &FieldConfig, chi: &CharClass, m: u32) -> CycInt {
    let mut s = CycInt::zero(chi.order());
    for c in field.units() {
        s = s.add(&chi.value(field, field.pow(c, m as u64)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symb::parse_ratfun;

    fn f3() -> Arc<FieldConfig> {
        Arc::new(FieldConfig::new(3, 1).unwrap())
    }

    #[test]
    fn validation() {
        let f = f3();
        assert!(HybridParams::new(f.clone(), 3, 2, FqElem::ONE).is_ok());
        assert!(matches!(HybridParams::new(f.clone(), 2, 2, FqElem::ONE), Err(HybridError::ConstraintViolated(_))));
        assert!(matches!(HybridParams::new(f.clone(), 1, 1, FqElem::ONE), Err(HybridError::ConstraintViolated(_))));
        assert!(matches!(HybridParams::new(f, 3, 3, FqElem::ONE), Err(HybridError::ConstraintViolated(_))));
    }

    #[test]
    fn example_diagonalizes() {
        let f = f3();
        let hp = HybridParams::new(f.clone(), 3, 2, FqElem::ONE).unwrap();
        let g = make_hybrid_g(&hp);
        let (diag, d) = diagonalize(&g, &hp).unwrap();
        assert_eq!(diag, MultiPoly::parse(f.clone(), "x^3 + 2*y^4*z^2 + z^6").unwrap());
        assert_eq!(d.alpha, FqElem(2));
        let hp1 = HybridParams::new(f, 1, 4, FqElem(2)).unwrap();
        assert_eq!(hp1.diagonal().alpha, FqElem(2));
        assert!(diagonalize(&make_hybrid_g(&hp1), &hp1).is_ok());
    }

    #[test]
    fn seven_sets_partition_order_space() {
        for omega in 1..5 {
            let mut seen = [0usize; 8];
            for ox in 0..=omega + 1 {
                for oy in 0..3 {
                    for oz in 0..3 {
                        seen[classify_orders(ox, oy, oz, omega)] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&c| c > 0));
        }
    }

    #[test]
    fn pieces_measure_sums_to_one() {
        let f = f3();
        let d = DiagParams::new(f, 4, 2, FqElem::ONE, FqElem::ONE).unwrap();
        let z = zeta_hybrid(&d, &CharClass::trivial(3), Exec::Sequential).unwrap();
        let u = BigRational::new(1.into(), 3.into());
        let one = BigRational::from_integer(1.into());
        let mut total = u.pow((d.omega() + 2) as i32);
        for p in &z.pieces {
            total += p.eval_at(&u, &one).unwrap();
        }
        assert_eq!(total, one);
        let want = parse_ratfun("u^3(1-u)", 1).unwrap();
        assert!(z.pieces[1].eq_at(&want, 3));
    }
}
