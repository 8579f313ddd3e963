//! Brute-force solution counts `N_i = #{x in (O/pi^i)^n : f(x) = 0 mod pi^i}`.
//!
//! Independent of the symbolic side: the only shared code is field arithmetic
//! and the polynomial container.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::gf::{FieldConfig, FqElem, TruncElem, Valuation};
use crate::mvpoly::{MultiPoly, PiPoly};
use crate::par::{sum_range, Exec};
use crate::symb::{CharClass, CycInt};

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("enumeration needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("polynomial is not of the form c*x^p + h(other variables)")]
    WrongShape,
    #[error("region series needs at least one variable and positive precision")]
    EmptyRegionJob,
}

#[derive(Clone, Debug)]
pub struct CountJob {
    pub poly: MultiPoly,
    pub level: usize,
    pub budget: u64,
    pub structured: bool,
    pub exec: Exec,
}

impl CountJob {
    pub fn new(poly: MultiPoly, level: usize) -> Self {
        CountJob { poly, level, budget: DEFAULT_BUDGET, structured: false, exec: Exec::Parallel }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub level: usize,
    pub n_i: u64,
    /// Number of polynomial evaluations performed.
    pub evals: u64,
}

/// Addition and multiplication in `F_q`, tabulated when small.
struct Ops {
    q: usize,
    add: Vec<u32>,
    mul: Vec<u32>,
    field: Arc<FieldConfig>,
}

const TABLE_Q: usize = 1024;

impl Ops {
    fn new(field: Arc<FieldConfig>) -> Self {
        let q = field.q() as usize;
        let (mut add, mut mul) = (Vec::new(), Vec::new());
        if q <= TABLE_Q {
            add.reserve(q * q);
            mul.reserve(q * q);
            for a in 0..q as u32 {
                for b in 0..q as u32 {
                    add.push(field.add(FqElem(a), FqElem(b)).0);
                    mul.push(field.mul(FqElem(a), FqElem(b)).0);
                }
            }
        }
        Ops { q, add, mul, field }
    }

    #[inline]
    fn add(&self, a: u32, b: u32) -> u32 {
        if self.add.is_empty() {
            self.field.add(FqElem(a), FqElem(b)).0
        } else {
            self.add[a as usize * self.q + b as usize]
        }
    }

    #[inline]
    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else if self.mul.is_empty() {
            self.field.mul(FqElem(a), FqElem(b)).0
        } else {
            self.mul[a as usize * self.q + b as usize]
        }
    }

    /// `acc += a * b` in `F_q[pi]/pi^prec`.
    fn mul_add(&self, acc: &mut [u32], a: &[u32], b: &[u32]) {
        let prec = acc.len();
        for (i, &x) in a.iter().enumerate().take(prec) {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(prec - i) {
                acc[i + j] = self.add(acc[i + j], self.mul(x, y));
            }
        }
    }

    fn mul_into(&self, out: &mut [u32], a: &[u32], b: &[u32]) {
        out.iter_mut().for_each(|c| *c = 0);
        self.mul_add(out, a, b);
    }
}

/// `f` organised as `sum_k c_k(x_0..x_{n-2}) * x_{n-1}^k` for fast inner loops.
struct Evaluator {
    ops: Ops,
    nvars: usize,
    prec: usize,
    /// Per term: exponents of the outer variables, coefficient, inner exponent.
    terms: Vec<(Vec<u32>, Vec<u32>, usize)>,
    inner_degree: usize,
    outer_degrees: Vec<usize>,
}

impl Evaluator {
    fn new(f: &MultiPoly, prec: usize) -> Self {
        let n = f.nvars();
        let mut terms = Vec::new();
        let mut inner_degree = 0;
        let mut outer_degrees = vec![0usize; n.saturating_sub(1)];
        for (e, c) in f.terms() {
            let mut coeff: Vec<u32> = c.0.iter().take(prec).map(|x| x.0).collect();
            coeff.resize(prec, 0);
            if coeff.iter().all(|&x| x == 0) {
                continue;
            }
            let k = if n == 0 { 0 } else { e[n - 1] as usize };
            inner_degree = inner_degree.max(k);
            for v in 0..n.saturating_sub(1) {
                outer_degrees[v] = outer_degrees[v].max(e[v] as usize);
            }
            terms.push((e[..n.saturating_sub(1)].to_vec(), coeff, k));
        }
        Evaluator { ops: Ops::new(f.field().clone()), nvars: n, prec, terms, inner_degree, outer_degrees }
    }

    fn ring_size(&self) -> u64 {
        (self.ops.q as u64).pow(self.prec as u32)
    }

    fn digits(&self, mut idx: u64, out: &mut [u32]) {
        let q = self.ops.q as u64;
        for d in out.iter_mut() {
            *d = (idx % q) as u32;
            idx /= q;
        }
    }

    /// Number of outer points; each is one parallel work item.
    fn outer_count(&self) -> u64 {
        self.ring_size().pow(self.nvars.saturating_sub(1) as u32)
    }

    /// Applies `pred` to `f` at every inner value over the given outer point
    /// and returns the sum of its weights.
    fn fold_block<P: Fn(&[u32]) -> u64>(&self, outer: u64, pred: &P) -> u64 {
        let prec = self.prec;
        let size = self.ring_size();
        let zero = vec![0u32; prec];
        let nout = self.nvars.saturating_sub(1);
        // powers[v][k] = x_v^k
        let mut powers: Vec<Vec<Vec<u32>>> = Vec::with_capacity(nout);
        let mut idx = outer;
        let mut one = zero.clone();
        if prec > 0 {
            one[0] = 1;
        }
        for v in 0..nout {
            let mut x = zero.clone();
            self.digits(idx % size, &mut x);
            idx /= size;
            let mut pw = vec![one.clone()];
            for k in 1..=self.outer_degrees[v] {
                let mut next = zero.clone();
                self.ops.mul_into(&mut next, &pw[k - 1], &x);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut c = vec![zero.clone(); self.inner_degree + 1];
        let mut tmp = zero.clone();
        let mut mono = zero.clone();
        for (e, coeff, k) in &self.terms {
            mono.copy_from_slice(coeff);
            for v in 0..nout {
                if e[v] > 0 {
                    self.ops.mul_into(&mut tmp, &mono, &powers[v][e[v] as usize]);
                    mono.copy_from_slice(&tmp);
                }
            }
            for (dst, &src) in c[*k].iter_mut().zip(mono.iter()) {
                *dst = self.ops.add(*dst, src);
            }
        }
        if self.nvars == 0 {
            return pred(&c[0]);
        }
        let mut x = zero.clone();
        let mut val = zero.clone();
        let mut total = 0;
        for inner in 0..size {
            self.digits(inner, &mut x);
            val.copy_from_slice(&c[self.inner_degree]);
            for k in (0..self.inner_degree).rev() {
                self.ops.mul_into(&mut tmp, &val, &x);
                for ((dst, &a), &b) in val.iter_mut().zip(tmp.iter()).zip(c[k].iter()) {
                    *dst = self.ops.add(a, b);
                }
            }
            total += pred(&val);
        }
        total
    }
}

fn required_evals(q: u32, n: usize, level: usize) -> u128 {
    let mut r: u128 = 1;
    for _ in 0..n * level {
        r = r.saturating_mul(q as u128);
    }
    r
}

fn check_budget(required: u128, budget: u64) -> Result<u64, CountError> {
    if required > budget as u128 {
        Err(CountError::BudgetExceeded { required, budget })
    } else {
        Ok(required as u64)
    }
}

/// Exhaustive count over `(F_q[pi]/pi^i)^n`.
pub fn count_ni(job: &CountJob) -> Result<CountResult, CountError> {
    if job.structured {
        return count_ni_structured(job);
    }
    let f = &job.poly;
    let i = job.level;
    if i == 0 {
        return Ok(CountResult { level: 0, n_i: 1, evals: 0 });
    }
    let evals = check_budget(required_evals(f.field().q(), f.nvars(), i), job.budget)?;
    let ev = Evaluator::new(f, i);
    let is_zero = |v: &[u32]| v.iter().all(|&c| c == 0) as u64;
    let n_i = sum_range(ev.outer_count(), job.exec, |o| ev.fold_block(o, &is_zero));
    Ok(CountResult { level: i, n_i, evals })
}

/// Checks that the first variable occurs only as `c * x^p` with `c` a unit constant.
fn split_pth_power(f: &MultiPoly) -> Option<(usize, FqElem)> {
    let p = f.field().p();
    let mut found = None;
    for (e, c) in f.terms() {
        if e[0] == 0 {
            continue;
        }
        let pure = e[0] == p && e[1..].iter().all(|&x| x == 0);
        if !pure || c.0.len() != 1 || found.is_some() {
            return None;
        }
        found = Some(c.0[0]);
    }
    found.map(|c| (0, c))
}

/// Count for `f = c*x^p + h(rest)` using the fibres of `x -> x^p`.
///
/// `x^p = sum a_j^p pi^{jp}`, so the image in `F_q[pi]/pi^i` is the set of
/// elements supported on multiples of `p`, each with `q^{i - ceil(i/p)}`
/// preimages (the `a_j` with `jp >= i` are free).
pub fn count_ni_structured(job: &CountJob) -> Result<CountResult, CountError> {
    let f = &job.poly;
    let (v, c) = split_pth_power(f).ok_or(CountError::WrongShape)?;
    let i = job.level;
    if i == 0 {
        return Ok(CountResult { level: 0, n_i: 1, evals: 0 });
    }
    let field = f.field().clone();
    let q = field.q();
    let p = field.p() as usize;
    let evals = check_budget(required_evals(q, f.nvars() - 1, i), job.budget)?;
    let mut h_terms = f.terms().clone();
    h_terms.retain(|e, _| e[v] == 0);
    let h = f.with_terms(h_terms).remove_var(v);
    // c x^p = -h  <=>  x^p = -h / c
    let scale = field.neg(field.inv(c).expect("unit coefficient"));
    let h = h.scale(&PiPoly::constant(scale));
    let fibre = (q as u64).pow((i - i.div_ceil(p)) as u32);
    let ev = Evaluator::new(&h, i);
    let in_image = |w: &[u32]| {
        if w.iter().enumerate().all(|(j, &a)| j % p == 0 || a == 0) {
            fibre
        } else {
            0
        }
    };
    let n_i = sum_range(ev.outer_count(), job.exec, |o| ev.fold_block(o, &in_image));
    Ok(CountResult { level: i, n_i, evals })
}

/// `[N_0, N_1/q^n, ..., N_M/q^{nM}]`, the start of the Poincare series.
pub fn poincare_truncated(poly: &MultiPoly, order: usize, budget: u64, exec: Exec) -> Result<Vec<BigRational>, CountError> {
    let q = BigInt::from(poly.field().q());
    let n = poly.nvars() as u32;
    let mut out = Vec::with_capacity(order + 1);
    for i in 0..=order {
        let job = CountJob { poly: poly.clone(), level: i, budget, structured: false, exec };
        let r = count_ni(&job)?;
        out.push(BigRational::new(BigInt::from(r.n_i), q.pow(n * i as u32)));
    }
    Ok(out)
}

/// Raw counts `N_0..N_M`.
pub fn counts_up_to(poly: &MultiPoly, order: usize, budget: u64, exec: Exec) -> Result<Vec<u64>, CountError> {
    (0..=order)
        .map(|i| {
            let job = CountJob { poly: poly.clone(), level: i, budget, structured: false, exec };
            count_ni(&job).map(|r| r.n_i)
        })
        .collect()
}

/// Counts of points of `(O/pi^prec)^n` in a region, bucketed by `ord f`
/// (below `prec`) and the residue of `ac f`.
fn region_histogram<R>(poly: &MultiPoly, prec: usize, region: R, budget: u64, exec: Exec) -> Result<Vec<Vec<u64>>, CountError>
where
    R: Fn(&[Valuation]) -> bool + Sync,
{
    let field = poly.field().clone();
    let q = field.q() as u64;
    let n = poly.nvars();
    if n == 0 || prec == 0 {
        return Err(CountError::EmptyRegionJob);
    }
    check_budget(required_evals(q as u32, n, prec), budget)?;
    let ring = q.pow(prec as u32);
    let tail = ring.pow(n as u32 - 1);
    let elem = |mut idx: u64| {
        let coeffs = (0..prec)
            .map(|_| {
                let d = FqElem((idx % q) as u32);
                idx /= q;
                d
            })
            .collect();
        TruncElem::from_coeffs(coeffs, prec)
    };
    let blocks = crate::par::map_vec(&(0..ring).collect::<Vec<_>>(), exec, |&head| {
        let mut h = vec![vec![0u64; q as usize]; prec];
        for rest in 0..tail {
            let mut pt = vec![elem(head)];
            let mut r = rest;
            for _ in 1..n {
                pt.push(elem(r % ring));
                r /= ring;
            }
            let ords: Vec<Valuation> = pt.iter().map(TruncElem::ord).collect();
            if !region(&ords) {
                continue;
            }
            let v = poly.evaluate(&pt, prec).expect("arity checked");
            if let Valuation::Finite(k) = v.ord() {
                h[k][v.coeffs()[k].index()] += 1;
            }
        }
        h
    });
    let mut total = vec![vec![0u64; q as usize]; prec];
    for b in blocks {
        for (row, brow) in total.iter_mut().zip(b) {
            for (c, x) in row.iter_mut().zip(brow) {
                *c += x;
            }
        }
    }
    Ok(total)
}

/// Start of `sum_k mu{x in R : ord f(x) = k} t^k` for a region `R` described
/// by coordinate orders, enumerating `(O/pi^prec)^n`.
///
/// `region` sees each coordinate's order with `Infinite` meaning `>= prec`,
/// so it must only depend on orders below `prec`. Returns coefficients of
/// `t^0..t^{prec-1}`. Plain evaluation, intended as a slow reference.
/// Needs at least one variable and `prec >= 1`.
pub fn region_series<R>(poly: &MultiPoly, prec: usize, region: R, budget: u64, exec: Exec) -> Result<Vec<BigRational>, CountError>
where
    R: Fn(&[Valuation]) -> bool + Sync,
{
    let hist = region_histogram(poly, prec, region, budget, exec)?;
    let denom = BigInt::from(poly.field().q()).pow((poly.nvars() * prec) as u32);
    Ok(hist
        .iter()
        .map(|row| BigRational::new(BigInt::from(row.iter().sum::<u64>()), denom.clone()))
        .collect())
}

/// The character-weighted version: `t^k` carries `sum chi(ac f(x))` over the
/// level set, in the coordinates of [`RatFun::expand_series_cyc`](crate::symb::RatFun::expand_series_cyc).
pub fn region_series_char<R>(poly: &MultiPoly, prec: usize, region: R, chi: &CharClass, budget: u64, exec: Exec) -> Result<Vec<Vec<BigRational>>, CountError>
where
    R: Fn(&[Valuation]) -> bool + Sync,
{
    let field = poly.field().clone();
    let hist = region_histogram(poly, prec, region, budget, exec)?;
    let denom = BigInt::from(field.q()).pow((poly.nvars() * prec) as u32);
    let values: Vec<CycInt> = field.elements().map(|c| chi.value(&field, c)).collect();
    Ok(hist
        .iter()
        .map(|row| {
            let mut acc = CycInt::zero(chi.order());
            for (n, v) in row.iter().zip(&values) {
                if *n > 0 {
                    acc = acc.add(&v.scale(&BigInt::from(*n)));
                }
            }
            acc.coeffs().iter().map(|c| BigRational::new(c.clone(), denom.clone())).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(p: u32, r: u32, s: &str) -> MultiPoly {
        MultiPoly::parse(Arc::new(FieldConfig::new(p, r).unwrap()), s).unwrap()
    }

    fn naive(f: &MultiPoly, i: usize) -> u64 {
        use crate::gf::TruncElem;
        let q = f.field().q() as u64;
        let size = q.pow(i as u32);
        let n = f.nvars();
        let mut count = 0;
        for idx in 0..size.pow(n as u32) {
            let mut rest = idx;
            let point: Vec<TruncElem> = (0..n)
                .map(|_| {
                    let mut e = rest % size;
                    rest /= size;
                    let coeffs = (0..i)
                        .map(|_| {
                            let d = (e % q) as u32;
                            e /= q;
                            FqElem(d)
                        })
                        .collect();
                    TruncElem::from_coeffs(coeffs, i)
                })
                .collect();
            if f.evaluate(&point, i).unwrap().is_zero() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn spec_examples() {
        let f = poly(3, 1, "x^3+y^4*z^2+z^6");
        assert_eq!(count_ni(&CountJob::new(f.clone(), 1)).unwrap().n_i, 9);
        let mut job = CountJob::new(f, 1);
        job.structured = true;
        assert_eq!(count_ni(&job).unwrap().n_i, 9);
        for q in [(2, 1), (3, 1), (2, 2)] {
            let x = poly(q.0, q.1, "x");
            for i in 0..4 {
                assert_eq!(count_ni(&CountJob::new(x.clone(), i)).unwrap().n_i, 1);
            }
        }
        let one = poly(5, 1, "1");
        assert_eq!(count_ni(&CountJob::new(one, 2)).unwrap().n_i, 0);
    }

    #[test]
    fn pth_power_fibre() {
        for p in [2u32, 3, 5] {
            let f = poly(p, 1, &format!("x^{p}"));
            for i in 1..=4usize {
                let mut job = CountJob::new(f.clone(), i);
                let plain = count_ni(&job).unwrap().n_i;
                job.structured = true;
                assert_eq!(count_ni(&job).unwrap().n_i, plain, "p={p} i={i}");
            }
            let mut job = CountJob::new(f.clone(), 2);
            job.structured = true;
            assert_eq!(count_ni(&job).unwrap().n_i, p as u64);
        }
        let mut job = CountJob::new(poly(3, 1, "y^2+z^3"), 1);
        job.structured = true;
        assert_eq!(count_ni(&job), Err(CountError::WrongShape));
    }

    #[test]
    fn fast_path_matches_naive_evaluation() {
        for (p, r, s) in [(3, 1, "x^2*y+pi*y^3+2"), (2, 2, "a*x^3+y^2+pi*x"), (5, 1, "x*y*z+z^2"), (3, 1, "x^3+y^4*z^2+z^6")] {
            let f = poly(p, r, s);
            let max_i = if f.nvars() == 3 { 2 } else { 3 };
            for i in 1..=max_i {
                assert_eq!(count_ni(&CountJob::new(f.clone(), i)).unwrap().n_i, naive(&f, i), "{s} i={i}");
            }
        }
    }

    #[test]
    fn budget_and_schedules() {
        let f = poly(3, 1, "x^3+y^4*z^2+z^6");
        let mut job = CountJob::new(f.clone(), 3);
        job.budget = 1000;
        assert!(matches!(count_ni(&job), Err(CountError::BudgetExceeded { required: 19683, .. })));
        job.budget = DEFAULT_BUDGET;
        let par = count_ni(&job).unwrap();
        job.exec = Exec::Sequential;
        assert_eq!(count_ni(&job).unwrap(), par);
        let pc = poincare_truncated(&poly(3, 1, "x"), 2, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        let third = |k: u32| BigRational::new(BigInt::from(1), BigInt::from(3u32.pow(k)));
        assert_eq!(pc, vec![third(0), third(1), third(2)]);
    }

    #[test]
    fn region_series_on_whole_space_matches_level_counts() {
        // mu{ord f = k} = N_k q^{-nk} - N_{k+1} q^{-n(k+1)}
        for (p, s) in [(3, "x^2+y^3"), (2, "x*y+pi*x"), (5, "x^2")] {
            let f = poly(p, 1, s);
            let prec = 3;
            let pc = poincare_truncated(&f, prec, DEFAULT_BUDGET, Exec::Sequential).unwrap();
            let rs = region_series(&f, prec, |_| true, DEFAULT_BUDGET, Exec::Parallel).unwrap();
            for k in 0..prec {
                assert_eq!(rs[k], &pc[k] - &pc[k + 1], "{s} k={k}");
            }
        }
        let f = poly(3, 1, "x+y");
        let unit_x = region_series(&f, 2, |o| o[0] == Valuation::Finite(0), DEFAULT_BUDGET, Exec::Sequential).unwrap();
        // x unit: x+y is a unit unless y = -x mod pi
        assert_eq!(unit_x[0], BigRational::new(BigInt::from(4), BigInt::from(9)));
        assert_eq!(unit_x[1], BigRational::new(BigInt::from(4), BigInt::from(27)));
    }

    #[test]
    fn character_sums_over_level_sets() {
        let f5 = poly(5, 1, "x");
        let field = f5.field().clone();
        // sum of a nontrivial character over units vanishes on every shell
        let chi = CharClass::new(5, 1);
        for row in region_series_char(&f5, 3, |_| true, &chi, DEFAULT_BUDGET, Exec::Sequential).unwrap() {
            assert!(row.iter().all(|c| *c.numer() == BigInt::from(0)));
        }
        // the quadratic character is trivial on squares
        let sq = poly(5, 1, "x^2");
        let quad = CharClass::new(field.q(), 2);
        let weighted = region_series_char(&sq, 3, |_| true, &quad, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        let plain = region_series(&sq, 3, |_| true, DEFAULT_BUDGET, Exec::Sequential).unwrap();
        for (w, p) in weighted.iter().zip(&plain) {
            assert_eq!(w, &vec![p.clone()]);
        }
    }
}
