//! Stationary phase recursion.
//!
//! `Z_f(s, chi, D) = v + sigma (1-u) t/(1-u t) + sum over singular residues P
//! of u^n Z_{f(P + pi x)}`. The solver walks that tree depth first; when a
//! normalised task reappears on the current branch the two occurrences are
//! tied together and the resulting linear relation is solved for the
//! ancestor's value.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{FieldConfig, FqElem};
use crate::mvpoly::{Exps, MultiPoly, MvError, PiPoly};
use crate::symb::{CharClass, CycInt, RatFun, SymbError};

pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpfError {
    #[error("recursion did not close within depth {max_depth}; chain: {}", chain.join(" -> "))]
    NonTerminating { max_depth: usize, chain: Vec<String> },
    #[error("no weight vector makes variable {0} factor out")]
    NotHomogenizable(usize),
    #[error("bad domain: {0}")]
    BadDomain(String),
    #[error(transparent)]
    Poly(#[from] MvError),
    #[error(transparent)]
    Symb(#[from] SymbError),
}

/// Per-coordinate residues mod `pi`: `D = {x : x_i mod pi in sets[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Domain {
    sets: Vec<Vec<u32>>,
}

impl Domain {
    pub fn full(q: u32, n: usize) -> Self {
        Domain { sets: vec![(0..q).collect(); n] }
    }

    pub fn from_sets(sets: Vec<Vec<u32>>) -> Result<Self, SpfError> {
        let mut sets = sets;
        for s in sets.iter_mut() {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                return Err(SpfError::BadDomain("empty residue set".into()));
            }
        }
        Ok(Domain { sets })
    }

    pub fn any(q: u32) -> Vec<u32> {
        (0..q).collect()
    }

    pub fn unit(q: u32) -> Vec<u32> {
        (1..q).collect()
    }

    pub fn zero() -> Vec<u32> {
        vec![0]
    }

    /// Comma-separated `any`, `unit`, `zero` or `c:<element>` per coordinate.
    pub fn parse(field: &FieldConfig, src: &str, n: usize) -> Result<Self, SpfError> {
        let q = field.q();
        let parts: Vec<&str> = src.split(',').map(str::trim).collect();
        let parts = if parts.len() == 1 && n > 1 { vec![parts[0]; n] } else { parts };
        if parts.len() != n {
            return Err(SpfError::BadDomain(format!("expected {n} coordinates, got {}", parts.len())));
        }
        let sets = parts
            .iter()
            .map(|p| match *p {
                "any" => Ok(Self::any(q)),
                "unit" => Ok(Self::unit(q)),
                "zero" => Ok(Self::zero()),
                other => match other.strip_prefix("c:") {
                    Some(e) => field.parse_elem(e).map(|c| vec![c.0]).map_err(|e| SpfError::BadDomain(e.to_string())),
                    None => Err(SpfError::BadDomain(format!("unknown residue set '{other}' (expected any, unit, zero or c:<elem>)"))),
                },
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_sets(sets)
    }

    pub fn nvars(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<u32>] {
        &self.sets
    }

    pub fn size(&self) -> u64 {
        self.sets.iter().map(|s| s.len() as u64).product()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<FqElem>> + '_ {
        let total = self.size();
        (0..total).map(move |mut idx| {
            self.sets
                .iter()
                .map(|s| {
                    let k = (idx % s.len() as u64) as usize;
                    idx /= s.len() as u64;
                    FqElem(s[k])
                })
                .collect()
        })
    }

    fn with_set(&self, i: usize, set: Vec<u32>) -> Domain {
        let mut d = self.clone();
        d.sets[i] = set;
        d
    }

    fn without(&self, i: usize) -> Domain {
        let mut d = self.clone();
        d.sets.remove(i);
        d
    }

    fn describe(&self, q: u32) -> String {
        let parts: Vec<String> = self
            .sets
            .iter()
            .map(|s| {
                if s.len() == q as usize {
                    "any".into()
                } else if s.len() + 1 == q as usize && !s.contains(&0) {
                    "unit".into()
                } else {
                    format!("{s:?}")
                }
            })
            .collect();
        parts.join(",")
    }
}

/// One node of the recursion: `u^a t^b * Z_poly(s, chi, domain)`.
#[derive(Clone, Debug)]
pub struct ZetaTask {
    pub poly: MultiPoly,
    pub domain: Domain,
    pub chi: CharClass,
    pub prefactor: (u32, u32),
}

impl ZetaTask {
    pub fn new(poly: MultiPoly, domain: Domain, chi: CharClass) -> Self {
        ZetaTask { poly, domain, chi, prefactor: (0, 0) }
    }

    pub fn on_full(poly: MultiPoly, chi: CharClass) -> Self {
        let d = Domain::full(poly.field().q(), poly.nvars());
        Self::new(poly, d, chi)
    }
}

fn residue_partials(fbar: &MultiPoly) -> Vec<MultiPoly> {
    (0..fbar.nvars()).map(|i| fbar.partial_derivative(i).reduce_mod_pi()).collect()
}

/// Classification of the residue box by value and gradient of `f mod pi`.
struct Buckets {
    char_sum: CycInt,
    nonsingular_zeros: u64,
    singular: Vec<Vec<FqElem>>,
}

fn classify(f: &MultiPoly, d: &Domain, chi: &CharClass) -> Buckets {
    let fbar = f.reduce_mod_pi();
    let grads = residue_partials(&fbar);
    let field = f.field();
    let mut char_sum = CycInt::zero(chi.order());
    let mut nonsingular_zeros = 0;
    let mut singular = Vec::new();
    for p in d.points() {
        let v = fbar.eval_residue(&p);
        if !v.is_zero() {
            char_sum = char_sum.add(&chi.value(field, v));
        } else if grads.iter().all(|g| g.eval_residue(&p).is_zero()) {
            singular.push(p);
        } else {
            nonsingular_zeros += 1;
        }
    }
    Buckets { char_sum, nonsingular_zeros, singular }
}

/// `(1 - u) t / (1 - u t)`.
pub fn nonsingular_weight() -> RatFun {
    let one_minus_u = RatFun::one(1).sub(&RatFun::monomial(CycInt::one(1), 1, 0));
    one_minus_u.mul_monomial(0, 1).geometric_closure(1, 1).expect("nonzero factor")
}

/// `u^n * sum over P in D with f(P) != 0 of chi(f(P))`.
pub fn v_term(f: &MultiPoly, d: &Domain, chi: &CharClass) -> RatFun {
    let b = classify(f, d, chi);
    RatFun::count_term(&b.char_sum, d.nvars() as u32, f.field().q())
}

/// `u^n * #(nonsingular zeros in D) * (1-u)t/(1-ut)` for trivial `chi`, else 0.
pub fn sigma_term(f: &MultiPoly, d: &Domain, chi: &CharClass) -> RatFun {
    if !chi.is_trivial() {
        return RatFun::zero(1);
    }
    let b = classify(f, d, chi);
    sigma_from_count(b.nonsingular_zeros, d.nvars(), f.field().q())
}

fn sigma_from_count(count: u64, n: usize, q: u32) -> RatFun {
    if count == 0 {
        return RatFun::zero(1);
    }
    RatFun::count_term(&CycInt::from_int(1, count), n as u32, q).mul(&nonsingular_weight())
}

/// Singular zeros of `f mod pi` inside the residue box.
pub fn singular_set(f: &MultiPoly, d: &Domain) -> Vec<Vec<FqElem>> {
    classify(f, d, &CharClass::trivial(f.field().q())).singular
}

/// `u * sum_{c in F_q^x} chi(c^m)`: the integral of `chi(ac x^m)` over units.
pub fn unit_power_integral(field: &FieldConfig, m: u32, chi: &CharClass) -> RatFun {
    unit_power_integral_on(field, &Domain::unit(field.q()), m, chi)
}

fn unit_power_integral_on(field: &FieldConfig, residues: &[u32], m: u32, chi: &CharClass) -> RatFun {
    let mut s = CycInt::zero(chi.order());
    for &c in residues {
        s = s.add(&chi.value(field, field.pow(FqElem(c), m as u64)));
    }
    RatFun::count_term(&s, 1, field.q())
}

/// One literal step: closed part and one child per singular residue.
pub fn spf_step(task: &ZetaTask) -> Result<(RatFun, Vec<ZetaTask>), SpfError> {
    let f = &task.poly;
    let n = f.nvars();
    let q = f.field().q();
    let b = classify(f, &task.domain, &task.chi);
    let (pa, pb) = task.prefactor;
    let mut closed = RatFun::count_term(&b.char_sum, n as u32, q);
    if task.chi.is_trivial() {
        closed = closed.add(&sigma_from_count(b.nonsingular_zeros, n, q));
    }
    let closed = closed.mul_monomial(pa, pb);
    let mut children = Vec::new();
    for p in &b.singular {
        let shifted = f.substitute_affine(p, true)?;
        let (m, h) = shifted.extract_pi_power()?;
        children.push(ZetaTask {
            poly: h,
            domain: Domain::full(q, n),
            chi: task.chi,
            prefactor: (pa + n as u32, pb + m as u32),
        });
    }
    Ok((closed, children))
}

/// Result of [`split_unit_variable`].
#[derive(Clone, Debug)]
pub struct UnitSplit {
    pub poly: MultiPoly,
    pub domain: Domain,
    pub exponent: u32,
    pub multiplier: RatFun,
}

/// For `var` ranging over units, substitutes `x_j -> x_j w^{weights[j]}`
/// (`w = x_var`) and factors `f = w^M h(other variables)`. The multiplier is
/// the integral of `chi(ac w^M)` over the residues allowed for `w`.
pub fn split_unit_variable(
    f: &MultiPoly,
    d: &Domain,
    var: usize,
    weights: &[u32],
    chi: &CharClass,
) -> Result<UnitSplit, SpfError> {
    let n = f.nvars();
    if d.sets[var].contains(&0) {
        return Err(SpfError::BadDomain(format!("variable {var} must range over units")));
    }
    let q = f.field().q();
    for (j, s) in d.sets.iter().enumerate() {
        let stable = s.len() == q as usize || *s == Domain::unit(q) || *s == Domain::zero();
        if j != var && weights[j] != 0 && !stable {
            return Err(SpfError::BadDomain(format!("coordinate {j} is not stable under unit scaling")));
        }
    }
    let mut exponent = None;
    let mut terms = BTreeMap::new();
    for (e, c) in f.terms() {
        let m: u32 = e[var] + (0..n).filter(|&j| j != var).map(|j| weights[j] * e[j]).sum::<u32>();
        if *exponent.get_or_insert(m) != m {
            return Err(SpfError::NotHomogenizable(var));
        }
        let mut e2 = e.clone();
        e2[var] = 0;
        terms.insert(e2, c.clone());
    }
    let exponent = exponent.ok_or(SpfError::Poly(MvError::ZeroPolynomial))?;
    let h = f.with_terms(terms).remove_var(var);
    let multiplier = unit_power_integral_on(f.field(), &d.sets[var], exponent, chi);
    Ok(UnitSplit { poly: h, domain: d.without(var), exponent, multiplier })
}

/// Linear combination `closed + sum coef_j X_j` of the values `X_j` of the
/// tasks on the current branch.
#[derive(Clone, Debug)]
struct Expr {
    closed: RatFun,
    refs: BTreeMap<usize, RatFun>,
}

impl Expr {
    fn closed(r: RatFun) -> Self {
        Expr { closed: r, refs: BTreeMap::new() }
    }

    fn var(j: usize) -> Self {
        let mut refs = BTreeMap::new();
        refs.insert(j, RatFun::one(1));
        Expr { closed: RatFun::zero(1), refs }
    }

    fn add(&mut self, other: Expr) {
        self.closed = self.closed.add(&other.closed);
        for (j, c) in other.refs {
            let e = self.refs.entry(j).or_insert_with(|| RatFun::zero(1));
            *e = e.add(&c);
            if e.is_zero() {
                self.refs.remove(&j);
            }
        }
    }

    fn scale(self, r: &RatFun) -> Expr {
        Expr { closed: self.closed.mul(r), refs: self.refs.into_iter().map(|(j, c)| (j, c.mul(r))).collect() }
    }
}

type Key = (MultiPoly, Domain);

/// Statistics from one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: usize,
    pub closures: usize,
    pub memo_hits: usize,
    pub max_depth_seen: usize,
}

pub struct Solver {
    field: Arc<FieldConfig>,
    chi: CharClass,
    max_depth: usize,
    memo: HashMap<Key, RatFun>,
    path: Vec<Key>,
    pub stats: SolveStats,
}

/// Solves `Z = A + c Z` for `Z`, i.e. returns `1 / (1 - c)`.
fn closure_factor(c: &RatFun, q: u32) -> Result<RatFun, SymbError> {
    let c = c.reduce();
    if c.den().is_empty() && c.num().len() == 1 {
        let (&(a, b), coef) = c.num().iter().next().unwrap();
        if coef.is_one() {
            return RatFun::one(1).geometric_closure(a, b);
        }
    }
    let inv = RatFun::one(1).sub(&c).specialize(q).reduce().invert()?;
    Ok(inv.to_ratfun())
}

impl Solver {
    pub fn new(field: Arc<FieldConfig>, chi: CharClass) -> Self {
        Solver { field, chi, max_depth: DEFAULT_MAX_DEPTH, memo: HashMap::new(), path: Vec::new(), stats: SolveStats::default() }
    }

    pub fn with_max_depth(mut self, d: usize) -> Self {
        self.max_depth = d.max(1);
        self
    }

    fn q(&self) -> u32 {
        self.field.q()
    }

    fn chi_const(&self, c: FqElem) -> RatFun {
        RatFun::constant(self.chi.value(&self.field, c))
    }

    /// `Z_f(s, chi, D)` as an exact rational function.
    pub fn solve(&mut self, f: &MultiPoly, d: &Domain) -> Result<RatFun, SpfError> {
        if d.nvars() != f.nvars() {
            return Err(SpfError::BadDomain(format!("domain has {} coordinates, polynomial {}", d.nvars(), f.nvars())));
        }
        self.path.clear();
        let e = self.node(f.clone(), d.clone())?;
        debug_assert!(e.refs.is_empty());
        Ok(e.closed.reduce())
    }

    fn node(&mut self, f: MultiPoly, d: Domain) -> Result<Expr, SpfError> {
        if f.is_zero() {
            return Ok(Expr::closed(RatFun::zero(1)));
        }
        let (m, g) = f.extract_pi_power()?;
        let (g, d, mult) = self.normalize(g, d);
        let outer = mult.mul_monomial(0, m as u32);
        if g.nvars() == 0 {
            let c = g.terms().values().next().map(|c| c.residue()).unwrap_or(FqElem::ZERO);
            return Ok(Expr::closed(outer.mul(&self.chi_const(c))));
        }
        let key = (g, d);
        if let Some(j) = self.path.iter().position(|k| *k == key) {
            self.stats.closures += 1;
            return Ok(Expr::var(j).scale(&outer));
        }
        if let Some(v) = self.memo.get(&key) {
            self.stats.memo_hits += 1;
            return Ok(Expr::closed(v.mul(&outer)));
        }
        if self.path.len() >= self.max_depth {
            let q = self.q();
            let chain = self.path.iter().map(|(p, d)| format!("{p} on [{}]", d.describe(q))).collect();
            return Err(SpfError::NonTerminating { max_depth: self.max_depth, chain });
        }
        self.stats.nodes += 1;
        self.path.push(key.clone());
        self.stats.max_depth_seen = self.stats.max_depth_seen.max(self.path.len());
        let here = self.path.len() - 1;
        let body = self.expand(&key.0, &key.1);
        self.path.pop();
        let mut body = body?;
        if let Some(c) = body.refs.remove(&here) {
            body = body.scale(&closure_factor(&c, self.q())?);
        }
        if body.refs.is_empty() {
            body.closed = body.closed.reduce();
            self.memo.insert(key, body.closed.clone());
        }
        Ok(body.scale(&outer))
    }

    /// The v and sigma contributions of a residue box without singular points.
    fn leaf(&self, b: &Buckets, n: usize) -> RatFun {
        let q = self.q();
        let mut r = RatFun::count_term(&b.char_sum, n as u32, q);
        if self.chi.is_trivial() {
            r = r.add(&sigma_from_count(b.nonsingular_zeros, n, q));
        }
        r
    }

    fn expand(&mut self, g: &MultiPoly, d: &Domain) -> Result<Expr, SpfError> {
        let n = g.nvars();
        let q = self.q();
        let b = classify(g, d, &self.chi);
        if b.singular.is_empty() {
            return Ok(Expr::closed(self.leaf(&b, n)));
        }
        // A coordinate shared by every singular residue: split off that slab only.
        let shared = (0..n).find(|&i| b.singular.iter().all(|p| p[i] == b.singular[0][i]));
        if let Some(i) = shared {
            let c = b.singular[0][i];
            let rest: Vec<u32> = d.sets[i].iter().copied().filter(|&x| x != c.0).collect();
            let mut out = if rest.is_empty() {
                Expr::closed(RatFun::zero(1))
            } else {
                let rb = classify(g, &d.with_set(i, rest), &self.chi);
                Expr::closed(self.leaf(&rb, n))
            };
            let child = g.recenter_coordinate(i, c);
            let e = self.node(child, d.with_set(i, Domain::any(q)))?;
            out.add(e.scale(&RatFun::monomial(CycInt::one(1), 1, 0)));
            return Ok(out);
        }
        let mut out = Expr::closed(self.leaf(&b, n));
        let mut groups: Vec<(MultiPoly, u64)> = Vec::new();
        for p in &b.singular {
            let child = g.substitute_affine(p, true)?;
            match groups.iter_mut().find(|(c, _)| *c == child) {
                Some(gr) => gr.1 += 1,
                None => groups.push((child, 1)),
            }
        }
        for (child, k) in groups {
            let e = self.node(child, Domain::full(q, n))?;
            out.add(e.scale(&RatFun::count_term(&CycInt::from_int(1, k), n as u32, q)));
        }
        Ok(out)
    }

    /// Integrates out unused variables and prunes terms that only perturb
    /// another term by a unit factor `1 + O(pi)`.
    fn normalize(&self, g: MultiPoly, d: Domain) -> (MultiPoly, Domain, RatFun) {
        let q = self.q();
        let (mut g, mut d) = (prune(&g), d);
        let mut mult = RatFun::one(1);
        let mut i = 0;
        while i < g.nvars() {
            if g.uses_var(i) {
                i += 1;
                continue;
            }
            mult = mult.mul(&RatFun::count_term(&CycInt::from_int(1, d.sets[i].len() as i64), 1, q));
            g = g.remove_var(i);
            d = d.without(i);
        }
        (g, d, mult)
    }
}

fn absorbable(r: (&Exps, &PiPoly), s: (&Exps, &PiPoly)) -> bool {
    r.0.iter().zip(s.0).all(|(a, b)| a >= b) && r.1.ord() > s.1.ord()
}

fn lead_monomial(c: &PiPoly) -> PiPoly {
    let o = c.ord().expect("nonzero coefficient");
    PiPoly::monomial(c.0[o], o)
}

/// Pruning rule: if every other term is absorbable into a term `s`
/// (exponents dominate, strictly larger `pi`-order) then `g = T_s * U` with
/// `U = 1 mod pi`, so `Z(g) = Z(T_s)`. If only the terms containing `x_i`
/// need to be absorbable and `p` does not divide the `x_i` exponent of `s`,
/// the coordinate change `x_i -> x_i U^(1/a)` (an isometry fixing residues)
/// removes them.
fn prune(g: &MultiPoly) -> MultiPoly {
    let p = g.field().p();
    let mut g = g.clone();
    'again: loop {
        let terms: Vec<(Exps, PiPoly)> = g.terms().iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        for (se, sc) in &terms {
            let others: Vec<&(Exps, PiPoly)> = terms.iter().filter(|(e, _)| e != se).collect();
            let lead = lead_monomial(sc);
            let all = others.iter().all(|(e, c)| absorbable((e, c), (se, sc)));
            if all && (!others.is_empty() || lead != *sc) {
                let mut t = BTreeMap::new();
                t.insert(se.clone(), lead);
                g = g.with_terms(t);
                continue 'again;
            }
            for (i, &a) in se.iter().enumerate() {
                if a == 0 || a % p == 0 {
                    continue;
                }
                let with_i: Vec<&&(Exps, PiPoly)> = others.iter().filter(|(e, _)| e[i] > 0).collect();
                if with_i.iter().all(|(e, c)| absorbable((e, c), (se, sc))) && (!with_i.is_empty() || lead != *sc) {
                    let mut t: BTreeMap<Exps, PiPoly> = g.terms().clone();
                    for (e, _) in with_i {
                        t.remove(e);
                    }
                    t.insert(se.clone(), lead);
                    g = g.with_terms(t);
                    continue 'again;
                }
            }
        }
        return g;
    }
}

/// Solves a task including its prefactor.
pub fn spf_solve(task: &ZetaTask, max_depth: usize) -> Result<RatFun, SpfError> {
    let mut s = Solver::new(task.poly.field().clone(), task.chi).with_max_depth(max_depth);
    let z = s.solve(&task.poly, &task.domain)?;
    Ok(z.mul_monomial(task.prefactor.0, task.prefactor.1))
}

/// `Z_f(s, chi)` over the whole of `O^n`.
pub fn zeta(f: &MultiPoly, chi: &CharClass) -> Result<RatFun, SpfError> {
    spf_solve(&ZetaTask::on_full(f.clone(), *chi), DEFAULT_MAX_DEPTH)
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.sets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symb::parse_ratfun;

    fn field(p: u32, r: u32) -> Arc<FieldConfig> {
        Arc::new(FieldConfig::new(p, r).unwrap())
    }

    fn poly(fc: &Arc<FieldConfig>, s: &str) -> MultiPoly {
        MultiPoly::parse(fc.clone(), s).unwrap()
    }

    fn rf(s: &str) -> RatFun {
        parse_ratfun(s, 1).unwrap()
    }

    #[test]
    fn one_variable_examples() {
        for (p, r) in [(2, 1), (3, 1), (5, 1), (2, 2)] {
            let fc = field(p, r);
            let q = fc.q();
            let triv = CharClass::trivial(q);
            assert!(zeta(&poly(&fc, "x"), &triv).unwrap().eq_at(&rf("(1-u)/(1-u t)"), q));
            assert!(zeta(&poly(&fc, "x^2"), &triv).unwrap().eq_at(&rf("(1-u)/(1-u t^2)"), q));
        }
    }

    #[test]
    fn step_examples() {
        let fc = field(3, 1);
        let triv = CharClass::trivial(3);
        let (closed, kids) = spf_step(&ZetaTask::on_full(poly(&fc, "x"), triv)).unwrap();
        // the zero of x is nonsingular, so sigma accounts for it and nothing recurses
        assert!(closed.eq_at(&rf("(1-u) + u(1-u)t/(1-u t)"), 3));
        assert!(closed.eq_at(&rf("(1-u)/(1-u t)"), 3));
        assert!(kids.is_empty());
        let (closed, kids) = spf_step(&ZetaTask::on_full(poly(&fc, "x^2"), triv)).unwrap();
        assert!(closed.eq_at(&rf("1-u"), 3));
        assert_eq!(kids[0].prefactor, (1, 2));
        assert_eq!(kids[0].poly, poly(&fc, "x^2"));
    }

    #[test]
    fn residue_buckets() {
        let fc = field(3, 1);
        let chi2 = CharClass::new(3, 1);
        let x = poly(&fc, "x");
        assert!(v_term(&x, &Domain::full(3, 1), &chi2).is_zero());
        assert!(sigma_term(&x, &Domain::full(3, 1), &chi2).is_zero());
        let g = MultiPoly::parse_with_arity(fc.clone(), "x^3 + 2", Some(2)).unwrap();
        let d = Domain::from_sets(vec![Domain::unit(3), Domain::any(3)]).unwrap();
        let s = singular_set(&g, &d);
        // -2^(1/3) = 1 in F_3
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|p| p[0] == FqElem(1)));
        let yz = MultiPoly::parse(fc.clone(), "y^4*z^2 + z^6").unwrap();
        let d3 = Domain::from_sets(vec![Domain::any(3), Domain::unit(3), Domain::unit(3)]).unwrap();
        assert!(singular_set(&yz, &d3).is_empty());
    }

    #[test]
    fn unit_power_integral_dichotomy() {
        let f3 = field(3, 1);
        assert!(unit_power_integral(&f3, 5, &CharClass::trivial(3)).eq_at(&rf("1-u"), 3));
        assert!(unit_power_integral(&f3, 1, &CharClass::new(3, 1)).is_zero());
        let f5 = field(5, 1);
        assert!(unit_power_integral(&f5, 2, &CharClass::new(5, 2)).eq_at(&rf("1-u"), 5));
    }

    #[test]
    fn lemma27_kernel_denominator() {
        // pi^p x^p + pi^n y^n over F_3 with n = 2
        let fc = field(3, 1);
        let z = zeta(&poly(&fc, "pi^3*x^3 + pi^2*y^2"), &CharClass::trivial(3)).unwrap();
        let den: Vec<(u32, u32)> = z.specialize(3).reduce().den_factors().iter().map(|f| (f.0, f.1)).collect();
        assert!(den.iter().all(|f| [(1, 1), (5, 6)].contains(f)), "{den:?}");
    }

    #[test]
    fn split_unit_variable_examples() {
        let fc = field(3, 1);
        let chi = CharClass::trivial(3);
        let z = MultiPoly::parse(fc.clone(), "z^4").unwrap();
        let d = Domain::parse(&fc, "unit,unit,unit", 3).unwrap();
        let s = split_unit_variable(&z, &d, 2, &[0, 0, 0], &chi).unwrap();
        assert_eq!(s.exponent, 4);
        assert!(s.multiplier.eq_at(&rf("1-u"), 3));
        let f = poly(&fc, "x^3 + y*z");
        assert!(matches!(split_unit_variable(&f, &d, 2, &[1, 1, 0], &chi), Err(SpfError::NotHomogenizable(2))));
    }

    #[test]
    fn pruning_keeps_dominant_term() {
        let fc = field(3, 1);
        let g = poly(&fc, "pi^2*x^3 + y^2 + pi^2*y^6");
        assert_eq!(prune(&g), poly(&fc, "pi^2*x^3 + y^2"));
        let h = poly(&fc, "x^2 + pi*x^2*y + pi*x^3");
        assert_eq!(prune(&h), MultiPoly::parse_with_arity(fc.clone(), "x^2", Some(2)).unwrap());
        // p | 3: the x^3 term cannot absorb
        let k = poly(&fc, "x^3 + pi*x^4 + y^2");
        assert_eq!(prune(&k), k);
    }

    #[test]
    fn nonterminating_is_reported() {
        let fc = field(2, 1);
        let f = poly(&fc, "x^2 + y^3");
        let err = spf_solve(&ZetaTask::on_full(f, CharClass::trivial(2)), 1).unwrap_err();
        assert!(matches!(err, SpfError::NonTerminating { max_depth: 1, .. }));
    }
}
