//! Multivariate polynomials over `F_q[pi]`.
//!
//! Coefficients are exact polynomials in `pi` and are never truncated here;
//! truncation only happens in [`MultiPoly::evaluate`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{FieldConfig, FqElem, GfError, TruncElem};

pub const MAX_VARS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MvError {
    #[error("at most {MAX_VARS} variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("expected {expected} coordinates, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("coordinate {index} has precision {have}, need at least {need}")]
    PrecisionMismatch { index: usize, have: usize, need: usize },
    #[error("the zero polynomial has no pi-power decomposition")]
    ZeroPolynomial,
    #[error("linear map is not invertible over O_K (determinant is not a unit)")]
    NotUnimodular,
    #[error("polynomials live over different fields")]
    FieldMismatch,
    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A polynomial in `pi` with `F_q` coefficients; `0[j]` multiplies `pi^j`.
/// Trailing zeros are trimmed, so the zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PiPoly(pub Vec<FqElem>);

impl PiPoly {
    pub fn zero() -> Self {
        PiPoly(Vec::new())
    }

    pub fn constant(c: FqElem) -> Self {
        let mut p = PiPoly(vec![c]);
        p.trim();
        p
    }

    pub fn one() -> Self {
        PiPoly(vec![FqElem::ONE])
    }

    /// `c * pi^m`.
    pub fn monomial(c: FqElem, m: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut v = vec![FqElem::ZERO; m + 1];
        v[m] = c;
        PiPoly(v)
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// pi-adic order; `None` for zero.
    pub fn ord(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    /// Coefficient of `pi^0`.
    pub fn residue(&self) -> FqElem {
        self.0.first().copied().unwrap_or(FqElem::ZERO)
    }

    /// Lowest nonzero coefficient.
    pub fn leading_unit(&self) -> Option<FqElem> {
        self.ord().map(|m| self.0[m])
    }

    pub fn add(&self, other: &Self, f: &FieldConfig) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut v = Vec::with_capacity(n);
        for j in 0..n {
            let a = self.0.get(j).copied().unwrap_or(FqElem::ZERO);
            let b = other.0.get(j).copied().unwrap_or(FqElem::ZERO);
            v.push(f.add(a, b));
        }
        let mut p = PiPoly(v);
        p.trim();
        p
    }

    pub fn neg(&self, f: &FieldConfig) -> Self {
        PiPoly(self.0.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn mul(&self, other: &Self, f: &FieldConfig) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut v = vec![FqElem::ZERO; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                v[i + j] = f.add(v[i + j], f.mul(a, b));
            }
        }
        let mut p = PiPoly(v);
        p.trim();
        p
    }

    pub fn scale(&self, c: FqElem, f: &FieldConfig) -> Self {
        let mut p = PiPoly(self.0.iter().map(|&x| f.mul(x, c)).collect());
        p.trim();
        p
    }

    /// Multiplies by `pi^m`.
    pub fn shift_up(&self, m: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut v = vec![FqElem::ZERO; m];
        v.extend_from_slice(&self.0);
        PiPoly(v)
    }

    /// Divides by `pi^m`; the caller guarantees `ord >= m`.
    pub fn shift_down(&self, m: usize) -> Self {
        PiPoly(self.0[m.min(self.0.len())..].to_vec())
    }

    pub fn to_trunc(&self, prec: usize) -> TruncElem {
        TruncElem::from_coeffs(self.0.iter().take(prec).copied().collect(), prec)
    }

    pub fn render(&self, f: &FieldConfig) -> String {
        let mut parts = Vec::new();
        for (j, &c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = f.render(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            parts.push(match j {
                0 => cs,
                _ => {
                    let pi = if j == 1 { "pi".to_string() } else { format!("pi^{j}") };
                    if cs == "1" {
                        pi
                    } else {
                        format!("{cs}*{pi}")
                    }
                }
            });
        }
        match parts.len() {
            0 => "0".into(),
            1 => parts.pop().unwrap(),
            _ => format!("({})", parts.join(" + ")),
        }
    }
}

/// Exponent vector of a monomial.
pub type Exps = Vec<u32>;

#[derive(Clone, Debug)]
pub struct MultiPoly {
    field: Arc<FieldConfig>,
    nvars: usize,
    terms: BTreeMap<Exps, PiPoly>,
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        self.nvars == other.nvars && self.terms == other.terms && *self.field == *other.field
    }
}

impl Eq for MultiPoly {}

impl std::hash::Hash for MultiPoly {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.nvars.hash(state);
        self.terms.hash(state);
    }
}

/// An O_K-linear change of coordinates `x -> M x + c` with entries in `F_q[pi]`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    /// `matrix[i][j]` is the coefficient of new variable `j` in old variable `i`.
    pub matrix: Vec<Vec<PiPoly>>,
    pub translation: Vec<PiPoly>,
}

impl LinearMap {
    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { PiPoly::one() } else { PiPoly::zero() }).collect())
            .collect();
        LinearMap { matrix, translation: vec![PiPoly::zero(); n] }
    }

    /// Determinant of the reduction mod pi, by Gaussian elimination over `F_q`.
    pub fn residue_determinant(&self, f: &FieldConfig) -> FqElem {
        let n = self.matrix.len();
        let mut a: Vec<Vec<FqElem>> = self.matrix.iter().map(|row| row.iter().map(|c| c.residue()).collect()).collect();
        let mut det = FqElem::ONE;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return FqElem::ZERO;
            };
            if piv != col {
                a.swap(piv, col);
                det = f.neg(det);
            }
            let pv = a[col][col];
            det = f.mul(det, pv);
            let inv = f.inv(pv).expect("nonzero pivot");
            for r in col + 1..n {
                let factor = f.mul(a[r][col], inv);
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let sub = f.mul(factor, a[col][c]);
                    a[r][c] = f.sub(a[r][c], sub);
                }
            }
        }
        det
    }
}

impl MultiPoly {
    pub fn zero(field: Arc<FieldConfig>, nvars: usize) -> Result<Self, MvError> {
        if nvars > MAX_VARS {
            return Err(MvError::TooManyVariables(nvars));
        }
        Ok(MultiPoly { field, nvars, terms: BTreeMap::new() })
    }

    pub fn constant(field: Arc<FieldConfig>, nvars: usize, c: PiPoly) -> Result<Self, MvError> {
        let mut p = Self::zero(field, nvars)?;
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        Ok(p)
    }

    pub fn var(field: Arc<FieldConfig>, nvars: usize, i: usize) -> Result<Self, MvError> {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(field, e, PiPoly::one())
    }

    pub fn monomial(field: Arc<FieldConfig>, exps: Exps, c: PiPoly) -> Result<Self, MvError> {
        let mut p = Self::zero(field, exps.len())?;
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        Ok(p)
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(
        field: Arc<FieldConfig>,
        nvars: usize,
        terms: impl IntoIterator<Item = (Exps, PiPoly)>,
    ) -> Result<Self, MvError> {
        let mut p = Self::zero(field, nvars)?;
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(MvError::ArityMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exps, c: PiPoly) {
        if c.is_zero() {
            return;
        }
        let f = self.field.clone();
        match self.terms.get_mut(&e) {
            Some(old) => {
                let s = old.add(&c, &f);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *old = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn field(&self) -> &Arc<FieldConfig> {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Exps, PiPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> Option<&PiPoly> {
        self.terms.get(e)
    }

    fn same_shape(&self, other: &Self) -> Result<(), MvError> {
        if *self.field != *other.field {
            return Err(MvError::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(MvError::ArityMismatch { expected: self.nvars, got: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MvError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let f = self.field.clone();
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg(&f))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MvError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MvError> {
        self.same_shape(other)?;
        let f = self.field.clone();
        let mut out = Self::zero(self.field.clone(), self.nvars)?;
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.mul(cb, &f));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::constant(self.field.clone(), self.nvars, PiPoly::one()).expect("valid arity");
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same shape");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same shape");
            }
        }
        acc
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: &PiPoly) -> Self {
        let f = self.field.clone();
        let mut out = Self::zero(self.field.clone(), self.nvars).expect("valid arity");
        for (e, k) in &self.terms {
            out.add_term(e.clone(), k.mul(c, &f));
        }
        out
    }

    /// Total degree in the variables; `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Largest exponent of variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, i: usize) -> bool {
        self.terms.keys().any(|e| e[i] > 0)
    }

    /// `f(point)` in `O_K / pi^prec`.
    pub fn evaluate(&self, point: &[TruncElem], prec: usize) -> Result<TruncElem, MvError> {
        if point.len() != self.nvars {
            return Err(MvError::ArityMismatch { expected: self.nvars, got: point.len() });
        }
        for (index, x) in point.iter().enumerate() {
            if x.prec() < prec {
                return Err(MvError::PrecisionMismatch { index, have: x.prec(), need: prec });
            }
        }
        let f = &*self.field;
        let pt: Vec<TruncElem> = point.iter().map(|x| x.truncate(prec)).collect();
        let mut powers: Vec<Vec<TruncElem>> = pt.iter().map(|x| vec![TruncElem::one(prec), x.clone()]).collect();
        let mut acc = TruncElem::zero(prec);
        for (e, c) in &self.terms {
            let mut term = c.to_trunc(prec);
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = powers[i].last().unwrap().mul(&pt[i], f);
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][k], f);
            }
            acc = acc.add(&term, f);
        }
        Ok(acc)
    }

    /// `f mod pi` evaluated at a residue point.
    pub fn eval_residue(&self, point: &[FqElem]) -> FqElem {
        let f = &*self.field;
        let mut acc = FqElem::ZERO;
        for (e, c) in &self.terms {
            let c0 = c.residue();
            if c0.is_zero() {
                continue;
            }
            let mut term = c0;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    term = f.mul(term, f.pow(point[i], k as u64));
                    if term.is_zero() {
                        break;
                    }
                }
            }
            acc = f.add(acc, term);
        }
        acc
    }

    /// Keeps the `pi^0` coefficient of every term.
    pub fn reduce_mod_pi(&self) -> MultiPoly {
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| !c.residue().is_zero())
                .map(|(e, c)| (e.clone(), PiPoly::constant(c.residue())))
                .collect(),
        }
    }

    /// Exponents whose coefficient has pi-order zero.
    pub fn support(&self) -> Vec<Exps> {
        self.terms
            .iter()
            .filter(|(_, c)| c.ord() == Some(0))
            .map(|(e, _)| e.clone())
            .collect()
    }

    pub fn partial_derivative(&self, var: usize) -> MultiPoly {
        let f = self.field.clone();
        let mut out = Self::zero(self.field.clone(), self.nvars).expect("valid arity");
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let k = f.from_int(e[var] as i64);
            if k.is_zero() {
                continue;
            }
            let mut ne = e.clone();
            ne[var] -= 1;
            out.add_term(ne, c.scale(k, &f));
        }
        out
    }

    /// `f(pi^e1 x1, ..., pi^en xn)` and the Jacobian exponent `sum e_j`.
    pub fn substitute_monomial(&self, exps: &[u32]) -> Result<(MultiPoly, u32), MvError> {
        if exps.len() != self.nvars {
            return Err(MvError::ArityMismatch { expected: self.nvars, got: exps.len() });
        }
        let terms = self.terms.iter().map(|(e, c)| {
            let shift: u32 = e.iter().zip(exps).map(|(a, b)| a * b).sum();
            (e.clone(), c.shift_up(shift as usize))
        });
        let out = MultiPoly { field: self.field.clone(), nvars: self.nvars, terms: terms.collect() };
        Ok((out, exps.iter().sum()))
    }

    /// Writes `f = pi^m g` with `g` not divisible by `pi`.
    pub fn extract_pi_power(&self) -> Result<(usize, MultiPoly), MvError> {
        let m = self.terms.values().filter_map(|c| c.ord()).min().ok_or(MvError::ZeroPolynomial)?;
        let g = MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.shift_down(m))).collect(),
        };
        Ok((m, g))
    }

    /// Substitutes `x_i -> subs[i]`, where every `subs[i]` has the same arity.
    pub fn compose(&self, subs: &[MultiPoly]) -> Result<MultiPoly, MvError> {
        if subs.len() != self.nvars {
            return Err(MvError::ArityMismatch { expected: self.nvars, got: subs.len() });
        }
        let m = subs.first().map(|s| s.nvars).unwrap_or(0);
        for s in subs {
            if s.nvars != m {
                return Err(MvError::ArityMismatch { expected: m, got: s.nvars });
            }
            if *s.field != *self.field {
                return Err(MvError::FieldMismatch);
            }
        }
        let one = Self::constant(self.field.clone(), m, PiPoly::one())?;
        let mut powers: Vec<Vec<MultiPoly>> = subs.iter().map(|s| vec![one.clone(), s.clone()]).collect();
        let mut out = Self::zero(self.field.clone(), m)?;
        for (e, c) in &self.terms {
            let mut term = one.scale(c);
            for (i, &k) in e.iter().enumerate() {
                let k = k as usize;
                while powers[i].len() <= k {
                    let next = powers[i].last().unwrap().mul(&subs[i])?;
                    powers[i].push(next);
                }
                if k > 0 {
                    term = term.mul(&powers[i][k])?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// `f(P + pi x)` when `scale_pi`, else `f(P + x)`.
    pub fn substitute_affine(&self, center: &[FqElem], scale_pi: bool) -> Result<MultiPoly, MvError> {
        if center.len() != self.nvars {
            return Err(MvError::ArityMismatch { expected: self.nvars, got: center.len() });
        }
        let step = if scale_pi { PiPoly::monomial(FqElem::ONE, 1) } else { PiPoly::one() };
        let subs = (0..self.nvars)
            .map(|i| {
                let x = Self::var(self.field.clone(), self.nvars, i)?.scale(&step);
                x.add(&Self::constant(self.field.clone(), self.nvars, PiPoly::constant(center[i]))?)
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.compose(&subs)
    }

    /// Re-centres a single coordinate: `x_var -> c + pi x_var`.
    pub fn recenter_coordinate(&self, var: usize, c: FqElem) -> MultiPoly {
        let subs: Vec<MultiPoly> = (0..self.nvars)
            .map(|i| {
                let x = Self::var(self.field.clone(), self.nvars, i).expect("valid arity");
                if i == var {
                    x.scale(&PiPoly::monomial(FqElem::ONE, 1))
                        .add(&Self::constant(self.field.clone(), self.nvars, PiPoly::constant(c)).unwrap())
                        .unwrap()
                } else {
                    x
                }
            })
            .collect();
        self.compose(&subs).expect("same shape")
    }

    /// Applies `x -> M x + c`; rejects maps whose determinant is not a unit.
    pub fn substitute_linear(&self, map: &LinearMap) -> Result<MultiPoly, MvError> {
        let n = self.nvars;
        if map.matrix.len() != n || map.translation.len() != n || map.matrix.iter().any(|r| r.len() != n) {
            return Err(MvError::ArityMismatch { expected: n, got: map.matrix.len() });
        }
        if map.residue_determinant(&self.field).is_zero() {
            return Err(MvError::NotUnimodular);
        }
        let subs = (0..n)
            .map(|i| {
                let mut s = Self::constant(self.field.clone(), n, map.translation[i].clone())?;
                for j in 0..n {
                    if !map.matrix[i][j].is_zero() {
                        s = s.add(&Self::var(self.field.clone(), n, j)?.scale(&map.matrix[i][j]))?;
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>, MvError>>()?;
        self.compose(&subs)
    }

    /// Drops variable `var` (which must not occur).
    pub fn remove_var(&self, var: usize) -> MultiPoly {
        debug_assert!(!self.uses_var(var));
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars - 1,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e.remove(var);
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// Replaces the term table wholesale (used by normalisation passes).
    pub fn with_terms(&self, terms: BTreeMap<Exps, PiPoly>) -> MultiPoly {
        MultiPoly { field: self.field.clone(), nvars: self.nvars, terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn parse(field: Arc<FieldConfig>, src: &str) -> Result<MultiPoly, MvError> {
        Self::parse_with_arity(field, src, None)
    }

    /// Parses with an explicit number of variables (at least the highest used).
    pub fn parse_with_arity(field: Arc<FieldConfig>, src: &str, nvars: Option<usize>) -> Result<MultiPoly, MvError> {
        let toks = tokenize(src)?;
        let mut max_var = 0usize;
        for t in &toks {
            if let Tok::Var(i) = t.tok {
                max_var = max_var.max(i + 1);
            }
        }
        let n = nvars.unwrap_or(max_var.max(1));
        if n < max_var {
            return Err(MvError::ArityMismatch { expected: n, got: max_var });
        }
        if n > MAX_VARS {
            return Err(MvError::TooManyVariables(n));
        }
        let mut p = Parser { toks: &toks, pos: 0, field, nvars: n, src_len: src.len() };
        let out = p.expr()?;
        if p.pos != toks.len() {
            return Err(MvError::Parse { pos: toks[p.pos].at, msg: "unexpected trailing input".into() });
        }
        Ok(out)
    }

    fn var_name(&self, i: usize) -> String {
        if self.nvars <= 3 {
            ["x", "y", "z"][i].to_string()
        } else {
            format!("x{}", i + 1)
        }
    }
}

impl fmt::Display for MultiPoly {
    /// Highest total degree first; parseable by [`MultiPoly::parse`].
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        let mut keys: Vec<&Exps> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut first = true;
        for e in keys {
            let c = self.terms[e].render(&self.field);
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.var_name(i) } else { format!("{}^{k}", self.var_name(i)) })
                .collect();
            let body = match (c.as_str(), mono.is_empty()) {
                (_, true) => c.clone(),
                ("1", false) => mono.join("*"),
                _ => format!("{c}*{}", mono.join("*")),
            };
            if !first {
                out.write_str(" + ")?;
            }
            out.write_str(&body)?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(u64),
    A,
    Pi,
    Var(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Spanned {
    tok: Tok,
    at: usize,
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, MvError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        let at = i;
        let simple = match c {
            b' ' | b'\t' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'/' => return Err(MvError::Parse { pos: at, msg: "division is not supported".into() }),
            _ => None,
        };
        if let Some(t) = simple {
            out.push(Spanned { tok: t, at });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i]
                .parse::<u64>()
                .map_err(|e| MvError::Parse { pos: start, msg: e.to_string() })?;
            out.push(Spanned { tok: Tok::Num(n), at });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < b.len() && b[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word = &src[start..i];
            let tok = match word {
                "pi" => Tok::Pi,
                "a" => Tok::A,
                "x" => Tok::Var(0),
                "y" => Tok::Var(1),
                "z" => Tok::Var(2),
                w if w.starts_with('x') && w[1..].parse::<usize>().is_ok() => {
                    let k = w[1..].parse::<usize>().unwrap();
                    if k == 0 || k > MAX_VARS {
                        return Err(MvError::Parse { pos: start, msg: format!("variable index must be 1..={MAX_VARS}") });
                    }
                    Tok::Var(k - 1)
                }
                w => {
                    return Err(MvError::Parse {
                        pos: start,
                        msg: format!("unknown identifier '{w}' (expected x, y, z, x1..x8, a or pi)"),
                    })
                }
            };
            out.push(Spanned { tok, at });
            continue;
        }
        return Err(MvError::Parse { pos: at, msg: format!("unexpected character '{}'", c as char) });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    field: Arc<FieldConfig>,
    nvars: usize,
    src_len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.at).unwrap_or(self.src_len)
    }

    fn err(&self, msg: &str) -> MvError {
        MvError::Parse { pos: self.here(), msg: msg.into() }
    }

    fn expr(&mut self) -> Result<MultiPoly, MvError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly, MvError> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MultiPoly, MvError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(k)) => {
                    let k = *k;
                    self.pos += 1;
                    let k = u32::try_from(k).map_err(|_| self.err("exponent too large"))?;
                    return Ok(base.pow(k));
                }
                Some(Tok::Minus) => return Err(self.err("negative exponents are not supported")),
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, MvError> {
        let f = self.field.clone();
        let n = self.nvars;
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Num(k) => {
                let c = f.from_int((k % f.p() as u64) as i64);
                MultiPoly::constant(f, n, PiPoly::constant(c))
            }
            Tok::A => {
                let a = f.from_coeffs(&[0, 1]);
                MultiPoly::constant(f, n, PiPoly::constant(a))
            }
            Tok::Pi => MultiPoly::constant(f, n, PiPoly::monomial(FqElem::ONE, 1)),
            Tok::Var(i) => MultiPoly::var(f, n, i),
            Tok::LParen => {
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Minus => Ok(self.factor()?.neg()),
            _ => {
                self.pos -= 1;
                Err(self.err("expected a number, variable, 'a', 'pi' or '('"))
            }
        }
    }
}
