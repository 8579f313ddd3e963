//! Residue field `F_q` and the truncated rings `F_q[pi]/(pi^i)`.
//!
//! Elements of `F_q = F_p[a]/(m(a))` are packed into a single `u32`: the
//! coefficient of `a^j` is the base-`p` digit `j`. Arithmetic goes through the
//! owning [`FieldConfig`], which holds the modulus and a fixed generator of the
//! unit group (the discrete-log table is only used to evaluate characters).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("extension degree must be positive")]
    ZeroDegree,
    #[error("field of order {0} exceeds the supported size")]
    TooLarge(u64),
    #[error("modulus must be monic of degree {expected}, got degree {got}")]
    BadModulusDegree { expected: usize, got: usize },
    #[error("modulus {0} is reducible over F_p")]
    ReducibleModulus(String),
    #[error("angular component of zero is undefined")]
    ZeroAngular,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Largest supported residue field.
pub const MAX_Q: u64 = 1 << 16;

/// An element of `F_q`, packed as base-`p` digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FqElem(pub u32);

impl FqElem {
    pub const ZERO: FqElem = FqElem(0);
    pub const ONE: FqElem = FqElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
pub struct FieldConfig {
    p: u32,
    r: u32,
    q: u32,
    /// Monic modulus, low degree first, length `r + 1`.
    modulus: Vec<u32>,
    generator: FqElem,
    log: Vec<u32>,
}

impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.r == other.r && self.modulus == other.modulus
    }
}

impl Eq for FieldConfig {}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

// Dense F_p[a] helpers, low degree first.

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    trim(&mut r);
    let mut d = den.to_vec();
    trim(&mut d);
    let dl = d.len();
    let lead_inv = mod_inv(*d.last().expect("nonzero divisor"), p);
    while r.len() >= dl {
        let shift = r.len() - dl;
        let c = (*r.last().unwrap() as u64 * lead_inv as u64 % p as u64) as u32;
        for (j, &dj) in d.iter().enumerate() {
            let sub = (c as u64 * dj as u64 % p as u64) as u32;
            r[shift + j] = (r[shift + j] + p - sub) % p;
        }
        trim(&mut r);
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    mod_pow(a, p - 2, p)
}

fn mod_pow(mut a: u32, mut e: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let mut base = a as u64 % p as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    a = acc as u32;
    a
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let deg = modulus.len() - 1;
    if deg <= 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=deg/2.
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for k in 0..count {
            let mut cand = Vec::with_capacity(d + 1);
            let mut rest = k;
            for _ in 0..d {
                cand.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            cand.push(1);
            if poly_rem(modulus, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn render_poly_a(coeffs: &[u32]) -> String {
    let mut parts = Vec::new();
    for (j, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match j {
            0 => String::new(),
            1 => "a".to_string(),
            _ => format!("a^{j}"),
        };
        parts.push(match (c, j) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}*{mono}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

/// Parses a univariate polynomial in `a` with integer coefficients, e.g. `a^2+2*a+1`.
fn parse_poly_a(src: &str, p: u32) -> Result<Vec<u32>, GfError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(GfError::Parse("empty polynomial".into()));
    }
    let mut coeffs: Vec<i64> = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = 1i64;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            if bytes[i] == b'-' {
                sign = -1;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i] != b'+' && bytes[i] != b'-' {
            i += 1;
        }
        let term = &s[start..i];
        if term.is_empty() {
            return Err(GfError::Parse(format!("dangling sign in '{src}'")));
        }
        let (coef, deg) = parse_term_a(term).ok_or_else(|| GfError::Parse(format!("bad term '{term}'")))?;
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, 0);
        }
        coeffs[deg] += sign * coef;
    }
    Ok(coeffs
        .into_iter()
        .map(|c| c.rem_euclid(p as i64) as u32)
        .collect())
}

fn parse_term_a(term: &str) -> Option<(i64, usize)> {
    let (coef_part, mono) = match term.find('a') {
        None => return term.parse::<i64>().ok().map(|c| (c, 0)),
        Some(pos) => (&term[..pos], &term[pos..]),
    };
    let coef = match coef_part.trim_end_matches('*') {
        "" => 1,
        c => c.parse::<i64>().ok()?,
    };
    let deg = match mono {
        "a" => 1,
        m => m.strip_prefix("a^")?.parse::<usize>().ok()?,
    };
    Some((coef, deg))
}

impl FieldConfig {
    /// Builds `F_{p^r}` with the lexicographically first monic irreducible modulus.
    pub fn new(p: u32, r: u32) -> Result<Self, GfError> {
        Self::check_size(p, r)?;
        let r_us = r as usize;
        let count = (p as u64).pow(r);
        for k in 0..count {
            let mut m = Vec::with_capacity(r_us + 1);
            let mut rest = k;
            for _ in 0..r_us {
                m.push((rest % p as u64) as u32);
                rest /= p as u64;
            }
            m.push(1);
            if r_us > 1 && m[0] == 0 {
                continue;
            }
            if is_irreducible(&m, p) {
                return Self::with_modulus(p, r, m);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// Builds `F_{p^r}` with an explicit monic modulus (low degree first).
    pub fn with_modulus(p: u32, r: u32, modulus: Vec<u32>) -> Result<Self, GfError> {
        Self::check_size(p, r)?;
        let mut m: Vec<u32> = modulus.iter().map(|&c| c % p).collect();
        trim(&mut m);
        if m.len() != r as usize + 1 || *m.last().unwrap() != 1 {
            return Err(GfError::BadModulusDegree {
                expected: r as usize,
                got: m.len().saturating_sub(1),
            });
        }
        if !is_irreducible(&m, p) {
            return Err(GfError::ReducibleModulus(render_poly_a(&m)));
        }
        let q = p.pow(r);
        let mut cfg = FieldConfig {
            p,
            r,
            q,
            modulus: m,
            generator: FqElem::ONE,
            log: Vec::new(),
        };
        cfg.generator = cfg.find_generator();
        let mut log = vec![u32::MAX; q as usize];
        let mut x = FqElem::ONE;
        for j in 0..q - 1 {
            log[x.index()] = j;
            x = cfg.mul(x, cfg.generator);
        }
        cfg.log = log;
        Ok(cfg)
    }

    fn check_size(p: u32, r: u32) -> Result<(), GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if r == 0 {
            return Err(GfError::ZeroDegree);
        }
        let q = (p as u64).checked_pow(r).unwrap_or(u64::MAX);
        if q > MAX_Q {
            return Err(GfError::TooLarge(q));
        }
        Ok(())
    }

    fn find_generator(&self) -> FqElem {
        let order = (self.q - 1) as u64;
        let prime_factors: Vec<u64> = {
            let mut fs = Vec::new();
            let mut n = order;
            let mut d = 2;
            while d * d <= n {
                if n.is_multiple_of(d) {
                    fs.push(d);
                    while n.is_multiple_of(d) {
                        n /= d;
                    }
                }
                d += 1;
            }
            if n > 1 {
                fs.push(n);
            }
            fs
        };
        (1..self.q)
            .map(FqElem)
            .find(|&g| prime_factors.iter().all(|&f| self.pow(g, order / f) != FqElem::ONE))
            .expect("F_q^x is cyclic")
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> FqElem {
        self.generator
    }

    pub fn modulus_string(&self) -> String {
        render_poly_a(&self.modulus)
    }

    /// Iterates over all `q` elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + Clone {
        (0..self.q).map(FqElem)
    }

    pub fn units(&self) -> impl Iterator<Item = FqElem> + Clone {
        (1..self.q).map(FqElem)
    }

    pub fn coeffs(&self, x: FqElem) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.r as usize);
        let mut v = x.0;
        for _ in 0..self.r {
            out.push(v % self.p);
            v /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> FqElem {
        let reduced = if coeffs.len() > self.r as usize {
            poly_rem(coeffs, &self.modulus, self.p)
        } else {
            coeffs.iter().map(|c| c % self.p).collect()
        };
        let mut v = 0u32;
        for &c in reduced.iter().rev() {
            v = v * self.p + c;
        }
        FqElem(v)
    }

    /// Image of an integer under `Z -> F_p -> F_q`.
    pub fn from_int(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn add(&self, x: FqElem, y: FqElem) -> FqElem {
        if self.r == 1 {
            return FqElem((x.0 + y.0) % self.p);
        }
        let (mut a, mut b, p) = (x.0, y.0, self.p);
        let mut v = 0u32;
        let mut place = 1u32;
        for _ in 0..self.r {
            v += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        FqElem(v)
    }

    pub fn neg(&self, x: FqElem) -> FqElem {
        if self.r == 1 {
            return FqElem((self.p - x.0) % self.p);
        }
        let c: Vec<u32> = self.coeffs(x).iter().map(|&c| (self.p - c) % self.p).collect();
        self.from_coeffs(&c)
    }

    pub fn sub(&self, x: FqElem, y: FqElem) -> FqElem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: FqElem, y: FqElem) -> FqElem {
        if self.r == 1 {
            return FqElem(((x.0 as u64 * y.0 as u64) % self.p as u64) as u32);
        }
        if x.is_zero() || y.is_zero() {
            return FqElem::ZERO;
        }
        let a = self.coeffs(x);
        let b = self.coeffs(y);
        let p = self.p as u64;
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
        self.from_coeffs(&prod)
    }

    pub fn pow(&self, x: FqElem, mut e: u64) -> FqElem {
        let mut acc = FqElem::ONE;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, x: FqElem) -> Option<FqElem> {
        if x.is_zero() {
            None
        } else {
            Some(self.pow(x, self.q as u64 - 2))
        }
    }

    pub fn frobenius(&self, x: FqElem) -> FqElem {
        self.pow(x, self.p as u64)
    }

    /// The unique `y` with `y^p = x`.
    pub fn pth_root(&self, x: FqElem) -> FqElem {
        self.pow(x, (self.q / self.p) as u64)
    }

    /// Discrete logarithm to the stored generator; `None` for zero.
    pub fn log(&self, x: FqElem) -> Option<u32> {
        if x.is_zero() {
            None
        } else {
            Some(self.log[x.index()])
        }
    }

    /// Parses an element literal such as `2`, `a+1` or `2*a^2+a`.
    pub fn parse_elem(&self, src: &str) -> Result<FqElem, GfError> {
        let c = parse_poly_a(src, self.p)?;
        Ok(self.from_coeffs(&c))
    }

    pub fn render(&self, x: FqElem) -> String {
        render_poly_a(&self.coeffs(x))
    }

    /// Text form accepted by [`FromStr`].
    pub fn spec_string(&self) -> String {
        format!("p={} r={} modulus={}", self.p, self.r, self.modulus_string())
    }
}

impl FromStr for FieldConfig {
    type Err = GfError;

    /// Parses `"p=3 r=2 modulus=a^2+1"`; `r` defaults to 1 and the modulus to
    /// the lexicographically first irreducible.
    fn from_str(s: &str) -> Result<Self, GfError> {
        let mut p = None;
        let mut r = 1u32;
        let mut modulus = None;
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| GfError::Parse(format!("expected key=value, got '{tok}'")))?;
            match k {
                "p" => p = Some(v.parse::<u32>().map_err(|e| GfError::Parse(format!("p: {e}")))?),
                "r" => r = v.parse::<u32>().map_err(|e| GfError::Parse(format!("r: {e}")))?,
                "modulus" => modulus = Some(v.to_string()),
                _ => return Err(GfError::Parse(format!("unknown key '{k}'"))),
            }
        }
        let p = p.ok_or_else(|| GfError::Parse("missing p".into()))?;
        match modulus {
            None => FieldConfig::new(p, r),
            Some(m) => {
                if !is_prime(p) {
                    return Err(GfError::NotPrime(p));
                }
                FieldConfig::with_modulus(p, r, parse_poly_a(&m, p)?)
            }
        }
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec_string())
    }
}

/// `ord` of a truncated element: exact, or "at least the precision".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(m) => Some(m),
            Valuation::Infinite => None,
        }
    }
}

/// A class in `O_K / pi^prec = F_q[pi]/(pi^prec)`; `coeffs[j]` multiplies `pi^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncElem {
    coeffs: Vec<FqElem>,
}

impl TruncElem {
    pub fn zero(prec: usize) -> Self {
        assert!(prec > 0, "precision must be positive");
        TruncElem { coeffs: vec![FqElem::ZERO; prec] }
    }

    /// Constant embedding of a residue (the lift `F_q -> F_q[[pi]]`).
    pub fn constant(c: FqElem, prec: usize) -> Self {
        let mut z = Self::zero(prec);
        z.coeffs[0] = c;
        z
    }

    pub fn one(prec: usize) -> Self {
        Self::constant(FqElem::ONE, prec)
    }

    /// `pi^m`, zero when `m >= prec`.
    pub fn pi_pow(m: usize, prec: usize) -> Self {
        let mut z = Self::zero(prec);
        if m < prec {
            z.coeffs[m] = FqElem::ONE;
        }
        z
    }

    /// Truncates or zero-pads `coeffs` to `prec`.
    pub fn from_coeffs(mut coeffs: Vec<FqElem>, prec: usize) -> Self {
        assert!(prec > 0, "precision must be positive");
        coeffs.resize(prec, FqElem::ZERO);
        TruncElem { coeffs }
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    pub fn residue(&self) -> FqElem {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        !self.coeffs[0].is_zero()
    }

    pub fn truncate(&self, prec: usize) -> Self {
        Self::from_coeffs(self.coeffs[..prec.min(self.prec())].to_vec(), prec.min(self.prec()))
    }

    pub fn ord(&self) -> Valuation {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(m) => Valuation::Finite(m),
            None => Valuation::Infinite,
        }
    }

    /// Unit part `x * pi^-ord(x)`, known to precision `prec - ord(x)`.
    pub fn ac(&self) -> Result<TruncElem, GfError> {
        match self.ord() {
            Valuation::Infinite => Err(GfError::ZeroAngular),
            Valuation::Finite(m) => Ok(TruncElem { coeffs: self.coeffs[m..].to_vec() }),
        }
    }

    pub fn add(&self, other: &Self, f: &FieldConfig) -> Self {
        let prec = self.prec().min(other.prec());
        TruncElem {
            coeffs: (0..prec).map(|j| f.add(self.coeffs[j], other.coeffs[j])).collect(),
        }
    }

    pub fn neg(&self, f: &FieldConfig) -> Self {
        TruncElem { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect() }
    }

    pub fn sub(&self, other: &Self, f: &FieldConfig) -> Self {
        self.add(&other.neg(f), f)
    }

    pub fn mul(&self, other: &Self, f: &FieldConfig) -> Self {
        let prec = self.prec().min(other.prec());
        let mut out = vec![FqElem::ZERO; prec];
        for (i, &a) in self.coeffs.iter().take(prec).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(prec - i).enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        TruncElem { coeffs: out }
    }

    pub fn scale(&self, c: FqElem, f: &FieldConfig) -> Self {
        TruncElem { coeffs: self.coeffs.iter().map(|&x| f.mul(x, c)).collect() }
    }

    pub fn pow(&self, mut e: u64, f: &FieldConfig) -> Self {
        let mut acc = Self::one(self.prec());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            base = base.mul(&base, f);
            e >>= 1;
        }
        acc
    }

    /// `x^p` via `(sum a_j pi^j)^p = sum a_j^p pi^(jp)`.
    pub fn frobenius(&self, f: &FieldConfig) -> Self {
        let prec = self.prec();
        let p = f.p() as usize;
        let mut out = vec![FqElem::ZERO; prec];
        for (j, &a) in self.coeffs.iter().enumerate() {
            if j * p >= prec {
                break;
            }
            out[j * p] = f.frobenius(a);
        }
        TruncElem { coeffs: out }
    }

    /// True when every nonzero coefficient sits at an index divisible by `p`.
    pub fn is_pth_power(&self, f: &FieldConfig) -> bool {
        let p = f.p() as usize;
        self.coeffs.iter().enumerate().all(|(j, c)| c.is_zero() || j % p == 0)
    }

    /// Writes `self = pi^m * x1` and returns `x1` in `O_K / pi^(prec - m)`,
    /// or `None` when `ord(self) < m`.
    pub fn divide_pi_power(&self, m: usize) -> Option<TruncElem> {
        if m >= self.prec() {
            return None;
        }
        if self.coeffs[..m].iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(TruncElem { coeffs: self.coeffs[m..].to_vec() })
    }

    pub fn render(&self, f: &FieldConfig) -> String {
        let mut parts = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cs = f.render(c);
            let cs = if cs.contains('+') { format!("({cs})") } else { cs };
            parts.push(match j {
                0 => cs,
                1 if cs == "1" => "pi".to_string(),
                1 => format!("{cs}*pi"),
                _ if cs == "1" => format!("pi^{j}"),
                _ => format!("{cs}*pi^{j}"),
            });
        }
        let body = if parts.is_empty() { "0".to_string() } else { parts.join(" + ") };
        format!("{body} mod pi^{}", self.prec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> FieldConfig {
        FieldConfig::new(3, 1).unwrap()
    }

    fn f9() -> FieldConfig {
        "p=3 r=2 modulus=a^2+1".parse().unwrap()
    }

    fn te(c: &[u32], prec: usize) -> TruncElem {
        TruncElem::from_coeffs(c.iter().map(|&v| FqElem(v)).collect(), prec)
    }

    #[test]
    fn ord_examples() {
        assert_eq!(TruncElem::pi_pow(2, 5).ord(), Valuation::Finite(2));
        assert_eq!(TruncElem::zero(4).ord(), Valuation::Infinite);
        assert_eq!(te(&[1, 1], 3).ord(), Valuation::Finite(0));
    }

    #[test]
    fn ac_examples() {
        let f = f3();
        assert_eq!(TruncElem::pi_pow(3, 5).ac().unwrap(), TruncElem::one(2));
        let unit = te(&[2, 1, 1], 3);
        assert_eq!(unit.ac().unwrap(), unit);
        // 2*pi + pi^2 over F_3 at precision 3 -> 2 + pi at precision 2
        assert_eq!(te(&[0, 2, 1], 3).ac().unwrap(), te(&[2, 1], 2));
        assert_eq!(TruncElem::zero(3).ac(), Err(GfError::ZeroAngular));
        let _ = f;
    }

    #[test]
    fn frobenius_examples() {
        let f = f3();
        for x in f.elements() {
            assert_eq!(f.frobenius(x), x);
        }
        let g = f9();
        let a = g.parse_elem("a").unwrap();
        assert_eq!(g.frobenius(a), g.parse_elem("2*a").unwrap());
        let one_plus_pi = te(&[1, 1], 4);
        assert_eq!(one_plus_pi.frobenius(&f), te(&[1, 0, 0, 1], 4));
        assert_eq!(one_plus_pi.pow(3, &f), one_plus_pi.frobenius(&f));
    }

    #[test]
    fn pth_root_examples() {
        let f = f3();
        assert_eq!(f.pth_root(FqElem::ONE), FqElem::ONE);
        assert_eq!(f.pth_root(FqElem(2)), FqElem(2));
        assert!(!te(&[1, 1], 2).is_pth_power(&f));
        assert!(te(&[1, 0, 0, 2], 4).is_pth_power(&f));
    }

    #[test]
    fn frobenius_is_ring_hom_small_fields() {
        // Exhaustive over pairs while the ring has at most 729 elements, strided above.
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
            let f = FieldConfig::new(p, r).unwrap();
            for prec in 1..=4usize {
                let ring: Vec<TruncElem> = all_trunc(&f, prec);
                let stride = if ring.len() <= 729 { 1 } else { ring.len() / 300 };
                let sample: Vec<&TruncElem> = ring.iter().step_by(stride).collect();
                for x in &sample {
                    for y in &sample {
                        assert_eq!(x.add(y, &f).frobenius(&f), x.frobenius(&f).add(&y.frobenius(&f), &f));
                        assert_eq!(x.mul(y, &f).frobenius(&f), x.frobenius(&f).mul(&y.frobenius(&f), &f));
                    }
                }
            }
        }
    }

    fn all_trunc(f: &FieldConfig, prec: usize) -> Vec<TruncElem> {
        let q = f.q() as usize;
        let total = q.pow(prec as u32);
        (0..total)
            .map(|mut k| {
                let mut c = Vec::with_capacity(prec);
                for _ in 0..prec {
                    c.push(FqElem((k % q) as u32));
                    k /= q;
                }
                TruncElem::from_coeffs(c, prec)
            })
            .collect()
    }

    #[test]
    fn pth_root_inverts_frobenius() {
        for (p, r) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (7, 1)] {
            let f = FieldConfig::new(p, r).unwrap();
            for x in f.elements() {
                assert_eq!(f.pth_root(f.frobenius(x)), x);
            }
        }
    }

    #[test]
    fn generator_has_full_order() {
        for (p, r) in [(2, 3), (3, 2), (5, 1), (7, 1), (2, 4), (3, 3)] {
            let f = FieldConfig::new(p, r).unwrap();
            let g = f.generator();
            let mut seen = std::collections::HashSet::new();
            let mut x = FqElem::ONE;
            for _ in 0..f.q() - 1 {
                seen.insert(x);
                x = f.mul(x, g);
            }
            assert_eq!(seen.len() as u32, f.q() - 1);
            for u in f.units() {
                assert_eq!(f.pow(g, f.log(u).unwrap() as u64), u);
            }
        }
    }

    #[test]
    fn ord_and_ac_are_multiplicative() {
        let f = f3();
        let ring = all_trunc(&f, 3);
        for x in &ring {
            for y in &ring {
                let xy = x.mul(y, &f);
                if let (Valuation::Finite(a), Valuation::Finite(b)) = (x.ord(), y.ord()) {
                    if a + b < 3 {
                        assert_eq!(xy.ord(), Valuation::Finite(a + b));
                        let acx = x.ac().unwrap();
                        let acy = y.ac().unwrap();
                        let prec = 3 - a - b;
                        assert_eq!(xy.ac().unwrap(), acx.truncate(prec).mul(&acy.truncate(prec), &f));
                    }
                }
            }
        }
    }

    #[test]
    fn pi_power_division() {
        let f = f3();
        for x in all_trunc(&f, 4) {
            for m in 0..4 {
                match x.ord() {
                    Valuation::Finite(o) if o >= m => {
                        let x1 = x.divide_pi_power(m).unwrap();
                        assert_eq!(x1.prec(), 4 - m);
                        assert_eq!(x1.is_unit(), o == m);
                    }
                    Valuation::Infinite => assert!(x.divide_pi_power(m).is_some()),
                    _ => assert!(x.divide_pi_power(m).is_none()),
                }
            }
        }
    }

    #[test]
    fn parses_field_specs() {
        let f = f9();
        assert_eq!(f.q(), 9);
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let d: FieldConfig = "p=2 r=3".parse().unwrap();
        assert_eq!(d.modulus_string(), "a^3+a+1");
        assert!(matches!("p=3 r=2 modulus=a^2+2".parse::<FieldConfig>(), Err(GfError::ReducibleModulus(_))));
        assert!(matches!("p=4".parse::<FieldConfig>(), Err(GfError::NotPrime(4))));
        assert_eq!(d.spec_string().parse::<FieldConfig>().unwrap(), d);
    }

    #[test]
    fn extension_arithmetic() {
        let f = f9();
        let a = f.parse_elem("a").unwrap();
        assert_eq!(f.mul(a, a), f.from_int(-1));
        for x in f.units() {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), FqElem::ONE);
        }
    }
}
