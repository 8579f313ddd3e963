//! Rational functions evaluated at a fixed residue-field size.
//!
//! At `u = 1/q` a value is stored as `q^scale * N(t) / prod (q^a - t^b)^k`
//! with `N` in `Z[zeta][t]`. Each `q^a - t^b` has leading coefficient `-1` in
//! `t`, so cancelling it against `N` is exact integral division.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::cyc::CycInt;
use super::ratfun::{Mono, NumPoly, RatFun};
use super::SymbError;

type TPoly = Vec<CycInt>;

fn trim(p: &mut TPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn tpoly_mul(a: &TPoly, b: &TPoly, order: u32) -> TPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![CycInt::zero(order); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    trim(&mut out);
    out
}

fn tpoly_add(a: &TPoly, b: &TPoly, order: u32) -> TPoly {
    let n = a.len().max(b.len());
    let zero = CycInt::zero(order);
    let mut out: TPoly = (0..n).map(|i| a.get(i).unwrap_or(&zero).add(b.get(i).unwrap_or(&zero))).collect();
    trim(&mut out);
    out
}

fn tpoly_scale(a: &TPoly, k: &BigInt) -> TPoly {
    let mut out: TPoly = a.iter().map(|c| c.scale(k)).collect();
    trim(&mut out);
    out
}

/// `q^a - t^b`.
fn binomial(order: u32, q: &BigInt, a: u32, b: u32) -> TPoly {
    let mut p = vec![CycInt::zero(order); b as usize + 1];
    p[0] = CycInt::from_int(order, q.pow(a));
    p[b as usize] = p[b as usize].sub(&CycInt::one(order));
    trim(&mut p);
    p
}

/// Exact division by a polynomial whose leading coefficient is `+-1`.
fn tpoly_div_exact(n: &TPoly, d: &TPoly) -> Option<TPoly> {
    if n.is_empty() {
        return Some(Vec::new());
    }
    let order = n[0].order();
    let dl = d.len();
    if n.len() < dl {
        return None;
    }
    let lead = d.last().unwrap().as_integer().expect("integer leading coefficient");
    let sign = if lead.is_one() { BigInt::one() } else { -BigInt::one() };
    let mut r = n.clone();
    let mut quot = vec![CycInt::zero(order); n.len() - dl + 1];
    for k in (dl - 1..n.len()).rev() {
        let c = r[k].scale(&sign);
        if c.is_zero() {
            continue;
        }
        quot[k + 1 - dl] = c.clone();
        for (j, dj) in d.iter().enumerate() {
            r[k + 1 - dl + j] = r[k + 1 - dl + j].sub(&c.mul(dj));
        }
    }
    if r.iter().all(|c| c.is_zero()) {
        trim(&mut quot);
        Some(quot)
    } else {
        None
    }
}

/// `1 + X + ... + X^(k-1)` with `X = t^b / q^a` scaled by `q^(a(k-1))`:
/// the cofactor of `q^a - t^b` in `q^(ka) - t^(kb)`.
fn cofactor(order: u32, q: &BigInt, a: u32, b: u32, k: u32) -> TPoly {
    let mut p = vec![CycInt::zero(order); (b * (k - 1)) as usize + 1];
    for j in 0..k {
        p[(b * j) as usize] = CycInt::from_int(order, q.pow(a * (k - 1 - j)));
    }
    p
}

#[derive(Clone, Debug)]
pub struct Specialized {
    q: BigInt,
    order: u32,
    scale: i64,
    num: TPoly,
    den: BTreeMap<Mono, u32>,
}

impl Specialized {
    pub fn from_ratfun(r: &RatFun, q: u32) -> Self {
        let order = r.order();
        let qb = BigInt::from(q);
        let max_u = r.num().keys().map(|m| m.0).max().unwrap_or(0);
        let mut num: TPoly = Vec::new();
        for (&(eu, et), c) in r.num() {
            if num.len() <= et as usize {
                num.resize(et as usize + 1, CycInt::zero(order));
            }
            num[et as usize] = num[et as usize].add(&c.scale(&qb.pow(max_u - eu)));
        }
        trim(&mut num);
        let den_shift: i64 = r.den().iter().map(|(&(a, _), &k)| a as i64 * k as i64).sum();
        let mut den = BTreeMap::new();
        let mut scale = den_shift - max_u as i64;
        let mut n = num;
        for (&(a, b), &k) in r.den() {
            if b == 0 {
                // constant factor (q^a - 1): fold into the numerator only if exact
                let d = &qb.pow(a) - BigInt::one();
                let mut left = k;
                while left > 0 {
                    match n.iter().map(|c| c.div_exact(&d)).collect::<Option<Vec<_>>>() {
                        Some(v) => {
                            n = v;
                            left -= 1;
                        }
                        None => break,
                    }
                }
                if left > 0 {
                    den.insert((a, b), left);
                }
            } else {
                den.insert((a, b), k);
            }
        }
        if n.is_empty() {
            scale = 0;
            den.clear();
        }
        let mut s = Specialized { q: qb, order, scale, num: n, den };
        s.normalize_content();
        s
    }

    fn normalize_content(&mut self) {
        if self.num.is_empty() {
            self.scale = 0;
            return;
        }
        loop {
            match self.num.iter().map(|c| c.div_exact(&self.q)).collect::<Option<Vec<_>>>() {
                Some(v) => {
                    self.num = v;
                    self.scale += 1;
                }
                None => break,
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Denominator factors `(a, b, k)` for `(1 - q^-a t^b)^k`.
    pub fn den_factors(&self) -> Vec<(u32, u32, u32)> {
        self.den.iter().map(|(&(a, b), &k)| (a, b, k)).collect()
    }

    /// Cancels whole denominator factors that divide the numerator, then
    /// replaces `(ka, kb)` by `(a, b)` when only its cofactor divides.
    pub fn reduce(&self) -> Self {
        let mut num = self.num.clone();
        let mut den: BTreeMap<Mono, u32> = BTreeMap::new();
        let order = self.order;
        for (&(a, b), &k) in &self.den {
            if b == 0 {
                den.insert((a, b), k);
                continue;
            }
            let mut left = k;
            let bin = binomial(order, &self.q, a, b);
            while left > 0 {
                match tpoly_div_exact(&num, &bin) {
                    Some(qt) => {
                        num = qt;
                        left -= 1;
                    }
                    None => break,
                }
            }
            let g = gcd(a, b);
            let mut residual = Vec::new();
            for _ in 0..left {
                let mut placed = false;
                for kk in (2..=g).rev() {
                    if !g.is_multiple_of(kk) {
                        continue;
                    }
                    let co = cofactor(order, &self.q, a / kk, b / kk, kk);
                    if let Some(qt) = tpoly_div_exact(&num, &co) {
                        num = qt;
                        residual.push((a / kk, b / kk));
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    residual.push((a, b));
                }
            }
            for f in residual {
                *den.entry(f).or_insert(0) += 1;
            }
        }
        let mut s = Specialized { q: self.q.clone(), order, scale: self.scale, num, den };
        if s.num.is_empty() {
            s.den.clear();
        }
        // factors introduced by partial cancellation may cancel further
        if s.den != self.den && !s.den.is_empty() {
            let again = s.reduce();
            if again.den != s.den {
                return again;
            }
        }
        s.normalize_content();
        s
    }

    fn expanded_den(&self) -> TPoly {
        let mut p = vec![CycInt::one(self.order)];
        for (&(a, b), &k) in &self.den {
            for _ in 0..k {
                if b == 0 {
                    p = tpoly_scale(&p, &(self.q.pow(a) - BigInt::one()));
                } else {
                    p = tpoly_mul(&p, &binomial(self.order, &self.q, a, b), self.order);
                }
            }
        }
        p
    }

    /// Pole real parts `-a/b`, one per distinct reduced factor with `b > 0`.
    pub fn pole_real_parts(&self) -> Vec<BigRational> {
        let mut out: Vec<BigRational> = self
            .reduce()
            .den
            .keys()
            .filter(|(_, b)| *b > 0)
            .map(|&(a, b)| -BigRational::new(BigInt::from(a), BigInt::from(b)))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.max(other.order);
        let (a, b) = (self.lift(order), other.lift(order));
        let mut den = a.den.clone();
        for (f, &k) in &b.den {
            *den.entry(*f).or_insert(0) += k;
        }
        let num = tpoly_mul(&a.num, &b.num, order);
        let mut s = Specialized { q: a.q.clone(), order, scale: a.scale + b.scale, num, den };
        if s.num.is_empty() {
            s.den.clear();
            s.scale = 0;
        }
        s
    }

    fn lift(&self, order: u32) -> Self {
        let mut s = self.clone();
        s.order = order;
        s.num = s.num.iter().map(|c| c.lift(order)).collect();
        s
    }

    /// `1 / self`, defined when the numerator is a unit multiple of a power of
    /// `q` times a product of binomials `q^a - t^b`.
    pub fn invert(&self) -> Result<Self, SymbError> {
        let order = self.order;
        let (factors, kappa) = factor_binomials(&self.num, &self.q, order)
            .ok_or_else(|| SymbError::NonProductDenominator(self.describe_num()))?;
        // kappa must be +-q^e
        let mut e = 0i64;
        let mut k = kappa.clone();
        while let Some(d) = k.div_exact(&self.q) {
            if d.is_zero() {
                break;
            }
            k = d;
            e += 1;
        }
        let sign = match k.as_integer() {
            Some(v) if v.is_one() => BigInt::one(),
            Some(v) if v == -BigInt::one() => -BigInt::one(),
            _ => return Err(SymbError::NonProductDenominator(self.describe_num())),
        };
        let num = tpoly_scale(&self.expanded_den(), &sign);
        let mut den = BTreeMap::new();
        for f in factors {
            *den.entry(f).or_insert(0) += 1;
        }
        let mut s = Specialized { q: self.q.clone(), order, scale: -self.scale - e, num, den };
        s.normalize_content();
        Ok(s)
    }

    fn describe_num(&self) -> String {
        self.num.iter().enumerate().map(|(i, c)| format!("{c}*t^{i}")).collect::<Vec<_>>().join(" + ")
    }

    /// Converts back to a formal rational function in `u`, `t` whose value at
    /// this `q` is unchanged.
    pub fn to_ratfun(&self) -> RatFun {
        let order = self.order;
        if self.num.is_empty() {
            return RatFun::zero(order);
        }
        let shift: i64 = self.den.iter().map(|(&(a, _), &k)| a as i64 * k as i64).sum();
        let s = self.scale - shift;
        let q32 = u32::try_from(&self.q).expect("q fits in u32");
        let mut num = NumPoly::new();
        for (et, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if s >= 0 {
                let v = c.scale(&self.q.pow(s as u32));
                super::ratfun::poly_add_term(&mut num, (0, et as u32), v);
            } else {
                for (eu, d) in super::ratfun::encode_count(c, (-s) as u32, q32) {
                    super::ratfun::poly_add_term(&mut num, (eu, et as u32), d);
                }
            }
        }
        RatFun::from_parts(order, num, self.den.clone()).expect("no (0,0) factor")
    }

    pub fn add(&self, other: &Self) -> Self {
        self.to_ratfun().add(&other.to_ratfun()).specialize(u32::try_from(&self.q).unwrap())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Writes `n = kappa * prod (q^a - t^b)` by trial division, larger `b` first.
fn factor_binomials(n: &TPoly, q: &BigInt, order: u32) -> Option<(Vec<Mono>, CycInt)> {
    let mut rest = n.clone();
    let mut found = Vec::new();
    loop {
        if rest.is_empty() {
            return None;
        }
        if rest.len() == 1 {
            return Some((found, rest[0].clone()));
        }
        let c0 = rest[0].as_integer()?;
        if c0.is_zero() {
            return None;
        }
        let bits = c0.bits() as u32 + 1;
        let qbits = q.bits().max(1) as u32;
        let max_a = bits / (qbits - 1).max(1) + 2;
        let deg = (rest.len() - 1) as u32;
        let mut hit = None;
        'outer: for b in (1..=deg).rev() {
            for a in 0..=max_a {
                if let Some(qt) = tpoly_div_exact(&rest, &binomial(order, q, a, b)) {
                    hit = Some((a, b, qt));
                    break 'outer;
                }
            }
        }
        let (a, b, qt) = hit?;
        found.push((a, b));
        rest = qt;
    }
}

impl PartialEq for Specialized {
    fn eq(&self, other: &Self) -> bool {
        if self.q != other.q {
            return false;
        }
        let order = self.order.max(other.order);
        let (a, b) = (self.lift(order), other.lift(order));
        let lo = a.scale.min(b.scale);
        let lhs = tpoly_mul(&tpoly_scale(&a.num, &a.q.pow((a.scale - lo) as u32)), &b.expanded_den(), order);
        let rhs = tpoly_mul(&tpoly_scale(&b.num, &b.q.pow((b.scale - lo) as u32)), &a.expanded_den(), order);
        let diff = tpoly_add(&lhs, &rhs.iter().map(|c| c.neg()).collect(), order);
        diff.is_empty()
    }
}

impl Eq for Specialized {}
