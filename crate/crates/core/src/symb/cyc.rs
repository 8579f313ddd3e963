//! Cyclotomic integers `Z[zeta_m]`, reduced modulo the `m`-th cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients of `Phi_m`, low degree first, computed by dividing
/// `x^m - 1` by `Phi_d` for every proper divisor `d`.
pub fn cyclotomic(m: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    assert!(m >= 1, "cyclotomic order must be positive");
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = exact_div_monic(&num, &cyclotomic(d));
        }
    }
    let v = Arc::new(num);
    cache.lock().unwrap().insert(m, v.clone());
    v
}

fn exact_div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; r.len() - dd];
    for k in (dd..r.len()).rev() {
        let c = r[k];
        if c == 0 {
            continue;
        }
        quot[k - dd] = c;
        for (j, &dj) in den.iter().enumerate() {
            r[k - dd + j] -= c * dj;
        }
    }
    debug_assert!(r.iter().all(|&c| c == 0), "inexact cyclotomic division");
    quot
}

pub fn euler_phi(m: u32) -> usize {
    cyclotomic(m).len() - 1
}

/// An element of `Z[zeta_m]` in the power basis `1, zeta, ..., zeta^(phi(m)-1)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CycInt {
    order: u32,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    pub fn zero(order: u32) -> Self {
        CycInt { order, coeffs: vec![BigInt::zero(); euler_phi(order)] }
    }

    pub fn one(order: u32) -> Self {
        Self::from_int(order, 1)
    }

    pub fn from_int(order: u32, n: impl Into<BigInt>) -> Self {
        let mut c = Self::zero(order);
        c.coeffs[0] = n.into();
        c
    }

    /// `zeta_m^k`.
    pub fn zeta_pow(order: u32, k: u64) -> Self {
        let mut raw = vec![BigInt::zero(); order as usize];
        raw[(k % order as u64) as usize] = BigInt::one();
        Self::reduce(order, raw)
    }

    /// Builds from an arbitrary-length coefficient vector in `zeta`.
    pub fn from_coeffs(order: u32, coeffs: Vec<BigInt>) -> Self {
        Self::reduce(order, coeffs)
    }

    fn reduce(order: u32, mut raw: Vec<BigInt>) -> Self {
        let m = order as usize;
        if raw.len() > m {
            for k in m..raw.len() {
                let c = std::mem::take(&mut raw[k]);
                raw[k % m] += c;
            }
            raw.truncate(m);
        }
        let phi = cyclotomic(order);
        let d = phi.len() - 1;
        for k in (d..raw.len()).rev() {
            let c = std::mem::take(&mut raw[k]);
            if c.is_zero() {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate().take(d) {
                raw[k - d + j] -= &c * pj;
            }
        }
        raw.resize(d, BigInt::zero());
        CycInt { order, coeffs: raw }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_integer().is_some_and(|c| c.is_one())
    }

    /// The rational integer this represents, if any.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-expresses in `Z[zeta_n]` for a multiple `n` of the order.
    pub fn lift(&self, n: u32) -> Self {
        if n == self.order {
            return self.clone();
        }
        assert!(n.is_multiple_of(self.order), "cannot lift order {} to {}", self.order, n);
        let step = (n / self.order) as usize;
        let mut raw = vec![BigInt::zero(); (self.coeffs.len().saturating_sub(1)) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            raw[j * step] = c.clone();
        }
        Self::reduce(n, raw)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.order == other.order {
            return (self.clone(), other.clone());
        }
        let n = self.order.lcm(&other.order);
        (self.lift(n), other.lift(n))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = self.aligned(other);
            return a.add(&b);
        }
        CycInt { order: self.order, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn neg(&self) -> Self {
        CycInt { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = self.aligned(other);
            return a.mul(&b);
        }
        if self.order == 1 {
            return CycInt { order: 1, coeffs: vec![&self.coeffs[0] * &other.coeffs[0]] };
        }
        let mut raw = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                raw[i + j] += a * b;
            }
        }
        Self::reduce(self.order, raw)
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CycInt { order: self.order, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    /// Exact division by a rational integer, `None` if some coefficient is not divisible.
    pub fn div_exact(&self, k: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (d, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.push(d);
        }
        Some(CycInt { order: self.order, coeffs: out })
    }

    /// Gcd of the coefficients (zero for zero).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Complex value, for diagnostics only.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * j as f64 / self.order as f64;
            let v = c.to_f64().unwrap_or(f64::NAN);
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// Number of nonzero power-basis coefficients.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }

    /// True if the element is a single power-basis term with coefficient `-1`.
    pub fn is_neg_one(&self) -> bool {
        self.as_integer().is_some_and(|c| c == BigInt::from(-1))
    }

    pub fn is_negative_integer(&self) -> bool {
        self.as_integer().is_some_and(|c| c.is_negative())
    }
}

impl fmt::Display for CycInt {
    /// Integers print bare; other values as a sum in `w = zeta_m`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = self.as_integer() {
            return write!(f, "{n}");
        }
        let mut parts = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = match j {
                0 => String::new(),
                1 => "w".to_string(),
                _ => format!("w^{j}"),
            };
            let s = match (j, c) {
                (0, c) => c.to_string(),
                (_, c) if c.is_one() => w,
                (_, c) if *c == BigInt::from(-1) => format!("-{w}"),
                (_, c) => format!("{c}*{w}"),
            };
            parts.push(s);
        }
        let mut out = String::new();
        for (i, p) in parts.iter().enumerate() {
            if i > 0 && !p.starts_with('-') {
                out.push('+');
            }
            out.push_str(p);
        }
        write!(f, "({out})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_cyclotomics() {
        assert_eq!(*cyclotomic(1), vec![-1, 1]);
        assert_eq!(*cyclotomic(2), vec![1, 1]);
        assert_eq!(*cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(euler_phi(24), 8);
    }

    #[test]
    fn roots_of_unity_relations() {
        for m in 1..=24u32 {
            let z = CycInt::zeta_pow(m, 1);
            let mut acc = CycInt::one(m);
            let mut sum = CycInt::zero(m);
            for _ in 0..m {
                sum = sum.add(&acc);
                acc = acc.mul(&z);
            }
            assert!(acc.is_one(), "zeta_{m}^{m} != 1");
            if m > 1 {
                assert!(sum.is_zero(), "sum of {m}-th roots != 0");
            }
        }
    }

    #[test]
    fn lift_respects_products() {
        let a = CycInt::zeta_pow(3, 1).add(&CycInt::from_int(3, 2));
        let b = CycInt::zeta_pow(4, 3);
        let ab = a.mul(&b);
        assert_eq!(ab.order(), 12);
        assert_eq!(ab, a.lift(12).mul(&b.lift(12)));
        assert_eq!(CycInt::zeta_pow(2, 1).as_integer(), Some(BigInt::from(-1)));
    }
}
