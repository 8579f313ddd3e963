//! Multiplicative characters, cyclotomic integers and rational functions in
//! `u = q^-1`, `t = q^-s`.

mod cyc;
mod json;
mod ratfun;
mod special;
mod text;

pub use cyc::{cyclotomic, euler_phi, CycInt};
pub use json::{ratfun_from_json, ratfun_to_json};
pub use ratfun::{encode_count, ni_from_poincare, Mono, NumPoly, RatFun};
pub use special::Specialized;
pub use text::{parse_ratfun, render_ratfun, RenderStyle};

use num_integer::Integer;
use thiserror::Error;

use crate::gf::{FieldConfig, FqElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbError {
    #[error("denominator factor (1 - u^0 t^0) is zero")]
    DivisionByZeroFactor,
    #[error("coefficients carry nontrivial roots of unity; a rational expansion needs the trivial character")]
    NontrivialCharacter,
    #[error("q must be a rational number greater than 1")]
    BadQ,
    #[error("series coefficient {0} is not an integer")]
    NotInteger(String),
    #[error("cannot write {0} as a product of (1 - u^a t^b) factors")]
    NonProductDenominator(String),
    #[error("rational function parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid rational function JSON: {0}")]
    Json(String),
}

/// A conductor-1 character `chi(g^j) = zeta_(q-1)^(e j)` for the stored
/// generator `g` of `F_q^x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CharClass {
    q: u32,
    e: u32,
}

impl CharClass {
    pub fn new(q: u32, e: i64) -> Self {
        let m = (q - 1) as i64;
        CharClass { q, e: e.rem_euclid(m.max(1)) as u32 }
    }

    pub fn trivial(q: u32) -> Self {
        CharClass { q, e: 0 }
    }

    pub fn exponent(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_trivial(&self) -> bool {
        self.e == 0
    }

    /// Order of the character, which is also the cyclotomic order of its values.
    pub fn order(&self) -> u32 {
        let m = self.q - 1;
        if m == 0 {
            return 1;
        }
        m / self.e.gcd(&m)
    }

    /// `chi(x)` for `x` in `F_q`, with `chi(0) = 0`.
    pub fn value(&self, field: &FieldConfig, x: FqElem) -> CycInt {
        let m = self.order();
        match field.log(x) {
            None => CycInt::zero(m),
            Some(j) => {
                let d = (self.q - 1) / m;
                let k = (self.e / d) as u64 * j as u64;
                CycInt::zeta_pow(m, k)
            }
        }
    }

    pub fn pow(&self, k: u32) -> CharClass {
        CharClass::new(self.q, self.e as i64 * k as i64)
    }
}

/// True iff `chi^m` is trivial.
pub fn char_pow_is_trivial(chi: &CharClass, m: u32) -> bool {
    let qm = (chi.q - 1) as u64;
    qm == 0 || (chi.e as u64 * m as u64).is_multiple_of(qm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn char_pow_examples() {
        assert!(char_pow_is_trivial(&CharClass::new(3, 1), 2));
        assert!(!char_pow_is_trivial(&CharClass::new(3, 1), 1));
        assert!(char_pow_is_trivial(&CharClass::new(7, 2), 3));
    }

    #[test]
    fn character_values_are_multiplicative() {
        for (p, r) in [(3, 1), (5, 1), (7, 1), (2, 2), (3, 2)] {
            let f = FieldConfig::new(p, r).unwrap();
            for e in 0..f.q() - 1 {
                let chi = CharClass::new(f.q(), e as i64);
                for x in f.units() {
                    for y in f.units() {
                        assert_eq!(chi.value(&f, f.mul(x, y)), chi.value(&f, x).mul(&chi.value(&f, y)));
                    }
                }
                assert!(chi.value(&f, FqElem::ZERO).is_zero());
            }
        }
    }
}
