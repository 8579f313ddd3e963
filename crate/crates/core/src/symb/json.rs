//! `{"num": [[eu, et, [c0, c1, ...]], ...], "den": [[a, b, k], ...], "char_order": m}`

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use super::cyc::CycInt;
use super::ratfun::{NumPoly, RatFun};
use super::SymbError;

fn int_value(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn ratfun_to_json(r: &RatFun) -> Value {
    let num: Vec<Value> = r
        .num()
        .iter()
        .map(|(&(eu, et), c)| json!([eu, et, c.coeffs().iter().map(int_value).collect::<Vec<_>>()]))
        .collect();
    let den: Vec<Value> = r.den().iter().map(|(&(a, b), &k)| json!([a, b, k])).collect();
    json!({ "num": num, "den": den, "char_order": r.order() })
}

fn parse_int(v: &Value) -> Result<BigInt, SymbError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    if let Some(s) = v.as_str() {
        return s.parse().map_err(|_| SymbError::Json(format!("bad integer '{s}'")));
    }
    Err(SymbError::Json(format!("expected integer, got {v}")))
}

fn parse_u32(v: &Value) -> Result<u32, SymbError> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| SymbError::Json(format!("expected nonnegative integer, got {v}")))
}

pub fn ratfun_from_json(v: &Value) -> Result<RatFun, SymbError> {
    let order = parse_u32(v.get("char_order").ok_or_else(|| SymbError::Json("missing char_order".into()))?)?;
    if order == 0 {
        return Err(SymbError::Json("char_order must be positive".into()));
    }
    let arr = |k: &str| {
        v.get(k)
            .and_then(|x| x.as_array())
            .ok_or_else(|| SymbError::Json(format!("missing array '{k}'")))
    };
    let mut num = NumPoly::new();
    for t in arr("num")? {
        let t = t.as_array().filter(|t| t.len() == 3).ok_or_else(|| SymbError::Json("num entries are [eu, et, coeffs]".into()))?;
        let coeffs = t[2]
            .as_array()
            .ok_or_else(|| SymbError::Json("coefficients must be an array".into()))?
            .iter()
            .map(parse_int)
            .collect::<Result<Vec<_>, _>>()?;
        let c = CycInt::from_coeffs(order, coeffs);
        super::ratfun::poly_add_term(&mut num, (parse_u32(&t[0])?, parse_u32(&t[1])?), c);
    }
    let mut den = BTreeMap::new();
    for f in arr("den")? {
        let f = f.as_array().filter(|f| f.len() == 3).ok_or_else(|| SymbError::Json("den entries are [a, b, mult]".into()))?;
        *den.entry((parse_u32(&f[0])?, parse_u32(&f[1])?)).or_insert(0) += parse_u32(&f[2])?;
    }
    RatFun::from_parts(order, num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symb::parse_ratfun;

    #[test]
    fn json_round_trip() {
        for (src, order) in [("(1-u)/(1-u t^2)", 1), ("(2+w)*u^3 t/(1-u^5 t^6)^2", 4), ("0", 1)] {
            let r = parse_ratfun(src, order).unwrap();
            let back = ratfun_from_json(&ratfun_to_json(&r)).unwrap();
            assert_eq!(back, r, "{src}");
        }
        assert!(ratfun_from_json(&json!({"num": [], "den": [[0, 0, 1]], "char_order": 1})).is_err());
    }
}
