//! Text forms of [`RatFun`]: `ut` style (`(1-u)/(1-u t^2)`) and paper-style
//! `q-s` (`(1-q^{-1})/(1-q^{-1-2s})`). Both parse back.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::cyc::CycInt;
use super::ratfun::{poly_div_binomial, Mono, NumPoly, RatFun};
use super::SymbError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderStyle {
    Ut,
    QS,
}

impl std::str::FromStr for RenderStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ut" => Ok(RenderStyle::Ut),
            "q-s" | "qs" => Ok(RenderStyle::QS),
            _ => Err(format!("unknown style '{s}' (expected 'ut' or 'q-s')")),
        }
    }
}

fn mono_text(a: u32, b: u32, style: RenderStyle) -> String {
    match style {
        RenderStyle::Ut => {
            let mut parts = Vec::new();
            match a {
                0 => {}
                1 => parts.push("u".to_string()),
                _ => parts.push(format!("u^{a}")),
            }
            match b {
                0 => {}
                1 => parts.push("t".to_string()),
                _ => parts.push(format!("t^{b}")),
            }
            parts.join(" ")
        }
        RenderStyle::QS => {
            if a == 0 && b == 0 {
                return String::new();
            }
            let s_part = match b {
                0 => String::new(),
                1 => "s".to_string(),
                _ => format!("{b}s"),
            };
            match (a, b) {
                (0, _) => format!("q^{{-{s_part}}}"),
                (_, 0) => format!("q^{{-{a}}}"),
                _ => format!("q^{{-{a}-{s_part}}}"),
            }
        }
    }
}

fn term_text(c: &CycInt, a: u32, b: u32, style: RenderStyle, first: bool) -> String {
    let mono = mono_text(a, b, style);
    match c.as_integer() {
        Some(n) => {
            let neg = n.is_negative();
            let mag = n.abs();
            let body = if mono.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            match (neg, first) {
                (true, _) => format!("-{body}"),
                (false, true) => body,
                (false, false) => format!("+{body}"),
            }
        }
        None => {
            let body = if mono.is_empty() { c.to_string() } else { format!("{c}*{mono}") };
            if first {
                body
            } else {
                format!("+{body}")
            }
        }
    }
}

fn poly_text(num: &NumPoly, style: RenderStyle) -> (String, usize) {
    let mut keys: Vec<&Mono> = num.keys().collect();
    keys.sort_by_key(|m| (m.1, m.0));
    let mut s = String::new();
    for (i, m) in keys.iter().enumerate() {
        s.push_str(&term_text(&num[m], m.0, m.1, style, i == 0));
    }
    if s.is_empty() {
        s.push('0');
    }
    (s, keys.len())
}

/// Deterministic text for a rational function.
pub fn render_ratfun(r: &RatFun, style: RenderStyle) -> String {
    let (num, nterms) = poly_text(r.num(), style);
    if r.den().is_empty() || r.is_zero() {
        return num;
    }
    let mut den = String::new();
    for (&(a, b), &k) in r.den() {
        den.push_str(&format!("(1-{})", mono_text(a, b, style)));
        if k > 1 {
            den.push_str(&format!("^{k}"));
        }
    }
    if nterms > 1 {
        format!("({num})/{den}")
    } else {
        format!("{num}/{den}")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    U,
    T,
    W,
    Q,
    S,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, SymbError> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let at = i;
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Num(src[at..i].parse().unwrap()), at));
            continue;
        }
        let t = match c {
            b'u' => Tok::U,
            b't' => Tok::T,
            b'w' => Tok::W,
            b'q' => Tok::Q,
            b's' => Tok::S,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            _ => return Err(SymbError::Parse { pos: at, msg: format!("unexpected character '{}'", c as char) }),
        };
        out.push((t, at));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    order: u32,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, msg: &str) -> SymbError {
        let pos = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end);
        SymbError::Parse { pos, msg: msg.into() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SymbError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::U | Tok::T | Tok::W | Tok::Q | Tok::LParen))
    }

    fn sum(&mut self) -> Result<RatFun, SymbError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                self.product()?.neg()
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.product()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<RatFun, SymbError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.pos;
                    let mut d = self.power()?;
                    while self.starts_atom() {
                        d = d.mul(&self.power()?);
                    }
                    acc = divide(&acc, &d).map_err(|e| match e {
                        SymbError::NonProductDenominator(m) => SymbError::Parse {
                            pos: self.toks.get(at).map(|t| t.1).unwrap_or(self.end),
                            msg: format!("divisor must be a product of (1 - u^a t^b) factors, got {m}"),
                        },
                        other => other,
                    })?;
                }
                _ if self.starts_atom() => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<RatFun, SymbError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let k = match self.peek() {
                Some(Tok::Num(k)) => u32::try_from(k.clone()).map_err(|_| self.err("exponent too large"))?,
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            };
            self.pos += 1;
            let mut acc = RatFun::one(1);
            for _ in 0..k {
                acc = acc.mul(&base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFun, SymbError> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Num(n) => Ok(RatFun::constant(CycInt::from_int(1, n))),
            Tok::U => Ok(RatFun::monomial(CycInt::one(1), 1, 0)),
            Tok::T => Ok(RatFun::monomial(CycInt::one(1), 0, 1)),
            Tok::W => {
                if self.order == 1 {
                    return Err(self.err("'w' needs a character order above 1"));
                }
                Ok(RatFun::constant(CycInt::zeta_pow(self.order, 1)))
            }
            Tok::Q => {
                self.expect(Tok::Caret, "'^' after q")?;
                self.expect(Tok::LBrace, "'{' after q^")?;
                let (a, b) = self.linear()?;
                self.expect(Tok::RBrace, "'}'")?;
                Ok(RatFun::monomial(CycInt::one(1), a, b))
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a number, u, t, w, q^{...} or '('"))
            }
        }
    }

    /// Parses `-a-bs` (any order, repeated terms allowed) into `(a, b)`.
    fn linear(&mut self) -> Result<(u32, u32), SymbError> {
        let mut a: i64 = 0;
        let mut b: i64 = 0;
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(Tok::Minus) => {
                    self.pos += 1;
                    -1
                }
                Some(Tok::Plus) if !first => {
                    self.pos += 1;
                    1
                }
                Some(Tok::RBrace) if !first => break,
                _ if first => 1,
                _ => return Err(self.err("expected '+', '-' or '}'")),
            };
            first = false;
            let k = match self.peek() {
                Some(Tok::Num(n)) => {
                    let n = i64::try_from(n.clone()).map_err(|_| self.err("exponent too large"))?;
                    self.pos += 1;
                    n
                }
                _ => 1,
            };
            if self.peek() == Some(&Tok::S) {
                self.pos += 1;
                b += sign * k;
            } else {
                a += sign * k;
            }
            if self.peek() == Some(&Tok::RBrace) {
                break;
            }
        }
        if a > 0 || b > 0 {
            return Err(self.err("q exponents must have the form -a-bs with a, b >= 0"));
        }
        Ok(((-a) as u32, (-b) as u32))
    }
}

/// Writes a polynomial `1 - ...` as a product of `(1 - u^a t^b)`.
fn binomial_factors(num: &NumPoly) -> Option<Vec<Mono>> {
    let mut rest = num.clone();
    let mut out = Vec::new();
    loop {
        let c0 = rest.get(&(0, 0))?;
        if !c0.is_one() {
            return None;
        }
        if rest.len() == 1 {
            return Some(out);
        }
        let (&m, c) = rest
            .iter()
            .filter(|(m, _)| **m != (0, 0))
            .min_by_key(|(m, _)| (m.0 + m.1, m.1, m.0))?;
        if !c.is_negative_integer() {
            return None;
        }
        rest = poly_div_binomial(&rest, m.0, m.1)?;
        out.push(m);
    }
}

fn divide(num: &RatFun, den: &RatFun) -> Result<RatFun, SymbError> {
    let factors = if den.den().is_empty() { binomial_factors(den.num()) } else { None };
    let factors = factors.ok_or_else(|| SymbError::NonProductDenominator(render_ratfun(den, RenderStyle::Ut)))?;
    let mut out = num.clone();
    let mut counts: BTreeMap<Mono, u32> = BTreeMap::new();
    for f in factors {
        *counts.entry(f).or_insert(0) += 1;
    }
    for ((a, b), k) in counts {
        out = out.divide_by_factor(a, b, k)?;
    }
    Ok(out)
}

/// Parses either text style; `order` gives the meaning of `w = zeta_order`.
pub fn parse_ratfun(src: &str, order: u32) -> Result<RatFun, SymbError> {
    let toks = tokenize(src)?;
    if toks.is_empty() {
        return Err(SymbError::Parse { pos: 0, msg: "empty input".into() });
    }
    let mut p = Parser { toks, pos: 0, order, end: src.len() };
    let r = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    let r = if r.order() == order || r.is_zero() { r.promote(order.max(r.order())) } else { r };
    if r.is_zero() {
        return Ok(RatFun::zero(order));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_examples() {
        let one_minus_u = RatFun::one(1).sub(&RatFun::monomial(CycInt::one(1), 1, 0));
        let z = one_minus_u.geometric_closure(1, 1).unwrap();
        assert_eq!(render_ratfun(&z, RenderStyle::QS), "(1-q^{-1})/(1-q^{-1-s})");
        assert_eq!(render_ratfun(&z, RenderStyle::Ut), "(1-u)/(1-u t)");
        let x2 = one_minus_u.geometric_closure(1, 2).unwrap();
        assert_eq!(render_ratfun(&x2, RenderStyle::Ut), "(1-u)/(1-u t^2)");
        assert_eq!(render_ratfun(&one_minus_u, RenderStyle::Ut), "1-u");
        assert_eq!(render_ratfun(&RatFun::zero(1), RenderStyle::QS), "0");
    }

    #[test]
    fn theorem_denominator_round_trips() {
        let mut d = RatFun::one(1);
        for (a, b) in [(1, 1), (4, 6), (7, 12), (5, 6)] {
            d = d.divide_by_factor(a, b, 1).unwrap();
        }
        for style in [RenderStyle::Ut, RenderStyle::QS] {
            let s = render_ratfun(&d, style);
            assert_eq!(parse_ratfun(&s, 1).unwrap(), d, "{s}");
        }
    }

    #[test]
    fn parses_printed_forms() {
        let a4 = parse_ratfun("(1-q^{-1})(q^{-2}+q^{-3}t^3)", 1).unwrap();
        let want = parse_ratfun("u^2 - u^3 + u^3 t^3 - u^4 t^3", 1).unwrap();
        assert_eq!(a4, want);
        let a7 = parse_ratfun("(1-q^{-1})^2/(1-q^{-1}t)*(q^{-3}t+1-q^{-1}-q^{-2})", 1).unwrap();
        assert_eq!(a7.den_factors(), vec![(1, 1, 1)]);
        let sq = parse_ratfun("1/(1-u t)^2(1-u^2)", 1).unwrap();
        assert_eq!(sq.den_factors(), vec![(1, 1, 2), (2, 0, 1)]);
        assert!(parse_ratfun("1/(1+u)", 1).is_err());
        assert!(parse_ratfun("q^{2}", 1).is_err());
        let w = parse_ratfun("(1+2*w)*u", 3).unwrap();
        assert_eq!(w.order(), 3);
        assert_eq!(parse_ratfun(&render_ratfun(&w, RenderStyle::Ut), 3).unwrap(), w);
    }
}
