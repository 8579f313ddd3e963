use std::sync::Arc;

use igusa::count::{counts_up_to, DEFAULT_BUDGET};
use igusa::gf::FieldConfig;
use igusa::mvpoly::MultiPoly;
use igusa::par::Exec;
use igusa::spf::zeta;
use igusa::symb::{ni_from_poincare, CharClass};
use num_bigint::BigInt;

fn check(p: u32, src: &str, order: usize) {
    let fc = Arc::new(FieldConfig::new(p, 1).unwrap());
    let q = fc.q();
    let f = MultiPoly::parse(fc, src).unwrap();
    let z = zeta(&f, &CharClass::trivial(q)).unwrap_or_else(|e| panic!("{src} q={q}: {e}"));
    let pz = z.poincare_from_zeta().unwrap();
    let counts = counts_up_to(&f, order, DEFAULT_BUDGET, Exec::Parallel).unwrap();
    for (i, &n) in counts.iter().enumerate() {
        let got = ni_from_poincare(&pz, q, f.nvars() as u32, i).unwrap();
        assert_eq!(got, BigInt::from(n), "{src} over F_{q}: N_{i}");
    }
}

#[test]
fn monomials_and_binomials_match_counts() {
    for p in [2u32, 3, 5] {
        let mut corpus: Vec<String> = Vec::new();
        for a in 1..=4 {
            corpus.push(format!("x^{a}"));
            for b in 1..=4 {
                corpus.push(format!("x^{a}*y^{b}"));
                if a <= b {
                    corpus.push(format!("x^{a}+y^{b}"));
                }
            }
        }
        corpus.extend(["x^2+y^5".to_string(), format!("x^{p}+y^{p}"), format!("x^{p}+y^{}", p + 1)]);
        for src in &corpus {
            let order = if p == 5 { 3 } else { 4 };
            check(p, src, order);
        }
    }
}
