//! Newton polyhedra in dimension at most 3, candidate poles and the global
//! non-degeneracy test.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use thiserror::Error;

use crate::gf::{FieldConfig, FqElem};
use crate::mvpoly::{Exps, MultiPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("Newton polyhedra are supported for at most 3 variables, got {0}")]
    TooManyVariables(usize),
    #[error("empty support")]
    EmptySupport,
    #[error("support vectors must have length {0}")]
    Arity(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<u32>,
    /// `min <normal, l>` over the polyhedron.
    pub m: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonData {
    pub nvars: usize,
    /// Minimal support points (the vertices lie among these).
    pub generators: Vec<Exps>,
    pub facets: Vec<Facet>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PoleSource {
    Facet(Vec<u32>),
    TrivialBranch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePole {
    pub real_part: BigRational,
    pub period: u64,
    pub source: PoleSource,
}

fn dot(a: &[u32], b: &[u32]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64).sum()
}

fn primitive_nonneg(v: &[i64]) -> Option<Vec<u32>> {
    if v.iter().all(|&x| x == 0) {
        return None;
    }
    let sign = if v.iter().all(|&x| x >= 0) {
        1
    } else if v.iter().all(|&x| x <= 0) {
        -1
    } else {
        return None;
    };
    let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
    Some(v.iter().map(|&x| (sign * x / g) as u32).collect())
}

/// Rank of a list of integer vectors, by fraction-free elimination.
pub(crate) fn rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                for j in 0..ncols {
                    m[i][j] = m[i][j] * a - m[r][j] * b;
                }
                let g = m[i].iter().fold(0i128, |g, &x| g.gcd(&x));
                if g > 1 {
                    m[i].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        r += 1;
    }
    r
}

fn minimal_points(support: &[Exps]) -> Vec<Exps> {
    let set: BTreeSet<&Exps> = support.iter().collect();
    set.iter()
        .filter(|a| !set.iter().any(|b| b != *a && b.iter().zip(a.iter()).all(|(x, y)| x <= y)))
        .map(|a| (*a).clone())
        .collect()
}

/// Dimension of the face cut out by `normal`: equality points plus the
/// recession directions `e_i` with `normal_i = 0`.
fn face_dimension(normal: &[u32], m: u64, gens: &[Exps]) -> usize {
    let n = normal.len();
    let eq: Vec<&Exps> = gens.iter().filter(|g| dot(normal, g) == m).collect();
    let mut dirs: Vec<Vec<i64>> = eq[1..].iter().map(|g| (0..n).map(|i| g[i] as i64 - eq[0][i] as i64).collect()).collect();
    for i in 0..n {
        if normal[i] == 0 {
            dirs.push((0..n).map(|j| (i == j) as i64).collect());
        }
    }
    rank(&dirs)
}

fn facet_if_valid(normal: Vec<u32>, gens: &[Exps]) -> Option<Facet> {
    let m = gens.iter().map(|g| dot(&normal, g)).min()?;
    (face_dimension(&normal, m, gens) + 1 == normal.len()).then_some(Facet { normal, m })
}

/// Exact facet enumeration: every facet normal is orthogonal to `n - 1`
/// independent directions taken from generator differences and unit rays.
pub fn build_polyhedron(support: &[Exps], n: usize) -> Result<NewtonData, NewtonError> {
    if n > 3 {
        return Err(NewtonError::TooManyVariables(n));
    }
    if support.is_empty() {
        return Err(NewtonError::EmptySupport);
    }
    if support.iter().any(|s| s.len() != n) {
        return Err(NewtonError::Arity(n));
    }
    let gens = minimal_points(support);
    let mut dirs: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for (a, g) in gens.iter().enumerate() {
        for h in &gens[a + 1..] {
            dirs.push((0..n).map(|i| h[i] as i64 - g[i] as i64).collect());
        }
    }
    let mut candidates: BTreeSet<Vec<u32>> = BTreeSet::new();
    match n {
        0 => {}
        1 => {
            candidates.insert(vec![1]);
        }
        2 => {
            for d in &dirs {
                if let Some(v) = primitive_nonneg(&[d[1], -d[0]]) {
                    candidates.insert(v);
                }
            }
        }
        _ => {
            for (i, a) in dirs.iter().enumerate() {
                for b in &dirs[i + 1..] {
                    let c = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
                    if let Some(v) = primitive_nonneg(&c) {
                        candidates.insert(v);
                    }
                }
            }
        }
    }
    let facets = candidates.into_iter().filter_map(|c| facet_if_valid(c, &gens)).collect();
    Ok(NewtonData { nvars: n, generators: gens, facets })
}

/// Newton data of the pi-order-0 part of `f`.
pub fn newton_of_poly(f: &MultiPoly) -> Result<NewtonData, NewtonError> {
    build_polyhedron(&f.support(), f.nvars())
}

/// Candidate poles: one per facet with `m != 0`, plus `-1` when some facet has `m = 0`.
pub fn candidate_poles(nd: &NewtonData) -> Vec<CandidatePole> {
    let mut out = Vec::new();
    let mut trivial = false;
    for f in &nd.facets {
        if f.m == 0 {
            trivial = true;
            continue;
        }
        let norm: u64 = f.normal.iter().map(|&x| x as u64).sum();
        out.push(CandidatePole {
            real_part: -BigRational::new(BigInt::from(norm), BigInt::from(f.m)),
            period: f.m,
            source: PoleSource::Facet(f.normal.clone()),
        });
    }
    if trivial {
        out.insert(0, CandidatePole { real_part: -BigRational::from_integer(1.into()), period: 1, source: PoleSource::TrivialBranch });
    }
    out
}

/// Closed form for a two-term support `{(i0, 0), (0, j0)}`: `-1` and `-(i0+j0)/(i0 j0)`.
pub fn lemma25_data(i0: u32, j0: u32) -> Vec<BigRational> {
    vec![
        -BigRational::from_integer(1.into()),
        -BigRational::new(BigInt::from(i0 + j0), BigInt::from(i0 as u64 * j0 as u64)),
    ]
}

/// Sets of support points lying on each face (facet intersections and the
/// whole polyhedron).
pub fn face_supports(nd: &NewtonData, support: &[Exps]) -> Vec<Vec<Exps>> {
    let on = |f: &Facet| -> BTreeSet<Exps> { support.iter().filter(|l| dot(&f.normal, l) == f.m).cloned().collect() };
    let mut faces: BTreeSet<BTreeSet<Exps>> = nd.facets.iter().map(on).filter(|s| !s.is_empty()).collect();
    loop {
        let list: Vec<_> = faces.iter().cloned().collect();
        let mut grew = false;
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let c: BTreeSet<Exps> = a.intersection(b).cloned().collect();
                if !c.is_empty() && faces.insert(c) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    faces.insert(support.iter().cloned().collect());
    faces.into_iter().map(|s| s.into_iter().collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GndResult {
    /// No torus singular point of any face polynomial over `F_{q^e}`, `e <= checked_up_to`.
    NonDegenerate { checked_up_to: u32 },
    /// A face polynomial with a singular point on the torus over `F_{q^degree}`.
    DegenerateWitness { face: Vec<Exps>, degree: u32, point: Vec<Vec<u32>> },
    OriginNonsingular,
}

/// Upper bound on torus points examined per extension degree.
pub const GND_SEARCH_BUDGET: u64 = 20_000_000;

struct Extension {
    big: FieldConfig,
    embed: Vec<FqElem>,
}

fn extension(small: &FieldConfig, e: u32) -> Option<Extension> {
    let big = FieldConfig::new(small.p(), small.r() * e).ok()?;
    let modulus = small.modulus();
    let root = big.elements().find(|&y| {
        let mut acc = FqElem::ZERO;
        for &c in modulus.iter().rev() {
            acc = big.add(big.mul(acc, y), big.from_int(c as i64));
        }
        acc.is_zero()
    })?;
    let embed = small
        .elements()
        .map(|x| {
            let mut acc = FqElem::ZERO;
            for &c in small.coeffs(x).iter().rev() {
                acc = big.add(big.mul(acc, root), big.from_int(c as i64));
            }
            acc
        })
        .collect();
    Some(Extension { big, embed })
}

type FacePoly = Vec<(Exps, FqElem)>;

fn eval_face(ext: &Extension, terms: &FacePoly, x: &[FqElem]) -> FqElem {
    let f = &ext.big;
    let mut acc = FqElem::ZERO;
    for (e, c) in terms {
        let mut v = ext.embed[c.index()];
        for (xi, &k) in x.iter().zip(e) {
            v = f.mul(v, f.pow(*xi, k as u64));
        }
        acc = f.add(acc, v);
    }
    acc
}

fn derivative(terms: &FacePoly, var: usize, small: &FieldConfig) -> FacePoly {
    terms
        .iter()
        .filter_map(|(e, c)| {
            let k = e[var];
            let c = small.mul(*c, small.from_int(k as i64));
            if c.is_zero() {
                return None;
            }
            let mut e = e.clone();
            e[var] -= 1;
            Some((e, c))
        })
        .collect()
}

fn torus_singular_point(ext: &Extension, f: &FacePoly, grads: &[FacePoly], n: usize) -> Option<Vec<FqElem>> {
    let qe = ext.big.q() as u64;
    let total = (qe - 1).pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        let x: Vec<FqElem> = (0..n)
            .map(|_| {
                let d = r % (qe - 1);
                r /= qe - 1;
                FqElem(d as u32 + 1)
            })
            .collect();
        if eval_face(ext, f, &x).is_zero() && grads.iter().all(|g| eval_face(ext, g, &x).is_zero()) {
            return Some(x);
        }
    }
    None
}

/// Global non-degeneracy: origin singular, and no face polynomial of the
/// residue polynomial has a singular point on the torus over `F_{q^e}`,
/// `e <= max_ext`. The search is bounded and reported as such.
pub fn gnd_check(f: &MultiPoly, max_ext: u32) -> Result<GndResult, NewtonError> {
    let n = f.nvars();
    let zero = vec![0u32; n];
    let has_low_term = f.terms().keys().any(|e| {
        let s: u32 = e.iter().sum();
        s == 0 || (s == 1 && *e != zero)
    });
    if has_low_term {
        return Ok(GndResult::OriginNonsingular);
    }
    let f = if f.support().is_empty() { f.extract_pi_power().map(|x| x.1).unwrap_or_else(|_| f.clone()) } else { f.clone() };
    let small = f.field().clone();
    let support = f.support();
    let nd = build_polyhedron(&support, n)?;
    let reduced = f.reduce_mod_pi();
    let faces = face_supports(&nd, &support);
    let mut checked = 0;
    for e in 1..=max_ext {
        let Some(ext) = extension(&small, e) else { break };
        if (ext.big.q() as u64 - 1).pow(n as u32) * faces.len() as u64 > GND_SEARCH_BUDGET {
            break;
        }
        for face in &faces {
            let terms: FacePoly = face.iter().filter_map(|l| reduced.coeff(l).map(|c| (l.clone(), c.residue()))).collect();
            let grads: Vec<FacePoly> = (0..n).map(|v| derivative(&terms, v, &small)).collect();
            if let Some(x) = torus_singular_point(&ext, &terms, &grads, n) {
                let point = x.iter().map(|&v| ext.big.coeffs(v)).collect();
                return Ok(GndResult::DegenerateWitness { face: face.clone(), degree: e, point });
            }
        }
        checked = e;
    }
    Ok(GndResult::NonDegenerate { checked_up_to: checked })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn facets(support: &[&[u32]]) -> Vec<(Vec<u32>, u64)> {
        let s: Vec<Exps> = support.iter().map(|v| v.to_vec()).collect();
        build_polyhedron(&s, s[0].len()).unwrap().facets.into_iter().map(|f| (f.normal, f.m)).collect()
    }

    /// Bounded brute force over all primitive normals with small entries.
    fn brute_facets(support: &[Exps], n: usize, bound: u32) -> Vec<(Vec<u32>, u64)> {
        let gens = minimal_points(support);
        let mut out = Vec::new();
        let total = (bound + 1).pow(n as u32);
        for idx in 0..total {
            let mut r = idx;
            let v: Vec<u32> = (0..n)
                .map(|_| {
                    let d = r % (bound + 1);
                    r /= bound + 1;
                    d
                })
                .collect();
            if v.iter().all(|&x| x == 0) || v.iter().fold(0u32, |g, &x| g.gcd(&x)) != 1 {
                continue;
            }
            if let Some(f) = facet_if_valid(v, &gens) {
                out.push((f.normal, f.m));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn two_variable_examples() {
        assert_eq!(facets(&[&[2, 0], &[0, 3]]), vec![(vec![0, 1], 0), (vec![1, 0], 0), (vec![3, 2], 6)]);
        assert_eq!(facets(&[&[1, 0], &[0, 1]]), vec![(vec![0, 1], 0), (vec![1, 0], 0), (vec![1, 1], 1)]);
        assert!(matches!(build_polyhedron(&[vec![1, 1, 1, 1]], 4), Err(NewtonError::TooManyVariables(4))));
    }

    #[test]
    fn hybrid_support_matches_bounded_search() {
        for (p, n, l) in [(3u32, 4u32, 2u32), (3, 7, 2), (5, 3, 2), (2, 3, 5)] {
            let s = vec![vec![p, 0, 0], vec![0, n, l], vec![0, 0, n + l]];
            let mut got: Vec<_> = build_polyhedron(&s, 3).unwrap().facets.into_iter().map(|f| (f.normal, f.m)).collect();
            got.sort();
            assert_eq!(got, brute_facets(&s, 3, p * (n + l)), "{p} {n} {l}");
        }
    }

    #[test]
    fn lemma25_closed_form() {
        for i0 in 2..=12u32 {
            for j0 in 2..=12u32 {
                let nd = build_polyhedron(&[vec![i0, 0], vec![0, j0]], 2).unwrap();
                let mut got: Vec<BigRational> = candidate_poles(&nd).into_iter().map(|c| c.real_part).collect();
                got.sort();
                let mut want = lemma25_data(i0, j0);
                want.sort();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn gnd_examples() {
        let f3 = Arc::new(FieldConfig::new(3, 1).unwrap());
        let kernel = MultiPoly::parse(f3.clone(), "pi^4*x^3 + y^2 + pi^4*y^6").unwrap();
        assert_eq!(gnd_check(&kernel, 3).unwrap(), GndResult::NonDegenerate { checked_up_to: 3 });
        let lin = MultiPoly::parse(f3, "x + y").unwrap();
        assert_eq!(gnd_check(&lin, 3).unwrap(), GndResult::OriginNonsingular);
        let f5 = Arc::new(FieldConfig::new(5, 1).unwrap());
        let deg = MultiPoly::parse(f5, "(x - y)^2 + x^3").unwrap();
        match gnd_check(&deg, 1).unwrap() {
            GndResult::DegenerateWitness { face, degree, point } => {
                assert_eq!(degree, 1);
                assert!(face.contains(&vec![1, 1]) && !face.contains(&vec![3, 0]));
                assert_eq!(point[0], point[1]);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
    }

    #[test]
    fn extension_search_finds_non_rational_witness() {
        // x^2 + y^2 over F_3: the face x^2+y^2 has torus zeros only over F_9,
        // but its gradient (2x, 2y) never vanishes there, so it stays non-degenerate;
        // (x^2 + y^2)^2 over F_3 degenerates only once i = sqrt(-1) exists.
        let f3 = Arc::new(FieldConfig::new(3, 1).unwrap());
        let sq = MultiPoly::parse(f3.clone(), "x^2 + y^2").unwrap();
        assert_eq!(gnd_check(&sq, 2).unwrap(), GndResult::NonDegenerate { checked_up_to: 2 });
        let quartic = MultiPoly::parse(f3, "(x^2 + y^2)^2").unwrap();
        assert_eq!(gnd_check(&quartic, 1).unwrap(), GndResult::NonDegenerate { checked_up_to: 1 });
        assert!(matches!(gnd_check(&quartic, 2).unwrap(), GndResult::DegenerateWitness { degree: 2, .. }));
    }
}
