//! Picard ranks, Artin–Tate discriminant classes, van Luijk bounds and
//! quadratic fields over which a quartic `chi^tr` becomes a norm.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::complex_roots;
use crate::zeta::{
    cyclotomic_exponent, power_charpoly, split_cyclotomic, squarefree_kernel, CharPolyPair, TranscendentalPoly,
};
use crate::{FloatPoly, RatPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PicardError {
    #[error("a transcendental eigenvalue becomes 1 after raising to the power {m}")]
    RankJumpAtUnity { m: u32 },
    #[error("chi^tr is trivial; there is no transcendental part")]
    TrivialTranscendental,
    #[error("the two reductions have ranks {0} and {1}")]
    RankMismatch(u32, u32),
    #[error("only quartic chi^tr is supported, got degree {0}")]
    UnsupportedDegree(usize),
    #[error("chi^tr has a cyclotomic factor")]
    NotTranscendental,
}

/// A class in `Q* / (Q*)^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscClass {
    pub sign: i32,
    #[serde(with = "bigint_string")]
    pub magnitude: BigInt,
    pub m: u32,
    /// `p^m * chi^tr_{p^m}(1)`.
    #[serde(with = "rational_string")]
    pub audit: BigRational,
}

impl DiscClass {
    pub fn value(&self) -> BigInt {
        &self.magnitude * self.sign
    }

    /// Whether `self / other` is a rational square.
    pub fn same_class(&self, other: &Self) -> bool {
        self.sign == other.sign && self.magnitude == other.magnitude
    }
}

impl fmt::Display for DiscClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

pub fn geometric_picard_rank(tp: &TranscendentalPoly) -> u32 {
    22 - tp.degree() as u32
}

pub fn artin_tate_disc_class(cp: &CharPolyPair, tp: &TranscendentalPoly) -> Result<DiscClass, PicardError> {
    artin_tate_disc_class_at(tp, cp.p, cyclotomic_exponent(tp))
}

/// The class `(-1)^(rho-1) * squarefree(p^m chi^tr_{p^m}(1))` for a chosen `m`.
pub fn artin_tate_disc_class_at(tp: &TranscendentalPoly, p: u64, m: u32) -> Result<DiscClass, PicardError> {
    if tp.degree() == 0 {
        return Err(PicardError::TrivialTranscendental);
    }
    let rho = geometric_picard_rank(tp);
    let value = power_charpoly(&tp.chi_tr, m).eval(&BigRational::one());
    if value.is_zero() {
        return Err(PicardError::RankJumpAtUnity { m });
    }
    let audit = value * BigRational::from_integer(BigInt::from(p).pow(m));
    Ok(DiscClass { sign: if rho % 2 == 1 { 1 } else { -1 }, magnitude: squarefree_kernel(&audit), m, audit })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub p: u64,
    pub t: u64,
    pub rank: u32,
    pub disc: DiscClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardReport {
    pub known_lower_bound: u32,
    pub reductions: Vec<Reduction>,
    /// Bounds for the geometric Picard rank of the generic fibre.
    pub rank_interval: (u32, u32),
    pub disc_quotient_nonsquare: bool,
    /// `[E:Q] <= bound`, when known.
    pub e_degree_bound: Option<u32>,
    /// `[E:Q]` when pinned down.
    pub e_degree: Option<u32>,
    #[serde(with = "bigint_vec_string")]
    pub delta_candidates: Vec<BigInt>,
    pub galois_group: Option<GaloisGroup>,
}

/// Van Luijk's comparison of two reductions of equal rank `n + d`.
pub fn rank_and_field_bounds(
    reductions: [Reduction; 2],
    n_known: u32,
    rm_certificate: bool,
) -> Result<PicardReport, PicardError> {
    let [a, b] = &reductions;
    if a.rank != b.rank {
        return Err(PicardError::RankMismatch(a.rank, b.rank));
    }
    let d = a.rank.saturating_sub(n_known);
    let nonsquare = !a.disc.same_class(&b.disc);
    let (rank_interval, e_degree_bound, e_degree) = if d == 0 {
        ((n_known, n_known), None, None)
    } else if nonsquare {
        if rm_certificate && d == 2 {
            ((n_known, n_known), Some(2), Some(2))
        } else {
            ((n_known, n_known + d - 1), Some(d), None)
        }
    } else {
        ((n_known, n_known + d), None, None)
    };
    if let Some(e) = e_degree {
        debug_assert_eq!((a.rank - rank_interval.1) % e, 0);
    }
    Ok(PicardReport {
        known_lower_bound: n_known,
        reductions: reductions.to_vec(),
        rank_interval,
        disc_quotient_nonsquare: nonsquare,
        e_degree_bound,
        e_degree,
        delta_candidates: Vec::new(),
        galois_group: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaloisGroup {
    S4,
    A4,
    D4,
    V4,
    C4,
    Reducible,
}

impl fmt::Display for GaloisGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GaloisGroup::S4 => "S4",
            GaloisGroup::A4 => "A4",
            GaloisGroup::D4 => "D4",
            GaloisGroup::V4 => "V4",
            GaloisGroup::C4 => "C4",
            GaloisGroup::Reducible => "reducible",
        };
        f.write_str(s)
    }
}

/// `a + b sqrt(delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticElement {
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadraticElement {
    fn rational(a: BigRational) -> Self {
        QuadraticElement { a, b: BigRational::zero() }
    }
    fn add(&self, o: &Self) -> Self {
        QuadraticElement { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn mul(&self, o: &Self, delta: &BigRational) -> Self {
        QuadraticElement { a: &self.a * &o.a + &self.b * &o.b * delta, b: &self.a * &o.b + &self.b * &o.a }
    }
    fn conj(&self) -> Self {
        QuadraticElement { a: self.a.clone(), b: -self.b.clone() }
    }
}

/// `Z^2 + s Z + r` over `Q(sqrt delta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFactor {
    pub s: QuadraticElement,
    pub r: QuadraticElement,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormCertificate {
    pub delta: BigInt,
    pub factor: QuadraticFactor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmCandidates {
    pub deltas: Vec<BigInt>,
    pub certificates: Vec<NormCertificate>,
    pub galois_group: GaloisGroup,
    /// `(n, chi^tr_{p^n} is a square in Q[Z])`.
    pub square_tests: Vec<(u32, bool)>,
}

fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

fn is_rational_square(x: &BigRational) -> bool {
    rational_sqrt(x).is_some()
}

/// Rational roots of a cubic with rational coefficients (ascending), each
/// listed once.
fn rational_roots_cubic(c: &[BigRational; 4]) -> Vec<BigRational> {
    let monic: Vec<BigRational> = c.iter().map(|x| x / &c[3]).collect();
    let poly = RatPoly::new(monic.clone());
    // denominators of rational roots of the monic cubic divide the lcm of
    // the coefficient denominators
    let lcm = monic.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    let float: FloatPoly = poly.to_float();
    let mut out: Vec<BigRational> = Vec::new();
    for z in complex_roots(&float, 500) {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let scaled = z.re * lcm.to_f64().unwrap_or(f64::INFINITY);
        if !scaled.is_finite() {
            continue;
        }
        let centre = scaled.round() as i64;
        for n in [centre - 1, centre, centre + 1] {
            let cand = BigRational::new(BigInt::from(n), lcm.clone());
            if poly.eval(&cand).is_zero() && !out.contains(&cand) {
                out.push(cand);
            }
        }
    }
    out.sort();
    out
}

/// Galois group of an irreducible quartic by the resolvent cubic, after
/// Kappe and Warren.
pub fn quartic_galois_group(f: &RatPoly) -> GaloisGroup {
    let f = f.make_monic();
    let (a, b, c, d) = (f.coeff(3), f.coeff(2), f.coeff(1), f.coeff(0));
    if quartic_rational_factorization(&f) {
        return GaloisGroup::Reducible;
    }
    let four = BigRational::from_integer(4.into());
    let res = resolvent_cubic(&a, &b, &c, &d);
    let disc = cubic_discriminant(&res);
    let roots = rational_roots_cubic(&res);
    match roots.len() {
        0 if is_rational_square(&disc) => GaloisGroup::A4,
        0 => GaloisGroup::S4,
        1 => {
            let theta = &roots[0];
            let d1 = theta * theta - &four * &d;
            let d2 = &a * &a - &four * (&b - theta);
            if is_rational_square(&(&d1 * &disc)) && is_rational_square(&(&d2 * &disc)) {
                GaloisGroup::C4
            } else {
                GaloisGroup::D4
            }
        }
        _ => GaloisGroup::V4,
    }
}

/// `theta^3 - b theta^2 + (ac - 4d) theta - (a^2 d - 4bd + c^2)`, ascending.
fn resolvent_cubic(a: &BigRational, b: &BigRational, c: &BigRational, d: &BigRational) -> [BigRational; 4] {
    let four = BigRational::from_integer(4.into());
    [-(a * a * d - &four * b * d + c * c), a * c - &four * d, -b.clone(), BigRational::one()]
}

fn cubic_discriminant(r: &[BigRational; 4]) -> BigRational {
    let (bb, cc, dd) = (&r[2], &r[1], &r[0]);
    let n = |v: i64| BigRational::from_integer(v.into());
    bb * bb * cc * cc - n(4) * cc * cc * cc - n(4) * bb * bb * bb * dd - n(27) * dd * dd + n(18) * bb * cc * dd
}

/// Whether a monic quartic has a rational root or a factorization into
/// rational quadratics.
fn quartic_rational_factorization(f: &RatPoly) -> bool {
    let (a, b, c, d) = (f.coeff(3), f.coeff(2), f.coeff(1), f.coeff(0));
    // rational roots: round the real float roots and test exactly
    let lcm = f.coeffs().iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    for z in complex_roots(&f.to_float::<f64>(), 500) {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let centre = (z.re * lcm.to_f64().unwrap_or(f64::INFINITY)).round();
        if !centre.is_finite() {
            continue;
        }
        for n in [centre as i64 - 1, centre as i64, centre as i64 + 1] {
            if f.eval(&BigRational::new(BigInt::from(n), lcm.clone())).is_zero() {
                return true;
            }
        }
    }
    quadratic_splittings(&a, &b, &c, &d).into_iter().any(|(delta, _)| delta.is_none())
}

/// Factorizations `f = g * conj(g)` with `g` monic quadratic over `Q(sqrt delta)`,
/// one per rational root of the resolvent cubic. `delta = None` marks a
/// factorization over `Q`.
fn quadratic_splittings(
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
    d: &BigRational,
) -> Vec<(Option<BigInt>, QuadraticFactor)> {
    let four = BigRational::from_integer(4.into());
    let half = BigRational::new(1.into(), 2.into());
    let mut out = Vec::new();
    for theta in rational_roots_cubic(&resolvent_cubic(a, b, c, d)) {
        // f = (Z^2 + s1 Z + r1)(Z^2 + s2 Z + r2), r1 + r2 = theta, r1 r2 = d,
        // s1 + s2 = a, s1 s2 = b - theta
        let d1 = &theta * &theta - &four * d;
        let d2 = a * a - &four * (b - &theta);
        let class = |x: &BigRational| -> Option<BigInt> {
            (!x.is_zero()).then(|| squarefree_kernel(x) * if x.is_negative() { -1 } else { 1 })
        };
        let (k1, k2) = (class(&d1), class(&d2));
        let delta = match (&k1, &k2) {
            (Some(x), Some(y)) if x != y => continue,
            (Some(x), _) | (None, Some(x)) => x.clone(),
            (None, None) => BigInt::one(),
        };
        let delta_q = BigRational::from_integer(delta.clone());
        // sqrt(D) = coefficient * sqrt(delta)
        let root_coeff = |x: &BigRational| -> BigRational {
            if x.is_zero() {
                BigRational::zero()
            } else {
                rational_sqrt(&(x / &delta_q)).expect("same square class")
            }
        };
        let (e1, e2) = (root_coeff(&d1), root_coeff(&d2));
        for sgn in [1i64, -1] {
            let sgn = BigRational::from_integer(sgn.into());
            let s = QuadraticElement { a: a * &half, b: &e2 * &half };
            let r = QuadraticElement { a: &theta * &half, b: &sgn * &e1 * &half };
            let g = QuadraticFactor { s, r };
            if norm_matches(&g, &delta_q, a, b, c, d) {
                let delta = (delta != BigInt::one()).then_some(delta);
                out.push((delta, g));
                break;
            }
        }
    }
    out
}

/// Multiplies `g` by its conjugate and compares with `Z^4 + a Z^3 + b Z^2 + c Z + d`.
fn norm_matches(
    g: &QuadraticFactor,
    delta: &BigRational,
    a: &BigRational,
    b: &BigRational,
    c: &BigRational,
    d: &BigRational,
) -> bool {
    let h = QuadraticFactor { s: g.s.conj(), r: g.r.conj() };
    // (Z^2 + s Z + r)(Z^2 + s' Z + r')
    let z3 = g.s.add(&h.s);
    let z2 = g.r.add(&h.r).add(&g.s.mul(&h.s, delta));
    let z1 = g.s.mul(&h.r, delta).add(&g.r.mul(&h.s, delta));
    let z0 = g.r.mul(&h.r, delta);
    let expect = [a, b, c, d].map(|x| QuadraticElement::rational(x.clone()));
    [z3, z2, z1, z0] == expect
}

/// Quadratic fields `Q(sqrt delta)` over which the quartic `chi^tr` is a norm,
/// its Galois group, and whether `chi^tr_{p^n}` is a square for `n = 1, 2`.
pub fn rm_quadratic_candidates(tp: &TranscendentalPoly) -> Result<RmCandidates, PicardError> {
    let f = tp.chi_tr.make_monic();
    let deg = f.degree().unwrap_or(0);
    if deg != 4 {
        return Err(PicardError::UnsupportedDegree(deg));
    }
    if !split_cyclotomic(&f).removed.is_empty() {
        return Err(PicardError::NotTranscendental);
    }
    let (a, b, c, d) = (f.coeff(3), f.coeff(2), f.coeff(1), f.coeff(0));
    let mut deltas = Vec::new();
    let mut certificates = Vec::new();
    for (delta, factor) in quadratic_splittings(&a, &b, &c, &d) {
        if let Some(delta) = delta {
            if !deltas.contains(&delta) {
                deltas.push(delta.clone());
            }
            certificates.push(NormCertificate { delta, factor });
        }
    }
    deltas.sort();
    let square_tests = (1..=2).map(|n| (n, power_charpoly(&f, n).exact_sqrt().is_some())).collect();
    Ok(RmCandidates { deltas, certificates, galois_group: quartic_galois_group(&f), square_tests })
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod bigint_vec_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()
    }
}

mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn q(c: &[(i64, i64)]) -> RatPoly {
        RatPoly::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    fn chi3() -> RatPoly {
        q(&[(1, 1), (0, 1), (-4, 3), (0, 1), (1, 1)])
    }

    fn chi19() -> RatPoly {
        q(&[(1, 1), (-14, 19), (34, 19), (-14, 19), (1, 1)])
    }

    fn tp(chi: RatPoly, removed: Vec<(u32, u32)>) -> TranscendentalPoly {
        TranscendentalPoly { chi_tr: chi, removed }
    }

    #[test]
    fn ranks() {
        assert_eq!(geometric_picard_rank(&tp(chi3(), vec![(1, 6), (2, 4), (4, 4)])), 18);
        assert_eq!(geometric_picard_rank(&tp(RatPoly::one(), vec![(1, 22)])), 22);
    }

    #[test]
    fn disc_classes_and_stability() {
        let t3 = tp(chi3(), vec![(1, 6), (2, 4), (4, 4)]);
        for m in [2, 4, 8] {
            let c = artin_tate_disc_class_at(&t3, 3, m).unwrap();
            assert_eq!(c.value(), BigInt::from(-1));
        }
        assert_eq!(artin_tate_disc_class_at(&t3, 3, 2).unwrap().audit, rat(4, 1));
        assert_eq!(artin_tate_disc_class_at(&t3, 3, 4).unwrap().audit, rat(400, 1));

        let t19 = tp(chi19(), vec![(1, 12), (2, 6)]);
        let c = artin_tate_disc_class_at(&t19, 19, 1).unwrap();
        assert_eq!(c.audit, rat(44, 1));
        assert_eq!(c.value(), BigInt::from(-11));
        assert_eq!(artin_tate_disc_class_at(&t19, 19, 2).unwrap().value(), BigInt::from(-11));

        assert_eq!(
            artin_tate_disc_class_at(&tp(RatPoly::one(), vec![]), 3, 1),
            Err(PicardError::TrivialTranscendental)
        );
        // Phi_4 left inside chi^tr: its roots become 1 at m = 4
        let with_i = &chi3() * &q(&[(1, 1), (0, 1), (1, 1)]);
        assert_eq!(artin_tate_disc_class_at(&tp(with_i, vec![]), 3, 4), Err(PicardError::RankJumpAtUnity { m: 4 }));
    }

    fn reduction(p: u64, disc: i64) -> Reduction {
        Reduction {
            p,
            t: 0,
            rank: 18,
            disc: DiscClass {
                sign: disc.signum() as i32,
                magnitude: BigInt::from(disc.abs()),
                m: 1,
                audit: rat(disc.abs(), 1),
            },
        }
    }

    #[test]
    fn van_luijk_bounds() {
        let r = rank_and_field_bounds([reduction(3, -1), reduction(19, -11)], 16, true).unwrap();
        assert_eq!((r.rank_interval, r.e_degree), ((16, 16), Some(2)));
        let r = rank_and_field_bounds([reduction(3, -1), reduction(19, -11)], 16, false).unwrap();
        assert_eq!((r.rank_interval, r.e_degree_bound, r.e_degree), ((16, 17), Some(2), None));
        let r = rank_and_field_bounds([reduction(3, -1), reduction(19, -1)], 16, true).unwrap();
        assert_eq!((r.rank_interval, r.e_degree_bound), ((16, 18), None));
        let r = rank_and_field_bounds([reduction(3, -1), reduction(19, -11)], 18, false).unwrap();
        assert_eq!((r.rank_interval, r.e_degree_bound), ((18, 18), None));
        let mut other = reduction(19, -11);
        other.rank = 20;
        assert_eq!(rank_and_field_bounds([reduction(3, -1), other], 16, false), Err(PicardError::RankMismatch(18, 20)));
    }

    #[test]
    fn rm_candidates_for_the_reduction_quartics() {
        let c = rm_quadratic_candidates(&tp(chi19(), vec![])).unwrap();
        assert_eq!(c.deltas, vec![BigInt::from(5)]);
        assert_eq!(c.galois_group, GaloisGroup::D4);
        assert_eq!(c.square_tests, vec![(1, false), (2, false)]);

        let c = rm_quadratic_candidates(&tp(chi3(), vec![])).unwrap();
        assert_eq!(c.square_tests, vec![(1, false), (2, true)]);

        let cyc = q(&[(1, 1), (0, 1), (-2, 1), (0, 1), (1, 1)]);
        assert_eq!(rm_quadratic_candidates(&tp(cyc, vec![])), Err(PicardError::NotTranscendental));
        assert_eq!(
            rm_quadratic_candidates(&tp(q(&[(1, 1), (0, 1), (1, 1)]), vec![])),
            Err(PicardError::UnsupportedDegree(2))
        );
    }

    #[test]
    fn galois_groups_of_textbook_quartics() {
        let g = |c: &[i64]| quartic_galois_group(&RatPoly::new(c.iter().map(|&x| rat(x, 1)).collect()));
        assert_eq!(g(&[-2, 0, 0, 0, 1]), GaloisGroup::D4); // x^4 - 2
        assert_eq!(g(&[1, 0, 0, 0, 1]), GaloisGroup::V4); // Phi_8
        assert_eq!(g(&[1, 1, 1, 1, 1]), GaloisGroup::C4); // Phi_5
        assert_eq!(g(&[1, 1, 0, 0, 1]), GaloisGroup::S4); // x^4 + x + 1
        assert_eq!(g(&[12, 8, 0, 0, 1]), GaloisGroup::A4); // x^4 + 8x + 12
        assert_eq!(g(&[-1, 0, 0, 0, 1]), GaloisGroup::Reducible);
        assert_eq!(g(&[4, 0, 0, 0, 1]), GaloisGroup::Reducible); // (x^2+2x+2)(x^2-2x+2)
    }
}
