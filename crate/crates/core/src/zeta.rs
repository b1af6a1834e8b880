//! Frobenius characteristic polynomials on `H^2` from point counts.
//!
//! The 16 classes of the hyperplane and the exceptional curves give a known
//! factor of degree 16; the remaining degree-6 factor `U` is recovered from
//! three power sums and completed with the functional equation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branchgeom::{pair_fixed_count, FiberSpec, Perm6};
use crate::counter::CountRecord;
use crate::{IntPoly, RatPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZetaError {
    #[error("both signs of the functional equation fit the counts for k <= {kmax}; supply a count with k = {next}", next = kmax + 1)]
    AmbiguousSign { kmax: u32 },
    #[error("inconsistent counts: {0}")]
    InconsistentCounts(String),
    #[error("non-integral coefficients in the unknown factor")]
    NonIntegralCoefficients,
    #[error("bad input: {0}")]
    BadInput(String),
}

/// `Q(T)` on `H^2` and its twist `chi(Z) = Q(pZ) / p^22`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolyPair {
    pub p: u64,
    pub untwisted: IntPoly,
    pub twisted: RatPoly,
    /// `T^22 Q(p^2/T) = sign * p^22 Q(T)`.
    pub sign: i32,
    /// Sign used to complete the degree-6 factor.
    pub unknown_sign: i32,
    pub unknown_factor: IntPoly,
    /// `(k, n_k3)` for every count consumed.
    pub provenance: Vec<(u32, u64)>,
}

impl CharPolyPair {
    /// Untwisted power sum `S_k`.
    pub fn trace(&self, k: u32) -> BigInt {
        self.untwisted.power_sums(k as usize).pop().unwrap_or_default()
    }

    /// `#X(F_{p^k})` predicted by the trace relation.
    pub fn predicted_count(&self, k: u32) -> BigInt {
        BigInt::from(self.p).pow(2 * k) + self.trace(k) + 1
    }

    /// Largest `| |root| - 1 |` over the twisted roots, in floating point.
    /// Advisory only.
    pub fn unit_circle_defect(&self) -> f64 {
        crate::poly::unit_circle_defect(&self.twisted.to_float::<f64>())
    }
}

/// Cyclotomic part removed from a twisted polynomial, and what is left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscendentalPoly {
    #[serde(with = "rat_poly_serde")]
    pub chi_tr: RatPoly,
    /// `(d, multiplicity)` of every `Phi_d` removed, ascending in `d`.
    pub removed: Vec<(u32, u32)>,
}

impl TranscendentalPoly {
    pub fn degree(&self) -> usize {
        self.chi_tr.degree().unwrap_or(0)
    }

    pub fn cyclotomic_degree(&self) -> usize {
        self.removed.iter().map(|&(d, m)| euler_phi(d as u64) as usize * m as usize).sum()
    }
}

/// `(T - p)` times the characteristic polynomial of `p` times the pair
/// permutation of `sigma`.
pub fn algebraic_known_charpoly(sigma: &Perm6, p: u64) -> IntPoly {
    let p = BigInt::from(p);
    let mut out = IntPoly::new(vec![-p.clone(), BigInt::one()]);
    for len in sigma.on_pairs().cycle_type() {
        let mut f = vec![BigInt::zero(); len + 1];
        f[0] = -p.pow(len as u32);
        f[len] = BigInt::one();
        out = &out * &IntPoly::new(f);
    }
    out
}

fn rational(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

/// Reconstructs `Q(T)` from `count`s with `k = 1, 2, ..., n`, `n >= 3`.
pub fn assemble_charpoly(fiber: &FiberSpec, counts: &[CountRecord], sigma: &Perm6) -> Result<CharPolyPair, ZetaError> {
    if counts.len() < 3 {
        return Err(ZetaError::BadInput("at least the counts for k = 1, 2, 3 are needed".into()));
    }
    for (i, c) in counts.iter().enumerate() {
        if c.fiber != *fiber || c.k != i as u32 + 1 {
            return Err(ZetaError::BadInput(format!("count #{i} is not for {fiber} with k = {}", i + 1)));
        }
    }
    let p = BigInt::from(fiber.p);
    let kmax = counts.len() as u32;
    let total: Vec<BigInt> = counts.iter().map(|c| BigInt::from(c.n_k3) - p.pow(2 * c.k) - 1).collect();
    let unknown: Vec<BigRational> = counts[..3]
        .iter()
        .zip(&total)
        .map(|(c, s)| {
            let alg = p.pow(c.k) * BigInt::from(1 + pair_fixed_count(sigma, c.k));
            rational(&(s - alg))
        })
        .collect();
    // T^3 + a1 T^2 + a2 T + a3
    let head = RatPoly::from_power_sums(&unknown).to_integral().ok_or(ZetaError::NonIntegralCoefficients)?;
    let a: Vec<BigInt> = (1..=3).map(|i| head.coeff(3 - i)).collect();

    let signs: &[i32] = if a[2].is_zero() { &[1, -1] } else { &[1] };
    let known = algebraic_known_charpoly(sigma, fiber.p);
    let mut survivors = Vec::new();
    for &eps in signs {
        let e = BigInt::from(eps);
        // a_{6-i} = eps p^{6-2i} a_i
        let u = IntPoly::new(vec![
            &e * p.pow(6),
            &e * p.pow(4) * &a[0],
            &e * p.pow(2) * &a[1],
            a[2].clone(),
            a[1].clone(),
            a[0].clone(),
            BigInt::one(),
        ]);
        let q = &u * &known;
        let sums = q.power_sums(kmax as usize);
        if sums == total {
            survivors.push((eps, u, q));
        }
    }
    let (unknown_sign, unknown_factor, untwisted) = match survivors.len() {
        0 => {
            return Err(ZetaError::InconsistentCounts(format!(
                "no completion of the unknown factor reproduces the counts of {fiber} for k <= {kmax}"
            )))
        }
        1 => survivors.pop().unwrap(),
        _ => return Err(ZetaError::AmbiguousSign { kmax }),
    };

    let sign = functional_equation_sign(&untwisted, &p)
        .ok_or_else(|| ZetaError::InconsistentCounts("assembled polynomial violates the functional equation".into()))?;
    let twisted = twist(&untwisted, &p);
    Ok(CharPolyPair {
        p: fiber.p,
        untwisted,
        twisted,
        sign,
        unknown_sign,
        unknown_factor,
        provenance: counts.iter().map(|c| (c.k, c.n_k3)).collect(),
    })
}

/// `Some(eps)` when `T^n Q(p^2/T) = eps p^n Q(T)`, `n = deg Q`.
pub fn functional_equation_sign(q: &IntPoly, p: &BigInt) -> Option<i32> {
    let n = q.degree()?;
    let lhs = |i: usize| q.coeff(n - i) * p.pow((2 * (n - i)) as u32);
    let rhs = |i: usize| q.coeff(i) * p.pow(n as u32);
    [1, -1].into_iter().find(|&eps| (0..=n).all(|i| lhs(i) == rhs(i) * BigInt::from(eps)))
}

/// `Q(pZ) / p^deg`.
pub fn twist(q: &IntPoly, p: &BigInt) -> RatPoly {
    let n = q.degree().unwrap_or(0) as u32;
    RatPoly::new(q.coeffs().iter().enumerate().map(|(i, c)| BigRational::new(c * p.pow(i as u32), p.pow(n))).collect())
}

pub fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            while n.is_multiple_of(d) {
                n /= d;
            }
            out -= out / d;
        }
        d += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// The cyclotomic polynomials `Phi_d` for every `d` with `phi(d) <= max_degree`.
pub fn cyclotomic_polys(max_degree: usize) -> BTreeMap<u32, IntPoly> {
    let mut all: BTreeMap<u32, IntPoly> = BTreeMap::new();
    let bound = (2 * max_degree * max_degree).max(2) as u32;
    for d in 1..=bound {
        if euler_phi(d as u64) as usize > max_degree {
            continue;
        }
        let mut f = IntPoly::monomial(BigInt::one(), d as usize) - IntPoly::one();
        for e in 1..d {
            if d % e == 0 {
                let phi_e = all.get(&e).cloned().unwrap_or_else(|| cyclotomic(e));
                f = f.exact_div(&phi_e).expect("Phi_e divides X^d - 1");
            }
        }
        all.insert(d, f);
    }
    all
}

fn cyclotomic(d: u32) -> IntPoly {
    let mut f = IntPoly::monomial(BigInt::one(), d as usize) - IntPoly::one();
    for e in 1..d {
        if d.is_multiple_of(e) {
            f = f.exact_div(&cyclotomic(e)).unwrap();
        }
    }
    f
}

/// Divides out every cyclotomic factor of the twisted polynomial.
pub fn split_transcendental(cp: &CharPolyPair) -> TranscendentalPoly {
    split_cyclotomic(&cp.twisted)
}

pub fn split_cyclotomic(poly: &RatPoly) -> TranscendentalPoly {
    let deg = poly.degree().unwrap_or(0);
    let mut rest = poly.make_monic();
    let mut removed = Vec::new();
    for (d, phi) in cyclotomic_polys(deg) {
        let phi = phi.to_rational();
        let mut mult = 0;
        while rest.degree().unwrap_or(0) >= phi.degree().unwrap() {
            let (quot, rem) = rest.div_rem(&phi);
            if !rem.is_zero() {
                break;
            }
            rest = quot;
            mult += 1;
        }
        if mult > 0 {
            removed.push((d, mult));
        }
    }
    TranscendentalPoly { chi_tr: rest, removed }
}

/// `Z^n f(1/Z) = +-f(Z)`.
pub fn is_reciprocal_up_to_sign(f: &RatPoly) -> bool {
    let r = f.reversed();
    r == *f || r == -f
}

/// The monic polynomial whose roots are the `m`-th powers of the roots of
/// the monic `poly`, as `Res_Y(poly(Y), Z - Y^m)` interpolated at `deg + 1`
/// integer points.
pub fn power_charpoly(poly: &RatPoly, m: u32) -> RatPoly {
    let Some(n) = poly.degree() else {
        return poly.clone();
    };
    if m == 1 || n == 0 {
        return poly.make_monic();
    }
    let monic = poly.make_monic();
    let points: Vec<(BigRational, BigRational)> = (0..=n as i64)
        .map(|z| {
            let z = BigRational::from_integer(BigInt::from(z));
            let mut g = vec![BigRational::zero(); m as usize + 1];
            g[0] = z.clone();
            g[m as usize] = -BigRational::one();
            (z, monic.resultant(&RatPoly::new(g)))
        })
        .collect();
    interpolate(&points).make_monic()
}

/// Lagrange interpolation through distinct abscissae.
pub fn interpolate(points: &[(BigRational, BigRational)]) -> RatPoly {
    let mut out = RatPoly::zero();
    for (i, (xi, yi)) in points.iter().enumerate() {
        let mut basis = RatPoly::one();
        let mut denom = BigRational::one();
        for (j, (xj, _)) in points.iter().enumerate() {
            if i != j {
                basis = &basis * &RatPoly::new(vec![-xj.clone(), BigRational::one()]);
                denom *= xi - xj;
            }
        }
        out = &out + &basis.scale(&(yi / denom));
    }
    out
}

/// Squarefree kernel of a nonzero rational: the squarefree positive integer
/// `s` with `|x| = s * (rational square)`.
pub fn squarefree_kernel(x: &BigRational) -> BigInt {
    let n = (x.numer() * x.denom()).abs();
    squarefree_part(&n)
}

fn squarefree_part(n: &BigInt) -> BigInt {
    let mut n = n.clone();
    let mut out = BigInt::one();
    let mut d = BigInt::from(2);
    while &d * &d <= n {
        let mut e = 0;
        while (&n % &d).is_zero() {
            n /= &d;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &d;
        }
        d += 1;
    }
    out * n
}

/// Least common multiple of the removed cyclotomic orders (1 if none).
pub fn cyclotomic_exponent(tp: &TranscendentalPoly) -> u32 {
    tp.removed.iter().fold(1u32, |acc, &(d, _)| acc.lcm(&d))
}

pub(crate) mod rat_poly_serde {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::RatPoly;

    /// Coefficients ascending as `"num/den"` strings.
    pub fn serialize<S: Serializer>(p: &RatPoly, s: S) -> Result<S::Ok, S::Error> {
        p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RatPoly, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse::<BigRational>().map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()
            .map(RatPoly::new)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchgeom::Family;
    use crate::counter::Method;
    use crate::poly::rat;

    fn q(c: &[(i64, i64)]) -> RatPoly {
        RatPoly::new(c.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    fn record(fiber: FiberSpec, k: u32, n_k3: u64) -> CountRecord {
        CountRecord { fiber, k, n_prime: 0, n_k3, method: Method::Naive, wall_time_secs: 0.0 }
    }

    #[test]
    fn known_charpoly_examples() {
        let p = 5;
        let pb = BigInt::from(p);
        let lin = IntPoly::new(vec![-pb.clone(), BigInt::one()]);
        let t2 = IntPoly::new(vec![-pb.pow(2), BigInt::zero(), BigInt::one()]);
        let t4 = IntPoly::new(vec![-pb.pow(4), BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::one()]);
        assert_eq!(algebraic_known_charpoly(&Perm6::IDENTITY, p), lin.pow(16));
        let s = Perm6::from_cycles(&[&[3, 4, 5, 6]]);
        assert_eq!(algebraic_known_charpoly(&s, p), &(&lin.pow(2) * &t2) * &t4.pow(3));
        let s = Perm6::from_cycles(&[&[1, 2], &[3, 4]]);
        assert_eq!(algebraic_known_charpoly(&s, p), &lin.pow(4) * &t2.pow(6));
    }

    #[test]
    fn known_power_sums_match_pair_counts() {
        for s in Perm6::all().into_iter().step_by(7) {
            let f = algebraic_known_charpoly(&s, 3);
            let sums = f.power_sums(6);
            for k in 1..=6u32 {
                let expect = BigInt::from(3).pow(k) * BigInt::from(1 + pair_fixed_count(&s, k));
                assert_eq!(sums[k as usize - 1], expect);
            }
        }
    }

    #[test]
    fn cyclotomic_table() {
        let c = cyclotomic_polys(4);
        assert_eq!(c[&1], IntPoly::from_i64s(&[-1, 1]));
        assert_eq!(c[&4], IntPoly::from_i64s(&[1, 0, 1]));
        assert_eq!(c[&5], IntPoly::from_i64s(&[1, 1, 1, 1, 1]));
        assert_eq!(c[&12], IntPoly::from_i64s(&[1, 0, -1, 0, 1]));
        let ds: Vec<u32> = c.keys().copied().collect();
        assert_eq!(ds, vec![1, 2, 3, 4, 5, 6, 8, 10, 12]);
    }

    #[test]
    fn split_examples() {
        let all_ones = IntPoly::from_i64s(&[-1, 1]).pow(22).to_rational();
        let tp = split_cyclotomic(&all_ones);
        assert_eq!(tp.chi_tr, RatPoly::one());
        assert_eq!(tp.removed, vec![(1, 22)]);

        let quartic = q(&[(1, 1), (0, 1), (-4, 3), (0, 1), (1, 1)]);
        let f = &q(&[(-1, 1), (0, 1), (1, 1)]) * &quartic;
        let tp = split_cyclotomic(&f);
        assert_eq!(tp.chi_tr, quartic);
        assert_eq!(tp.removed, vec![(1, 1), (2, 1)]);
        // idempotent
        assert_eq!(split_cyclotomic(&tp.chi_tr).chi_tr, quartic);
        assert!(split_cyclotomic(&tp.chi_tr).removed.is_empty());
        assert!(is_reciprocal_up_to_sign(&quartic));
    }

    /// Roots to the `m`-th power through Newton sums only.
    fn power_by_newton(f: &RatPoly, m: u32) -> RatPoly {
        let n = f.degree().unwrap();
        let sums = f.power_sums(n * m as usize);
        let picked: Vec<_> = (1..=n).map(|k| sums[k * m as usize - 1].clone()).collect();
        RatPoly::from_power_sums(&picked)
    }

    #[test]
    fn power_charpoly_examples() {
        let chi3 = q(&[(1, 1), (0, 1), (-4, 3), (0, 1), (1, 1)]);
        assert_eq!(power_charpoly(&chi3, 1), chi3);
        let sq = q(&[(1, 1), (-4, 3), (1, 1)]);
        assert_eq!(power_charpoly(&chi3, 2), &sq * &sq);
        let lin = q(&[(-1, 1), (1, 1)]);
        assert_eq!(power_charpoly(&lin, 5), lin);
        for m in 1..=5 {
            assert_eq!(power_charpoly(&chi3, m), power_by_newton(&chi3, m));
        }
    }

    #[test]
    fn squarefree_kernels() {
        assert_eq!(squarefree_kernel(&rat(4, 1)), BigInt::from(1));
        assert_eq!(squarefree_kernel(&rat(44, 1)), BigInt::from(11));
        assert_eq!(squarefree_kernel(&rat(-12, 25)), BigInt::from(3));
        assert_eq!(squarefree_kernel(&rat(2, 3)), BigInt::from(6));
    }

    /// Counts synthesised from a chosen `Q` through the trace relation.
    fn counts_from(fiber: FiberSpec, qpoly: &IntPoly, kmax: u32) -> Vec<CountRecord> {
        let p = BigInt::from(fiber.p);
        let sums = qpoly.power_sums(kmax as usize);
        (1..=kmax)
            .map(|k| {
                let n: BigInt = p.pow(2 * k) + &sums[k as usize - 1] + 1;
                record(fiber, k, n.try_into().unwrap())
            })
            .collect()
    }

    #[test]
    fn assembly_recovers_synthetic_polynomials() {
        let fiber = FiberSpec::new(Family::Qw5, 3, 0).unwrap();
        let s = Perm6::from_cycles(&[&[3, 4, 5, 6]]);
        let known = algebraic_known_charpoly(&s, 3);
        // U = (T^2 + 9)(T^4 - 12 T^2 + 81): Phi_4 times the p = 3 quartic
        let u = &IntPoly::from_i64s(&[9, 0, 1]) * &IntPoly::from_i64s(&[81, 0, -12, 0, 1]);
        let target = &u * &known;
        // a3 = 0 here, so k <= 3 cannot fix the sign
        let c3 = counts_from(fiber, &target, 3);
        assert_eq!(assemble_charpoly(&fiber, &c3, &s), Err(ZetaError::AmbiguousSign { kmax: 3 }));
        let c4 = counts_from(fiber, &target, 4);
        let cp = assemble_charpoly(&fiber, &c4, &s).unwrap();
        assert_eq!(cp.untwisted, target);
        assert_eq!(cp.unknown_factor, u);

        let mut bad = c4.clone();
        bad[3].n_k3 += 3;
        assert!(matches!(assemble_charpoly(&fiber, &bad, &s), Err(ZetaError::InconsistentCounts(_))));
    }
}
