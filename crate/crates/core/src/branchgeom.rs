//! The two families of double planes, their branch sextics and the six
//! branch lines over a splitting field, together with the Frobenius action on
//! lines and on the 15 nodes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ffield::{self, make_field, FieldDescriptor, FieldError, FqElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("characteristic {0} is excluded for this family")]
    ExcludedCharacteristic(u64),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("degenerate line arrangement: {0}")]
    DegenerateArrangement(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Real multiplication by `Q(sqrt 2)`.
    Qw2,
    /// Real multiplication by `Q(sqrt 5)`.
    Qw5,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Qw2 => "qw2",
            Family::Qw5 => "qw5",
        }
    }

    /// Primes for which the point-count formula is claimed: `p = 2, 3 mod 5`
    /// for Qw5 and `p = 3, 5 mod 8` for Qw2.
    pub fn in_congruence_class(self, p: u64) -> bool {
        match self {
            Family::Qw5 => matches!(p % 5, 2 | 3),
            Family::Qw2 => matches!(p % 8, 3 | 5),
        }
    }

    /// The claimed count `#X(F_p)` of the desingularized surface for primes
    /// in the congruence class.
    pub fn expected_k3_count(self, p: u64) -> u64 {
        match self {
            Family::Qw5 => p * p + 2 * p + 1,
            Family::Qw2 => p * p + 4 * p + 1,
        }
    }

    fn check_characteristic(self, p: u64) -> Result<(), GeomError> {
        if p == 2 || (self == Family::Qw5 && p == 5) {
            return Err(GeomError::ExcludedCharacteristic(p));
        }
        if !ffield::is_prime(p) {
            return Err(GeomError::BadParameter(format!("{p} is not prime")));
        }
        Ok(())
    }

    /// The polynomial in `t` inverted on the base of the family, mod p.
    fn excluded_value(self, p: u64, t: u64) -> u64 {
        let p = p as i128;
        let t = t as i128 % p;
        let m = |v: i128| v.rem_euclid(p);
        let v = match self {
            Family::Qw5 => m(t - 1) * m(t * t * t * t - t * t * t + t * t - t + 1),
            Family::Qw2 => {
                let t2 = t * t;
                let factors = [t, t2 - 2, t2 + 2, t2 - 4 * t + 2, t2 + 4 * t + 2];
                factors.iter().fold(1, |acc, &f| m(acc * m(f)))
            }
        };
        m(v) as u64
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qw2" => Ok(Family::Qw2),
            "qw5" => Ok(Family::Qw5),
            other => Err(GeomError::BadParameter(format!("unknown family {other:?}"))),
        }
    }
}

/// True iff `t` lies on the base of the family over `F_p`.
pub fn good_fiber(family: Family, p: u64, t: u64) -> Result<bool, GeomError> {
    family.check_characteristic(p)?;
    Ok(family.excluded_value(p, t) != 0)
}

/// One member `X_t` of a family, `t` in `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiberSpec {
    pub family: Family,
    pub p: u64,
    pub t: u64,
}

impl FiberSpec {
    /// Validates the characteristic and that `t` is a good parameter.
    pub fn new(family: Family, p: u64, t: u64) -> Result<Self, GeomError> {
        if !good_fiber(family, p, t)? {
            return Err(GeomError::BadParameter(format!("t = {t} is not a good fibre of {family} over F_{p}")));
        }
        Ok(FiberSpec { family, p, t: t % p })
    }
}

impl fmt::Display for FiberSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(p={}, t={})", self.family, self.p, self.t)
    }
}

/// Monomial `x^i y^j z^(d-i-j)` position in a degree-`d` coefficient list,
/// ordered by descending `i`, then descending `j`.
pub fn monomial_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i + j <= d);
    let before: usize = (0..d - i).map(|a| a + 1).sum();
    before + (d - i - j)
}

/// Exponents `(i, j, k)` of every monomial of degree `d`, in storage order.
pub fn monomials(d: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity((d + 1) * (d + 2) / 2);
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push((i, j, d - i - j));
        }
    }
    out
}

/// Homogeneous ternary form over a finite field.
#[derive(Clone, PartialEq, Eq)]
pub struct TernaryForm {
    degree: usize,
    coeffs: Vec<FqElement>,
}

impl fmt::Debug for TernaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TernaryForm(deg {}, {:?})", self.degree, self.coeffs)
    }
}

impl TernaryForm {
    pub fn zero(field: &Arc<FieldDescriptor>, degree: usize) -> Self {
        TernaryForm { degree, coeffs: vec![field.zero(); (degree + 1) * (degree + 2) / 2] }
    }

    /// `a x + b y + c z`.
    pub fn linear(a: FqElement, b: FqElement, c: FqElement) -> Self {
        TernaryForm { degree: 1, coeffs: vec![a, b, c] }
    }

    /// Builds a form from `(i, j, k, coefficient)` terms.
    pub fn from_terms(field: &Arc<FieldDescriptor>, degree: usize, terms: &[(usize, usize, usize, FqElement)]) -> Self {
        let mut f = Self::zero(field, degree);
        for (i, j, k, c) in terms {
            assert_eq!(i + j + k, degree);
            let idx = monomial_index(degree, *i, *j);
            f.coeffs[idx] = &f.coeffs[idx] + c;
        }
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[FqElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> &FqElement {
        assert_eq!(i + j + k, self.degree);
        &self.coeffs[monomial_index(self.degree, i, j)]
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        self.coeffs[0].field()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = self.degree + other.degree;
        let mut out = Self::zero(self.field(), d);
        let ma = monomials(self.degree);
        let mb = monomials(other.degree);
        for (a, &(i1, j1, _)) in self.coeffs.iter().zip(&ma) {
            if a.is_zero() {
                continue;
            }
            for (b, &(i2, j2, _)) in other.coeffs.iter().zip(&mb) {
                let idx = monomial_index(d, i1 + i2, j1 + j2);
                out.coeffs[idx] = &out.coeffs[idx] + &(a * b);
            }
        }
        out
    }

    pub fn scale(&self, c: &FqElement) -> Self {
        TernaryForm { degree: self.degree, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn eval(&self, x: &FqElement, y: &FqElement, z: &FqElement) -> FqElement {
        let mut acc = self.field().zero();
        for (c, (i, j, k)) in self.coeffs.iter().zip(monomials(self.degree)) {
            if c.is_zero() {
                continue;
            }
            acc = &acc + &(&(&(c * &x.pow(i as u128)) * &y.pow(j as u128)) * &z.pow(k as u128));
        }
        acc
    }

    /// Coefficients mapped into another field of the same characteristic.
    /// Every coefficient must lie in the prime field.
    pub fn to_field(&self, field: &Arc<FieldDescriptor>) -> Result<Self, GeomError> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                c.as_prime()
                    .map(|v| field.from_u64(v))
                    .ok_or_else(|| GeomError::BadParameter("form not defined over the prime field".into()))
            })
            .collect::<Result<_, _>>()?;
        Ok(TernaryForm { degree: self.degree, coeffs })
    }
}

/// Coefficients of a projective object scaled so the first nonzero entry is 1.
fn normalize3(v: [FqElement; 3]) -> Option<[FqElement; 3]> {
    let lead = v.iter().find(|c| !c.is_zero())?.inv().ok()?;
    Some(v.map(|c| &c * &lead))
}

/// A line `a x + b y + c z = 0`, normalized.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearForm(pub [FqElement; 3]);

impl LinearForm {
    pub fn new(a: FqElement, b: FqElement, c: FqElement) -> Result<Self, GeomError> {
        normalize3([a, b, c]).map(LinearForm).ok_or_else(|| GeomError::BadParameter("zero linear form".into()))
    }

    pub fn frobenius(&self) -> Self {
        LinearForm(self.0.clone().map(|c| c.frobenius()))
    }

    pub fn to_form(&self) -> TernaryForm {
        let [a, b, c] = self.0.clone();
        TernaryForm::linear(a, b, c)
    }

    pub fn eval(&self, pt: &ProjPoint) -> FqElement {
        let [a, b, c] = &self.0;
        let [x, y, z] = &pt.0;
        &(&(a * x) + &(b * y)) + &(c * z)
    }

    pub fn meet(&self, other: &Self) -> Option<ProjPoint> {
        let [a1, b1, c1] = &self.0;
        let [a2, b2, c2] = &other.0;
        normalize3([&(b1 * c2) - &(c1 * b2), &(c1 * a2) - &(a1 * c2), &(a1 * b2) - &(b1 * a2)]).map(ProjPoint)
    }
}

/// A point of the projective plane, normalized.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProjPoint(pub [FqElement; 3]);

/// A permutation of the six line labels (0-based internally).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Perm6(pub [u8; 6]);

/// The 15 unordered pairs `{i, j}`, `i < j`, in lexicographic order.
pub fn pairs() -> [(usize, usize); 15] {
    let mut out = [(0, 0); 15];
    let mut n = 0;
    for i in 0..6 {
        for j in i + 1..6 {
            out[n] = (i, j);
            n += 1;
        }
    }
    out
}

fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    pairs().iter().position(|&x| x == (i, j)).unwrap()
}

impl Perm6 {
    pub const IDENTITY: Perm6 = Perm6([0, 1, 2, 3, 4, 5]);

    /// From cycles written with 1-based labels, e.g. `&[&[1, 2], &[3, 4]]`.
    pub fn from_cycles(cycles: &[&[u8]]) -> Self {
        let mut p = Self::IDENTITY.0;
        for c in cycles {
            for (n, &a) in c.iter().enumerate() {
                p[(a - 1) as usize] = c[(n + 1) % c.len()] - 1;
            }
        }
        Perm6(p)
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn compose(&self, other: &Perm6) -> Perm6 {
        // (self ∘ other)(i) = self(other(i))
        Perm6(std::array::from_fn(|i| self.0[other.0[i] as usize]))
    }

    pub fn pow(&self, m: u32) -> Perm6 {
        (0..m).fold(Self::IDENTITY, |acc, _| self.compose(&acc))
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = [false; 6];
        let mut out = Vec::new();
        for s in 0..6 {
            if seen[s] {
                continue;
            }
            let mut c = Vec::new();
            let mut cur = s;
            while !seen[cur] {
                seen[cur] = true;
                c.push(cur);
                cur = self.apply(cur);
            }
            out.push(c);
        }
        out
    }

    /// Cycle lengths, descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Cycle notation with 1-based labels, fixed points included.
    pub fn cycle_notation(&self) -> String {
        self.cycles()
            .iter()
            .map(|c| format!("({})", c.iter().map(|i| (i + 1).to_string()).collect::<String>()))
            .collect()
    }

    /// All 720 permutations.
    pub fn all() -> Vec<Perm6> {
        let mut out = Vec::with_capacity(720);
        let mut cur = [0u8, 1, 2, 3, 4, 5];
        fn rec(k: usize, cur: &mut [u8; 6], out: &mut Vec<Perm6>) {
            if k == 6 {
                out.push(Perm6(*cur));
                return;
            }
            for i in k..6 {
                cur.swap(k, i);
                rec(k + 1, cur, out);
                cur.swap(k, i);
            }
        }
        rec(0, &mut cur, &mut out);
        out
    }

    /// The induced permutation on the 15 pairs.
    pub fn on_pairs(&self) -> PairPermutation {
        let ps = pairs();
        let map: [u8; 15] = std::array::from_fn(|n| {
            let (i, j) = ps[n];
            pair_index(self.apply(i), self.apply(j)) as u8
        });
        PairPermutation { map }
    }
}

/// Permutation of the 15 unordered pairs induced by a [`Perm6`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct PairPermutation {
    pub map: [u8; 15],
}

impl PairPermutation {
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = [false; 15];
        let mut out = Vec::new();
        for s in 0..15 {
            let mut len = 0;
            let mut cur = s;
            while !seen[cur] {
                seen[cur] = true;
                len += 1;
                cur = self.map[cur] as usize;
            }
            if len > 0 {
                out.push(len);
            }
        }
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Pairs fixed by the `m`-th power.
    pub fn fixed_count(&self, m: u32) -> usize {
        (0..15).filter(|&s| (0..m).fold(s, |cur, _| self.map[cur] as usize) == s).count()
    }
}

/// Number of pairs `{i, j}` fixed as a set by `sigma^m`, by scanning pairs.
pub fn pair_fixed_count(sigma: &Perm6, m: u32) -> usize {
    let tau = sigma.pow(m);
    pairs()
        .iter()
        .filter(|&&(i, j)| {
            let (a, b) = (tau.apply(i), tau.apply(j));
            (a, b) == (i, j) || (a, b) == (j, i)
        })
        .count()
}

/// Same count from the cycle type of `sigma`: a cycle of length `L` splits
/// under the `m`-th power into `gcd(L, m)` cycles of length `L / gcd(L, m)`;
/// a pair is fixed iff both ends are fixed points or it is a 2-cycle.
pub fn pair_fixed_count_from_cycle_type(cycle_type: &[usize], m: u32) -> usize {
    let (mut fixed, mut twos) = (0usize, 0usize);
    for &len in cycle_type {
        let g = num_integer::gcd(len, m as usize);
        match len / g {
            1 => fixed += g,
            2 => twos += g,
            _ => {}
        }
    }
    fixed * fixed.saturating_sub(1) / 2 + twos
}

/// The family's branch sextic at `t`, built over `field` as the product of
/// its printed factors.
pub fn branch_sextic(fiber: &FiberSpec, field: &Arc<FieldDescriptor>) -> Result<TernaryForm, GeomError> {
    if field.p() != fiber.p {
        return Err(GeomError::BadParameter("field characteristic differs from the fibre".into()));
    }
    let f = field;
    let c = |v: i64| f.from_i64(v);
    let t = f.from_u64(fiber.t);
    Ok(match fiber.family {
        Family::Qw5 => {
            let y = TernaryForm::linear(c(0), c(1), c(0));
            let two_t1 = &c(2) * &(&t - &c(1));
            let l2 = TernaryForm::linear(c(1), -two_t1, -t.clone());
            y.mul(&l2).mul(&qw5_quartic(f))
        }
        Family::Qw2 => {
            let [q1, q2, q3] = qw2_quadratics(fiber, f);
            q1.mul(&q2).mul(&q3)
        }
    })
}

/// `x^4 + x^3y - x^3z + ... + z^4`, the norm form of `x - ζy + ζ²z`.
fn qw5_quartic(f: &Arc<FieldDescriptor>) -> TernaryForm {
    let terms: [(usize, usize, usize, i64); 15] = [
        (4, 0, 0, 1),
        (3, 1, 0, 1),
        (3, 0, 1, -1),
        (2, 2, 0, 1),
        (2, 1, 1, -2),
        (2, 0, 2, 1),
        (1, 3, 0, 1),
        (1, 2, 1, -3),
        (1, 1, 2, -2),
        (1, 0, 3, -1),
        (0, 4, 0, 1),
        (0, 3, 1, 1),
        (0, 2, 2, 1),
        (0, 1, 3, 1),
        (0, 0, 4, 1),
    ];
    let terms: Vec<_> = terms.iter().map(|&(i, j, k, v)| (i, j, k, f.from_i64(v))).collect();
    TernaryForm::from_terms(f, 4, &terms)
}

/// Coefficients `(A, B, C)` of `A a^2 + B ab + C b^2` for the three quadratic
/// factors of the Qw2 sextic, with their variable pairs.
fn qw2_quadratic_coeffs(fiber: &FiberSpec, f: &Arc<FieldDescriptor>) -> [([FqElement; 3], (usize, usize)); 3] {
    let t = f.from_u64(fiber.t);
    let t2 = &t * &t;
    let c = |v: i64| f.from_i64(v);
    let eighth = f.ratio(1, 8);
    let half = f.ratio(1, 2);
    let quarter = f.ratio(1, 4);
    // [(t^2/8 - t/2 + 1/4) y^2 + (t^2 - 2t + 2) yz + (t^2 - 4t + 2) z^2]
    let q1 = [
        &(&(&t2 * &eighth) - &(&t * &half)) + &quarter,
        &(&t2 - &(&c(2) * &t)) + &c(2),
        &(&t2 - &(&c(4) * &t)) + &c(2),
    ];
    // [(t^2/8 + t/2 + 1/4) x^2 + (t^2 + 2t + 2) xz + (t^2 + 4t + 2) z^2]
    let q2 = [
        &(&(&t2 * &eighth) + &(&t * &half)) + &quarter,
        &(&t2 + &(&c(2) * &t)) + &c(2),
        &(&t2 + &(&c(4) * &t)) + &c(2),
    ];
    // [2 x^2 + (t^2 + 2) xy + t^2 y^2]
    let q3 = [c(2), &t2 + &c(2), t2.clone()];
    [(q1, (1, 2)), (q2, (0, 2)), (q3, (0, 1))]
}

fn binary_quadratic(coeffs: &[FqElement; 3], vars: (usize, usize), f: &Arc<FieldDescriptor>) -> TernaryForm {
    let (a, b) = vars;
    let mut terms = Vec::new();
    for (n, c) in coeffs.iter().enumerate() {
        let mut e = [0usize; 3];
        e[a] += 2 - n;
        e[b] += n;
        terms.push((e[0], e[1], e[2], c.clone()));
    }
    TernaryForm::from_terms(f, 2, &terms)
}

fn qw2_quadratics(fiber: &FiberSpec, f: &Arc<FieldDescriptor>) -> [TernaryForm; 3] {
    qw2_quadratic_coeffs(fiber, f).map(|(c, vars)| binary_quadratic(&c, vars, f))
}

/// Multiplicative order of `p` modulo `n`.
fn order_mod(p: u64, n: u64) -> usize {
    let mut k = 1;
    let mut v = p % n;
    while v != 1 {
        v = v * p % n;
        k += 1;
    }
    k
}

/// Degree of the smallest extension of `F_p` over which all six lines are
/// rational.
pub fn splitting_degree(fiber: &FiberSpec) -> Result<usize, GeomError> {
    Ok(match fiber.family {
        Family::Qw5 => order_mod(fiber.p, 5),
        Family::Qw2 => {
            let fp = make_field(fiber.p, 1)?;
            let all_square = qw2_quadratic_coeffs(fiber, &fp).iter().all(|([a, b, c], _)| {
                let disc = &(b * b) - &(&fp.from_u64(4) * &(a * c));
                disc.quadratic_character() >= 0
            });
            if all_square {
                1
            } else {
                2
            }
        }
    })
}

/// The six branch lines over their splitting field, the Frobenius
/// permutation and the 15 nodes.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub fiber: FiberSpec,
    pub field: Arc<FieldDescriptor>,
    pub lines: Vec<LinearForm>,
    /// The sextic equals `lead` times the product of the normalized lines.
    pub lead: FqElement,
    pub sigma: Perm6,
    /// Node `n` is the meet of the lines of `pairs()[n]`.
    pub nodes: Vec<ProjPoint>,
}

impl Arrangement {
    pub fn pair_permutation(&self) -> PairPermutation {
        self.sigma.on_pairs()
    }
}

/// Builds the arrangement of branch lines for a good fibre.
pub fn lines(fiber: &FiberSpec) -> Result<Arrangement, GeomError> {
    if !good_fiber(fiber.family, fiber.p, fiber.t)? {
        return Err(GeomError::BadParameter(format!("{fiber} is not a good fibre")));
    }
    let s = splitting_degree(fiber)?;
    let f = make_field(fiber.p, s)?;
    let c = |v: i64| f.from_i64(v);
    let raw: Vec<[FqElement; 3]> = match fiber.family {
        Family::Qw5 => {
            let t = f.from_u64(fiber.t);
            let zeta = f.primitive_nth_root(5)?;
            let mut v = vec![[c(0), c(1), c(0)], [c(1), -(&c(2) * &(&t - &c(1))), -t.clone()]];
            for j in 1..=4u128 {
                let z = zeta.pow(j);
                v.push([c(1), -z.clone(), &z * &z]);
            }
            v
        }
        Family::Qw2 => {
            let mut v = Vec::new();
            for ([a2, ab, b2], (va, vb)) in qw2_quadratic_coeffs(fiber, &f) {
                for roots in binary_roots(&a2, &ab, &b2, &f)? {
                    let mut l = [c(0), c(0), c(0)];
                    l[va] = roots[0].clone();
                    l[vb] = roots[1].clone();
                    v.push(l);
                }
            }
            v
        }
    };
    let lines = raw.into_iter().map(|[a, b, c]| LinearForm::new(a, b, c)).collect::<Result<Vec<_>, _>>()?;

    let sextic = branch_sextic(fiber, &f)?;
    let product = lines.iter().map(LinearForm::to_form).reduce(|acc, l| acc.mul(&l)).unwrap();
    let lead = sextic
        .coeffs()
        .iter()
        .zip(product.coeffs())
        .find(|(_, b)| !b.is_zero())
        .map(|(a, b)| a.checked_div(b))
        .transpose()?
        .ok_or_else(|| GeomError::DegenerateArrangement("empty product".into()))?;
    if product.scale(&lead) != sextic {
        return Err(GeomError::DegenerateArrangement(format!("lines of {fiber} do not multiply to the sextic")));
    }

    for i in 0..6 {
        for j in i + 1..6 {
            if lines[i] == lines[j] {
                return Err(GeomError::DegenerateArrangement(format!("lines {} and {} coincide", i + 1, j + 1)));
            }
        }
    }
    let mut sigma = [0u8; 6];
    for (i, l) in lines.iter().enumerate() {
        let img = l.frobenius();
        sigma[i] = lines
            .iter()
            .position(|m| *m == img)
            .ok_or_else(|| GeomError::DegenerateArrangement("Frobenius does not permute the lines".into()))?
            as u8;
    }
    let mut nodes = Vec::with_capacity(15);
    for (i, j) in pairs() {
        let pt = lines[i].meet(&lines[j]).expect("distinct lines meet in a point");
        for (k, l) in lines.iter().enumerate() {
            if k != i && k != j && l.eval(&pt).is_zero() {
                return Err(GeomError::DegenerateArrangement(format!(
                    "lines {}, {}, {} are concurrent",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
        }
        nodes.push(pt);
    }
    Ok(Arrangement { fiber: *fiber, field: f, lines, lead, sigma: Perm6(sigma), nodes })
}

/// Linear factors `(u, v)` with `A a^2 + B ab + C b^2 = A' (u1 a + v1 b)(u2 a + v2 b)`,
/// the `+sqrt` root first.
fn binary_roots(
    a: &FqElement,
    b: &FqElement,
    c: &FqElement,
    f: &Arc<FieldDescriptor>,
) -> Result<[[FqElement; 2]; 2], GeomError> {
    let one = f.one();
    if a.is_zero() {
        // b ab + c b^2 = b (B a + C b)
        return Ok([[f.zero(), one], [b.clone(), c.clone()]]);
    }
    let disc = &(b * b) - &(&f.from_u64(4) * &(a * c));
    let root = disc
        .sqrt()
        .map_err(|_| GeomError::DegenerateArrangement("discriminant not a square in the splitting field".into()))?;
    let two_a_inv = (&f.from_u64(2) * a).inv()?;
    let r1 = &(&(-b) + &root) * &two_a_inv;
    let r2 = &(&(-b) - &root) * &two_a_inv;
    // a - r b
    Ok([[one.clone(), -r1], [one, -r2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn good_fiber_examples() {
        assert!(good_fiber(Family::Qw5, 19, 15).unwrap());
        assert!(!good_fiber(Family::Qw5, 7, 1).unwrap());
        assert!(!good_fiber(Family::Qw2, 3, 2).unwrap());
        assert_eq!(good_fiber(Family::Qw5, 5, 0).unwrap_err(), GeomError::ExcludedCharacteristic(5));
        assert_eq!(good_fiber(Family::Qw2, 2, 1).unwrap_err(), GeomError::ExcludedCharacteristic(2));
        // Qw5 over F_3: (t-1)(t^4-t^3+t^2-t+1) vanishes only at t = 1
        let good: Vec<u64> = (0..3).filter(|&t| good_fiber(Family::Qw5, 3, t).unwrap()).collect();
        assert_eq!(good, vec![0, 2]);
    }

    #[test]
    fn monomial_indexing() {
        let ms = monomials(6);
        assert_eq!(ms.len(), 28);
        for (n, &(i, j, _)) in ms.iter().enumerate() {
            assert_eq!(monomial_index(6, i, j), n);
        }
    }

    #[test]
    fn qw5_sextic_has_x4y_coefficient_one() {
        let fiber = FiberSpec::new(Family::Qw5, 3, 0).unwrap();
        let f = make_field(3, 1).unwrap();
        let s = branch_sextic(&fiber, &f).unwrap();
        // y * x * x^4 contributes x^5 y; the pure x^4 y term comes from y * (-t z)... at t=0
        // the coefficient of x^4 y z is y*(-tz)*x^4 = 0 and of x^5 y is 1
        assert!(s.coeff(5, 1, 0).is_one());
        // direct expansion: y * x * x^4 (x^4 y term appears in the quartic times y times x)
        let y = TernaryForm::linear(f.zero(), f.one(), f.zero());
        let prod = y.mul(&qw5_quartic(&f));
        assert!(prod.coeff(4, 1, 0).is_one());
    }

    #[test]
    fn qw2_sextic_matches_factor_structure() {
        let fiber = FiberSpec::new(Family::Qw2, 5, 1).unwrap();
        let f = make_field(5, 1).unwrap();
        let s = branch_sextic(&fiber, &f).unwrap();
        // every monomial of the product lies in (y,z)^2 (x,z)^2 (x,y)^2
        for ((i, j, k), c) in monomials(6).into_iter().zip(s.coeffs()) {
            if !c.is_zero() {
                assert!(i <= 4 && j <= 4 && k <= 4);
            }
        }
        // x^4 y^2 only from (yz-quadratic's y^2) * (x^2) * (x^2): (1/8-1/2+1/4)*(1/8+1/2+1/4)*2
        let expect = &(&f.ratio(-1, 8) * &f.ratio(7, 8)) * &f.from_u64(2);
        assert_eq!(*s.coeff(4, 2, 0), expect);
    }

    #[test]
    fn qw5_cycle_types() {
        for p in [3u64, 7, 13, 17, 23] {
            let t = (0..p).find(|&t| good_fiber(Family::Qw5, p, t).unwrap()).unwrap();
            let a = lines(&FiberSpec::new(Family::Qw5, p, t).unwrap()).unwrap();
            assert_eq!(a.sigma.cycle_type(), vec![4, 1, 1], "p = {p}");
            assert_eq!(pair_fixed_count(&a.sigma, 1), 1);
            assert_eq!(a.sigma.apply(0), 0);
            assert_eq!(a.sigma.apply(1), 1);
        }
        for p in [19u64, 29] {
            let a = lines(&FiberSpec::new(Family::Qw5, p, 2).unwrap()).unwrap();
            assert_eq!(a.sigma.cycle_type(), vec![2, 2, 1, 1]);
            assert_eq!(pair_fixed_count(&a.sigma, 1), 3);
        }
    }

    #[test]
    fn qw2_cycle_types() {
        for p in [5u64, 11, 13, 19] {
            let t = (0..p).find(|&t| good_fiber(Family::Qw2, p, t).unwrap()).unwrap();
            let a = lines(&FiberSpec::new(Family::Qw2, p, t).unwrap()).unwrap();
            assert_eq!(a.sigma, Perm6::from_cycles(&[&[1, 2], &[3, 4]]), "p = {p}");
            assert_eq!(pair_fixed_count(&a.sigma, 1), 3);
        }
    }

    #[test]
    fn pair_fixed_count_examples() {
        assert_eq!(pair_fixed_count(&Perm6::from_cycles(&[&[1, 2], &[3, 4]]), 1), 3);
        assert_eq!(pair_fixed_count(&Perm6::from_cycles(&[&[3, 4, 5, 6]]), 1), 1);
        for m in 1..5 {
            assert_eq!(pair_fixed_count(&Perm6::IDENTITY, m), 15);
        }
    }

    #[test]
    fn pair_counts_agree_for_all_permutations() {
        let all = Perm6::all();
        assert_eq!(all.len(), 720);
        for s in all {
            for m in 1..=12 {
                let direct = pair_fixed_count(&s, m);
                assert_eq!(direct, pair_fixed_count_from_cycle_type(&s.cycle_type(), m));
                assert_eq!(direct, s.on_pairs().fixed_count(m));
            }
        }
    }

    #[test]
    fn pair_permutation_cycle_types() {
        let s = Perm6::from_cycles(&[&[3, 4, 5, 6]]);
        assert_eq!(s.on_pairs().cycle_type(), vec![4, 4, 4, 2, 1]);
        let s = Perm6::from_cycles(&[&[1, 2], &[3, 4]]);
        assert_eq!(s.on_pairs().cycle_type(), vec![2, 2, 2, 2, 2, 2, 1, 1, 1]);
    }

    #[test]
    fn product_identity_and_frobenius_exhaustive_small_primes() {
        for family in [Family::Qw5, Family::Qw2] {
            for p in [3u64, 7, 11, 13, 17, 19, 23] {
                for t in 0..p {
                    if !good_fiber(family, p, t).unwrap() {
                        continue;
                    }
                    let fib = FiberSpec::new(family, p, t).unwrap();
                    let a = lines(&fib).unwrap_or_else(|e| panic!("{fib}: {e}"));
                    let prod = a.lines.iter().map(LinearForm::to_form).reduce(|x, y| x.mul(&y)).unwrap();
                    assert_eq!(prod.scale(&a.lead), branch_sextic(&fib, &a.field).unwrap());
                    for (i, l) in a.lines.iter().enumerate() {
                        assert_eq!(l.frobenius(), a.lines[a.sigma.apply(i)]);
                    }
                    for i in 0..15 {
                        for j in i + 1..15 {
                            assert_ne!(a.nodes[i], a.nodes[j]);
                        }
                    }
                }
            }
        }
    }
}
