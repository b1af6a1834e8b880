//! Exact arithmetic in `F_p` and its extensions `F_{p^k}`.
//!
//! An extension is presented as `F_p[T]/(m(T))` for the lexicographically
//! least monic irreducible `m` of degree `k`. Elements are fixed-width residue
//! vectors; the packed index `sum c_i p^i` orders elements and is used for
//! every deterministic choice (square roots, roots of unity, generators).

mod fpoly;
pub mod tables;

use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub use tables::{LogElem, LogTables, LOG_TABLE_LIMIT};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 16;

/// Fields up to this order keep a bitmap of squares for the quadratic
/// character.
pub const SQUARE_TABLE_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    EvenCharacteristic,
    #[error("extension degree {0} out of range (1..=16, p^k < 2^127)")]
    DegreeOutOfRange(usize),
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("element is not a square in F_{q}")]
    NonSquare { q: u128 },
    #[error("no element of order {n} in F_{q}")]
    OrderUnavailable { n: u128, q: u128 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors by trial division.
pub(crate) fn prime_factors(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut d = 2u128;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub struct FieldDescriptor {
    p: u64,
    k: usize,
    /// Monic modulus, ascending, length `k + 1`.
    modulus: Vec<u64>,
    q: u128,
    squares: OnceLock<Vec<u64>>,
    nonresidue: OnceLock<[u32; MAX_DEGREE]>,
}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldDescriptor")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FieldDescriptor {}

/// Builds `F_{p^k}` with its deterministic modulus.
pub fn make_field(p: u64, k: usize) -> Result<Arc<FieldDescriptor>, FieldError> {
    if p == 2 {
        return Err(FieldError::EvenCharacteristic);
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if p >= 1 << 31 {
        return Err(FieldError::NotPrime(p));
    }
    if !(1..=MAX_DEGREE).contains(&k) {
        return Err(FieldError::DegreeOutOfRange(k));
    }
    let mut q: u128 = 1;
    for _ in 0..k {
        q = q.checked_mul(p as u128).filter(|&v| v < 1 << 127).ok_or(FieldError::DegreeOutOfRange(k))?;
    }
    let modulus = if k == 1 { vec![0, 1] } else { fpoly::least_irreducible(p, k) };
    Ok(Arc::new(FieldDescriptor { p, k, modulus, q, squares: OnceLock::new(), nonresidue: OnceLock::new() }))
}

impl FieldDescriptor {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> u128 {
        self.q
    }

    /// Monic modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.k == 1
    }

    pub fn zero(self: &Arc<Self>) -> FqElement {
        FqElement { field: Arc::clone(self), c: [0; MAX_DEGREE] }
    }

    pub fn one(self: &Arc<Self>) -> FqElement {
        self.from_u64(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_u64(self: &Arc<Self>, v: u64) -> FqElement {
        let mut c = [0; MAX_DEGREE];
        c[0] = (v % self.p) as u32;
        FqElement { field: Arc::clone(self), c }
    }

    pub fn from_i64(self: &Arc<Self>, v: i64) -> FqElement {
        self.from_u64(v.rem_euclid(self.p as i64) as u64)
    }

    /// `num / den` in the prime subfield.
    pub fn ratio(self: &Arc<Self>, num: i64, den: i64) -> FqElement {
        let d = self.from_i64(den).inv().expect("denominator invertible in F_p");
        &self.from_i64(num) * &d
    }

    /// Element from residues `c_0 + c_1 T + ...` (reduced mod p; length ≤ k).
    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[u64]) -> FqElement {
        assert!(coeffs.len() <= self.k, "too many coefficients for F_{}^{}", self.p, self.k);
        let mut c = [0; MAX_DEGREE];
        for (dst, &src) in c.iter_mut().zip(coeffs) {
            *dst = (src % self.p) as u32;
        }
        FqElement { field: Arc::clone(self), c }
    }

    /// Inverse of [`FqElement::index`].
    pub fn from_index(self: &Arc<Self>, mut idx: u128) -> FqElement {
        let mut c = [0; MAX_DEGREE];
        for slot in c.iter_mut().take(self.k) {
            *slot = (idx % self.p as u128) as u32;
            idx /= self.p as u128;
        }
        FqElement { field: Arc::clone(self), c }
    }

    /// The generator `T` of the extension (equals the constant 0 when k = 1).
    pub fn gen_t(self: &Arc<Self>) -> FqElement {
        if self.k == 1 {
            return self.zero();
        }
        let mut c = [0; MAX_DEGREE];
        c[1] = 1;
        FqElement { field: Arc::clone(self), c }
    }

    /// Every element, in packed-index order. Only sensible for small fields.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FqElement> + '_ {
        (0..self.q).map(move |i| self.from_index(i))
    }

    fn square_bitmap(self: &Arc<Self>) -> Option<&Vec<u64>> {
        if self.q > SQUARE_TABLE_LIMIT {
            return None;
        }
        Some(self.squares.get_or_init(|| {
            let mut bits = vec![0u64; (self.q as usize).div_ceil(64)];
            for a in self.elements() {
                let s = (&a * &a).index() as usize;
                bits[s / 64] |= 1 << (s % 64);
            }
            bits
        }))
    }

    /// Least non-square in packed order.
    fn nonresidue(self: &Arc<Self>) -> FqElement {
        let c = *self.nonresidue.get_or_init(|| {
            (2..self.q)
                .map(|i| self.from_index(i))
                .find(|a| a.euler_character() == -1)
                .expect("odd field order has non-squares")
                .c
        });
        FqElement { field: Arc::clone(self), c }
    }

    /// A deterministic generator of the multiplicative group: the least
    /// element in packed order whose order is `q - 1`.
    pub fn multiplicative_generator(self: &Arc<Self>) -> FqElement {
        let n = self.q - 1;
        let primes = prime_factors(n);
        (1..self.q)
            .map(|i| self.from_index(i))
            .find(|a| primes.iter().all(|&r| !a.pow(n / r).is_one()))
            .expect("finite fields have cyclic unit groups")
    }

    /// The least element (packed order) of exact multiplicative order `n`.
    pub fn primitive_nth_root(self: &Arc<Self>, n: u128) -> Result<FqElement, FieldError> {
        let qm1 = self.q - 1;
        if n == 0 || !qm1.is_multiple_of(n) {
            return Err(FieldError::OrderUnavailable { n, q: self.q });
        }
        if n == 1 {
            return Ok(self.one());
        }
        let primes = prime_factors(n);
        let has_order_n = |h: &FqElement| primes.iter().all(|&r| !h.pow(n / r).is_one());
        let h = (2..self.q)
            .map(|i| self.from_index(i).pow(qm1 / n))
            .find(has_order_n)
            .expect("cyclic group has elements of every order dividing q - 1");
        // all elements of order n are h^j with gcd(j, n) = 1
        let mut best: Option<FqElement> = None;
        let mut cur = h.clone();
        for j in 1..=n {
            if gcd_u128(j, n) == 1 && best.as_ref().is_none_or(|b| cur.index() < b.index()) {
                best = Some(cur.clone());
            }
            cur = &cur * &h;
        }
        Ok(best.unwrap())
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[derive(Clone)]
pub struct FqElement {
    field: Arc<FieldDescriptor>,
    c: [u32; MAX_DEGREE],
}

impl PartialEq for FqElement {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.same_field(other)
    }
}
impl Eq for FqElement {}

impl std::hash::Hash for FqElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.c.hash(state);
    }
}

impl fmt::Debug for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.k == 1 {
            return write!(f, "{}", self.c[0]);
        }
        let terms: Vec<String> = (0..self.field.k)
            .rev()
            .filter(|&i| self.c[i] != 0)
            .map(|i| match i {
                0 => format!("{}", self.c[0]),
                1 => format!("{}*T", self.c[1]),
                _ => format!("{}*T^{}", self.c[i], i),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl FqElement {
    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c[..self.field.k]
    }

    pub fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    /// Packed index `sum c_i p^i`.
    pub fn index(&self) -> u128 {
        let p = self.field.p as u128;
        self.coeffs().iter().rev().fold(0u128, |acc, &d| acc * p + d as u128)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&d| d == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&d| d == 0)
    }

    /// Value of a prime-subfield element.
    pub fn as_prime(&self) -> Option<u64> {
        self.c[1..].iter().all(|&d| d == 0).then_some(self.c[0] as u64)
    }

    fn with(&self, c: [u32; MAX_DEGREE]) -> Self {
        FqElement { field: Arc::clone(&self.field), c }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        Ok(self.add_raw(rhs))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        Ok(self.sub_raw(rhs))
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        Ok(self.mul_raw(rhs))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, FieldError> {
        self.check(rhs)?;
        Ok(self.mul_raw(&rhs.inv()?))
    }

    fn check(&self, rhs: &Self) -> Result<(), FieldError> {
        if self.same_field(rhs) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn add_raw(&self, rhs: &Self) -> Self {
        let p = self.field.p as u32;
        let mut c = [0; MAX_DEGREE];
        for ((ci, &a), &b) in c.iter_mut().zip(&self.c).zip(&rhs.c).take(self.field.k) {
            let s = a + b;
            *ci = if s >= p { s - p } else { s };
        }
        self.with(c)
    }

    fn sub_raw(&self, rhs: &Self) -> Self {
        let p = self.field.p as u32;
        let mut c = [0; MAX_DEGREE];
        for ((ci, &a), &b) in c.iter_mut().zip(&self.c).zip(&rhs.c).take(self.field.k) {
            *ci = if a >= b { a - b } else { a + p - b };
        }
        self.with(c)
    }

    fn neg_raw(&self) -> Self {
        let p = self.field.p as u32;
        let mut c = [0; MAX_DEGREE];
        for (ci, &a) in c.iter_mut().zip(&self.c).take(self.field.k) {
            *ci = if a == 0 { 0 } else { p - a };
        }
        self.with(c)
    }

    fn mul_raw(&self, rhs: &Self) -> Self {
        let f = &*self.field;
        let (p, k) = (f.p, f.k);
        if k == 1 {
            let mut c = [0; MAX_DEGREE];
            c[0] = ((self.c[0] as u64 * rhs.c[0] as u64) % p) as u32;
            return self.with(c);
        }
        let mut acc = [0u64; 2 * MAX_DEGREE - 1];
        for i in 0..k {
            let a = self.c[i] as u64;
            if a == 0 {
                continue;
            }
            for j in 0..k {
                acc[i + j] = (acc[i + j] + a * rhs.c[j] as u64) % p;
            }
        }
        for i in (k..2 * k - 1).rev() {
            let top = acc[i];
            if top == 0 {
                continue;
            }
            // T^k = -(m_0 + ... + m_{k-1} T^{k-1})
            for j in 0..k {
                let idx = i - k + j;
                acc[idx] = (acc[idx] + (p - f.modulus[j]) % p * top) % p;
            }
        }
        let mut c = [0; MAX_DEGREE];
        for i in 0..k {
            c[i] = acc[i] as u32;
        }
        self.with(c)
    }

    pub fn square(&self) -> Self {
        self.mul_raw(self)
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, mut e: u128) -> Self {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_raw(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(self.field.q - 2))
    }

    /// `a^p`.
    pub fn frobenius(&self) -> Self {
        self.pow(self.field.p as u128)
    }

    fn euler_character(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.pow((self.field.q - 1) / 2).is_one() {
            1
        } else {
            -1
        }
    }

    /// Quadratic character: 0 at zero, 1 on nonzero squares, -1 otherwise.
    pub fn quadratic_character(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        match self.field.square_bitmap() {
            Some(bits) => {
                let i = self.index() as usize;
                if bits[i / 64] >> (i % 64) & 1 == 1 {
                    1
                } else {
                    -1
                }
            }
            None => self.euler_character(),
        }
    }

    /// Square root by Tonelli–Shanks; of the two roots the one with the
    /// smaller packed index is returned.
    pub fn sqrt(&self) -> Result<Self, FieldError> {
        match self.quadratic_character() {
            0 => return Ok(self.clone()),
            -1 => return Err(FieldError::NonSquare { q: self.field.q }),
            _ => {}
        }
        let q = self.field.q;
        let mut m = q - 1;
        let mut s = 0u32;
        while m.is_multiple_of(2) {
            m /= 2;
            s += 1;
        }
        let z = self.field.nonresidue();
        let mut c = z.pow(m);
        let mut x = self.pow(m.div_ceil(2));
        let mut b = self.pow(m);
        let mut r = s;
        while !b.is_one() {
            let mut i = 0;
            let mut t = b.clone();
            while !t.is_one() {
                t = t.square();
                i += 1;
            }
            let mut g = c.clone();
            for _ in 0..(r - i - 1) {
                g = g.square();
            }
            x = x.mul_raw(&g);
            c = g.square();
            b = b.mul_raw(&c);
            r = i;
        }
        let other = x.neg_raw();
        Ok(if other.index() < x.index() { other } else { x })
    }
}

macro_rules! field_op {
    ($tr:ident, $m:ident, $raw:ident) => {
        impl std::ops::$tr for &FqElement {
            type Output = FqElement;
            fn $m(self, rhs: &FqElement) -> FqElement {
                assert!(self.same_field(rhs), "field mismatch");
                self.$raw(rhs)
            }
        }
        impl std::ops::$tr for FqElement {
            type Output = FqElement;
            fn $m(self, rhs: FqElement) -> FqElement {
                (&self).$m(&rhs)
            }
        }
    };
}
field_op!(Add, add, add_raw);
field_op!(Sub, sub, sub_raw);
field_op!(Mul, mul, mul_raw);

impl std::ops::Neg for &FqElement {
    type Output = FqElement;
    fn neg(self) -> FqElement {
        self.neg_raw()
    }
}

impl std::ops::Neg for FqElement {
    type Output = FqElement;
    fn neg(self) -> FqElement {
        self.neg_raw()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(make_field(2, 1).unwrap_err(), FieldError::EvenCharacteristic);
        assert_eq!(make_field(3, 0).unwrap_err(), FieldError::DegreeOutOfRange(0));
        assert_eq!(make_field(3, 17).unwrap_err(), FieldError::DegreeOutOfRange(17));
    }

    #[test]
    fn prime_field_modulus_is_t() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.order(), 3);
    }

    #[test]
    fn f9_modulus_and_frobenius() {
        // lexicographic scan with a brute-force root test
        let p = 3u64;
        let expected =
            (0..p * p).map(|n| [n % p, n / p]).find(|[c0, c1]| (0..p).all(|x| (x * x + c1 * x + c0) % p != 0)).unwrap();
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.modulus(), &[expected[0], expected[1], 1]);
        assert_eq!(f.modulus(), &[1, 0, 1]);
        let i = f.gen_t();
        assert_eq!(i.frobenius(), -&i);
    }

    #[test]
    fn small_inverses() {
        let f = make_field(7, 1).unwrap();
        assert!(f.one().inv().unwrap().is_one());
        let three = f.from_u64(3);
        let brute = (1..7).find(|&b| (3 * b) % 7 == 1).unwrap();
        assert_eq!(three.inv().unwrap(), f.from_u64(brute));
        assert_eq!(brute, 5);
        assert_eq!(f.zero().inv().unwrap_err(), FieldError::DivisionByZero);
    }

    #[test]
    fn characters_and_roots() {
        let f7 = make_field(7, 1).unwrap();
        assert_eq!(f7.zero().quadratic_character(), 0);
        assert_eq!(f7.from_u64(3).quadratic_character(), -1);
        assert_eq!(f7.from_u64(4).sqrt().unwrap(), f7.from_u64(2));
        assert_eq!(f7.from_u64(2).sqrt().unwrap(), f7.from_u64(3));
        let f5 = make_field(5, 1).unwrap();
        assert!(matches!(f5.from_u64(2).sqrt(), Err(FieldError::NonSquare { .. })));

        let f9 = make_field(3, 2).unwrap();
        let g = f9.multiplicative_generator();
        assert_eq!(g.quadratic_character(), -1);
    }

    #[test]
    fn roots_of_unity() {
        let f11 = make_field(11, 1).unwrap();
        let z = f11.primitive_nth_root(5).unwrap();
        let oracle = (2..11u64)
            .find(|&a| (1..=5).map(|e| (0..e).fold(1u64, |acc, _| acc * a % 11)).position(|v| v == 1) == Some(4))
            .unwrap();
        assert_eq!(z, f11.from_u64(oracle));
        assert_eq!(z, f11.from_u64(3));
        assert!(f11.primitive_nth_root(1).unwrap().is_one());
        let f19 = make_field(19, 1).unwrap();
        assert!(matches!(f19.primitive_nth_root(5), Err(FieldError::OrderUnavailable { .. })));
        let f81 = make_field(3, 4).unwrap();
        let z5 = f81.primitive_nth_root(5).unwrap();
        assert!(z5.pow(5).is_one() && !z5.is_one());
    }

    #[test]
    fn field_mismatch_is_reported() {
        let a = make_field(5, 1).unwrap().one();
        let b = make_field(7, 1).unwrap().one();
        assert_eq!(a.checked_add(&b).unwrap_err(), FieldError::FieldMismatch);
        assert_eq!(a.checked_div(&a.field().zero()).unwrap_err(), FieldError::DivisionByZero);
    }

    fn small_fields() -> Vec<Arc<FieldDescriptor>> {
        [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (5, 2), (3, 3), (7, 2), (3, 4), (11, 2)]
            .iter()
            .map(|&(p, k)| make_field(p, k).unwrap())
            .collect()
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for f in small_fields() {
            let q = f.order();
            let mut squares = 0;
            for a in f.elements() {
                if a.is_zero() {
                    continue;
                }
                assert!((&a * &a.inv().unwrap()).is_one());
                assert!(a.pow(q - 1).is_one());
                if a.quadratic_character() == 1 {
                    squares += 1;
                    let r = a.sqrt().unwrap();
                    assert_eq!(&r * &r, a);
                }
                let mut b = a.clone();
                for _ in 0..f.degree() {
                    b = b.frobenius();
                }
                assert_eq!(b, a);
            }
            assert_eq!(squares, (q - 1) / 2);
        }
    }

    #[test]
    fn character_is_multiplicative_exhaustive() {
        for f in small_fields() {
            let els: Vec<_> = f.elements().collect();
            for a in &els {
                for b in &els {
                    assert_eq!((a * b).quadratic_character(), a.quadratic_character() * b.quadratic_character());
                }
            }
        }
    }

    #[test]
    fn moduli_are_irreducible_by_root_free_check() {
        for (p, k) in [(3, 2), (5, 2), (7, 2), (3, 3), (5, 3), (3, 4)] {
            let f = make_field(p, k).unwrap();
            let m = f.modulus();
            for x in 0..p {
                let v = m.iter().rev().fold(0, |acc, &c| (acc * x + c) % p);
                assert_ne!(v, 0);
            }
        }
    }
}
