//! Dense univariate polynomials over a generic scalar ring.
//!
//! Coefficients are stored in ascending order (`coeffs[i]` multiplies `X^i`)
//! and the vector never ends in a zero, so the zero polynomial is empty.
//! The same code serves exact integers ([`IntPoly`]), exact rationals
//! ([`RatPoly`]) and floating point ([`FloatPoly`]); operations that need
//! exact division (`div_rem`, `resultant`, `gcd`) are exact only over a field
//! or when the divisor is monic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, One, ToPrimitive, Zero};

/// Scalar types usable as polynomial coefficients.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive {}

impl<T> Scalar for T where T: Clone + fmt::Debug + PartialEq + Num + Neg<Output = T> + FromPrimitive {}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly { coeffs: vec![T::one()] }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c * X^deg`.
    pub fn monomial(c: T, deg: usize) -> Self {
        let mut coeffs = vec![T::zero(); deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs)
    }

    /// `X - root`.
    pub fn linear_root(root: T) -> Self {
        Self::new(vec![-root, T::one()])
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| T::from_i64(c).expect("scalar accepts i64")).collect())
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    /// `p(c X)`.
    pub fn scale_arg(&self, c: &T) -> Self {
        let mut pow = T::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a.clone() * pow.clone());
            pow = pow * c.clone();
        }
        Self::new(out)
    }

    /// `X^deg p(1/X)`; for the zero polynomial returns zero.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::new(c)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    /// Euclidean division. Exact over a field, or over any ring when the
    /// divisor is monic.
    ///
    /// # Panics
    /// Panics when `divisor` is zero.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![T::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = rem[idx].clone() - c.clone() * d.clone();
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Quotient when `divisor` divides `self` exactly.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(divisor);
        r.is_zero().then_some(q)
    }

    pub fn make_monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => {
                let l = l.clone();
                Self::new(self.coeffs.iter().map(|c| c.clone() / l.clone()).collect())
            }
        }
    }

    /// Monic gcd over a field.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// Resultant over a field, by the Euclidean remainder sequence.
    pub fn resultant(&self, other: &Self) -> T {
        let (Some(mut da), Some(mut db)) = (self.degree(), other.degree()) else {
            return T::zero();
        };
        let (mut a, mut b) = (self.clone(), other.clone());
        let mut acc = T::one();
        loop {
            if db == 0 {
                return acc * pow_scalar(b.coeffs[0].clone(), da);
            }
            let r = a.div_rem(&b).1;
            let Some(dr) = r.degree() else {
                return T::zero();
            };
            if da % 2 == 1 && db % 2 == 1 {
                acc = -acc;
            }
            acc = acc * pow_scalar(b.coeffs[db].clone(), da - dr);
            a = b;
            b = r;
            da = db;
            db = dr;
        }
    }

    /// Power sums `s_1..=s_n` of the roots of a monic polynomial, via
    /// Newton's identities.
    pub fn power_sums(&self, n: usize) -> Vec<T> {
        let d = self.degree().unwrap_or(0);
        // e_i with sign: monic p = X^d + c_{d-1} X^{d-1} + ... ; a_i := c_{d-i}
        let a = |i: usize| -> T {
            if i == 0 {
                T::one()
            } else if i > d {
                T::zero()
            } else {
                self.coeff(d - i)
            }
        };
        let mut s: Vec<T> = Vec::with_capacity(n);
        for k in 1..=n {
            // s_k = -(k a_k + sum_{i=1}^{k-1} a_i s_{k-i})
            let mut acc = T::from_usize(k).unwrap() * a(k);
            for i in 1..k {
                acc = acc + a(i) * s[k - i - 1].clone();
            }
            s.push(-acc);
        }
        s
    }

    /// The monic degree-`n` polynomial with the given power sums `s_1..=s_n`,
    /// via Newton's identities. Needs `1/k` in the scalar ring.
    pub fn from_power_sums(s: &[T]) -> Self {
        let n = s.len();
        let mut a: Vec<T> = vec![T::one()];
        for k in 1..=n {
            let mut acc = s[k - 1].clone();
            for i in 1..k {
                acc = acc + a[i].clone() * s[k - i - 1].clone();
            }
            a.push(-acc / T::from_usize(k).unwrap());
        }
        a.reverse();
        Self::new(a)
    }
}

fn pow_scalar<T: Scalar>(b: T, e: usize) -> T {
    (0..e).fold(T::one(), |acc, _| acc * b.clone())
}

impl<T: Scalar> Add for &Poly<T> {
    type Output = Poly<T>;
    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Sub for &Poly<T> {
    type Output = Poly<T>;
    fn sub(self, rhs: &Poly<T>) -> Poly<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<T: Scalar> Mul for &Poly<T> {
    type Output = Poly<T>;
    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

impl<T: Scalar> Neg for &Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<T: Scalar> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $m(self, rhs: Poly<T>) -> Poly<T> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<T: Scalar + fmt::Display> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})*Z")?,
                _ => write!(f, "({c})*Z^{i}")?,
            }
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Poly").field(&self.coeffs).finish()
    }
}

// ---- exact integer / rational helpers ----

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Poly<BigInt> {
    pub fn to_rational(&self) -> Poly<BigRational> {
        self.map(|c| BigRational::from_integer(c.clone()))
    }
}

impl Poly<BigRational> {
    /// `Some(poly)` when every coefficient is an integer.
    pub fn to_integral(&self) -> Option<Poly<BigInt>> {
        self.coeffs.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect::<Option<Vec<_>>>().map(Poly::new)
    }

    /// Exact square root of a monic polynomial in `Q[X]`, if one exists.
    pub fn exact_sqrt(&self) -> Option<Self> {
        let d = self.degree()?;
        if d % 2 == 1 || !self.is_monic() {
            return None;
        }
        let h = d / 2;
        // root r = X^h + r_{h-1} X^{h-1} + ... ; solve top-down
        let mut r = vec![BigRational::zero(); h + 1];
        r[h] = BigRational::one();
        let two = rat(2, 1);
        for k in 1..=h {
            // coefficient of X^{d-k} in r^2
            let mut acc = BigRational::zero();
            for i in 1..k {
                acc += &r[h - i] * &r[h - (k - i)];
            }
            r[h - k] = (self.coeff(d - k) - acc) / &two;
        }
        let cand = Poly::new(r);
        (&(&cand * &cand) == self).then_some(cand)
    }

    pub fn to_float<F: Float + FromPrimitive + Scalar>(&self) -> Poly<F> {
        self.map(|c| {
            let v = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
            F::from_f64(v).unwrap()
        })
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

/// All complex roots of a polynomial, by Durand–Kerner iteration.
pub fn complex_roots<F>(p: &Poly<F>, max_iter: usize) -> Vec<Complex<F>>
where
    F: Float + Scalar,
{
    let Some(d) = p.degree() else {
        return Vec::new();
    };
    let monic = p.make_monic();
    let c: Vec<Complex<F>> = monic.coeffs().iter().map(|&a| Complex::new(a, F::zero())).collect();
    let eval = |z: Complex<F>| c.iter().rev().fold(Complex::new(F::zero(), F::zero()), |acc, &a| acc * z + a);
    let seed = Complex::new(F::from_f64(0.4).unwrap(), F::from_f64(0.9).unwrap());
    let mut roots: Vec<Complex<F>> = (0..d).map(|i| seed.powu(i as u32)).collect();
    let tol = F::epsilon() * F::from_f64(16.0).unwrap();
    for _ in 0..max_iter {
        let mut delta = F::zero();
        for i in 0..d {
            let zi = roots[i];
            let mut denom = Complex::new(F::one(), F::zero());
            for (j, &zj) in roots.iter().enumerate() {
                if j != i {
                    denom = denom * (zi - zj);
                }
            }
            let step = eval(zi) / denom;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < tol {
            break;
        }
    }
    roots
}

/// Largest deviation of `|root|` from 1 over all roots.
pub fn unit_circle_defect<F: Float + Scalar>(p: &Poly<F>) -> F {
    complex_roots(p, 500).into_iter().map(|z| (z.norm() - F::one()).abs()).fold(F::zero(), F::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Poly<BigRational>;

    #[test]
    fn division_and_gcd() {
        let a = Q::from_i64s(&[-1, 0, 1]); // X^2 - 1
        let b = Q::from_i64s(&[-1, 1]); // X - 1
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, Q::from_i64s(&[1, 1]));
        assert!(r.is_zero());
        let c = Q::from_i64s(&[1, 2, 1]);
        assert_eq!(a.gcd(&c), Q::from_i64s(&[1, 1]));
    }

    #[test]
    fn resultant_matches_product_over_roots() {
        // Res(X^2 - 3X + 2, X - 5) = (1-5)(2-5) = 12
        let f = Q::from_i64s(&[2, -3, 1]);
        let g = Q::from_i64s(&[-5, 1]);
        assert_eq!(f.resultant(&g), rat(12, 1));
        // common root -> 0
        assert_eq!(f.resultant(&Q::from_i64s(&[-1, 1])), rat(0, 1));
        // Res(X^2+1, X^2-2) = (i^2-2)(-i^2-... ) = (-3)(-3) = 9
        let h = Q::from_i64s(&[1, 0, 1]);
        let k = Q::from_i64s(&[-2, 0, 1]);
        assert_eq!(h.resultant(&k), rat(9, 1));
    }

    #[test]
    fn newton_round_trip() {
        let f = Q::from_i64s(&[7, -3, 0, 5, 1]);
        let s = f.power_sums(4);
        assert_eq!(Q::from_power_sums(&s), f);
        // roots 1, 2: s1 = 3, s2 = 5
        let g = Q::from_i64s(&[2, -3, 1]);
        assert_eq!(g.power_sums(3), vec![rat(3, 1), rat(5, 1), rat(9, 1)]);
    }

    #[test]
    fn exact_square_root() {
        let r = Poly::new(vec![rat(1, 1), rat(-4, 3), rat(1, 1)]);
        let sq = &r * &r;
        assert_eq!(sq.exact_sqrt(), Some(r));
        assert_eq!(Q::from_i64s(&[1, 0, 0, 0, 1]).exact_sqrt(), None);
    }

    #[test]
    fn float_roots_on_unit_circle() {
        let p: Poly<f64> = Poly::new(vec![1.0, 0.0, -4.0 / 3.0, 0.0, 1.0]);
        assert!(unit_circle_defect(&p) < 1e-9);
        let q: Poly<f32> = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(unit_circle_defect(&q) < 1e-4);
    }

    #[test]
    fn integer_polys_divide_by_monic() {
        let a: Poly<BigInt> = Poly::from_i64s(&[-1, 0, 0, 1]);
        let b: Poly<BigInt> = Poly::from_i64s(&[-1, 1]);
        assert_eq!(a.exact_div(&b), Some(Poly::from_i64s(&[1, 1, 1])));
    }
}
