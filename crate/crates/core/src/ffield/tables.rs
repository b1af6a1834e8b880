//! Discrete-log (Zech) representation of a small field for the counting hot
//! loops: products are additions of exponents, sums go through the Zech table
//! `Z(n) = log(1 + g^n)`, and the quadratic character is the parity of the
//! exponent.

use std::sync::Arc;

use super::{FieldDescriptor, FqElement};

/// Element in log form: `g^e` for `e < q - 1`, or [`LogTables::ZERO`].
pub type LogElem = u32;

/// Largest field order for which log tables are built.
pub const LOG_TABLE_LIMIT: u128 = 1 << 22;

pub struct LogTables {
    field: Arc<FieldDescriptor>,
    ord: u32,
    p: u32,
    /// packed index -> exponent
    log: Vec<u32>,
    /// exponent -> packed index
    exp: Vec<u32>,
    zech: Vec<u32>,
}

impl LogTables {
    pub const ZERO: LogElem = u32::MAX;
    pub const ONE: LogElem = 0;

    /// `None` when the field exceeds [`LOG_TABLE_LIMIT`].
    pub fn new(field: &Arc<FieldDescriptor>) -> Option<Self> {
        let q = field.order();
        if q > LOG_TABLE_LIMIT {
            return None;
        }
        let q = q as usize;
        let ord = q - 1;
        let p = field.p() as u32;
        let g = field.multiplicative_generator();
        let mut log = vec![Self::ZERO; q];
        let mut exp = vec![0u32; ord];
        let mut cur = field.one();
        for (n, slot) in exp.iter_mut().enumerate() {
            let idx = cur.index() as usize;
            *slot = idx as u32;
            log[idx] = n as u32;
            cur = &cur * &g;
        }
        debug_assert!(cur.is_one());
        let zech = exp
            .iter()
            .map(|&idx| {
                let plus_one = if idx % p == p - 1 { idx - (p - 1) } else { idx + 1 };
                log[plus_one as usize]
            })
            .collect();
        Some(LogTables { field: Arc::clone(field), ord: ord as u32, p, log, exp, zech })
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }

    pub fn order(&self) -> u32 {
        self.ord + 1
    }

    pub fn from_element(&self, a: &FqElement) -> LogElem {
        self.log[a.index() as usize]
    }

    pub fn to_element(&self, a: LogElem) -> FqElement {
        if a == Self::ZERO {
            self.field.zero()
        } else {
            self.field.from_index(self.exp[a as usize] as u128)
        }
    }

    #[inline]
    pub fn mul(&self, a: LogElem, b: LogElem) -> LogElem {
        if a == Self::ZERO || b == Self::ZERO {
            return Self::ZERO;
        }
        let s = a + b;
        if s >= self.ord {
            s - self.ord
        } else {
            s
        }
    }

    #[inline]
    pub fn add(&self, a: LogElem, b: LogElem) -> LogElem {
        if a == Self::ZERO {
            return b;
        }
        if b == Self::ZERO {
            return a;
        }
        let d = if b >= a { b - a } else { b + self.ord - a };
        let z = self.zech[d as usize];
        if z == Self::ZERO {
            return Self::ZERO;
        }
        let s = a + z;
        if s >= self.ord {
            s - self.ord
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(&self, a: LogElem) -> LogElem {
        if a == Self::ZERO {
            return a;
        }
        // -1 = g^{(q-1)/2}
        self.mul(a, self.ord / 2)
    }

    /// Quadratic character.
    #[inline]
    pub fn chi(&self, a: LogElem) -> i64 {
        if a == Self::ZERO {
            0
        } else if a & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// `a^p`.
    #[inline]
    pub fn frobenius(&self, a: LogElem) -> LogElem {
        if a == Self::ZERO {
            a
        } else {
            ((a as u64 * self.p as u64) % self.ord as u64) as u32
        }
    }

    /// Horner evaluation; `coeffs` ascending.
    #[inline]
    pub fn eval(&self, coeffs: &[LogElem], x: LogElem) -> LogElem {
        coeffs.iter().rev().fold(Self::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }

    /// All elements: zero first, then `g^0, g^1, ...`.
    pub fn elements(&self) -> impl Iterator<Item = LogElem> + Clone {
        std::iter::once(Self::ZERO).chain(0..self.ord)
    }

    /// Frobenius orbits on the field: `(representative, orbit size)`, each
    /// representative the least exponent of its orbit.
    pub fn frobenius_orbits(&self) -> Vec<(LogElem, u32)> {
        let mut out = vec![(Self::ZERO, 1)];
        let mut seen = vec![false; self.ord as usize];
        for e in 0..self.ord {
            if seen[e as usize] {
                continue;
            }
            let mut size = 0;
            let mut cur = e;
            while !seen[cur as usize] {
                seen[cur as usize] = true;
                size += 1;
                cur = self.frobenius(cur);
            }
            out.push((e, size));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::make_field;
    use super::*;

    #[test]
    fn log_arithmetic_matches_vector_arithmetic() {
        for (p, k) in [(3, 1), (7, 1), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let f = make_field(p, k).unwrap();
            let t = LogTables::new(&f).unwrap();
            let els: Vec<_> = f.elements().collect();
            for a in &els {
                let la = t.from_element(a);
                assert_eq!(t.to_element(la), *a);
                assert_eq!(t.chi(la), a.quadratic_character() as i64);
                assert_eq!(t.to_element(t.neg(la)), -a);
                assert_eq!(t.to_element(t.frobenius(la)), a.frobenius());
                for b in &els {
                    let lb = t.from_element(b);
                    assert_eq!(t.to_element(t.add(la, lb)), a + b);
                    assert_eq!(t.to_element(t.mul(la, lb)), a * b);
                }
            }
        }
    }

    #[test]
    fn orbits_partition_the_field() {
        let f = make_field(3, 4).unwrap();
        let t = LogTables::new(&f).unwrap();
        let orbits = t.frobenius_orbits();
        let total: u32 = orbits.iter().map(|o| o.1).sum();
        assert_eq!(total, 81);
        assert!(orbits.iter().all(|o| 4 % o.1 == 0));
    }
}
