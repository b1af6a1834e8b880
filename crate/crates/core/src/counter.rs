//! Point counts on the double cover `X'` and on its desingularization `X`.
//!
//! Two engines: a direct character sum over the plane, and a sum over the
//! pencil of lines through `(2 : -1 : 2)` (Qw5 only), where each line carries
//! a genus-2 curve `w^2 = c * P(u)` with `P` quintic.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branchgeom::{self, monomial_index, Family, FiberSpec, GeomError, TernaryForm};
use crate::ffield::tables::{LogElem, LogTables, LOG_TABLE_LIMIT};
use crate::ffield::{make_field, FieldDescriptor, FieldError, FqElement};

/// Default largest `q = p^k` counted without an explicit override.
pub const DEFAULT_BUDGET: u128 = 1 << 21;

/// Largest prime accepted by [`is_permutation_polynomial`].
pub const PERMUTATION_TEST_LIMIT: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("q = {q} exceeds the counting budget {budget}")]
    BudgetExceeded { q: u128, budget: u128 },
    #[error("the fibred engine only handles qw5, not {0}")]
    WrongFamily(Family),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("Dickson normalization failed at (v0, v1) = ({v0}, {v1})")]
    NormalizationMismatch { v0: String, v1: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Fibration,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::Fibration => "fibration",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = CountError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Method::Naive),
            "fibered" | "fibred" | "fibration" => Ok(Method::Fibration),
            other => Err(CountError::BadParameter(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub fiber: FiberSpec,
    pub k: u32,
    pub n_prime: u64,
    pub n_k3: u64,
    pub method: Method,
    pub wall_time_secs: f64,
}

impl CountRecord {
    pub fn q(&self) -> u128 {
        (self.fiber.p as u128).pow(self.k)
    }

    /// `|n_k3 - q^2 - 1| <= 22 q`.
    pub fn within_weil_bound(&self) -> bool {
        let q = self.q() as i128;
        (self.n_k3 as i128 - q * q - 1).abs() <= 22 * q
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CountOptions {
    pub budget: u128,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { budget: DEFAULT_BUDGET }
    }
}

fn extension(fiber: &FiberSpec, k: u32, opts: &CountOptions) -> Result<(Arc<FieldDescriptor>, LogTables), CountError> {
    if !branchgeom::good_fiber(fiber.family, fiber.p, fiber.t)? {
        return Err(CountError::BadParameter(format!("{fiber} is not a good fibre")));
    }
    if k == 0 {
        return Err(CountError::BadParameter("k must be at least 1".into()));
    }
    let q = (fiber.p as u128).checked_pow(k).unwrap_or(u128::MAX);
    let budget = opts.budget.min(LOG_TABLE_LIMIT);
    if q > budget {
        return Err(CountError::BudgetExceeded { q, budget });
    }
    let field = make_field(fiber.p, k as usize)?;
    let tables = LogTables::new(&field).expect("q is below the table limit");
    Ok((field, tables))
}

/// `#X'(F_{p^k})` by summing `1 + chi(f(P))` over the plane.
pub fn count_double_cover_naive(fiber: &FiberSpec, k: u32, opts: &CountOptions) -> Result<u64, CountError> {
    let (field, tables) = extension(fiber, k, opts)?;
    let sextic = branchgeom::branch_sextic(fiber, &field)?;
    let q = field.order() as i64;
    Ok((q * q + q + 1 + plane_character_sum(&sextic, &tables)) as u64)
}

/// `sum over P in P^2(F_q) of chi(f(P))` for any ternary form of even
/// degree over the field of `tables`.
pub fn plane_character_sum(form: &TernaryForm, tables: &LogTables) -> i64 {
    let d = form.degree();
    let lc: Vec<LogElem> = form.coeffs().iter().map(|c| tables.from_element(c)).collect();
    // f(x, y, 1) = sum_i x^i g_i(y)
    let g: Vec<Vec<LogElem>> = (0..=d).map(|i| (0..=d - i).map(|j| lc[monomial_index(d, i, j)]).collect()).collect();
    let over_prime_field = form.coeffs().iter().all(|c| c.as_prime().is_some());
    let rows: Vec<(LogElem, u32)> =
        if over_prime_field { tables.frobenius_orbits() } else { tables.elements().map(|y| (y, 1)).collect() };
    let affine: i64 = rows
        .par_iter()
        .map(|&(y, weight)| {
            let row: Vec<LogElem> = g.iter().map(|gi| tables.eval(gi, y)).collect();
            let s: i64 = tables.elements().map(|x| tables.chi(tables.eval(&row, x))).sum();
            s * weight as i64
        })
        .sum();
    // z = 0: the points (x : 1 : 0) and (1 : 0 : 0)
    let at_infinity: Vec<LogElem> = (0..=d).map(|i| lc[monomial_index(d, i, d - i)]).collect();
    let line: i64 = tables.elements().map(|x| tables.chi(tables.eval(&at_infinity, x))).sum();
    affine + line + tables.chi(lc[monomial_index(d, d, 0)])
}

/// Coefficients of `P_(v0,v1)(u)` as binary forms in `(v0, v1)`: entry `i`
/// is the coefficient of `u^i`, listed by ascending power of `v0` as
/// numerator/denominator pairs.
const QUINTIC_COEFFS: [&[(i64, i64)]; 6] = [
    &[(1, 25), (1, 25), (1, 25), (1, 25), (1, 25), (0, 1)],
    &[(1, 25), (6, 25), (1, 25), (-4, 25), (1, 25)],
    &[(-2, 5), (0, 1), (3, 5), (-1, 5)],
    &[(-2, 5), (-6, 5), (3, 5)],
    &[(1, 1), (-1, 1)],
    &[(1, 1)],
];

fn binary_form_value(field: &Arc<FieldDescriptor>, coeffs: &[(i64, i64)], v0: &FqElement, v1: &FqElement) -> FqElement {
    let d = coeffs.len() - 1;
    coeffs.iter().enumerate().fold(field.zero(), |acc, (a, &(n, m))| {
        &acc + &(&(&field.ratio(n, m) * &v0.pow(a as u128)) * &v1.pow((d - a) as u128))
    })
}

/// The genus-2 curve `w^2 = scalar * P(u)` over one line of the pencil.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuinticFiberForm {
    pub t: FqElement,
    pub v0: FqElement,
    pub v1: FqElement,
    /// Coefficients of `P`, ascending in `u`.
    pub coeffs: [FqElement; 6],
    /// `25 (v0 + (2 - 2t) v1)`.
    pub scalar: FqElement,
}

impl QuinticFiberForm {
    pub fn new(t: &FqElement, v0: &FqElement, v1: &FqElement) -> Result<Self, CountError> {
        let f = v0.field();
        if f.p() == 5 {
            return Err(CountError::BadParameter("characteristic 5".into()));
        }
        if !t.same_field(v0) || !v0.same_field(v1) {
            return Err(FieldError::FieldMismatch.into());
        }
        let coeffs = QUINTIC_COEFFS.map(|c| binary_form_value(f, c, v0, v1));
        let scalar = &f.from_u64(25) * &(v0 + &(&(&f.from_u64(2) - &(&f.from_u64(2) * t)) * v1));
        Ok(QuinticFiberForm { t: t.clone(), v0: v0.clone(), v1: v1.clone(), coeffs, scalar })
    }

    pub fn eval(&self, u: &FqElement) -> FqElement {
        self.coeffs.iter().rev().fold(u.field().zero(), |acc, c| &(&acc * u) + c)
    }
}

/// `P~(u) = P(u + s) - C = u^5 - 5 alpha u^3 + 5 alpha^2 u`, `s = (v0 - v1)/5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DicksonForm {
    pub alpha: FqElement,
    pub shift: FqElement,
    pub c: FqElement,
    pub normalized: [FqElement; 6],
}

pub fn dickson_normalize(form: &QuinticFiberForm) -> Result<DicksonForm, CountError> {
    let f = form.v0.field();
    let shift = &(&form.v0 - &form.v1) * &f.ratio(1, 5);
    let c = form.eval(&shift);
    // Taylor shift: b_j = sum_{i >= j} binom(i, j) s^(i-j) a_i
    let mut normalized: [FqElement; 6] = std::array::from_fn(|_| f.zero());
    for (j, slot) in normalized.iter_mut().enumerate() {
        let mut binom = 1u64;
        for i in j..6 {
            *slot = &*slot + &(&(&f.from_u64(binom) * &shift.pow((i - j) as u128)) * &form.coeffs[i]);
            binom = binom * (i as u64 + 1) / (i - j + 1) as u64;
        }
    }
    normalized[0] = &normalized[0] - &c;

    let (v0, v1) = (&form.v0, &form.v1);
    let alpha = &(&(&f.ratio(-1, 25) * &(v0 * v0)) + &(&f.ratio(2, 25) * &(v0 * v1))) + &(&f.ratio(4, 25) * &(v1 * v1));
    let five = f.from_u64(5);
    let expected = [f.zero(), &five * &(&alpha * &alpha), f.zero(), -(&five * &alpha), f.zero(), f.one()];
    if normalized != expected {
        return Err(CountError::NormalizationMismatch { v0: format!("{v0:?}"), v1: format!("{v1:?}") });
    }
    Ok(DicksonForm { alpha, shift, c, normalized })
}

/// Whether `u -> poly(u)` is a bijection of `F_p`; `coeffs` ascending, in a
/// prime field.
pub fn is_permutation_polynomial(coeffs: &[FqElement]) -> Result<bool, CountError> {
    let Some(first) = coeffs.first() else {
        return Err(CountError::BadParameter("empty polynomial".into()));
    };
    let field = first.field();
    if !field.is_prime_field() {
        return Err(CountError::BadParameter("permutation test runs over F_p only".into()));
    }
    let p = field.p();
    if p > PERMUTATION_TEST_LIMIT {
        return Err(CountError::BudgetExceeded { q: p as u128, budget: PERMUTATION_TEST_LIMIT as u128 });
    }
    let c: Vec<u64> = coeffs.iter().map(|a| a.as_prime().unwrap()).collect();
    Ok(is_permutation_mod_p(&c, p))
}

pub(crate) fn is_permutation_mod_p(coeffs: &[u64], p: u64) -> bool {
    let mut seen = vec![false; p as usize];
    for u in 0..p {
        let v = coeffs.iter().rev().fold(0u64, |acc, &a| (acc * u + a) % p) as usize;
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// `#X'(F_{p^k})` through the pencil of lines through `(2 : -1 : 2)`.
pub fn count_double_cover_fibered(fiber: &FiberSpec, k: u32, opts: &CountOptions) -> Result<u64, CountError> {
    if fiber.family != Family::Qw5 {
        return Err(CountError::WrongFamily(fiber.family));
    }
    let (field, tables) = extension(fiber, k, opts)?;
    let q = field.order() as i64;
    let t = field.from_u64(fiber.t);
    let lg = |a: FqElement| tables.from_element(&a);

    // With v1 = 1 every coefficient is a polynomial in v0 over F_p.
    let in_v0: Vec<Vec<LogElem>> =
        QUINTIC_COEFFS.iter().map(|c| c.iter().map(|&(n, m)| lg(field.ratio(n, m))).collect()).collect();
    let two_minus_2t = &field.from_u64(2) - &(&field.from_u64(2) * &t);
    let scalar_in_v0 = [lg(&field.from_u64(25) * &two_minus_2t), lg(field.from_u64(25))];

    let curve_sum = |quintic: &[LogElem], scalar: LogElem| -> i64 {
        if scalar == LogTables::ZERO {
            return 0;
        }
        let s: i64 = tables.elements().map(|u| tables.chi(tables.eval(quintic, u))).sum();
        tables.chi(scalar) * s
    };

    let affine: i64 = tables
        .frobenius_orbits()
        .par_iter()
        .map(|&(v0, weight)| {
            let quintic: Vec<LogElem> = in_v0.iter().map(|c| tables.eval(c, v0)).collect();
            curve_sum(&quintic, tables.eval(&scalar_in_v0, v0)) * weight as i64
        })
        .sum();
    // (v0 : v1) = (1 : 0): the leading v0-coefficient of each binary form
    let at_infinity: Vec<LogElem> =
        QUINTIC_COEFFS.iter().map(|c| lg(field.ratio(c.last().unwrap().0, c.last().unwrap().1))).collect();
    let infinity = curve_sum(&at_infinity, lg(field.from_u64(25)));

    // each of the q + 1 curves has q + 1 + (character sum) points; the
    // centre is counted q + 1 times
    let curves = (q + 1) * (q + 1) + affine + infinity;
    Ok((curves - q) as u64)
}

/// Counts `X'` with the chosen engine and adds `q` for every node whose line
/// pair is fixed by the `q`-power Frobenius.
pub fn count_k3(fiber: &FiberSpec, k: u32, method: Method, opts: &CountOptions) -> Result<CountRecord, CountError> {
    let start = Instant::now();
    let n_prime = match method {
        Method::Naive => count_double_cover_naive(fiber, k, opts)?,
        Method::Fibration => count_double_cover_fibered(fiber, k, opts)?,
    };
    let arrangement = branchgeom::lines(fiber)?;
    let q = fiber.p.pow(k);
    let n_k3 = n_prime + q * branchgeom::pair_fixed_count(&arrangement.sigma, k) as u64;
    Ok(CountRecord { fiber: *fiber, k, n_prime, n_k3, method, wall_time_secs: start.elapsed().as_secs_f64() })
}
