//! Point counts, Frobenius characteristic polynomials and Picard-rank bounds
//! for two one-parameter families of K3 double planes branched over six
//! lines, whose members carry real multiplication by `Q(sqrt 5)` and
//! `Q(sqrt 2)`.

pub mod branchgeom;
pub mod counter;
pub mod ffield;
pub mod harness;
pub mod picard_rm;
pub mod poly;
pub mod zeta;

pub use poly::{Poly, Scalar};

/// Exact integer polynomials.
pub type IntPoly = Poly<num_bigint::BigInt>;
/// Exact rational polynomials.
pub type RatPoly = Poly<num_rational::BigRational>;
/// Double-precision polynomials, used only for advisory root checks.
pub type FloatPoly = Poly<f64>;
