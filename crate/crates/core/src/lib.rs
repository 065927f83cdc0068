//! Exact-arithmetic toolkit for Weyl-invariant polynomial calculus,
//! flag-variety pushforwards, curve L-functions, closed-form arithmetic
//! volumes, an independent truncated-trace oracle, and the phantom
//! tautological ring.
//!
//! Everything in the main computational path is exact: coefficients are
//! arbitrary-precision rationals, L-function derivatives are taken with the
//! operator θ = t·d/dt (t = q^{−s}), and every division that must be exact is
//! checked for a vanishing remainder.

// Index loops are the prevailing idiom in the matrix-heavy modules.
#![allow(clippy::needless_range_loop)]

pub mod characters;
pub mod error;
pub mod expr;
pub mod flag_calculus;
pub mod lfunctions;
pub mod linalg;
pub mod num;
pub mod phantom_ring;
pub mod poly;
pub mod trace_oracle;
pub mod unipoly;
pub mod volume;
pub mod weyl_poly;

pub use error::{Error, ErrorClass};
pub use num::Q;
pub use poly::ExactPolynomial;
pub use weyl_poly::{Coweight, Family, RootDatum, WeylElement};
