//! Stable matching under symmetric random preferences.
//!
//! `market` holds the deterministic machinery (deferred acceptance, stability, reduction of
//! incomplete markets, rotations, stable permutations), `prefdist` the random preference
//! models, `exact` the rational-arithmetic enumeration engine and `analytic` the integral
//! and inclusion-exclusion formulas evaluated numerically.

#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod market;
pub mod prefdist;

pub use error::{Error, Result};

/// Exact probabilities and popularity weights.
pub type Rational = num_rational::BigRational;

/// `n/d` as a [`Rational`]. Panics if `d == 0`.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
