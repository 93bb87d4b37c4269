//! Higher-order supersymmetric (Darboux/Crum) partners of the harmonic
//! oscillator with an infinite barrier at the origin.
//!
//! The crate is organised bottom-up:
//!
//! - [`kummer`]: the confluent hypergeometric function ₁F₁(a, b; z).
//! - [`seeds`]: seed solutions of the oscillator equation at arbitrary
//!   factorization energy, with derivatives of any order.
//! - [`wronskian`]: Wronskians, Wronskian minors and the second logarithmic
//!   derivative of the Wronskian.
//! - [`partner`]: the partner potential, transformed eigenfunctions and the
//!   candidate added states.
//! - [`design`]: interval classes, parity rules, singularity scans and the
//!   prediction of added levels.
//! - [`oracle`]: an independent finite-difference eigensolver.
//! - [`cli`]: configuration parsing and the `susyq` pipeline.

pub mod cli;
pub mod design;
mod error;
pub mod kummer;
pub mod oracle;
pub mod partner;
pub mod seeds;
pub mod wronskian;

pub use error::{Error, Result};

/// Relative error of `approx` with respect to `exact`, falling back to the
/// absolute error when `exact` is zero.
#[doc(hidden)]
pub fn rel_err(approx: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        approx.abs()
    } else {
        ((approx - exact) / exact).abs()
    }
}
