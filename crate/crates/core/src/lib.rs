//! Finite-range numerics for the Mertens function and its smoothed relatives.
//!
//! The crate sieves μ and Λ, builds the Selberg weights Λ₂, Λ₂⁻ and Θ by
//! Dirichlet convolution, keeps checkpointed prefix sums for the Mertens
//! function and its log-weighted relatives, and evaluates the smoothed sums
//! `𝓕(x) = Σ_{n≤x} μ(n) log(x/n)` and `𝓗(x) = 𝓕(e^{√x}) / e^{√x}`.
//! On top of that it checks exact identities to rounding level, samples
//! asymptotic remainders as finite series, and profiles the zeros of `𝓗`.
//!
//! Nothing here proves a limit; every asymptotic statement becomes a
//! finite-range measurement.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod error;
pub mod format;
pub mod dirichlet;
pub mod kahan;
pub mod sieve;
pub mod summatory;
pub mod identities;
pub mod h_analysis;
pub mod report;

pub use error::{Error, Result};
