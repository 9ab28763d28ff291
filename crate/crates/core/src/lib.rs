//! Survival probabilities and effective decay rates for quantum systems
//! under repeated projective measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`chain`] composes per-interval transition probabilities into the
//!   survival probability after `M` measurements and converts survival into
//!   an effective decay rate.
//! * [`bath`] evaluates the dephasing factor `γ(τ)` and the bath-mediated
//!   phase `δ(τ)` for an Ohmic harmonic-oscillator environment.
//! * [`models`] maps the three exactly solvable system–environment models
//!   onto transition probabilities.
//! * [`analysis`] sweeps decay rates over measurement intervals and
//!   classifies Zeno and anti-Zeno regimes.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod bath;
pub mod chain;
mod error;
mod exact;
pub mod models;
pub mod quadrature;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
