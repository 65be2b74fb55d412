#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
//! Late-time radiation tails of radial wave equations in odd space dimensions.
//!
//! Three independent routes to the same numbers: the closed-form free wave
//! ([`freewave`]), perturbative Duhamel integrals ([`perturb`]) and long-time
//! high-order evolution in double-double arithmetic ([`evolve`]). [`analysis`]
//! turns time series into decay exponents and amplitudes and compares them with
//! the closed-form predictions.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod evolve;
pub mod freewave;
pub mod models;
pub mod numerics;
pub mod perturb;
pub mod profiles;

pub use error::{Error, Result};
