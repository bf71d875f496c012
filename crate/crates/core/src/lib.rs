//! Nonparametric Fourier spot-variance estimation and variance-swap link testing.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the numerical core:
//!
//! - [`market`]: tick series, rescaling of a session to `[0, 2π]`, the daily regression panel.
//! - [`fourier`]: Fourier coefficients of returns, the convolution estimator of the variance
//!   coefficients, Fejér reconstruction and the jump-robust cosine variant.
//! - [`diagnostics`]: realized variance, threshold bipower variation, the daily jump test and
//!   volatility signature data.
//! - [`models`]: Heston/Bates simulation, closed-form and ODE variance-swap rates, static
//!   replication from an option chain and the jump correction.
//! - [`econometrics`]: OLS with Newey-West errors, the ADF pretest, Gram-Schmidt
//!   orthogonalization and the affine / quadratic / fully-affine link regressions.
//!
//! File formats, configuration and the command-line tool live in the `spotvar` crate.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod econometrics;
mod error;
pub mod fourier;
pub mod market;
pub mod models;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
