//! Time-domain spectral diagnostics for finite-dimensional linear operators.
//!
//! The crate builds test operators `L` with known spectra, integrates the
//! free and forced wave problems `ẅ + Lw = 0` / `ü + Lu = f e^{-ikt}`, and
//! reads spectral information back out of long-time averages:
//!
//! * exponential growth of `∫₀ᵗ w` ⇔ eigenvalues with `Re z < 0`,
//! * non-decaying modulated averages `(1/t)∫₀ᵗ e^{iks} w` ⇔ eigenvalue `k²`,
//! * Cesàro averages of the forced solution ⇒ the limiting amplitude
//!   `(L - k²)⁻¹ f`.
//!
//! Every time-domain answer is cross-checked against a direct eigensolve
//! ([`operator_lab`]) and the resolvent side ([`laplace_core`]).

// range checks are written as `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cx;
pub mod diagnostics;
pub mod error;
pub mod laplace_core;
pub mod operator_lab;
pub mod par;
pub mod pipeline;
pub mod wave_engine;

pub use cx::{Cx, C64};
pub use error::{Result, SpectreError};
pub use par::Parallelism;
