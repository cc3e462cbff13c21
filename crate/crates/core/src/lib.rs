//! Monotone finite difference-quadrature solver for the one dimensional
//! porous medium equation with fractional pressure
//!
//! ```text
//! ∂t u = ∂x (u^{m-1} ∂x (-Δ)^{-σ} u),   m ≥ 2, σ ∈ (0,1).
//! ```
//!
//! The solver works on the integrated variable `v(x,t) = ∫_{-∞}^x u(y,t) dy`,
//! which satisfies the quasilinear equation `∂t v = -|∂x v|^{m-1} (-Δ)^s v`
//! with `s = 1 - σ`. The density is recovered afterwards by numerical
//! differentiation.
//!
//! Module map:
//!
//! * [`oplib`]: quadrature weights for the discrete fractional Laplacian and
//!   checks of the stability constants.
//! * [`scheme`]: grids, CFL step selection, the upwind quasilinear operator and
//!   the explicit time stepping.
//! * [`density`]: density recovery, interpolants and mass bookkeeping.
//! * [`analytic`]: explicit self-similar solutions and the initial data library.
//! * [`metrics`]: error functionals, a Rubinstein-Kantorovich bound and
//!   observed orders.
//! * [`harness`]: experiment presets, config files, refinement ladders and the
//!   randomized structure suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod density;
mod error;
pub mod harness;
pub mod metrics;
pub mod oplib;
pub mod quad;
pub mod scheme;

pub use error::{Error, Result};
