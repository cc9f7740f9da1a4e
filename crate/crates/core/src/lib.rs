//! Pseudo-spectral simulation and decay-rate verification for the dissipative
//! 2D quasi-geostrophic equation
//!
//! ```text
//! θ_t + u·∇θ + (−Δ)^α θ = 0,   u = (−∂₂ψ, ∂₁ψ),   Λψ = −θ,   1/2 < α ≤ 1
//! ```
//!
//! on a periodic box standing in for the plane. The crate is split into
//!
//! * [`spectral`]: grids, Fourier fields, Riesz velocity, dealiased nonlinearity, L^p norms;
//! * [`evolution`]: exponential time differencing, the Duhamel successive-approximation
//!   iteration and its recursion monitor;
//! * [`kernels`]: the fractional heat kernel on the plane and its norm/scaling probes;
//! * [`analysis`]: the decay-rate catalog, log-log fitting, Fourier-splitting diagnostics;
//! * [`initial_data`]: profile generators and the λ-rescaled slow-decay family;
//! * [`cli_io`]: run configuration, snapshots, CSV output and experiment orchestration.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bessel;
pub mod cli_io;
mod error;
pub mod evolution;
pub mod initial_data;
pub mod kernels;
pub mod quadrature;
pub mod spectral;

pub use error::{Result, SqgError};
