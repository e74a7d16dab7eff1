//! Numerical laboratory for Gaussian Volterra processes.
//!
//! A Volterra process is the Wiener integral X_t = ∫₀ᵗ K(t,s) dB_s of a
//! triangular kernel against standard Brownian motion; fractional Brownian
//! motion is the flagship example. This crate implements the deterministic
//! fractional calculus behind such kernels, three kernel families with their
//! operator actions and covariance, seeded path synthesis, the discrete
//! Stratonovich/Skorohod integral schemes with their Malliavin trace
//! corrections, and a verification harness that checks the analytic
//! identities (covariance, chain rule, Girsanov shift, restriction) by
//! oracle comparison and Monte Carlo at desk scale.
//!
//! Module map:
//!
//! * [`specfun`]   — Γ, Gauss ₂F₁ and the fBm variance constant V_H.
//! * [`fracops`]   — Riemann–Liouville integrals/derivatives, Slobodetzki
//!   seminorm, Hölder-exponent regression.
//! * [`kernels`]   — kernel families, band primitives, K and 𝒦*_T actions,
//!   covariance quadrature and closed forms, cached weight tables.
//! * [`paths`]     — counter-based seeded Brownian paths, the linearized
//!   synthesis X^π and exact Gaussian sampling.
//! * [`integrals`] — RS/SS/R^π sums, trace term, coupled-level Stratonovich
//!   estimates, quadratic-energy derivative.
//! * [`verify`]    — identity checks returning structured reports.

pub mod error;
pub mod fracops;
pub mod grid;
pub mod integrals;
pub mod kernels;
pub mod linalg;
pub mod paths;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Result, VolterraError};
pub use grid::{SampledFunction, UniformGrid};
pub use integrals::{Integrand, IntegralEstimate};
pub use kernels::{KernelFamily, KernelModel};
pub use paths::{PathBundle, RngSeed};
pub use verify::VerificationReport;
