//! Numerical laboratory core for quasilinear cross-diffusion reaction systems
//! of Shigesada-Kawasaki-Teramoto (SKT) type.
//!
//! The system under study is
//!
//! ```text
//! tau_i du_i/dt - Lap(d_i(u) u_i) = f_i(u)   in Omega x (0,T)
//! d/dnu (d_i(u) u_i) = 0                     on the boundary
//! u_i(0) = u0_i >= 0
//! ```
//!
//! on a rectangle, with `d` a density-dependent diffusion law and `f` a
//! reaction law. The crate provides
//!
//! * [`model`] — diffusion/reaction laws and the derived matrix structures
//!   (diffusion Jacobian `A`, weighted matrix `A_alpha`, mobility matrix `P`,
//!   Onsager matrix `B`),
//! * [`conditions`] — closed-form and sampling-based checkers for the
//!   structural hypotheses (quasi-positivity, mass dissipation, growth
//!   classes, positive semidefiniteness, detailed balance, ...) and a
//!   theorem-applicability report,
//! * [`solver`] — a positivity-aware finite-volume integrator with exact
//!   discrete zero-flux boundary handling,
//! * [`monitors`] — entropy/mass/norm functionals and inequality residuals
//!   evaluated along discrete trajectories.
//!
//! The crate is `no_std` (alloc only); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod conditions;
pub mod linalg;
pub mod model;
pub mod monitors;
pub mod solver;

mod error;

pub use error::{Error, Result};
