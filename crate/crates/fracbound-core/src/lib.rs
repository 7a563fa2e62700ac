//! Numerical core for distributed-order fractional diffusion on box domains
//! with Dirichlet boundary conditions.
//!
//! The solution of `D^(nu) u = laplacian(u)`, `u = 0` on the boundary,
//! `u(0,x) = f(x)` is computed two independent ways:
//!
//! * a spectral expansion `u(t,x) = sum_n fbar(n) phi_n(x) h(t, lambda_n)`
//!   over Dirichlet Laplacian eigenpairs, where `h(t,lambda)` is the Laplace
//!   transform of an inverse subordinator, and
//! * Monte Carlo over killed Brownian motion run on the random clock of that
//!   inverse subordinator.
//!
//! The crate is `no_std` (with `alloc`); everything here is pure computation.
//! IO, configuration and the command-line front end live in the companion
//! `fracbound` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod eigenbasis;
pub mod error;
pub mod fracops;
pub mod hkernel;
pub mod inversion;
pub mod math;
pub mod mixing;
pub mod quad;
pub mod rng;
pub mod solver_mc;
pub mod solver_spectral;
pub mod special;
pub mod subordinate;

pub use error::Error;
