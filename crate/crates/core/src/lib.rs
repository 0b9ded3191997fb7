//! Numerical laboratory for half-infinite systems of one-sided reflected
//! Brownian motions with stationary (Poisson) initial data.
//!
//! The crate has three layers:
//!
//! * a Monte Carlo simulator for the particle system, built on the exact
//!   Skorokhod reflection recursion with a Burke-type boundary particle,
//!   together with a brute-force last-passage oracle, exit points, and
//!   monotone couplings in the boundary drift ([`simulator`]);
//! * the limit-law machinery: Airy-type special functions ([`specfun`]),
//!   the kernel ingredients of the stationary and finite-step limit laws
//!   ([`kernels`]), and Nyström-discretized Fredholm determinants with
//!   chain operators, path-integral forms and analytic-continuation
//!   identities ([`fredholm`]);
//! * a statistical harness that cross-validates simulation against the
//!   formulas and drives the command line interface ([`harness`]).

pub mod error;
pub mod fredholm;
pub mod harness;
pub mod kernels;
pub mod quad;
pub mod scaling;
pub mod simulator;
pub mod specfun;

pub use error::{Error, Result};
