//! Special functions for the limit kernels: the Airy function Ai, its
//! exponentially weighted tail integrals, Airy-product tails, and the
//! finite-t Hermite factors alpha_t/beta_t.

mod airy;
mod dd;
mod hermite;
mod tails;

pub use airy::{airy_ai, AiryValue, WINDOW};
pub use hermite::{hermite_alpha_beta, HermitePoint};
pub use tails::{airy_product_tail, airy_tail, airy_tail_linear};

pub(crate) use airy::airy_ai_unchecked;
