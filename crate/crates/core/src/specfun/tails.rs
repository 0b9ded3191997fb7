//! Exponentially weighted Airy tail integrals.
//!
//! Both integrals below are evaluated by composite Gauss–Legendre panels
//! marching upward until the superexponential Airy decay certifies the
//! truncation error: integration stops at the first pair of consecutive
//! panels each contributing less than 1e-18 relative to the accumulated
//! value. A hard cap on the integration length turns non-convergence
//! (weight growing faster than the Airy decay for extreme parameters)
//! into an error instead of a silent wrong answer.

use super::airy::airy_ai_unchecked;
use crate::error::{Error, Result};
use crate::quad::panel;

const PANEL_WIDTH: f64 = 2.0;
const PANEL_ORDER: usize = 24;
const MAX_LENGTH: f64 = 240.0;
const REL_EPS: f64 = 1e-18;

fn march<F: Fn(f64) -> f64>(start: f64, integrand: F) -> Result<f64> {
    let mut acc = 0.0;
    let mut small_streak = 0;
    let mut a = start;
    while a < start + MAX_LENGTH {
        let b = a + PANEL_WIDTH;
        let contribution = panel(a, b, PANEL_ORDER).integrate(&integrand);
        acc += contribution;
        if contribution.abs() < REL_EPS * (1.0 + acc.abs()) {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(acc);
            }
        } else {
            small_streak = 0;
        }
        a = b;
    }
    Err(Error::Numerics(format!(
        "airy tail integral from {start} did not reach its truncation bound within {MAX_LENGTH}"
    )))
}

/// Weighted upper Airy tail: integral of Ai(shift + x) e^{c x} dx over
/// x in [s, infinity).
pub fn airy_tail(s: f64, c: f64, shift: f64) -> Result<f64> {
    march(s, |x| airy_ai_unchecked(shift + x).ai * (c * x).exp())
}

/// Linearly weighted upper Airy tail: integral of
/// (x - s) Ai(shift + x) e^{c x} dx over x in [s, infinity).
/// Equals the iterated double tail int_s^inf dx int_x^inf dy
/// Ai(shift + y) e^{c y} by exchanging the order of integration.
pub fn airy_tail_linear(s: f64, c: f64, shift: f64) -> Result<f64> {
    march(s, |x| {
        (x - s) * airy_ai_unchecked(shift + x).ai * (c * x).exp()
    })
}

/// Airy product tail: integral over x in [0, infinity) of
/// e^{-x (r1 - r2)} Ai(r1^2 + s1 + x) Ai(r2^2 + s2 + x) dx.
pub fn airy_product_tail(s1: f64, s2: f64, r1: f64, r2: f64) -> Result<f64> {
    let a1 = r1 * r1 + s1;
    let a2 = r2 * r2 + s2;
    march(0.0, |x| {
        (-x * (r1 - r2)).exp() * airy_ai_unchecked(a1 + x).ai * airy_ai_unchecked(a2 + x).ai
    })
}
