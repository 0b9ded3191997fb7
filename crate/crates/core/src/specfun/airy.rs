//! Airy function Ai and its derivative on the real line.
//!
//! Three regimes:
//!
//! * |x| <= 9: Maclaurin series in double-double arithmetic. The series
//!   suffers cancellation of size exp((2/3)|x|^(3/2)) (negative axis) or
//!   exp((4/3)x^(3/2)) (positive axis, between the two auxiliary series);
//!   the ~32-digit accumulator keeps the final double fully accurate
//!   throughout this range.
//! * x > 9: standard exponential asymptotic expansion in 1/zeta with
//!   zeta = (2/3)x^(3/2); the least term is below 1e-13 relative there.
//! * x < -9: oscillatory asymptotic expansion; the least term is below
//!   1e-15 absolute there.

use super::dd::Dd;
use crate::error::{Error, Result};

/// Value of Ai and Ai' at a point.
#[derive(Debug, Clone, Copy)]
pub struct AiryValue {
    pub ai: f64,
    pub ai_prime: f64,
}

/// Ai(0) = 3^(-2/3)/Gamma(2/3) in double-double precision.
const C1: Dd = Dd {
    hi: 0.3550280538878172,
    lo: 2.05233632436212e-17,
};
/// -Ai'(0) = 3^(-1/3)/Gamma(1/3) in double-double precision.
const C2: Dd = Dd {
    hi: 0.2588194037928068,
    lo: -2.522243111610832e-17,
};

const SERIES_LIMIT: f64 = 9.0;
/// Documented accuracy window of [`airy_ai`].
pub const WINDOW: (f64, f64) = (-40.0, 200.0);

/// Airy function Ai(x) and derivative Ai'(x).
///
/// Accuracy: relative error <= 1e-12 on the documented window
/// [-40, 200] wherever |Ai(x)| > 1e-300 (absolute near the negative-axis
/// zeros, where no fixed-precision method can bound relative error).
/// Arguments outside the window are rejected.
pub fn airy_ai(x: f64) -> Result<AiryValue> {
    if !x.is_finite() || x < WINDOW.0 || x > WINDOW.1 {
        return Err(Error::Domain(format!(
            "airy_ai argument {x} outside accuracy window [{}, {}]",
            WINDOW.0, WINDOW.1
        )));
    }
    Ok(airy_ai_unchecked(x))
}

/// Same as [`airy_ai`] without the window check; used internally by
/// quadratures whose truncation analysis keeps arguments in range but
/// may transiently evaluate slightly past the window edge, where the
/// asymptotic expansions only gain accuracy.
pub(crate) fn airy_ai_unchecked(x: f64) -> AiryValue {
    if x.abs() <= SERIES_LIMIT {
        series(x)
    } else if x > 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(x)
    }
}

/// Maclaurin series: Ai = C1*f - C2*g with
///   f = sum c_k x^{3k},     c_0 = 1, c_{k+1} = c_k / ((3k+3)(3k+2))
///   g = sum d_k x^{3k+1},   d_0 = 1, d_{k+1} = d_k / ((3k+3)(3k+4))
/// and the termwise-differentiated companions for Ai'.
fn series(x: f64) -> AiryValue {
    let x3 = Dd::from(x).mul(Dd::from(x)).mul_f64(x);
    // Sums and current terms for f, g, f', g'.
    let mut sf = Dd::from(1.0);
    let mut tf = Dd::from(1.0);
    let mut sg = Dd::from(x);
    let mut tg = Dd::from(x);
    // f' = sum_{k>=1} c_k (3k) x^{3k-1}: first term x^2/2 at k=1.
    let x2 = Dd::from(x).mul(Dd::from(x));
    let mut sfp = x2.mul_f64(0.5);
    let mut tfp = sfp;
    // g' = sum_{k>=0} d_k (3k+1) x^{3k}: first term 1 at k=0.
    let mut sgp = Dd::from(1.0);
    let mut tgp = Dd::from(1.0);
    let mut k = 0f64;
    loop {
        // Exact double-double division by the (integer-valued) coefficient
        // ratios; a plain f64 reciprocal here would cap the accumulator at
        // ~1e-17 relative and be amplified by the series cancellation.
        tf = tf.mul(x3).div_f64((3.0 * k + 3.0) * (3.0 * k + 2.0));
        tg = tg.mul(x3).div_f64((3.0 * k + 3.0) * (3.0 * k + 4.0));
        // t_{fp}(j+1)/t_{fp}(j) = x^3 / ((3j)(3j+2)); j = k+1 here since
        // the sum was seeded with the j = 1 term before the loop.
        tfp = tfp.mul(x3).div_f64((3.0 * k + 3.0) * (3.0 * k + 5.0));
        tgp = tgp.mul(x3).div_f64((3.0 * k + 3.0) * (3.0 * k + 1.0));
        sf = sf.add(tf);
        sg = sg.add(tg);
        sfp = sfp.add(tfp);
        sgp = sgp.add(tgp);
        k += 1.0;
        let scale = sf.abs().max(sg.abs()).max(1.0);
        if tf.abs().max(tg.abs()) < 1e-34 * scale || k > 200.0 {
            break;
        }
    }
    let ai = C1.mul(sf).sub(C2.mul(sg)).value();
    let aip = C1.mul(sfp).sub(C2.mul(sgp)).value();
    AiryValue { ai, ai_prime: aip }
}

/// Coefficient ratio u_{k+1}/u_k of the asymptotic series,
/// u_k = Gamma(3k + 1/2) / (54^k k! Gamma(k + 1/2)).
#[inline]
fn u_ratio(k: f64) -> f64 {
    (3.0 * k + 0.5) * (3.0 * k + 1.5) * (3.0 * k + 2.5) / (54.0 * (k + 1.0) * (k + 0.5))
}

fn asymptotic_positive(x: f64) -> AiryValue {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut su = 1.0; // sum (-1)^k u_k zeta^-k
    let mut sv = 1.0; // sum (-1)^k v_k zeta^-k, v_k = (6k+1)/(1-6k) u_k
    let mut u = 1.0;
    let mut zp = 1.0; // (-zeta)^{-k}
    let mut prev = f64::MAX;
    let mut k = 0f64;
    loop {
        u *= u_ratio(k);
        zp /= -zeta;
        k += 1.0;
        let term = u * zp;
        if term.abs() >= prev || k > 60.0 {
            break; // least term of the divergent tail reached
        }
        prev = term.abs();
        su += term;
        sv += term * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        if term.abs() < 1e-18 * su.abs() {
            break;
        }
    }
    let pref = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    AiryValue {
        ai: pref / x.powf(0.25) * su,
        ai_prime: -pref * x.powf(0.25) * sv,
    }
}

fn asymptotic_negative(x: f64) -> AiryValue {
    let y = -x;
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    // Even/odd splits of the u- and v-series at argument zeta.
    let (mut se_u, mut so_u, mut se_v, mut so_v) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut zp = 1.0; // zeta^{-k}
    let mut prev = f64::MAX;
    let mut k = 0f64;
    loop {
        u *= u_ratio(k);
        zp /= zeta;
        k += 1.0;
        let term = u * zp;
        if term >= prev || k > 60.0 {
            break; // least term of the divergent tail reached
        }
        prev = term;
        let v = term * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        // Regrouped expansion: sum_m (-1)^m u_{2m} zeta^{-2m} (even part)
        // and sum_m (-1)^m u_{2m+1} zeta^{-2m-1} (odd part).
        let m = (k / 2.0).floor();
        let sign = if (m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        if (k as i64) % 2 == 0 {
            se_u += sign * term;
            se_v += sign * v;
        } else {
            so_u += sign * term;
            so_v += sign * v;
        }
        if term < 1e-18 {
            break;
        }
    }
    let phase = zeta - std::f64::consts::FRAC_PI_4;
    let (sin_p, cos_p) = phase.sin_cos();
    let spi = std::f64::consts::PI.sqrt();
    AiryValue {
        ai: (cos_p * se_u + sin_p * so_u) / (spi * y.powf(0.25)),
        ai_prime: (sin_p * se_v - cos_p * so_v) * y.powf(0.25) / spi,
    }
}
