//! Pointwise evaluation of the limit-kernel ingredients.
//!
//! The kernel of the multi-point limit law has the block form
//!
//!   K^delta(r_i, s1; r_j, s2) = -V(s1, s2) 1_{r_i < r_j}
//!                               + K_{r_i, r_j}(s1, s2)
//!                               + delta f_{r_i}(s1) g_{r_j}(s2),
//!
//! where V is the heat kernel over label time r_j - r_i, K_{r1,r2} is a
//! conjugated Airy-product kernel, and f, g are the rank-one ingredient
//! functions. The stationary (delta -> 0) specializations f*, g, R are
//! provided alongside.
//!
//! Every function here is the real-axis Airy-integral form; conjugation
//! factors e^{(2/3)r^3 + r s} are kept inside the kernel entries because
//! the path-integral representation depends on the specific conjugated
//! operators. Documented parameter window: |r| <= 3, |s| <= 30,
//! delta <= 2; outside it the conjugated entries can overflow doubles.
//! All functions are pure and reentrant.

use crate::error::{Error, Result};
use crate::scaling::ScalingFrame;
use crate::specfun::{airy_product_tail, airy_tail, airy_tail_linear};

/// A single kernel evaluation, tagging the value with its arguments.
#[derive(Debug, Clone, Copy)]
pub struct KernelPoint {
    pub r1: f64,
    pub s1: f64,
    pub r2: f64,
    pub s2: f64,
    pub value: f64,
}

/// Heat kernel V_{r1,r2}(s1, s2) = e^{-(s2-s1)^2/(4(r2-r1))} / sqrt(4 pi (r2-r1)).
///
/// Defined as a kernel only for r2 > r1; the reverse-label operator is
/// not an integral operator (it acts via the ingredient identities
/// V_{r_j,r_i} K_{r_i,r_k} = K_{r_j,r_k}, V_{r_j,r_i} f_{r_i} = f_{r_j},
/// V 1 = 1, which the operator-level code uses directly).
pub fn v_heat(r1: f64, s1: f64, r2: f64, s2: f64) -> Result<f64> {
    let dr = r2 - r1;
    if !(dr > 0.0) {
        return Err(Error::Domain(format!(
            "v_heat requires r2 > r1, got r1={r1}, r2={r2}"
        )));
    }
    let d = s2 - s1;
    Ok((-d * d / (4.0 * dr)).exp() / (4.0 * std::f64::consts::PI * dr).sqrt())
}

/// Conjugated Airy-product kernel
/// K_{r1,r2}(s1,s2) = e^{(2/3)r2^3 + r2 s2 - (2/3)r1^3 - r1 s1}
///                    * int_0^inf e^{-x(r1-r2)} Ai(r1^2+s1+x) Ai(r2^2+s2+x) dx.
/// With r1 = r2 = r this is the stationary kernel K.
pub fn k_conj(r1: f64, s1: f64, r2: f64, s2: f64) -> Result<f64> {
    let conj = (2.0 / 3.0 * (r2.powi(3) - r1.powi(3)) + r2 * s2 - r1 * s1).exp();
    Ok(conj * airy_product_tail(s1, s2, r1, r2)?)
}

/// Stationary ingredient f*(s; r) = -e^{-(2/3)r^3} int_s^inf Ai(r^2+u) e^{-ru} du.
/// Tends to 0 as s -> +infinity.
pub fn f_star(r: f64, s: f64) -> Result<f64> {
    Ok(-(-2.0 / 3.0 * r.powi(3)).exp() * airy_tail(s, -r, r * r)?)
}

/// Rank-one ingredient f_r(s) = 1 + f*(s; r)
///   = 1 - e^{-(2/3)r^3 - r s} int_0^inf Ai(r^2+s+x) e^{-rx} dx.
/// Tends to 1 as s -> +infinity.
pub fn f_step(r: f64, s: f64) -> Result<f64> {
    Ok(1.0 + f_star(r, s)?)
}

/// Rank-one ingredient
/// g_r(s; delta) = e^{delta^3/3 + r delta^2 - s delta}
///                 - e^{(2/3)r^3 + r s} int_0^inf Ai(r^2+s+x) e^{(delta+r)x} dx.
/// At delta = 0 this is the stationary g(s) = 1 - e^{(2/3)r^3} int_s^inf
/// Ai(r^2+u) e^{ru} du, which tends to 1 as s -> +infinity.
pub fn g_step(r: f64, s: f64, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!(
            "g_step requires delta >= 0, got {delta}"
        )));
    }
    let lead = (delta.powi(3) / 3.0 + r * delta * delta - s * delta).exp();
    // e^{(2/3)r^3 + rs} int_0^inf Ai(r^2+s+x) e^{(delta+r)x} dx
    //   = e^{(2/3)r^3 - delta s} int_s^inf Ai(r^2+u) e^{(delta+r)u} du.
    let tail = (2.0 / 3.0 * r.powi(3) - delta * s).exp() * airy_tail(s, delta + r, r * r)?;
    Ok(lead - tail)
}

/// The stationary one-point ingredients at a fixed label r1 and first
/// threshold s1: handles for f*(s), g(s) and the scalar
/// R = s1 + e^{(2/3)r1^3} int_{s1}^inf dx int_x^inf dy Ai(r1^2+y) e^{r1 y},
/// computed with the order of integration exchanged (the integrand is
/// positive, so the exchange is exact):
/// R = s1 + e^{(2/3)r1^3} int_{s1}^inf (y - s1) Ai(r1^2+y) e^{r1 y} dy.
#[derive(Debug, Clone, Copy)]
pub struct StationaryIngredients {
    pub r1: f64,
    pub s1: f64,
    /// The scalar R.
    pub r_value: f64,
}

impl StationaryIngredients {
    /// f*(s) at this r1.
    pub fn f_star(&self, s: f64) -> Result<f64> {
        f_star(self.r1, s)
    }

    /// g(s) at this r1.
    pub fn g(&self, s: f64) -> Result<f64> {
        g_step(self.r1, s, 0.0)
    }
}

/// Evaluates the stationary ingredients at (r1, s1).
pub fn stationary_ingredients(r1: f64, s1: f64) -> Result<StationaryIngredients> {
    let r_value = s1 + (2.0 / 3.0 * r1.powi(3)).exp() * airy_tail_linear(s1, r1, r1 * r1)?;
    Ok(StationaryIngredients { r1, s1, r_value })
}

/// One entry of the block kernel K^delta for the frame's label list:
/// block row i (label r_i), block column j (label r_j).
pub fn kdelta_entry(
    i: usize,
    s1: f64,
    j: usize,
    s2: f64,
    frame: &ScalingFrame,
    delta: f64,
) -> Result<f64> {
    let n = frame.r_list.len();
    if i >= n || j >= n {
        return Err(Error::Dimension(format!(
            "block indices ({i}, {j}) out of range for {n} labels"
        )));
    }
    let (ri, rj) = (frame.r_list[i], frame.r_list[j]);
    let mut value = k_conj(ri, s1, rj, s2)? + delta * f_step(ri, s1)? * g_step(rj, s2, delta)?;
    if ri < rj {
        value -= v_heat(ri, s1, rj, s2)?;
    }
    Ok(KernelPoint {
        r1: ri,
        s1,
        r2: rj,
        s2,
        value,
    }
    .value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::panel;
    use crate::specfun::airy_ai;

    const PI: f64 = std::f64::consts::PI;

    /// Composite quadrature of `f` over [a, b] with width-1 panels.
    fn integrate<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
        let n = ((b - a).ceil() as usize).max(1);
        let h = (b - a) / n as f64;
        (0..n)
            .map(|k| panel(a + k as f64 * h, a + (k + 1) as f64 * h, 24).integrate(&f))
            .sum()
    }

    #[test]
    fn v_heat_gaussian_peak_and_normalization() {
        let dr = 0.7;
        let peak = v_heat(0.1, 1.3, 0.8, 1.3).unwrap();
        assert!((peak - 1.0 / (4.0 * PI * dr).sqrt()).abs() < 1e-14);
        // Total mass one over the second argument.
        let mass = integrate(1.3 - 14.0, 1.3 + 14.0, |s2| {
            v_heat(0.1, 1.3, 0.8, s2).unwrap()
        });
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
        assert!(v_heat(1.0, 0.0, 1.0, 0.0).is_err());
        assert!(v_heat(1.0, 0.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn v_heat_airy_integral_representation() {
        // The Gaussian equals the conjugated full-line Airy-product
        // integral e^{(2/3)r2^3 + r2 s2 - (2/3)r1^3 - r1 s1}
        //   int_R e^{-x(r1-r2)} Ai(r1^2+s1+x) Ai(r2^2+s2+x) dx.
        let (r1, r2, s1, s2) = (0.0f64, 1.0f64, 0.3, -0.4);
        let conj = (2.0 / 3.0 * (r2.powi(3) - r1.powi(3)) + r2 * s2 - r1 * s1).exp();
        let body = integrate(-34.0, 0.0, |x| {
            (-x * (r1 - r2)).exp()
                * airy_ai(r1 * r1 + s1 + x).unwrap().ai
                * airy_ai(r2 * r2 + s2 + x).unwrap().ai
        }) + airy_product_tail(s1, s2, r1, r2).unwrap();
        let gauss = v_heat(r1, s1, r2, s2).unwrap();
        assert!(
            ((conj * body - gauss) / gauss).abs() < 1e-8,
            "airy rep {} vs gaussian {gauss}",
            conj * body
        );
    }

    #[test]
    fn v_heat_semigroup() {
        // (V_{r1,r2} o V_{r2,r3})(s1, s3) = V_{r1,r3}(s1, s3).
        let (r1, r2, r3) = (0.0, 0.4, 1.1);
        let (s1, s3) = (0.5, -0.8);
        let composed = integrate(s3 - 16.0, s3 + 16.0, |s2| {
            v_heat(r1, s1, r2, s2).unwrap() * v_heat(r2, s2, r3, s3).unwrap()
        });
        let direct = v_heat(r1, s1, r3, s3).unwrap();
        assert!(((composed - direct) / direct).abs() < 1e-8);
    }

    #[test]
    fn v_heat_identity_on_ingredients() {
        // The heat kernel carries the ingredient at a later label to the
        // ingredient at the earlier label: V_{r1,r2} f_{r2} = f_{r1},
        // V_{r1,r2} K_{r2,r2}(., y) in the first slot likewise, and V 1 = 1.
        let (r1, r2, s1) = (0.2, 1.0, -0.5);
        let smeared = integrate(s1 - 18.0, s1 + 18.0, |y| {
            v_heat(r1, s1, r2, y).unwrap() * f_step(r2, y).unwrap()
        });
        let direct = f_step(r1, s1).unwrap();
        assert!((smeared - direct).abs() < 1e-6, "Vf: {smeared} vs {direct}");

        let y0 = 0.3;
        let smeared_k = integrate(s1 - 18.0, s1 + 18.0, |x| {
            v_heat(r1, s1, r2, x).unwrap() * k_conj(r2, x, r2, y0).unwrap()
        });
        let direct_k = k_conj(r1, s1, r2, y0).unwrap();
        assert!(
            ((smeared_k - direct_k) / direct_k).abs() < 1e-6,
            "VK: {smeared_k} vs {direct_k}"
        );
    }

    #[test]
    fn k_conj_origin_and_symmetry() {
        // K(0,0;0,0) = Ai'(0)^2.
        let want = 0.2588194037928068f64.powi(2);
        let got = k_conj(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(((got - want) / want).abs() < 1e-12, "got {got}");
        // r = 0 removes the conjugation; the integrand is symmetric.
        let a = k_conj(0.0, 0.7, 0.0, -1.2).unwrap();
        let b = k_conj(0.0, -1.2, 0.0, 0.7).unwrap();
        assert!(((a - b) / a).abs() < 1e-13);
    }

    #[test]
    fn f_step_limits_and_decomposition() {
        // Shared code path makes f_step = 1 + f* exact.
        for &(r, s) in &[(0.0, 0.0), (0.5, -2.0), (-0.4, 3.0)] {
            let lhs = f_step(r, s).unwrap();
            let rhs = 1.0 + f_star(r, s).unwrap();
            assert_eq!(lhs, rhs);
        }
        // f_step -> 1 from below as s -> +infinity.
        assert!((f_step(0.0, 12.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn g_step_at_zero_delta_is_stationary_g() {
        for &(r, s) in &[(0.0, 0.0), (0.5, -1.5), (-0.3, 2.0)] {
            let ing = stationary_ingredients(r, 0.0).unwrap();
            let a = g_step(r, s, 0.0).unwrap();
            let b = ing.g(s).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        // g -> 1 as s -> +infinity.
        assert!((g_step(0.2, 14.0, 0.0).unwrap() - 1.0).abs() < 1e-10);
        assert!(g_step(0.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn stationary_simplifications_at_r_zero() {
        // f*(s) = -int_s^inf Ai, g(s) = int_{-inf}^s Ai, so
        // g(s) - 1 - f*(s) = 0 for all s.
        let ing = stationary_ingredients(0.0, 0.0).unwrap();
        for &s in &[-4.0, -1.0, 0.0, 2.5, 6.0] {
            let gap = ing.g(s).unwrap() - 1.0 - ing.f_star(s).unwrap();
            assert!(gap.abs() < 1e-12, "gap {gap} at s={s}");
            let direct = -airy_tail(s, 0.0, 0.0).unwrap();
            assert!((ing.f_star(s).unwrap() - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn r_scalar_reference_and_iterated_cross_check() {
        // At r1 = 0, s1 = 0: R = int_0^inf y Ai(y) dy = -Ai'(0).
        let ing = stationary_ingredients(0.0, 0.0).unwrap();
        assert!(
            (ing.r_value - 0.2588194037928068).abs() < 1e-12,
            "R = {}",
            ing.r_value
        );
        // Iterated double integral agrees with the exchanged-order form.
        let (r1, s1) = (0.4f64, -1.0);
        let swapped = stationary_ingredients(r1, s1).unwrap().r_value - s1;
        let iterated = (2.0 / 3.0 * r1.powi(3)).exp()
            * integrate(s1, s1 + 40.0, |x| airy_tail(x, r1, r1 * r1).unwrap());
        assert!(
            ((swapped - iterated) / swapped).abs() < 1e-10,
            "{swapped} vs {iterated}"
        );
    }

    #[test]
    fn kdelta_entry_assembly() {
        let frame = ScalingFrame::new(1000.0, 0.5, vec![0.0, 1.0]).unwrap();
        // delta = 0, diagonal block: pure conjugated Airy kernel.
        let frame0 = ScalingFrame::new(1000.0, 0.0, vec![0.0, 1.0]).unwrap();
        let e = kdelta_entry(0, 0.3, 0, -0.2, &frame0, 0.0).unwrap();
        assert_eq!(e, k_conj(0.0, 0.3, 0.0, -0.2).unwrap());
        // Off-diagonal with r_i < r_j includes -v_heat.
        let upper = kdelta_entry(0, 0.3, 1, -0.2, &frame0, 0.0).unwrap();
        let expected = k_conj(0.0, 0.3, 1.0, -0.2).unwrap() - v_heat(0.0, 0.3, 1.0, -0.2).unwrap();
        assert!((upper - expected).abs() < 1e-15);
        // Lower-triangular block has no heat-kernel term.
        let lower = kdelta_entry(1, 0.3, 0, -0.2, &frame0, 0.0).unwrap();
        assert_eq!(lower, k_conj(1.0, 0.3, 0.0, -0.2).unwrap());
        // Full assembly against independent re-evaluation of each factor.
        let entry = kdelta_entry(0, 0.0, 0, 0.0, &frame, 0.5).unwrap();
        let want = k_conj(0.0, 0.0, 0.0, 0.0).unwrap()
            + 0.5 * f_step(0.0, 0.0).unwrap() * g_step(0.0, 0.0, 0.5).unwrap();
        assert!(((entry - want) / want).abs() < 1e-14);
        assert!(kdelta_entry(2, 0.0, 0, 0.0, &frame, 0.5).is_err());
    }
}
