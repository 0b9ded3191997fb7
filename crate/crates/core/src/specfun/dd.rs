//! Minimal double-double ("compensated") arithmetic used to evaluate the
//! Airy Maclaurin series in an effective ~32-digit accumulator, so that
//! the catastrophic cancellation of the series at moderate |x| does not
//! limit the achievable accuracy of the double-precision result.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    #[inline]
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn add(self, other: Dd) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Self {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    /// Division by an exact f64 divisor, accurate to double-double.
    #[inline]
    pub fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        // Remainder self - q1*d computed exactly, then corrected.
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p) + (self.lo - e);
        let q2 = r / d;
        let (hi, lo) = two_sum(q1, q2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Self {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> f64 {
        self.value().abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_keeps_low_order_bits() {
        let a = Dd::from(1.0);
        let b = Dd::from(1e-20);
        let s = a.add(b);
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
    }

    #[test]
    fn cancellation_preserved() {
        // (1 + 1e-20) - 1 recovered exactly.
        let s = Dd::from(1.0).add(Dd::from(1e-20)).sub(Dd::from(1.0));
        assert_eq!(s.value(), 1e-20);
    }

    #[test]
    fn division_matches_exact_reciprocal() {
        // 1/3 in double-double: hi = nearest double, lo = residual.
        let q = Dd::from(1.0).div_f64(3.0);
        let back = q.mul_f64(3.0);
        assert!((back.value() - 1.0).abs() < 1e-31);
        assert!(q.lo != 0.0, "low word must capture the residual");
    }

    #[test]
    fn product_error_term() {
        let x = 1.0 + 2f64.powi(-30);
        let p = Dd::from(x).mul(Dd::from(x));
        // Exact square: 1 + 2^-29 + 2^-60; hi holds 1 + 2^-29, lo holds 2^-60.
        assert_eq!(p.hi, 1.0 + 2f64.powi(-29));
        assert_eq!(p.lo, 2f64.powi(-60));
    }
}
