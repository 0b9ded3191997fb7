//! Gauss–Legendre quadrature: single panels, composite rules, and the
//! node/weight container shared by the integral-operator discretizations.

use crate::error::{Error, Result};

/// Nodes and weights of a quadrature rule on an interval.
///
/// Nodes are strictly increasing and weights are positive; for the
/// composite Gauss–Legendre rules built here the weights sum to the
/// length of the domain.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Lower cut and upper truncation (a, b) of the covered interval.
    pub domain: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to a function.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial with the
/// usual Chebyshev-based initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess: roots of the Chebyshev polynomial.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule of order `n` mapped affinely onto [a, b].
pub fn panel(a: f64, b: f64, n: usize) -> QuadratureRule {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    QuadratureRule {
        nodes: xs.iter().map(|&x| mid + half * x).collect(),
        weights: ws.iter().map(|&w| half * w).collect(),
        domain: (a, b),
    }
}

/// Composite Gauss–Legendre rule on [cut, s_max] with roughly `n_nodes`
/// nodes in total, using panels that are denser near the lower cut
/// (where kernels vary fastest) and widen geometrically upward.
pub fn composite_rule(cut: f64, s_max: f64, n_nodes: usize) -> Result<QuadratureRule> {
    if !(cut < s_max) {
        return Err(Error::Domain(format!(
            "quadrature domain requires cut < s_max, got [{cut}, {s_max}]"
        )));
    }
    if n_nodes < 8 {
        return Err(Error::Domain(format!(
            "at least 8 quadrature nodes required, got {n_nodes}"
        )));
    }
    // Panel edges: width 1 for the first two panels, then doubling,
    // capped so no panel is wider than a quarter of the domain.
    let len = s_max - cut;
    let mut edges = vec![cut];
    let mut w = (len / 8.0).min(1.0);
    let w_cap = len / 4.0;
    let mut pos = cut;
    let mut count = 0;
    while pos < s_max - 1e-12 {
        pos = (pos + w).min(s_max);
        edges.push(pos);
        count += 1;
        if count >= 2 {
            w = (w * 2.0).min(w_cap);
        }
    }
    let n_panels = edges.len() - 1;
    let per_panel = n_nodes.div_ceil(n_panels).max(4);
    let mut nodes = Vec::with_capacity(per_panel * n_panels);
    let mut weights = Vec::with_capacity(per_panel * n_panels);
    for i in 0..n_panels {
        let p = panel(edges[i], edges[i + 1], per_panel);
        nodes.extend(p.nodes);
        weights.extend(p.weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: (cut, s_max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_reference() {
        // Classical 5-point Gauss-Legendre nodes/weights on [-1, 1].
        let (x, w) = gauss_legendre(5);
        let xr = [
            -0.906179845938663992797626878299,
            -0.538469310105683091036314420700,
            0.0,
            0.538469310105683091036314420700,
            0.906179845938663992797626878299,
        ];
        let wr = [
            0.236926885056189087514264040720,
            0.478628670499366468041291514836,
            0.568888888888888888888888888889,
            0.478628670499366468041291514836,
            0.236926885056189087514264040720,
        ];
        for i in 0..5 {
            assert!((x[i] - xr[i]).abs() < 1e-14, "node {i}");
            assert!((w[i] - wr[i]).abs() < 1e-14, "weight {i}");
        }
    }

    #[test]
    fn polynomial_exactness() {
        // n-point rule integrates degree 2n-1 exactly.
        let p = panel(-1.0, 2.0, 8);
        let exact = (2.0_f64.powi(16) - (-1.0_f64).powi(16)) / 16.0;
        let got = p.integrate(|x| x.powi(15));
        assert!((got - exact).abs() / exact.abs() < 1e-13);
    }

    #[test]
    fn composite_constant_and_exponential() {
        let r = composite_rule(0.0, 1.0, 16).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        let r = composite_rule(0.0, 40.0, 160).unwrap();
        let got = r.integrate(|x| (-x).exp());
        assert!((got - 1.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn composite_weights_sum_to_length() {
        let r = composite_rule(-12.0, 14.0, 120).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 26.0).abs() < 1e-11);
        assert!(r.weights.iter().all(|&w| w > 0.0));
        assert!(r.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(composite_rule(1.0, 1.0, 32).is_err());
        assert!(composite_rule(0.0, 1.0, 4).is_err());
    }
}
