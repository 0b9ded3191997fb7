//! KPZ scaling maps between the particle system and the rescaled process.
//!
//! The observable of interest is
//!   X_t(r) = t^{-1/3} ( x_{n(t,r)}(t) - 2t - 2 r t^{2/3} ),
//! with lattice index n(t, r) = floor(t + 2 r t^{2/3}), simulated at
//! boundary drift rho = 1 - t^{-1/3} delta.

use crate::error::{Error, Result};

/// Largest admissible time horizon: beyond this, t^{2/3} arithmetic in
/// doubles drops below ten significant digits.
pub const T_MAX: f64 = 1e7;

/// Intensities of the initial data and the boundary drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Intensity of the initial Poisson data (gaps are Exp(lambda)).
    pub lambda: f64,
    /// Drift of the boundary particle.
    pub rho: f64,
}

/// A rescaling frame: time horizon, drift offset delta, and the list of
/// rescaled space-time ray parameters r.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFrame {
    pub t: f64,
    pub delta: f64,
    pub r_list: Vec<f64>,
}

impl ScalingFrame {
    pub fn new(t: f64, delta: f64, r_list: Vec<f64>) -> Result<Self> {
        if !(t > 0.0) || t > T_MAX {
            return Err(Error::Domain(format!(
                "frame time must satisfy 0 < t <= {T_MAX}, got {t}"
            )));
        }
        if r_list.is_empty() {
            return Err(Error::Domain("frame needs at least one r value".into()));
        }
        if r_list.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Domain("r values must be strictly increasing".into()));
        }
        Ok(ScalingFrame { t, delta, r_list })
    }

    /// Boundary drift corresponding to this frame's delta.
    pub fn rho(&self) -> f64 {
        rho_from_delta(self.t, self.delta)
    }
}

/// Lattice index n(t, r) = floor(t + 2 r t^{2/3}); floor rounds toward
/// minus infinity. Negative indices are rejected: they would address the
/// half of the system that the boundary reduction replaces.
pub fn lattice_index(t: f64, r: f64) -> Result<usize> {
    check_t(t)?;
    let n = (t + 2.0 * r * t.powf(2.0 / 3.0)).floor();
    if n < 0.0 {
        return Err(Error::Domain(format!(
            "lattice index {n} at (t={t}, r={r}) is negative"
        )));
    }
    Ok(n as usize)
}

/// Rescaled position X_t(r) of a particle at lattice position `x`.
pub fn rescale_position(x: f64, t: f64, r: f64) -> Result<f64> {
    check_t(t)?;
    Ok((x - 2.0 * t - 2.0 * r * t.powf(2.0 / 3.0)) * t.powf(-1.0 / 3.0))
}

/// Boundary drift rho = 1 - t^{-1/3} delta realizing the scaled drift
/// offset delta.
pub fn rho_from_delta(t: f64, delta: f64) -> f64 {
    1.0 - delta * t.powf(-1.0 / 3.0)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || t > T_MAX {
        return Err(Error::Domain(format!(
            "time must satisfy 0 < t <= {T_MAX}, got {t}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_index_examples() {
        assert_eq!(lattice_index(1000.0, 0.0).unwrap(), 1000);
        // 1000 + 2*1*100 = 1200 exactly.
        assert_eq!(lattice_index(1000.0, 1.0).unwrap(), 1200);
        // floor toward -inf on a non-integer value.
        assert_eq!(lattice_index(1000.0, -0.7).unwrap(), 860);
        assert!(lattice_index(8.0, -2.0).is_err());
    }

    #[test]
    fn lattice_index_monotone_in_r() {
        let t = 777.0;
        let mut prev = 0;
        for i in 0..20 {
            let r = -0.5 + i as f64 * 0.1;
            let n = lattice_index(t, r).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn rescale_round_trip() {
        // Substituting the centering into rescale_position returns the
        // fluctuation exactly.
        let (t, r) = (1000.0f64, 0.4f64);
        let fluct = 1.7;
        let x = 2.0 * t + 2.0 * r * t.powf(2.0 / 3.0) + fluct * t.powf(1.0 / 3.0);
        let got = rescale_position(x, t, r).unwrap();
        assert!((got - fluct).abs() < 1e-12);
    }

    #[test]
    fn rho_from_delta_values() {
        assert_eq!(rho_from_delta(1000.0, 0.0), 1.0);
        assert!((rho_from_delta(1000.0, 0.5) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn frame_validation() {
        assert!(ScalingFrame::new(1000.0, 0.5, vec![0.0, 1.0]).is_ok());
        assert!(ScalingFrame::new(1000.0, 0.5, vec![1.0, 0.0]).is_err());
        assert!(ScalingFrame::new(-1.0, 0.5, vec![0.0]).is_err());
        assert!(ScalingFrame::new(1e8, 0.5, vec![0.0]).is_err());
    }
}
