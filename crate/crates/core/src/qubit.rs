use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `|c_g|² + |c_e|² = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Atomic qubit `c_g|g⟩ + c_e|e⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomQubit {
    c_g: Complex64,
    c_e: Complex64,
}

impl AtomQubit {
    pub fn new(c_g: Complex64, c_e: Complex64) -> Result<Self> {
        if !c_g.is_finite() || !c_e.is_finite() {
            return Err(Error::InvalidParameter("qubit amplitudes must be finite".into()));
        }
        let norm_sqr = c_g.norm_sqr() + c_e.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { c_g, c_e })
    }

    pub fn from_real(c_g: f64, c_e: f64) -> Result<Self> {
        Self::new(Complex64::new(c_g, 0.0), Complex64::new(c_e, 0.0))
    }

    pub fn ground() -> Self {
        Self { c_g: Complex64::new(1.0, 0.0), c_e: Complex64::new(0.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { c_g: Complex64::new(0.0, 0.0), c_e: Complex64::new(1.0, 0.0) }
    }

    /// Point on the Bloch sphere: `cos(θ/2)|g⟩ + e^{iφ} sin(θ/2)|e⟩`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self {
            c_g: Complex64::new((theta / 2.0).cos(), 0.0),
            c_e: Complex64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    pub fn c_g(&self) -> Complex64 {
        self.c_g
    }

    pub fn c_e(&self) -> Complex64 {
        self.c_e
    }

    /// `c₊ = (c_e + c_g)/2`.
    pub fn c_plus(&self) -> Complex64 {
        0.5 * (self.c_e + self.c_g)
    }

    /// `c₋ = (c_e - c_g)/2`.
    pub fn c_minus(&self) -> Complex64 {
        0.5 * (self.c_e - self.c_g)
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let p = Complex64::from_polar(1.0, phase);
        Self { c_g: self.c_g * p, c_e: self.c_e * p }
    }
}

/// Fixed 17-point grid on the Bloch sphere: both poles plus three rings
/// (θ = π/4, π/2, 3π/4) of five equally spaced azimuths each.
pub fn bloch_grid() -> Vec<AtomQubit> {
    let mut grid = vec![AtomQubit::ground(), AtomQubit::excited()];
    for ring in 1..=3 {
        let theta = ring as f64 * PI / 4.0;
        for k in 0..5 {
            grid.push(AtomQubit::from_bloch(theta, 2.0 * PI * k as f64 / 5.0));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(AtomQubit::from_real(1.0, 1.0), Err(Error::NotNormalized { .. })));
        assert!(AtomQubit::from_real(0.6, 0.8).is_ok());
    }

    #[test]
    fn c_plus_minus_relations() {
        let q = AtomQubit::from_real(0.6, 0.8).unwrap();
        assert!((q.c_plus() - Complex64::new(0.7, 0.0)).norm() < 1e-15);
        assert!((q.c_minus() - Complex64::new(0.1, 0.0)).norm() < 1e-15);
        assert!((q.c_plus() + q.c_minus() - q.c_e()).norm() < 1e-15);
        assert!((q.c_plus() - q.c_minus() - q.c_g()).norm() < 1e-15);
    }

    #[test]
    fn grid_has_seventeen_normalized_distinct_points() {
        let grid = bloch_grid();
        assert_eq!(grid.len(), 17);
        for (i, q) in grid.iter().enumerate() {
            assert!((q.c_g().norm_sqr() + q.c_e().norm_sqr() - 1.0).abs() < 1e-15);
            for p in &grid[..i] {
                assert!((p.c_g() - q.c_g()).norm() + (p.c_e() - q.c_e()).norm() > 1e-3);
            }
        }
    }
}
