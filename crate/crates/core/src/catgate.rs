//! Cat-qubit algebra on the ordered, non-orthogonal basis `(|−α⟩, |α⟩)`.
//!
//! Index 0 is `|−α⟩` and index 1 is `|α⟩`. Two Hadamard gates are provided:
//!
//! * [`hadamard_ideal`] applies `(1/√2)[[1, 1], [1, −1]]` to the coefficients,
//!   the orthonormal-limit picture;
//! * [`hadamard_literal`] applies the Fock-space operator
//!   `|−α⟩⟨−α| − |α⟩⟨α| + |α⟩⟨−α| + |−α⟩⟨α|` (no `1/√2`) with exact bras.
//!
//! In coefficient coordinates the literal operator acts as `M·G`, with
//! `M = [[1, 1], [1, −1]]` and `G = [[1, s], [s̄, 1]]` the Gram matrix,
//! `s = ⟨−α|α⟩ = e^{−2|α|²}`. It reduces to `M` only as `s → 0`. Gate outputs
//! are renormalized before any fidelity is taken.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{default_cutoff, overlap_analytic, FieldState};
use crate::qubit::bloch_grid;

/// Largest Gram-matrix condition number accepted by [`decompose`].
///
/// `κ = (1 + s)/(1 − s)`; this rejects `|α| ≲ 0.14` (`κ(0.1) ≈ 100`).
pub const MAX_GRAM_CONDITION: f64 = 50.0;

/// Qubit `a|−α⟩ + b|α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatQubit {
    pub alpha: Complex64,
    /// Coefficient of `|−α⟩`.
    pub a: Complex64,
    /// Coefficient of `|α⟩`.
    pub b: Complex64,
}

impl CatQubit {
    pub fn new(alpha: Complex64, a: Complex64, b: Complex64) -> Self {
        Self { alpha, a, b }
    }

    /// `⟨−α|α⟩` in closed form (real for every α, since `conj(−α)α = −|α|²`).
    pub fn overlap(&self) -> Complex64 {
        overlap_analytic(-self.alpha, self.alpha).value
    }

    /// `s = |⟨−α|α⟩| = e^{−2|α|²}`.
    pub fn s(&self) -> f64 {
        self.overlap().norm()
    }

    /// `|a|² + |b|² + 2 Re(ā b ⟨−α|α⟩)`.
    pub fn gram_norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr() + 2.0 * (self.a.conj() * self.b * self.overlap()).re
    }

    /// Rescales to unit norm under the Gram metric.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.gram_norm_sqr().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok(Self { a: self.a / norm, b: self.b / norm, ..*self })
    }

    /// Coefficients as a plain pair `(a, b)`.
    pub fn coefficients(&self) -> [Complex64; 2] {
        [self.a, self.b]
    }
}

/// `(a, b) ↦ ((a + b)/√2, (a − b)/√2)`.
pub fn hadamard_ideal(q: &CatQubit) -> CatQubit {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    CatQubit { a: h * (q.a + q.b), b: h * (q.a - q.b), ..*q }
}

/// Exact action of the literal operator on coefficients: `(a, b) ↦ M·G·(a, b)`.
pub fn literal_coefficient_map(q: &CatQubit) -> CatQubit {
    let s = q.overlap();
    let bra_minus = q.a + s * q.b;
    let bra_plus = s.conj() * q.a + q.b;
    CatQubit { a: bra_minus + bra_plus, b: bra_minus - bra_plus, ..*q }
}

/// Truncated `|−α⟩`, `|α⟩` together with their numeric Gram matrix.
#[derive(Debug, Clone)]
pub struct CatBasis {
    alpha: Complex64,
    minus: FieldState,
    plus: FieldState,
    gram: [[Complex64; 2]; 2],
}

impl CatBasis {
    pub fn new(alpha: Complex64, n_max: Option<usize>) -> Result<Self> {
        let n_max = n_max.unwrap_or_else(|| default_cutoff(alpha));
        let minus = FieldState::coherent(-alpha, Some(n_max))?;
        let plus = FieldState::coherent(alpha, Some(n_max))?;
        let gram = [
            [minus.inner(&minus)?, minus.inner(&plus)?],
            [plus.inner(&minus)?, plus.inner(&plus)?],
        ];
        Ok(Self { alpha, minus, plus, gram })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn n_max(&self) -> usize {
        self.minus.n_max()
    }

    pub fn minus(&self) -> &FieldState {
        &self.minus
    }

    pub fn plus(&self) -> &FieldState {
        &self.plus
    }

    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        self.gram
    }

    /// Ratio of the Gram matrix eigenvalues.
    pub fn condition_number(&self) -> f64 {
        let [[g00, g01], [_, g11]] = self.gram;
        let mean = 0.5 * (g00.re + g11.re);
        let radius = (0.25 * (g00.re - g11.re).powi(2) + g01.norm_sqr()).sqrt();
        let low = mean - radius;
        if low <= 0.0 {
            f64::INFINITY
        } else {
            (mean + radius) / low
        }
    }

    /// `a|−α⟩ + b|α⟩` as a Fock vector.
    pub fn embed(&self, q: &CatQubit) -> Result<FieldState> {
        self.minus.scaled(q.a).add_scaled(q.b, &self.plus)
    }

    /// Solves `G·(a, b)ᵀ = (⟨−α|f⟩, ⟨α|f⟩)ᵀ`; returns the in-span coefficients
    /// and the norm of the out-of-span remainder.
    pub fn decompose(&self, f: &FieldState) -> Result<(CatQubit, f64)> {
        let condition = self.condition_number();
        if condition.is_nan() || condition > MAX_GRAM_CONDITION {
            return Err(Error::IllConditionedBasis { condition });
        }
        let r0 = self.minus.inner(f)?;
        let r1 = self.plus.inner(f)?;
        let [[g00, g01], [g10, g11]] = self.gram;
        let det = g00 * g11 - g01 * g10;
        let a = (g11 * r0 - g01 * r1) / det;
        let b = (g00 * r1 - g10 * r0) / det;
        let q = CatQubit::new(self.alpha, a, b);
        let residual = f.add_scaled(Complex64::new(-1.0, 0.0), &self.embed(&q)?)?.norm();
        Ok((q, residual))
    }

    /// `|−α⟩(⟨−α|f⟩ + ⟨α|f⟩) + |α⟩(⟨−α|f⟩ − ⟨α|f⟩)`, unnormalized.
    pub fn hadamard_literal(&self, f: &FieldState) -> Result<FieldState> {
        let bra_minus = self.minus.inner(f)?;
        let bra_plus = self.plus.inner(f)?;
        self.minus.scaled(bra_minus + bra_plus).add_scaled(bra_minus - bra_plus, &self.plus)
    }
}

pub fn hadamard_literal(f: &FieldState, alpha: Complex64) -> Result<FieldState> {
    CatBasis::new(alpha, Some(f.n_max()))?.hadamard_literal(f)
}

pub fn embed(q: &CatQubit, n_max: Option<usize>) -> Result<FieldState> {
    CatBasis::new(q.alpha, n_max)?.embed(q)
}

pub fn decompose(f: &FieldState, alpha: Complex64) -> Result<(CatQubit, f64)> {
    CatBasis::new(alpha, Some(f.n_max()))?.decompose(f)
}

/// Worst case over the 17-point Bloch grid of the infidelity between the
/// normalized literal-gate output and the embedded ideal-gate output.
pub fn gate_error(alpha: Complex64) -> Result<f64> {
    let basis = CatBasis::new(alpha, None)?;
    let mut worst: f64 = 0.0;
    for point in bloch_grid() {
        let q = CatQubit::new(alpha, point.c_g(), point.c_e()).normalized()?;
        let input = basis.embed(&q)?;
        let (recovered, _) = basis.decompose(&input)?;
        let ideal = basis.embed(&hadamard_ideal(&recovered))?;
        let literal = basis.hadamard_literal(&input)?;
        worst = worst.max(ideal.infidelity(&literal)?);
    }
    Ok(worst)
}
