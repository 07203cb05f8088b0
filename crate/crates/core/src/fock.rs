//! Truncated Fock-space representation of the single cavity mode.
//!
//! A [`FieldState`] holds amplitudes `c_n` for photon numbers `0..=n_max`.
//! Coherent states are built in the log domain so that cutoffs well past
//! `n = 170` (where `n!` overflows) stay finite.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest truncation leakage `1 - ‖ψ‖²` accepted when building coherent states.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

/// Poisson tail targeted by [`default_cutoff`].
pub const DEFAULT_TAIL: f64 = 1e-13;

/// Default cutoff: `ceil(|α|² + 10·max(|α|, 1))`, raised further while the
/// Poisson tail above it exceeds [`DEFAULT_TAIL`]. The base rule alone leaks
/// up to `1e-9` for `|α| ≈ 1`.
pub fn default_cutoff(alpha: Complex64) -> usize {
    let mean = alpha.norm_sqr();
    let mut n_max = (mean + 10.0 * mean.sqrt().max(1.0)).ceil() as usize;
    while poisson_tail(mean, n_max) > DEFAULT_TAIL {
        n_max += 1;
    }
    n_max
}

/// `P(n > n_max)` for a Poisson distribution, summed term by term.
pub fn poisson_tail(mean: f64, n_max: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let ln_factorial: f64 = (1..=n_max + 1).map(|k| (k as f64).ln()).sum();
    let mut ln_term = -mean + (n_max + 1) as f64 * ln_mean - ln_factorial;
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = ln_term.exp();
        tail += term;
        if n as f64 > mean && term < tail * 1e-17 {
            return tail;
        }
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
    }
}

/// Pure state of the cavity mode in a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    amplitudes: Vec<Complex64>,
}

impl FieldState {
    /// Wraps raw amplitudes indexed by photon number.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter("field state needs at least one amplitude".into()));
        }
        if amplitudes.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes })
    }

    pub fn zero(n_max: usize) -> Self {
        Self { amplitudes: vec![Complex64::new(0.0, 0.0); n_max + 1] }
    }

    pub fn vacuum(n_max: usize) -> Self {
        Self::number(0, n_max)
    }

    /// Fock state `|n⟩`. Panics if `n > n_max`.
    pub fn number(n: usize, n_max: usize) -> Self {
        assert!(n <= n_max, "photon number {n} above cutoff {n_max}");
        let mut state = Self::zero(n_max);
        state.amplitudes[n] = Complex64::new(1.0, 0.0);
        state
    }

    /// Coherent state `|α⟩` with `c_n = e^{-|α|²/2} αⁿ / √(n!)`.
    ///
    /// `n_max = None` selects [`default_cutoff`]. Fails with
    /// [`Error::TruncationLeakage`] when more than [`LEAKAGE_LIMIT`] of the
    /// probability lies above the cutoff.
    pub fn coherent(alpha: Complex64, n_max: Option<usize>) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("coherent amplitude {alpha} is not finite")));
        }
        let n_max = n_max.unwrap_or_else(|| default_cutoff(alpha));
        let r = alpha.norm();
        let phase = alpha.arg();
        let mut amplitudes = Vec::with_capacity(n_max + 1);
        if r == 0.0 {
            amplitudes.push(Complex64::new(1.0, 0.0));
            amplitudes.resize(n_max + 1, Complex64::new(0.0, 0.0));
        } else {
            let ln_r = r.ln();
            let mut ln_factorial = 0.0;
            for n in 0..=n_max {
                if n > 0 {
                    ln_factorial += (n as f64).ln();
                }
                let ln_mag = -0.5 * r * r + n as f64 * ln_r - 0.5 * ln_factorial;
                amplitudes.push(Complex64::from_polar(ln_mag.exp(), n as f64 * phase));
            }
        }
        let state = Self { amplitudes };
        let leakage = 1.0 - state.norm_sqr();
        if leakage > LEAKAGE_LIMIT {
            return Err(Error::TruncationLeakage { leakage, limit: LEAKAGE_LIMIT, n_max });
        }
        Ok(state)
    }

    pub fn n_max(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨n̂⟩ = Σ n |c_n|²` (not divided by the norm).
    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateState);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|c| c * factor).collect() }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, factor: Complex64, other: &FieldState) -> Result<Self> {
        self.check_dim(other)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self { amplitudes })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &FieldState) -> Result<Complex64> {
        self.check_dim(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Applies `e^{-iθn̂}`, mapping `|α⟩` to `|e^{-iθ}α⟩`.
    pub fn apply_number_phase(&self, theta: f64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, -theta * n as f64))
            .collect();
        Self { amplitudes }
    }

    /// `|⟨f|g⟩|² / (‖f‖² ‖g‖²)`, clamped to `[0, 1]`.
    pub fn fidelity(&self, other: &FieldState) -> Result<f64> {
        let overlap = self.inner(other)?;
        let (nf, ng) = (self.norm_sqr(), other.norm_sqr());
        if nf == 0.0 || ng == 0.0 {
            return Err(Error::DegenerateState);
        }
        Ok((overlap.norm_sqr() / (nf * ng)).clamp(0.0, 1.0))
    }

    /// `1 - fidelity`, evaluated as the squared norm of the component of
    /// `other` orthogonal to `self`. Stays accurate when the infidelity is far
    /// below machine epsilon, where `1 - F` would cancel to zero.
    pub fn infidelity(&self, other: &FieldState) -> Result<f64> {
        let overlap = self.inner(other)?;
        let (nf, ng) = (self.norm_sqr(), other.norm_sqr());
        if nf == 0.0 || ng == 0.0 {
            return Err(Error::DegenerateState);
        }
        let projection = overlap / nf;
        let orthogonal: f64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(f, g)| (g - projection * f).norm_sqr())
            .sum();
        Ok((orthogonal / ng).clamp(0.0, 1.0))
    }

    fn check_dim(&self, other: &FieldState) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Closed-form overlap `⟨α|β⟩ = exp(-½|α|² - ½|β|² + ᾱβ)`.
///
/// `log_magnitude` (natural log) stays exact where `value` underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Overlap {
    pub value: Complex64,
    pub log_magnitude: f64,
    pub phase: f64,
}

impl Overlap {
    pub fn magnitude(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn log10_magnitude(&self) -> f64 {
        self.log_magnitude / std::f64::consts::LN_10
    }
}

pub fn overlap_analytic(alpha: Complex64, beta: Complex64) -> Overlap {
    let exponent = -0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + alpha.conj() * beta;
    Overlap { value: exponent.exp(), log_magnitude: exponent.re, phase: exponent.im }
}
