//! Atom-field dynamics in the degenerate Raman regime.
//!
//! Two models share the same Hilbert-space layout (atom level major, photon
//! number minor):
//!
//! * the effective two-level Hamiltonian with Stark shifts,
//!   `H = n̂β(|g⟩⟨g| + |e⟩⟨e|) + n̂β(|e⟩⟨g| + |g⟩⟨e|)` with `β = -λ²/Δ`;
//! * a Λ-system Hamiltonian in the rotating frame,
//!   `H = Δ|f⟩⟨f| + λ[â(|f⟩⟨g| + |f⟩⟨e|) + h.c.]`.
//!   The microscopic model is not given explicitly in the source material;
//!   this is a reconstruction whose adiabatic elimination reproduces the
//!   effective Hamiltonian above (including the sign of `β`).
//!
//! Units: frequencies in kHz, times in ms.
//!
//! Time convention: `β < 0` for `Δ > 0`, and the cat-producing interaction
//! time is taken as `t = π/(2|β|)`. Since `e^{-2iβt} = -1` for either sign of
//! `β`, this is the same state as the nominal `t = π/2β`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{default_cutoff, FieldState};
use crate::qubit::AtomQubit;

/// Tolerance on the resonance condition `ω_f - ω₀ = Δ + ω`, in kHz.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;
/// Entrywise Hermiticity tolerance, relative to the largest entry.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Largest change in the final state allowed between a run and its step-halved rerun.
pub const STEP_CONVERGENCE_TOLERANCE: f64 = 1e-9;
/// Number of step doublings attempted before giving up.
pub const MAX_REFINEMENTS: u32 = 6;
/// Largest `‖H‖·dt` per step chosen by [`recommended_steps`].
pub const MAX_PHASE_PER_STEP: f64 = 100.0;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AtomLevel {
    Ground,
    Excited,
    Upper,
}

impl AtomLevel {
    pub fn index(self) -> usize {
        match self {
            AtomLevel::Ground => 0,
            AtomLevel::Excited => 1,
            AtomLevel::Upper => 2,
        }
    }
}

/// Physical parameters of the Raman interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RamanParams {
    lambda_coupling: f64,
    delta: f64,
    alpha: Complex64,
    omega0: Option<f64>,
    omega_f: Option<f64>,
    omega: Option<f64>,
}

impl RamanParams {
    pub fn new(lambda_coupling: f64, delta: f64, alpha: Complex64) -> Result<Self> {
        if !lambda_coupling.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite".into()));
        }
        if !delta.is_finite() || delta == 0.0 {
            return Err(Error::InvalidParameter("detuning must be finite and non-zero".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("coherent amplitude must be finite".into()));
        }
        let params = Self { lambda_coupling, delta, alpha, omega0: None, omega_f: None, omega: None };
        if !params.beta().is_finite() {
            return Err(Error::InvalidParameter("effective coupling -λ²/Δ overflows".into()));
        }
        Ok(params)
    }

    /// Attaches level and mode frequencies, checking `ω_f - ω₀ = Δ + ω`.
    pub fn with_frequencies(mut self, omega0: f64, omega_f: f64, omega: f64) -> Result<Self> {
        let mismatch = (omega_f - omega0) - (self.delta + omega);
        if !mismatch.is_finite() || mismatch.abs() > RESONANCE_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "resonance condition violated: ω_f - ω₀ - (Δ + ω) = {mismatch:e} kHz"
            )));
        }
        self.omega0 = Some(omega0);
        self.omega_f = Some(omega_f);
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn with_alpha(&self, alpha: Complex64) -> Result<Self> {
        self.rebuild(self.lambda_coupling, self.delta, alpha)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        self.rebuild(self.lambda_coupling, delta, self.alpha)
    }

    pub fn with_lambda(&self, lambda_coupling: f64) -> Result<Self> {
        self.rebuild(lambda_coupling, self.delta, self.alpha)
    }

    // Frequencies are dropped when Δ changes, since they would break resonance.
    fn rebuild(&self, lambda_coupling: f64, delta: f64, alpha: Complex64) -> Result<Self> {
        let params = Self::new(lambda_coupling, delta, alpha)?;
        match (self.omega0, self.omega_f, self.omega) {
            (Some(w0), Some(wf), Some(w)) if delta == self.delta => params.with_frequencies(w0, wf, w),
            _ => Ok(params),
        }
    }

    pub fn lambda_coupling(&self) -> f64 {
        self.lambda_coupling
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn frequencies(&self) -> Option<(f64, f64, f64)> {
        Some((self.omega0?, self.omega_f?, self.omega?))
    }

    /// Effective coupling `β = -λ²/Δ` (kHz).
    pub fn beta(&self) -> f64 {
        -self.lambda_coupling * self.lambda_coupling / self.delta
    }

    /// `t = π/(2|β|)` (ms); infinite when the coupling vanishes.
    pub fn cat_time(&self) -> f64 {
        PI / (2.0 * self.beta().abs())
    }
}

/// Dense operator on `atom_levels × (n_max + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    atom_levels: usize,
    n_max: usize,
    matrix: DMatrix<Complex64>,
}

impl Operator {
    pub fn atom_levels(&self) -> usize {
        self.atom_levels
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `⟨level_row, n_row| H |level_col, n_col⟩`.
    pub fn element(&self, row: (AtomLevel, usize), col: (AtomLevel, usize)) -> Complex64 {
        self.matrix[(self.index(row.0, row.1), self.index(col.0, col.1))]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        defect
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOLERANCE * self.max_abs_entry().max(1.0)
    }

    /// Infinity norm (max absolute row sum), an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|c| c.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    fn index(&self, level: AtomLevel, n: usize) -> usize {
        joint_index(self.n_max, level, n)
    }

    fn zeros(atom_levels: usize, n_max: usize) -> Self {
        let dim = atom_levels * (n_max + 1);
        Self { atom_levels, n_max, matrix: DMatrix::zeros(dim, dim) }
    }

    fn set(&mut self, row: (AtomLevel, usize), col: (AtomLevel, usize), value: f64) {
        let (i, j) = (self.index(row.0, row.1), self.index(col.0, col.1));
        self.matrix[(i, j)] = Complex64::new(value, 0.0);
    }
}

fn joint_index(n_max: usize, level: AtomLevel, n: usize) -> usize {
    level.index() * (n_max + 1) + n
}

/// Effective two-level Hamiltonian with Stark shifts.
///
/// On the photon-number-`n` block it is `nβ [[1, 1], [1, 1]]`, with
/// eigenvalues `0` and `2nβ`.
pub fn effective_hamiltonian(p: &RamanParams, n_max: usize) -> Operator {
    use AtomLevel::*;
    let mut h = Operator::zeros(2, n_max);
    let beta = p.beta();
    for n in 0..=n_max {
        let value = n as f64 * beta;
        for row in [Ground, Excited] {
            for col in [Ground, Excited] {
                h.set((row, n), (col, n), value);
            }
        }
    }
    h
}

/// Rotating-frame Λ Hamiltonian (reconstructed; see module docs).
///
/// Conserves the excitation number `n̂ + |f⟩⟨f|`.
pub fn full_hamiltonian(p: &RamanParams, n_max: usize) -> Operator {
    use AtomLevel::*;
    let mut h = Operator::zeros(3, n_max);
    for n in 0..=n_max {
        h.set((Upper, n), (Upper, n), p.delta());
    }
    for n in 1..=n_max {
        let coupling = p.lambda_coupling() * (n as f64).sqrt();
        for lower in [Ground, Excited] {
            h.set((Upper, n - 1), (lower, n), coupling);
            h.set((lower, n), (Upper, n - 1), coupling);
        }
    }
    h
}

/// Diagonal operator `n̂ + |f⟩⟨f|` on the three-level space.
pub fn excitation_number(n_max: usize) -> Operator {
    use AtomLevel::*;
    let mut op = Operator::zeros(3, n_max);
    for n in 0..=n_max {
        op.set((Ground, n), (Ground, n), n as f64);
        op.set((Excited, n), (Excited, n), n as f64);
        op.set((Upper, n), (Upper, n), n as f64 + 1.0);
    }
    op
}

/// Joint atom-field pure state, level-major amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    atom_levels: usize,
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

impl JointState {
    /// Stacks one field row per atomic level (2 or 3 rows).
    pub fn from_rows(rows: &[FieldState]) -> Result<Self> {
        if !(2..=3).contains(&rows.len()) {
            return Err(Error::InvalidParameter(format!("{} atomic levels; expected 2 or 3", rows.len())));
        }
        let n_max = rows[0].n_max();
        let mut amplitudes = Vec::with_capacity(rows.len() * (n_max + 1));
        for row in rows {
            if row.n_max() != n_max {
                return Err(Error::DimensionMismatch { expected: n_max + 1, found: row.dim() });
            }
            amplitudes.extend_from_slice(row.amplitudes());
        }
        Ok(Self { atom_levels: rows.len(), n_max, amplitudes })
    }

    /// `(Σ_k atom[k]|k⟩) ⊗ field`.
    pub fn product(atom: &[Complex64], field: &FieldState) -> Result<Self> {
        let rows: Vec<FieldState> = atom.iter().map(|&c| field.scaled(c)).collect();
        Self::from_rows(&rows)
    }

    pub fn atom_levels(&self) -> usize {
        self.atom_levels
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Unnormalized field conditioned on `level`, i.e. `⟨level|ψ⟩`.
    pub fn row(&self, level: AtomLevel) -> Result<FieldState> {
        if level.index() >= self.atom_levels {
            return Err(Error::InvalidParameter(format!("state has no {level:?} level")));
        }
        let start = level.index() * (self.n_max + 1);
        FieldState::from_amplitudes(self.amplitudes[start..start + self.n_max + 1].to_vec())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Population of `level` relative to the total norm.
    pub fn level_population(&self, level: AtomLevel) -> f64 {
        if level.index() >= self.atom_levels {
            return 0.0;
        }
        let start = level.index() * (self.n_max + 1);
        let pop: f64 = self.amplitudes[start..start + self.n_max + 1].iter().map(|c| c.norm_sqr()).sum();
        pop / self.norm_sqr()
    }

    /// Embeds a two-level state into the three-level space with empty `|f⟩` row.
    pub fn to_three_level(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(3 * (self.n_max + 1), ZERO);
        Self { atom_levels: 3, n_max: self.n_max, amplitudes }
    }

    pub fn inner(&self, other: &JointState) -> Result<Complex64> {
        self.check_shape(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn distance(&self, other: &JointState) -> Result<f64> {
        self.check_shape(other)?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// `1 - |⟨self|other⟩|²/(‖self‖²‖other‖²)` via the orthogonal component.
    pub fn infidelity(&self, other: &JointState) -> Result<f64> {
        let overlap = self.inner(other)?;
        let (na, nb) = (self.norm_sqr(), other.norm_sqr());
        if na == 0.0 || nb == 0.0 {
            return Err(Error::DegenerateState);
        }
        let projection = overlap / na;
        let orthogonal: f64 =
            self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (b - projection * a).norm_sqr()).sum();
        Ok((orthogonal / nb).clamp(0.0, 1.0))
    }

    pub fn expectation(&self, op: &Operator) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        let psi = DVector::from_column_slice(&self.amplitudes);
        let value = psi.dotc(&(op.matrix() * &psi));
        Ok(value.re / self.norm_sqr())
    }

    fn check_shape(&self, other: &JointState) -> Result<()> {
        if self.atom_levels != other.atom_levels || self.n_max != other.n_max {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Analytic solution of the effective model:
/// `(c₊|e^{-2iβt}α⟩ - c₋|α⟩)|g⟩ + (c₊|e^{-2iβt}α⟩ + c₋|α⟩)|e⟩`.
pub fn evolve_closed_form(q: &AtomQubit, p: &RamanParams, t: f64, n_max: Option<usize>) -> Result<JointState> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter("time must be finite".into()));
    }
    let n_max = n_max.unwrap_or_else(|| default_cutoff(p.alpha()));
    let initial = FieldState::coherent(p.alpha(), Some(n_max))?;
    let rotated = initial.apply_number_phase(2.0 * p.beta() * t);
    let (c_plus, c_minus) = (q.c_plus(), q.c_minus());
    let ground = rotated.scaled(c_plus).add_scaled(-c_minus, &initial)?;
    let excited = rotated.scaled(c_plus).add_scaled(c_minus, &initial)?;
    JointState::from_rows(&[ground, excited])
}

/// Step count keeping `‖H‖·dt` at or below [`MAX_PHASE_PER_STEP`].
pub fn recommended_steps(h: &Operator, t: f64) -> usize {
    ((h.norm_bound() * t.abs()) / MAX_PHASE_PER_STEP).ceil().max(1.0) as usize
}

/// Propagates `psi0` under `h` for time `t` by repeated application of
/// `exp(-i h t/steps)`.
///
/// The result is accepted once halving the step changes the final state by
/// less than [`STEP_CONVERGENCE_TOLERANCE`]; otherwise the step count is
/// doubled up to [`MAX_REFINEMENTS`] times before [`Error::NotConverged`].
pub fn evolve_numeric(h: &Operator, psi0: &JointState, t: f64, steps: usize) -> Result<JointState> {
    if h.dim() != psi0.dim() || h.atom_levels() != psi0.atom_levels() {
        return Err(Error::DimensionMismatch { expected: psi0.dim(), found: h.dim() });
    }
    if !t.is_finite() {
        return Err(Error::InvalidParameter("time must be finite".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("at least one step is required".into()));
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { defect: h.hermiticity_defect() });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }

    let psi = DVector::from_column_slice(psi0.amplitudes());
    let mut steps = steps;
    let mut coarse = propagate(h, &psi, t, steps);
    let mut change = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENTS {
        let fine = propagate(h, &psi, t, 2 * steps);
        change = (&fine - &coarse).norm();
        steps *= 2;
        if change < STEP_CONVERGENCE_TOLERANCE {
            return Ok(JointState {
                atom_levels: psi0.atom_levels,
                n_max: psi0.n_max,
                amplitudes: fine.iter().copied().collect(),
            });
        }
        coarse = fine;
    }
    Err(Error::NotConverged { steps, change })
}

fn propagate(h: &Operator, psi: &DVector<Complex64>, t: f64, steps: usize) -> DVector<Complex64> {
    let dt = t / steps as f64;
    let generator = h.matrix().map(|c| c * Complex64::new(0.0, -dt));
    let step = generator.exp();
    let mut state = psi.clone();
    for _ in 0..steps {
        state = &step * state;
    }
    state
}

/// Margins of the two regime inequalities `Δ² ≫ 2|2λα|²` and
/// `t ≫ 3Δ³/(4|λα|⁴)` read as ratios `lhs/rhs` (resp. `rhs/t`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityMargins {
    pub margin1: f64,
    pub margin2: f64,
    /// Set when `λα = 0`, making both margins infinite.
    pub degenerate: bool,
}

/// Margin treated as satisfying a "much greater than" inequality.
pub const STRONG_MARGIN: f64 = 10.0;

impl ValidityMargins {
    pub fn satisfied(&self) -> bool {
        self.margin1 > 1.0 && self.margin2 > 1.0
    }

    pub fn strongly_satisfied(&self) -> bool {
        self.margin1 >= STRONG_MARGIN && self.margin2 >= STRONG_MARGIN
    }
}

/// Evaluates both regime margins at interaction time `t > 0`.
pub fn check_validity(p: &RamanParams, t: f64) -> Result<ValidityMargins> {
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::InvalidParameter(format!("interaction time must be positive and finite, got {t}")));
    }
    let coupling = p.lambda_coupling() * p.alpha().norm();
    if coupling == 0.0 {
        return Ok(ValidityMargins { margin1: f64::INFINITY, margin2: f64::INFINITY, degenerate: true });
    }
    let delta = p.delta();
    let margin1 = delta * delta / (2.0 * (2.0 * coupling).powi(2));
    let margin2 = 3.0 * delta.abs().powi(3) / (4.0 * coupling.powi(4)) / t;
    Ok(ValidityMargins { margin1, margin2, degenerate: false })
}

/// Effective versus Λ-model deviation at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelDeviationReport {
    /// `1 - |⟨ψ_eff|ψ_full⟩|²`, with `ψ_eff` embedded with an empty `|f⟩` row.
    pub infidelity: f64,
    /// Population of `|f⟩` in the Λ-model state.
    pub f_leakage: f64,
    pub margins: ValidityMargins,
}

/// Evolves the same initial state under both Hamiltonians and compares them.
pub fn compare_models(p: &RamanParams, q: &AtomQubit, t: f64, n_max: Option<usize>) -> Result<ModelDeviationReport> {
    let margins = check_validity(p, t)?;
    let n_max = n_max.unwrap_or_else(|| default_cutoff(p.alpha()));
    let field = FieldState::coherent(p.alpha(), Some(n_max))?;
    let psi0 = JointState::product(&[q.c_g(), q.c_e()], &field)?;

    let h_eff = effective_hamiltonian(p, n_max);
    let effective = evolve_numeric(&h_eff, &psi0, t, recommended_steps(&h_eff, t))?.to_three_level();

    let h_full = full_hamiltonian(p, n_max);
    let full = evolve_numeric(&h_full, &psi0.to_three_level(), t, recommended_steps(&h_full, t))?;

    Ok(ModelDeviationReport {
        infidelity: effective.infidelity(&full)?,
        f_leakage: full.level_population(AtomLevel::Upper),
        margins,
    })
}
