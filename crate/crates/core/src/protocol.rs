//! The two-step transfer protocol and its reports.
//!
//! Step one evolves `(c_g|g⟩ + c_e|e⟩)|α⟩` under the effective Raman
//! Hamiltonian to `t = π/(2|β|)` and detects the atom. Step two applies the
//! literal cat Hadamard to the conditioned field. Detection in `g` should
//! leave `c_g|−α⟩ + c_e|α⟩`, detection in `e` leaves `c_e|−α⟩ + c_g|α⟩`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catgate::{gate_error, CatBasis, CatQubit};
pub use crate::dynamics::{check_validity, ValidityMargins, STRONG_MARGIN};
use crate::dynamics::{compare_models, evolve_closed_form, ModelDeviationReport, RamanParams};
use crate::error::{Error, Result};
use crate::fock::{default_cutoff, overlap_analytic, FieldState};
use crate::measurement::{project_atom, Detection};
use crate::qubit::AtomQubit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub qubit: AtomQubit,
    pub params: RamanParams,
    pub outcome: Detection,
    /// Interaction time in ms; `None` means `π/(2|β|)`.
    pub t_override: Option<f64>,
    pub n_max: Option<usize>,
    /// Also evolve the Λ model and report its deviation (slow).
    pub with_full_model: bool,
}

impl ProtocolConfig {
    pub fn new(qubit: AtomQubit, params: RamanParams) -> Self {
        Self { qubit, params, outcome: Detection::Ground, t_override: None, n_max: None, with_full_model: false }
    }

    pub fn interaction_time(&self) -> Result<f64> {
        let t = self.t_override.unwrap_or_else(|| self.params.cat_time());
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "interaction time must be positive and finite, got {t} ms"
            )));
        }
        Ok(t)
    }

    pub fn cutoff(&self) -> usize {
        self.n_max.unwrap_or_else(|| default_cutoff(self.params.alpha()))
    }

    /// Cat qubit the protocol should produce for the configured outcome.
    pub fn target(&self) -> CatQubit {
        let (c_g, c_e) = (self.qubit.c_g(), self.qubit.c_e());
        match self.outcome {
            Detection::Ground => CatQubit::new(self.params.alpha(), c_g, c_e),
            Detection::Excited => CatQubit::new(self.params.alpha(), c_e, c_g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolResult {
    pub outcome: Detection,
    pub probability: f64,
    pub interaction_time: f64,
    pub n_max: usize,
    #[serde(skip)]
    pub field_after_gate: FieldState,
    /// Gram-normalized decomposition of the gated field.
    pub cat: CatQubit,
    pub residual: f64,
    pub fidelity_to_target: f64,
    pub infidelity_to_target: f64,
    /// `|⟨−α|α⟩|`.
    pub overlap: f64,
    pub margins: ValidityMargins,
    pub regime_warning: Option<String>,
    pub model_deviation: Option<ModelDeviationReport>,
}

impl ProtocolResult {
    pub fn model_infidelity(&self) -> Option<f64> {
        self.model_deviation.map(|m| m.infidelity)
    }
}

/// Runs evolution → detection → literal Hadamard → decomposition → scoring.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolResult> {
    let t = cfg.interaction_time()?;
    let n_max = cfg.cutoff();
    let alpha = cfg.params.alpha();
    let margins = check_validity(&cfg.params, t)?;
    let regime_warning = (!margins.strongly_satisfied()).then(|| {
        format!(
            "regime margins {:.3} and {:.3} below {STRONG_MARGIN}; effective Hamiltonian may not apply",
            margins.margin1, margins.margin2
        )
    });

    let basis = CatBasis::new(alpha, Some(n_max))?;
    let psi = evolve_closed_form(&cfg.qubit, &cfg.params, t, Some(n_max))?;
    let projection = project_atom(&psi, cfg.outcome)?;
    let gated = basis.hadamard_literal(&projection.field)?.normalized()?;
    let (cat, residual) = basis.decompose(&gated)?;
    let target = basis.embed(&cfg.target().normalized()?)?;
    let infidelity = target.infidelity(&gated)?;

    let model_deviation =
        if cfg.with_full_model { Some(compare_models(&cfg.params, &cfg.qubit, t, Some(n_max))?) } else { None };

    Ok(ProtocolResult {
        outcome: cfg.outcome,
        probability: projection.probability,
        interaction_time: t,
        n_max,
        field_after_gate: gated,
        cat: cat.normalized()?,
        residual,
        fidelity_to_target: 1.0 - infidelity,
        infidelity_to_target: infidelity,
        overlap: overlap_analytic(-alpha, alpha).magnitude(),
        margins,
        regime_warning,
        model_deviation,
    })
}

/// Experimental magnitudes for a Rydberg-atom / superconducting-cavity setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPreset {
    /// kHz
    pub lambda_coupling: f64,
    /// kHz
    pub delta: f64,
    pub quality_factor: f64,
    /// s
    pub cavity_lifetime: f64,
    /// s
    pub hadamard_gate_time: f64,
    /// m/s
    pub atomic_velocity: f64,
    pub alphas: Vec<f64>,
}

impl Default for ExperimentPreset {
    fn default() -> Self {
        Self {
            lambda_coupling: 10.0,
            delta: 1e3,
            quality_factor: 1e11,
            cavity_lifetime: 1e-1,
            hadamard_gate_time: 1e-2,
            atomic_velocity: 1e3,
            alphas: vec![2.0, 3.0, 5.0, 10.0],
        }
    }
}

impl ExperimentPreset {
    pub fn params(&self, alpha: f64) -> Result<RamanParams> {
        RamanParams::new(self.lambda_coupling, self.delta, Complex64::new(alpha, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapRow {
    pub alpha: f64,
    /// `|⟨α|−α⟩| = e^{−2|α|²}`
    pub overlap: f64,
    pub log10_overlap: f64,
    /// `floor(log10_overlap)`, the decade of the overlap.
    pub order: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub overlaps: Vec<OverlapRow>,
    pub quality_factor: f64,
    pub atomic_velocity: f64,
    pub cavity_lifetime: f64,
    pub hadamard_gate_time: f64,
    pub gate_within_lifetime: bool,
    /// `π/(2|β|)` in ms.
    pub interaction_time_ms: f64,
    pub interaction_within_lifetime: bool,
    pub margins: Vec<(f64, ValidityMargins)>,
}

pub fn feasibility_report(preset: &ExperimentPreset) -> Result<FeasibilityReport> {
    let mut overlaps = Vec::with_capacity(preset.alphas.len());
    let mut margins = Vec::with_capacity(preset.alphas.len());
    // π/(2|β|) does not depend on α
    let interaction_time_ms = preset.params(0.0)?.cat_time();
    for &alpha in &preset.alphas {
        let a = Complex64::new(alpha, 0.0);
        let overlap = overlap_analytic(a, -a);
        let log10_overlap = overlap.log10_magnitude();
        overlaps.push(OverlapRow {
            alpha,
            overlap: overlap.magnitude(),
            log10_overlap,
            order: log10_overlap.floor() as i32,
        });
        margins.push((alpha, check_validity(&preset.params(alpha)?, interaction_time_ms)?));
    }
    Ok(FeasibilityReport {
        overlaps,
        quality_factor: preset.quality_factor,
        atomic_velocity: preset.atomic_velocity,
        cavity_lifetime: preset.cavity_lifetime,
        hadamard_gate_time: preset.hadamard_gate_time,
        gate_within_lifetime: preset.hadamard_gate_time < preset.cavity_lifetime,
        interaction_time_ms,
        interaction_within_lifetime: interaction_time_ms * 1e-3 < preset.cavity_lifetime,
        margins,
    })
}

/// Quantity reported per sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    FidelityToTarget,
    InfidelityToTarget,
    Probability,
    Residual,
    Overlap,
    GateError,
    Margin1,
    Margin2,
    ModelInfidelity,
    FLeakage,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::FidelityToTarget,
        Metric::InfidelityToTarget,
        Metric::Probability,
        Metric::Residual,
        Metric::Overlap,
        Metric::GateError,
        Metric::Margin1,
        Metric::Margin2,
        Metric::ModelInfidelity,
        Metric::FLeakage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::FidelityToTarget => "fidelity_to_target",
            Metric::InfidelityToTarget => "infidelity_to_target",
            Metric::Probability => "probability",
            Metric::Residual => "residual",
            Metric::Overlap => "overlap",
            Metric::GateError => "gate_error",
            Metric::Margin1 => "margin1",
            Metric::Margin2 => "margin2",
            Metric::ModelInfidelity => "model_infidelity",
            Metric::FLeakage => "f_leakage",
        }
    }

    fn needs_full_model(self) -> bool {
        matches!(self, Metric::ModelInfidelity | Metric::FLeakage)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown metric {s:?}")))
    }
}

/// Axes of a sweep. An empty axis falls back to the base configuration
/// (for `times`: the default `π/(2|β|)` of each point).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub delta: f64,
    pub lambda: f64,
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// Effective interaction time, when it could be determined.
    pub interaction_time: Option<f64>,
    /// One entry per requested metric, in request order.
    pub values: Vec<Option<f64>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub metrics: Vec<Metric>,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

impl SweepGrid {
    /// Sorted, deduplicated grid points in lexicographic `(α, Δ, λ, t)` order,
    /// plus one warning per axis that contained duplicates.
    pub fn points(&self, base: &RamanParams) -> Result<(Vec<SweepPoint>, Vec<String>)> {
        let mut warnings = Vec::new();
        let alpha = axis("alpha", &self.alpha, Some(base.alpha().re), &mut warnings)?;
        let delta = axis("delta", &self.delta, Some(base.delta()), &mut warnings)?;
        let lambda = axis("lambda", &self.lambda, Some(base.lambda_coupling()), &mut warnings)?;
        let times = axis("t", &self.t, None, &mut warnings)?;
        let times: Vec<Option<f64>> =
            if times.is_empty() { vec![None] } else { times.into_iter().map(Some).collect() };

        let mut points = Vec::with_capacity(alpha.len() * delta.len() * lambda.len() * times.len());
        for &alpha in &alpha {
            for &delta in &delta {
                for &lambda in &lambda {
                    for &t in &times {
                        points.push(SweepPoint { alpha, delta, lambda, t });
                    }
                }
            }
        }
        Ok((points, warnings))
    }
}

fn axis(name: &str, values: &[f64], fallback: Option<f64>, warnings: &mut Vec<String>) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("grid axis {name} contains a non-finite value")));
    }
    if values.is_empty() {
        return Ok(fallback.into_iter().collect());
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    if sorted.len() < values.len() {
        warnings.push(format!("grid axis {name}: {} duplicate value(s) removed", values.len() - sorted.len()));
    }
    Ok(sorted)
}

/// Evaluates `metrics` at every grid point. Points run in parallel; rows come
/// back in grid order. A failing point is reported in its row.
pub fn sweep(base: &ProtocolConfig, grid: &SweepGrid, metrics: &[Metric]) -> Result<SweepTable> {
    if metrics.is_empty() {
        return Err(Error::InvalidParameter("no metrics selected".into()));
    }
    let (points, warnings) = grid.points(&base.params)?;
    let with_full_model = base.with_full_model || metrics.iter().any(|m| m.needs_full_model());
    let rows = points.par_iter().map(|point| evaluate_point(base, point, metrics, with_full_model)).collect();
    Ok(SweepTable { metrics: metrics.to_vec(), rows, warnings })
}

fn evaluate_point(base: &ProtocolConfig, point: &SweepPoint, metrics: &[Metric], with_full_model: bool) -> SweepRow {
    let params = RamanParams::new(point.lambda, point.delta, Complex64::new(point.alpha, 0.0));
    let params = match params {
        Ok(p) => p,
        Err(e) => {
            return SweepRow { point: *point, interaction_time: None, values: vec![None; metrics.len()], error: Some(e.to_string()) }
        }
    };
    let cfg = ProtocolConfig { params, t_override: point.t.or(base.t_override), with_full_model, ..*base };
    let interaction_time = cfg.interaction_time().ok();
    let margins = interaction_time.map(|t| check_validity(&params, t)).transpose();
    let result = run_protocol(&cfg);
    let gate = metrics.contains(&Metric::GateError).then(|| gate_error(params.alpha()));

    let mut errors = Vec::new();
    let protocol = result.as_ref().map_err(|e| errors.push(e.to_string())).ok();
    let margins = margins.map_err(|e| errors.push(e.to_string())).ok().flatten();
    let gate = gate.and_then(|g| g.map_err(|e| errors.push(e.to_string())).ok());
    let error = errors.into_iter().next();

    let values = metrics
        .iter()
        .map(|metric| match metric {
            Metric::FidelityToTarget => protocol.map(|r| r.fidelity_to_target),
            Metric::InfidelityToTarget => protocol.map(|r| r.infidelity_to_target),
            Metric::Probability => protocol.map(|r| r.probability),
            Metric::Residual => protocol.map(|r| r.residual),
            Metric::Overlap => Some(overlap_analytic(-params.alpha(), params.alpha()).magnitude()),
            Metric::GateError => gate,
            Metric::Margin1 => margins.map(|m| m.margin1),
            Metric::Margin2 => margins.map(|m| m.margin2),
            Metric::ModelInfidelity => protocol.and_then(|r| r.model_deviation).map(|m| m.infidelity),
            Metric::FLeakage => protocol.and_then(|r| r.model_deviation).map(|m| m.f_leakage),
        })
        .collect();
    SweepRow { point: *point, interaction_time, values, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::bloch_grid;

    fn config(c_g: f64, c_e: f64, alpha: f64, outcome: Detection) -> ProtocolConfig {
        let params = ExperimentPreset::default().params(alpha).unwrap();
        ProtocolConfig { outcome, ..ProtocolConfig::new(AtomQubit::from_real(c_g, c_e).unwrap(), params) }
    }

    #[test]
    fn ground_qubit_maps_to_minus_alpha() {
        let result = run_protocol(&config(1.0, 0.0, 3.0, Detection::Ground)).unwrap();
        let minus = FieldState::coherent(Complex64::new(-3.0, 0.0), Some(result.n_max)).unwrap();
        assert!(minus.infidelity(&result.field_after_gate).unwrap() < 1e-6);
        assert!(result.regime_warning.is_none());
    }

    #[test]
    fn transfers_generic_qubit_for_both_outcomes() {
        for outcome in [Detection::Ground, Detection::Excited] {
            let result = run_protocol(&config(0.6, 0.8, 3.0, outcome)).unwrap();
            assert!(result.fidelity_to_target >= 1.0 - 1e-6, "{outcome}: {}", result.fidelity_to_target);
            let (a, b) = match outcome {
                Detection::Ground => (0.6, 0.8),
                Detection::Excited => (0.8, 0.6),
            };
            let basis = CatBasis::new(Complex64::new(3.0, 0.0), Some(result.n_max)).unwrap();
            let target = basis.embed(&CatQubit::new(basis.alpha(), a.into(), b.into())).unwrap();
            assert!(target.infidelity(&result.field_after_gate).unwrap() < 1e-6);
        }
    }

    #[test]
    fn coefficients_proportional_to_atomic_qubit() {
        // decomposed coefficients are ((1+s)·target_a, (1−s)·target_b) up to normalization
        for alpha in [2.0f64, 3.0] {
            let s = (-2.0 * alpha * alpha).exp();
            for q in bloch_grid() {
                for outcome in [Detection::Ground, Detection::Excited] {
                    let params = ExperimentPreset::default().params(alpha).unwrap();
                    let cfg = ProtocolConfig { outcome, ..ProtocolConfig::new(q, params) };
                    let result = run_protocol(&cfg).unwrap();
                    let [ta, tb] = cfg.target().coefficients();
                    let cross = (result.cat.a * tb - result.cat.b * ta).norm();
                    assert!(cross < (4.0 * s).max(1e-9), "α={alpha} {q:?} {outcome}: {cross}");
                    assert!(result.residual < 1e-6);
                }
            }
        }
    }

    #[test]
    fn global_phase_invariance() {
        let base = config(0.6, 0.8, 2.0, Detection::Ground);
        let rotated = ProtocolConfig { qubit: base.qubit.with_global_phase(1.234), ..base };
        let a = run_protocol(&base).unwrap();
        let b = run_protocol(&rotated).unwrap();
        assert!((a.infidelity_to_target - b.infidelity_to_target).abs() < 1e-15);
    }

    #[test]
    fn probability_matches_analytic_expression() {
        let cfg = config(0.6, 0.8, 1.5, Detection::Excited);
        let result = run_protocol(&cfg).unwrap();
        let expected = crate::measurement::outcome_probability(&cfg.qubit, cfg.params.alpha(), cfg.outcome);
        assert!((result.probability - expected).abs() < 1e-12);
    }

    #[test]
    fn infidelity_decreases_with_alpha() {
        let q = AtomQubit::from_bloch(1.0, 0.7);
        let mut previous = f64::INFINITY;
        for alpha in [1.5, 2.0, 3.0, 5.0] {
            let cfg = ProtocolConfig::new(q, ExperimentPreset::default().params(alpha).unwrap());
            let inf = run_protocol(&cfg).unwrap().infidelity_to_target;
            assert!(inf < previous, "alpha {alpha}: {inf} !< {previous}");
            assert!(inf <= 20.0 * (-2.0 * alpha * alpha).exp() || alpha < 2.0);
            previous = inf;
        }
    }

    #[test]
    fn zero_time_override_is_rejected() {
        let cfg = ProtocolConfig { t_override: Some(0.0), ..config(0.6, 0.8, 3.0, Detection::Ground) };
        assert!(matches!(run_protocol(&cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn weak_regime_attaches_warning() {
        let params = RamanParams::new(10.0, 100.0, Complex64::new(3.0, 0.0)).unwrap();
        let result = run_protocol(&ProtocolConfig::new(AtomQubit::ground(), params)).unwrap();
        assert!(result.regime_warning.is_some());
    }

    #[test]
    fn feasibility_numbers() {
        let report = feasibility_report(&ExperimentPreset::default()).unwrap();
        let orders: Vec<i32> = report.overlaps.iter().map(|r| r.order).collect();
        assert_eq!(orders, vec![-4, -8, -22, -87]);
        let logs = [-3.47, -7.82, -21.71, -86.86];
        for (row, expected) in report.overlaps.iter().zip(logs) {
            assert!((row.log10_overlap - expected).abs() < 5e-3);
            let exact = -2.0 * row.alpha * row.alpha / std::f64::consts::LN_10;
            assert!((row.log10_overlap - exact).abs() < 1e-9);
        }
        assert!(report.gate_within_lifetime);
        assert!((report.interaction_time_ms - 5.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(report.interaction_within_lifetime);
    }

    #[test]
    fn sweep_rows_in_grid_order() {
        let base = config(0.6, 0.8, 3.0, Detection::Ground);
        let grid = SweepGrid { alpha: vec![3.0, 2.0, 3.0], ..Default::default() };
        let table = sweep(&base, &grid, &[Metric::FidelityToTarget, Metric::Overlap]).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.warnings.len(), 1);
        assert_eq!(table.rows[0].point.alpha, 2.0);
        let f2 = table.rows[0].values[0].unwrap();
        let f3 = table.rows[1].values[0].unwrap();
        assert!(f3 >= f2);
        assert!(sweep(&base, &grid, &[]).is_err());
    }

    #[test]
    fn single_point_sweep_matches_run() {
        let base = config(0.6, 0.8, 2.0, Detection::Excited);
        let grid = SweepGrid { alpha: vec![2.0], ..Default::default() };
        let table = sweep(&base, &grid, &[Metric::FidelityToTarget, Metric::Probability, Metric::Margin2]).unwrap();
        let result = run_protocol(&base).unwrap();
        assert_eq!(table.rows[0].values, vec![
            Some(result.fidelity_to_target),
            Some(result.probability),
            Some(result.margins.margin2)
        ]);
    }

    #[test]
    fn failing_point_recorded_in_row() {
        let base = config(0.6, 0.8, 3.0, Detection::Ground);
        let grid = SweepGrid { alpha: vec![0.05, 3.0], delta: vec![0.0, 1e3], ..Default::default() };
        let table = sweep(&base, &grid, &[Metric::FidelityToTarget]).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.rows[0].error.is_some());
        assert!(table.rows[1].error.is_some(), "ill-conditioned basis at α = 0.05");
        assert!(table.rows[2].error.is_some(), "zero detuning");
        assert!(table.rows[3].error.is_none());
    }
}
