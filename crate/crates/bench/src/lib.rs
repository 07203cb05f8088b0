//! Shared fixtures for the benchmarks.

use num_complex::Complex64;
use ramansim_core::protocol::SweepGrid;
use ramansim_core::{AtomQubit, ExperimentPreset, FieldState, JointState, ProtocolConfig, RamanParams};

pub fn params(alpha: f64) -> RamanParams {
    ExperimentPreset::default().params(alpha).expect("preset parameters are valid")
}

pub fn qubit() -> AtomQubit {
    AtomQubit::from_real(0.6, 0.8).expect("normalized")
}

pub fn initial_state(alpha: f64, n_max: usize) -> JointState {
    let q = qubit();
    let field = FieldState::coherent(Complex64::new(alpha, 0.0), Some(n_max)).expect("cutoff is large enough");
    JointState::product(&[q.c_g(), q.c_e()], &field).expect("two-level product")
}

pub fn protocol(alpha: f64) -> ProtocolConfig {
    ProtocolConfig::new(qubit(), params(alpha))
}

pub fn alpha_grid() -> SweepGrid {
    SweepGrid { alpha: vec![1.5, 2.0, 3.0, 5.0], delta: vec![500.0, 1000.0, 2000.0], ..SweepGrid::default() }
}
