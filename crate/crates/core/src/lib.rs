pub mod catgate;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod measurement;
pub mod protocol;
pub mod qubit;

pub use catgate::{CatBasis, CatQubit};
pub use dynamics::{AtomLevel, JointState, Operator, RamanParams};
pub use error::{Error, Result};
pub use fock::{FieldState, Overlap};
pub use measurement::Detection;
pub use qubit::AtomQubit;
pub use protocol::{run_protocol, ExperimentPreset, ProtocolConfig, ProtocolResult};
