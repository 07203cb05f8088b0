//! JSON run configuration and its resolution against command-line flags.
//!
//! Precedence: flag > config file > preset default. Every value that came from
//! a default is recorded so reports can echo it.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use ramansim_core::fock::default_cutoff;
use ramansim_core::protocol::{Metric, SweepGrid};
use ramansim_core::{AtomQubit, Detection, ExperimentPreset, ProtocolConfig, RamanParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable capping the photon-number cutoff.
pub const NMAX_CAP_VAR: &str = "RAMANSIM_NMAX_CAP";
pub const DEFAULT_NMAX_CAP: usize = 2000;
pub const DEFAULT_PRECISION: usize = 6;
pub const DEFAULT_ALPHA: f64 = 3.0;

/// A complex number written as `3`, `[re, im]` or `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
    Parts { re: f64, im: f64 },
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) | ComplexValue::Parts { re, im } => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitSpec {
    pub c_g: Option<ComplexValue>,
    pub c_e: Option<ComplexValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<ComplexValue>,
    pub omega0: Option<f64>,
    pub omega_f: Option<f64>,
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
    pub precision: Option<usize>,
}

/// On-disk configuration. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub qubit: Option<QubitSpec>,
    pub params: Option<ParamsSpec>,
    pub outcome: Option<Detection>,
    pub t: Option<f64>,
    pub n_max: Option<usize>,
    pub with_full_model: Option<bool>,
    pub grid: Option<SweepGrid>,
    pub metrics: Option<Vec<Metric>>,
    pub output: Option<OutputSpec>,
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Values given on the command line; `None` defers to the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub c_g: Option<Complex64>,
    pub c_e: Option<Complex64>,
    pub alpha: Option<Complex64>,
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub t: Option<f64>,
    pub n_max: Option<usize>,
    pub outcome: Option<Detection>,
    pub with_full_model: bool,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub precision: Option<usize>,
    pub metrics: Option<Vec<Metric>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefaultEcho {
    pub name: &'static str,
    pub value: String,
    pub rule: &'static str,
}

#[derive(Debug, Clone)]
pub struct Resolved {
    pub protocol: ProtocolConfig,
    pub grid: SweepGrid,
    pub metrics: Vec<Metric>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub precision: usize,
    pub defaults: Vec<DefaultEcho>,
}

impl Resolved {
    pub fn interaction_time(&self) -> Result<f64, CliError> {
        self.protocol.interaction_time().map_err(CliError::from)
    }
}

pub const DEFAULT_METRICS: [Metric; 5] =
    [Metric::FidelityToTarget, Metric::Probability, Metric::Overlap, Metric::Margin1, Metric::Margin2];

pub fn resolve(file: RunConfigFile, flags: Overrides) -> Result<Resolved, CliError> {
    let preset = ExperimentPreset::default();
    let mut defaults = Vec::new();
    let mut echo = |name, value: String, rule| defaults.push(DefaultEcho { name, value, rule });

    let qubit = file.qubit.unwrap_or_default();
    let params = file.params.unwrap_or_default();

    let c_g = flags.c_g.or(qubit.c_g.map(Into::into));
    let c_e = flags.c_e.or(qubit.c_e.map(Into::into));
    let (c_g, c_e) = match (c_g, c_e) {
        (Some(g), Some(e)) => (g, e),
        (None, None) => {
            echo("qubit", "c_g=1, c_e=0".into(), "atom prepared in |g>");
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        }
        _ => return Err(CliError::Config("qubit needs both c_g and c_e".into())),
    };
    let qubit = AtomQubit::new(c_g, c_e)?;

    let lambda = flags.lambda.or(params.lambda).unwrap_or_else(|| {
        echo("lambda", format!("{}", preset.lambda_coupling), "preset coupling (kHz)");
        preset.lambda_coupling
    });
    let delta = flags.delta.or(params.delta).unwrap_or_else(|| {
        echo("delta", format!("{}", preset.delta), "preset detuning (kHz)");
        preset.delta
    });
    let alpha = flags.alpha.or(params.alpha.map(Into::into)).unwrap_or_else(|| {
        echo("alpha", format!("{DEFAULT_ALPHA}"), "preset coherent amplitude");
        Complex64::new(DEFAULT_ALPHA, 0.0)
    });
    let mut raman = RamanParams::new(lambda, delta, alpha)?;
    match (params.omega0, params.omega_f, params.omega) {
        (Some(w0), Some(wf), Some(w)) => raman = raman.with_frequencies(w0, wf, w)?,
        (None, None, None) => {}
        _ => return Err(CliError::Config("omega0, omega_f and omega must be given together".into())),
    }

    let outcome = flags.outcome.or(file.outcome).unwrap_or_else(|| {
        echo("outcome", "g".into(), "selective detection in |g>");
        Detection::Ground
    });
    let t_override = flags.t.or(file.t);
    if t_override.is_none() {
        echo("t", format!("{}", raman.cat_time()), "pi/(2|beta|) in ms");
    }
    let n_max = flags.n_max.or(file.n_max);
    if n_max.is_none() {
        echo("n_max", format!("{}", default_cutoff(alpha)), "smallest cutoff with Poisson tail < 1e-13");
    }
    let with_full_model = flags.with_full_model || file.with_full_model.unwrap_or(false);

    let output = file.output.unwrap_or_default();
    let precision = flags.precision.or(output.precision).unwrap_or(DEFAULT_PRECISION);
    let metrics = match flags.metrics.or(file.metrics) {
        Some(m) => m,
        None => {
            echo("metrics", DEFAULT_METRICS.map(|m| m.name()).join(","), "default metric set");
            DEFAULT_METRICS.to_vec()
        }
    };

    let protocol = ProtocolConfig { qubit, params: raman, outcome, t_override, n_max, with_full_model };
    let grid = file.grid.unwrap_or_default();
    check_cutoff_cap(&protocol, &grid)?;

    Ok(Resolved {
        protocol,
        grid,
        metrics,
        format: flags.format.or(output.format),
        out: flags.out.or(output.path),
        precision,
        defaults,
    })
}

fn nmax_cap() -> Result<usize, CliError> {
    match std::env::var(NMAX_CAP_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Config(format!("{NMAX_CAP_VAR}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_NMAX_CAP),
    }
}

pub fn check_cutoff_cap(protocol: &ProtocolConfig, grid: &SweepGrid) -> Result<(), CliError> {
    let cap = nmax_cap()?;
    let mut cutoffs = vec![protocol.cutoff()];
    if protocol.n_max.is_none() {
        cutoffs.extend(grid.alpha.iter().map(|&a| default_cutoff(Complex64::new(a, 0.0))));
    }
    match cutoffs.into_iter().max() {
        Some(n) if n > cap => Err(CliError::Config(format!("cutoff n_max = {n} exceeds {NMAX_CAP_VAR} = {cap}"))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        let f = RunConfigFile::parse(r#"{"params": {"alpha": [1.0, 2.0]}, "qubit": {"c_g": 0.6, "c_e": {"re": 0.8, "im": 0.0}}}"#)
            .unwrap();
        let resolved = resolve(f, Overrides::default()).unwrap();
        assert_eq!(resolved.protocol.params.alpha(), Complex64::new(1.0, 2.0));
        assert_eq!(resolved.protocol.qubit.c_e(), Complex64::new(0.8, 0.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfigFile::parse(r#"{"alhpa": 3}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"params": {"alhpa": 3}}"#).is_err());
        assert!(RunConfigFile::parse(r#"{"grid": {"beta": [1]}}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let f = RunConfigFile::parse(r#"{"outcome": "g", "params": {"alpha": 2}}"#).unwrap();
        let flags = Overrides { outcome: Some(Detection::Excited), ..Default::default() };
        let resolved = resolve(f, flags).unwrap();
        assert_eq!(resolved.protocol.outcome, Detection::Excited);
        assert_eq!(resolved.protocol.params.alpha(), Complex64::new(2.0, 0.0));
        assert!(resolved.defaults.iter().any(|d| d.name == "t"));
        assert!(!resolved.defaults.iter().any(|d| d.name == "outcome"));
    }

    #[test]
    fn half_specified_qubit_is_an_error() {
        let f = RunConfigFile::parse(r#"{"qubit": {"c_g": 1}}"#).unwrap();
        assert!(matches!(resolve(f, Overrides::default()), Err(CliError::Config(_))));
    }
}
