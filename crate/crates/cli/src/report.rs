//! Text, JSON and CSV renderings of command results.

use ramansim_core::dynamics::{ValidityMargins, STRONG_MARGIN};
use ramansim_core::fock::default_cutoff;
use ramansim_core::protocol::{FeasibilityReport, SweepTable};
use ramansim_core::ProtocolResult;
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::Resolved;
use crate::CliError;

/// Scientific notation with `precision` digits after the point.
pub fn sci(x: f64, precision: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.precision$e}")
    }
}

fn opt(x: Option<f64>, precision: usize) -> String {
    x.map(|v| sci(v, precision)).unwrap_or_default()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn write_csv(header: &[String], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Config(format!("csv output: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(format!("csv output: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}

fn complex(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn effective_inputs(cfg: &Resolved, t: Option<f64>) -> serde_json::Value {
    let p = &cfg.protocol;
    json!({
        "qubit": { "c_g": complex(p.qubit.c_g()), "c_e": complex(p.qubit.c_e()) },
        "params": {
            "lambda": p.params.lambda_coupling(),
            "delta": p.params.delta(),
            "alpha": complex(p.params.alpha()),
            "beta": p.params.beta(),
        },
        "outcome": p.outcome,
        "t": t,
        "n_max": p.cutoff(),
        "with_full_model": p.with_full_model,
    })
}

pub fn run_json(cfg: &Resolved, result: &ProtocolResult) -> String {
    to_json(&json!({
        "command": "run",
        "config": effective_inputs(cfg, Some(result.interaction_time)),
        "defaults": cfg.defaults,
        "result": result,
    }))
}

pub fn run_csv(r: &ProtocolResult, precision: usize) -> Result<String, CliError> {
    let header = [
        "outcome", "probability", "t", "n_max", "a_re", "a_im", "b_re", "b_im", "residual",
        "fidelity_to_target", "infidelity_to_target", "overlap", "margin1", "margin2",
        "model_infidelity", "f_leakage",
    ];
    let f = |x| sci(x, precision);
    let deviation = r.model_deviation;
    let row = vec![
        r.outcome.to_string(),
        f(r.probability),
        f(r.interaction_time),
        r.n_max.to_string(),
        f(r.cat.a.re),
        f(r.cat.a.im),
        f(r.cat.b.re),
        f(r.cat.b.im),
        f(r.residual),
        f(r.fidelity_to_target),
        f(r.infidelity_to_target),
        f(r.overlap),
        f(r.margins.margin1),
        f(r.margins.margin2),
        opt(deviation.map(|d| d.infidelity), precision),
        opt(deviation.map(|d| d.f_leakage), precision),
    ];
    write_csv(&header.map(String::from), &[row])
}

pub fn sweep_csv(cfg: &Resolved, table: &SweepTable) -> Result<String, CliError> {
    let precision = cfg.precision;
    let mut header: Vec<String> =
        ["alpha", "delta", "lambda", "t", "n_max", "outcome"].into_iter().map(String::from).collect();
    header.extend(table.metrics.iter().map(|m| m.name().to_owned()));
    header.push("error".into());

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|row| {
            let n_max = cfg.protocol.n_max.unwrap_or_else(|| default_cutoff(Complex64::new(row.point.alpha, 0.0)));
            let mut fields = vec![
                sci(row.point.alpha, precision),
                sci(row.point.delta, precision),
                sci(row.point.lambda, precision),
                opt(row.interaction_time.or(row.point.t), precision),
                n_max.to_string(),
                cfg.protocol.outcome.to_string(),
            ];
            fields.extend(row.values.iter().map(|v| opt(*v, precision)));
            fields.push(row.error.clone().unwrap_or_default());
            fields
        })
        .collect();
    write_csv(&header, &rows)
}

pub fn sweep_json(cfg: &Resolved, table: &SweepTable) -> String {
    to_json(&json!({
        "command": "sweep",
        "config": effective_inputs(cfg, cfg.protocol.t_override),
        "grid": cfg.grid,
        "defaults": cfg.defaults,
        "table": table,
    }))
}

fn regime(m: &ValidityMargins) -> &'static str {
    if m.strongly_satisfied() {
        "satisfied"
    } else if m.satisfied() {
        "weak"
    } else {
        "violated"
    }
}

pub fn validate_text(cfg: &Resolved, t: f64, m: &ValidityMargins) -> String {
    let p = &cfg.protocol.params;
    let f = |x| sci(x, cfg.precision);
    let t_source = if cfg.protocol.t_override.is_some() { "given" } else { "default pi/(2|beta|)" };
    let mut out = String::new();
    out.push_str(&format!("alpha = {}\n", p.alpha()));
    out.push_str(&format!("lambda = {} kHz\n", f(p.lambda_coupling())));
    out.push_str(&format!("delta = {} kHz\n", f(p.delta())));
    out.push_str(&format!("beta = {} kHz\n", f(p.beta())));
    out.push_str(&format!("t = {} ms ({t_source})\n", f(t)));
    out.push_str(&format!("margin1 = {}\n", f(m.margin1)));
    out.push_str(&format!("margin2 = {}\n", f(m.margin2)));
    out.push_str(&format!("regime = {} (strong when both margins >= {STRONG_MARGIN})\n", regime(m)));
    out
}

pub fn validate_json(cfg: &Resolved, t: f64, m: &ValidityMargins) -> String {
    to_json(&json!({
        "command": "validate",
        "config": effective_inputs(cfg, Some(t)),
        "defaults": cfg.defaults,
        "margins": m,
        "regime": regime(m),
    }))
}

pub fn validate_csv(cfg: &Resolved, t: f64, m: &ValidityMargins) -> Result<String, CliError> {
    let p = &cfg.protocol.params;
    let f = |x| sci(x, cfg.precision);
    let header = ["alpha", "lambda", "delta", "beta", "t", "margin1", "margin2", "regime"].map(String::from);
    let row = vec![
        f(p.alpha().norm()),
        f(p.lambda_coupling()),
        f(p.delta()),
        f(p.beta()),
        f(t),
        f(m.margin1),
        f(m.margin2),
        regime(m).to_owned(),
    ];
    write_csv(&header, &[row])
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

pub fn feasibility_text(r: &FeasibilityReport, precision: usize) -> String {
    let f = |x| sci(x, precision);
    let mut out = String::new();
    out.push_str(&format!("quality_factor = {}\n", f(r.quality_factor)));
    out.push_str(&format!("cavity_lifetime = {} s\n", f(r.cavity_lifetime)));
    out.push_str(&format!("atomic_velocity = {} m/s\n", f(r.atomic_velocity)));
    out.push_str(&format!(
        "hadamard_gate_time = {} s, within cavity lifetime: {}\n",
        f(r.hadamard_gate_time),
        yes_no(r.gate_within_lifetime)
    ));
    out.push_str(&format!(
        "interaction_time = {} ms, within cavity lifetime: {}\n",
        f(r.interaction_time_ms),
        yes_no(r.interaction_within_lifetime)
    ));
    for row in &r.overlaps {
        out.push_str(&format!(
            "alpha={}, overlap={}, log10_overlap≈{:.2}, order=1e{}\n",
            row.alpha,
            sci(row.overlap, 2),
            row.log10_overlap,
            row.order
        ));
    }
    for (alpha, m) in &r.margins {
        out.push_str(&format!("alpha={alpha}, margin1={}, margin2={}\n", f(m.margin1), f(m.margin2)));
    }
    out
}

pub fn feasibility_csv(r: &FeasibilityReport, precision: usize) -> Result<String, CliError> {
    let header = ["alpha", "overlap", "log10_overlap", "order", "margin1", "margin2"].map(String::from);
    let rows: Vec<Vec<String>> = r
        .overlaps
        .iter()
        .map(|row| {
            let margins = r.margins.iter().find(|(a, _)| *a == row.alpha).map(|(_, m)| *m);
            vec![
                sci(row.alpha, precision),
                sci(row.overlap, precision),
                sci(row.log10_overlap, precision),
                row.order.to_string(),
                opt(margins.map(|m| m.margin1), precision),
                opt(margins.map(|m| m.margin2), precision),
            ]
        })
        .collect();
    write_csv(&header, &rows)
}
