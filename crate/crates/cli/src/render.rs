//! Report envelopes and CSV rendering.

use gggp_core::ModelParams;
use serde::Serialize;

use crate::{CliError, VERSION};

const SIGNIFICANT_DIGITS: i32 = 12;

/// Common header of every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub params: Option<ModelParams>,
    pub seed: u64,
    pub n_samples: Option<u64>,
}

impl Meta {
    pub fn new(command: &'static str, params: Option<ModelParams>, seed: u64, n_samples: Option<u64>) -> Self {
        Meta { tool: "gggp", version: VERSION, command, params, seed, n_samples }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    meta: &'a Meta,
    result: &'a T,
}

pub fn json<T: Serialize>(meta: &Meta, result: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, result })
        .map_err(|e| CliError::Numerical(format!("serializing report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV with `# key=value` header lines carrying the metadata, then a header
/// row and the data rows.
pub fn csv(meta: &Meta, extra: &[(&str, String)], header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut out = String::new();
    let params = match &meta.params {
        Some(p) => serde_json::to_string(p).map_err(|e| CliError::Numerical(e.to_string()))?,
        None => "none".into(),
    };
    let lines = [
        ("tool", meta.tool.to_string()),
        ("version", meta.version.to_string()),
        ("command", meta.command.to_string()),
        ("params", params),
        ("seed", meta.seed.to_string()),
        ("n_samples", meta.n_samples.map_or("none".into(), |n| n.to_string())),
    ];
    for (k, v) in lines.iter().map(|(k, v)| (*k, v)).chain(extra.iter().map(|(k, v)| (*k, v))) {
        out.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let write_err = |e: csv::Error| CliError::Numerical(format!("writing csv: {e}"));
    w.write_record(header).map_err(write_err)?;
    for row in rows {
        w.write_record(row).map_err(write_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("writing csv: {e}")))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// `v` with 12 significant digits, `.` as decimal separator and no digit
/// grouping. Very large or small magnitudes use exponent notation.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exponent = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exponent) {
        let decimals = (SIGNIFICANT_DIGITS - 1 - exponent).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.prec$e}", prec = (SIGNIFICANT_DIGITS - 1) as usize)
    }
}
