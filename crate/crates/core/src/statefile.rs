//! On-disk state format.
//!
//! A single JSON object with fields `version`, `n`, `spectrum`, `kind`, and
//! `data`. Pure states store amplitudes as `[re, im]` pairs in lexicographic
//! multi-index order (last party fastest); density matrices store the
//! row-major matrix; ensembles store `{p, amplitudes}` members. Reals are
//! written with 17 significant digits, which round-trips doubles exactly, so
//! the format is lossless and byte-stable for fixed inputs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::spectral::LocalObservable;
use crate::states::{DensityState, Ensemble, PureState};
use crate::Result;

/// Current format version.
pub const FORMAT_VERSION: u64 = 1;

/// Any of the three state kinds the format can carry.
#[derive(Debug, Clone)]
pub enum StateData {
    Pure(PureState),
    Density(DensityState),
    Ensemble(Ensemble),
}

impl StateData {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StateData::Pure(_) => "pure",
            StateData::Density(_) => "density",
            StateData::Ensemble(_) => "ensemble",
        }
    }

    pub fn obs(&self) -> &LocalObservable {
        match self {
            StateData::Pure(s) => s.obs(),
            StateData::Density(s) => s.obs(),
            StateData::Ensemble(e) => e.members()[0].1.obs(),
        }
    }

    pub fn party_count(&self) -> usize {
        match self {
            StateData::Pure(s) => s.party_count(),
            StateData::Density(s) => s.party_count(),
            StateData::Ensemble(e) => e.members()[0].1.party_count(),
        }
    }
}

fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn push_pair(out: &mut String, c: Complex64) {
    out.push('[');
    out.push_str(&fmt_real(c.re));
    out.push(',');
    out.push_str(&fmt_real(c.im));
    out.push(']');
}

fn push_amplitudes(out: &mut String, amps: &[Complex64], indent: &str) {
    out.push('[');
    for (i, &a) in amps.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push('\n');
        out.push_str(indent);
        push_pair(out, a);
    }
    out.push('\n');
    out.push_str(&indent[..indent.len().saturating_sub(2)]);
    out.push(']');
}

/// Serializes a state to the JSON format, LF line endings, fixed key order.
pub fn write_state(data: &StateData) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"version\": {FORMAT_VERSION},\n"));
    out.push_str(&format!("  \"n\": {},\n", data.party_count()));
    out.push_str("  \"spectrum\": [");
    for (i, &lam) in data.obs().spectrum().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&fmt_real(lam));
    }
    out.push_str("],\n");
    out.push_str(&format!("  \"kind\": \"{}\",\n", data.kind_name()));
    out.push_str("  \"data\": ");
    match data {
        StateData::Pure(state) => {
            push_amplitudes(&mut out, state.amplitudes(), "    ");
        }
        StateData::Density(state) => {
            let m = state.matrix();
            out.push('[');
            for r in 0..m.nrows() {
                if r > 0 {
                    out.push(',');
                }
                out.push_str("\n    [");
                for c in 0..m.ncols() {
                    if c > 0 {
                        out.push(',');
                    }
                    push_pair(&mut out, m[(r, c)]);
                }
                out.push(']');
            }
            out.push_str("\n  ]");
        }
        StateData::Ensemble(ensemble) => {
            out.push('[');
            for (i, (p, state)) in ensemble.members().iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str("\n    {\"p\": ");
                out.push_str(&fmt_real(*p));
                out.push_str(", \"amplitudes\": ");
                push_amplitudes(&mut out, state.amplitudes(), "      ");
                out.push('}');
            }
            out.push_str("\n  ]");
        }
    }
    out.push_str("\n}\n");
    out
}

fn parse_err(context: &str) -> Error {
    Error::Parse(context.to_string())
}

fn as_f64(value: &serde_json::Value, context: &str) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| parse_err(&format!("{context}: expected a number")))
}

fn as_array<'a>(value: &'a serde_json::Value, context: &str) -> Result<&'a Vec<serde_json::Value>> {
    value
        .as_array()
        .ok_or_else(|| parse_err(&format!("{context}: expected an array")))
}

fn parse_complex(value: &serde_json::Value, context: &str) -> Result<Complex64> {
    let pair = as_array(value, context)?;
    if pair.len() != 2 {
        return Err(parse_err(&format!("{context}: expected [re, im]")));
    }
    Ok(Complex64::new(
        as_f64(&pair[0], context)?,
        as_f64(&pair[1], context)?,
    ))
}

fn parse_amplitudes(value: &serde_json::Value, context: &str) -> Result<Vec<Complex64>> {
    as_array(value, context)?
        .iter()
        .map(|v| parse_complex(v, context))
        .collect()
}

/// Parses a state file, validating the stored invariants. `norm_tol` relaxes
/// the normalization checks for files produced at lower precision.
pub fn read_state(text: &str, norm_tol: f64) -> Result<StateData> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| parse_err("top level: expected an object"))?;

    let version = obj
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| parse_err("missing integer field 'version'"))?;
    if version != FORMAT_VERSION {
        return Err(parse_err(&format!(
            "unsupported format version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let n = obj
        .get("n")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| parse_err("missing integer field 'n'"))? as usize;
    if n < 1 {
        return Err(parse_err("party count 'n' must be at least 1"));
    }
    let spectrum: Vec<f64> = as_array(
        obj.get("spectrum")
            .ok_or_else(|| parse_err("missing field 'spectrum'"))?,
        "spectrum",
    )?
    .iter()
    .map(|v| as_f64(v, "spectrum"))
    .collect::<Result<_>>()?;
    let obs = LocalObservable::new(&spectrum)?;
    let kind = obj
        .get("kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| parse_err("missing string field 'kind'"))?;
    let data = obj
        .get("data")
        .ok_or_else(|| parse_err("missing field 'data'"))?;

    match kind {
        "pure" => {
            let amps = parse_amplitudes(data, "data")?;
            Ok(StateData::Pure(PureState::with_norm_tol(
                obs, n, amps, norm_tol,
            )?))
        }
        "density" => {
            let rows = as_array(data, "data")?;
            let dim = rows.len();
            let mut matrix = DMatrix::zeros(dim, dim);
            for (r, row) in rows.iter().enumerate() {
                let entries = as_array(row, "data row")?;
                if entries.len() != dim {
                    return Err(parse_err(&format!(
                        "density row {r} has {} entries, expected {dim}",
                        entries.len()
                    )));
                }
                for (c, entry) in entries.iter().enumerate() {
                    matrix[(r, c)] = parse_complex(entry, "density entry")?;
                }
            }
            Ok(StateData::Density(DensityState::new(obs, n, matrix)?))
        }
        "ensemble" => {
            let members = as_array(data, "data")?
                .iter()
                .map(|member| {
                    let m = member
                        .as_object()
                        .ok_or_else(|| parse_err("ensemble member: expected an object"))?;
                    let p = as_f64(
                        m.get("p").ok_or_else(|| parse_err("member missing 'p'"))?,
                        "member weight",
                    )?;
                    let amps = parse_amplitudes(
                        m.get("amplitudes")
                            .ok_or_else(|| parse_err("member missing 'amplitudes'"))?,
                        "member amplitudes",
                    )?;
                    let state = PureState::with_norm_tol(obs.clone(), n, amps, norm_tol)?;
                    Ok((p, state))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(StateData::Ensemble(Ensemble::new(members)?))
        }
        other => Err(parse_err(&format!(
            "unknown kind '{other}', expected pure | density | ensemble"
        ))),
    }
}
