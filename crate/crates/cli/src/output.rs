//! JSON emission. Floats are written with 17 significant digits so they
//! round-trip exactly.

use std::path::Path;
use std::str::FromStr;

use ergolab_core::averaging::{ConvergenceVerdict, EmpiricalMeasure, GapEvidence};
use ergolab_core::systems::{Observable, PointRepr};
use ergolab_core::Scalar;
use serde_json::{json, Map, Number, Value};

use crate::CliError;

/// `x` as a JSON number with 17 significant digits; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Number::from_str(&format!("{x:.16e}")).map(Value::Number).unwrap_or(Value::Null)
}

pub fn scalar<S: Scalar>(x: &S) -> Value {
    num(x.to_f64_lossy())
}

/// `"p/q"` for exact scalars, `null` otherwise.
pub fn exact<S: Scalar>(x: &S) -> Value {
    x.exact_string().map_or(Value::Null, Value::String)
}

pub fn point(p: &PointRepr) -> Value {
    Value::String(p.to_string())
}

pub fn nums(xs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(xs.into_iter().map(num).collect())
}

pub fn gap(e: &Option<GapEvidence>) -> Value {
    match e {
        None => Value::Null,
        Some(e) => json!({
            "observable": e.observable,
            "checkpoints": [e.checkpoints.0, e.checkpoints.1],
            "values": [num(e.values.0), num(e.values.1)],
        }),
    }
}

/// Support (first `max_atoms` atoms), mass and pairings with `dictionary`.
pub fn measure<S: Scalar>(mu: &EmpiricalMeasure<S>, dictionary: &[Observable], max_atoms: usize) -> Result<Value, CliError> {
    let support: Vec<Value> = mu
        .support()
        .iter()
        .take(max_atoms)
        .map(|(p, w)| {
            let mut atom = Map::new();
            atom.insert("point".into(), point(p));
            atom.insert("weight".into(), scalar(w));
            if let Some(q) = w.exact_string() {
                atom.insert("weight_exact".into(), Value::String(q));
            }
            Value::Object(atom)
        })
        .collect();
    let mut pairings = Map::new();
    for x in dictionary {
        pairings.insert(x.name().to_string(), num(mu.pair_f64(x)?));
    }
    Ok(json!({
        "atoms": mu.support().len(),
        "truncated": mu.support().len() > max_atoms,
        "normalization": scalar(&mu.normalization()),
        "support": support,
        "pairings": pairings,
    }))
}

pub fn verdict<S: Scalar>(v: &ConvergenceVerdict<S>, dictionary: &[Observable], max_atoms: usize) -> Result<Value, CliError> {
    let limit = match &v.limit {
        Some(mu) => measure(mu, dictionary, max_atoms)?,
        None => Value::Null,
    };
    Ok(json!({
        "status": v.status.as_str(),
        "cauchy_gap": num(v.cauchy_gap),
        "evidence": gap(&v.evidence),
        "max_step_gap": num(v.max_step_gap),
        "step_evidence": gap(&v.step_evidence),
        "limit": limit,
    }))
}

/// Pretty JSON plus a trailing newline, to `out` or stdout.
pub fn emit(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(ergolab_core::Error::from)?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Domain(ergolab_core::Error::Io(format!("{}: {e}", path.display())))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
