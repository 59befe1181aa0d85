//! Parsers for the textual system, method, point, grid, shift and checkpoint
//! specs accepted on the command line.

use std::path::Path;

use ergolab_core::matrix::{int_matrix_from_json, real_matrix_from_json};
use ergolab_core::scalar::parse_rational;
use ergolab_core::summation::{
    cesaro, geometric_indices, index_map_from_json, interleave, matrix_from_file, riesz_from_file, riesz_log, subsequence,
    IndexMap, SummationMethod,
};
use ergolab_core::systems::{
    affine_torus, bernoulli_shift, interval_map, observables_from_json, projective_action, rotation, Coord,
    IntervalMap, PointRepr, SymbolicPoint, SystemSpec,
};
use ergolab_core::tameness::cylinder_grid;
use ergolab_core::{Rational, Scalar};

use crate::CliError;

fn usage(flag: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{flag}: {msg}"))
}

/// A parsed `--system` value. Shift specs may carry a starting point.
pub struct ParsedSystem {
    pub system: SystemSpec,
    pub default_point: Option<PointRepr>,
}

/// `(√5 − 1) / 2`
pub fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn read(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Domain(ergolab_core::Error::Io(format!("{path}: {e}"))))
}

/// Inline JSON (`[[...]]`) or a path to a `{"rows": ...}` file.
pub fn matrix_text(value: &str) -> Result<String, CliError> {
    if value.trim_start().starts_with('[') {
        Ok(format!("{{\"rows\": {value}}}"))
    } else {
        read(value)
    }
}

fn parse_alpha(v: &str) -> Result<Coord, CliError> {
    if v == "golden" {
        return Ok(Coord::Float(golden()));
    }
    if v.contains('/') || v.parse::<i64>().is_ok() {
        return parse_rational(v).map(Coord::Exact).ok_or_else(|| usage("--system", format!("bad alpha {v:?}")));
    }
    v.parse::<f64>().map(Coord::Float).map_err(|_| usage("--system", format!("bad alpha {v:?}")))
}

pub fn rational_list(flag: &str, v: &str) -> Result<Vec<Rational>, CliError> {
    v.split(',')
        .map(|x| parse_rational(x.trim()).ok_or_else(|| usage(flag, format!("bad rational {x:?}"))))
        .collect()
}

/// Parses `rotation:alpha=<v>`, `torus:A=<file|json>,b=<v,...>`,
/// `interval:square|tent|logistic:r=<v>|pwl=<file>`, `shift[:pre=..,per=..|:rule=blocks4]`
/// and `projective:T=<file|json>`.
pub fn parse_system(spec: &str) -> Result<ParsedSystem, CliError> {
    let flag = "--system";
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let plain = |system| Ok(ParsedSystem { system, default_point: None });
    match head {
        "rotation" => {
            let alpha = rest.strip_prefix("alpha=").ok_or_else(|| usage(flag, "expected rotation:alpha=<value>"))?;
            plain(rotation(parse_alpha(alpha)?))
        }
        "torus" => {
            let body = rest.strip_prefix("A=").ok_or_else(|| usage(flag, "expected torus:A=<matrix>,b=<values>"))?;
            let (a, b) = match body.rfind(",b=") {
                Some(i) => (&body[..i], Some(&body[i + 3..])),
                None => (body, None),
            };
            let matrix = int_matrix_from_json(&matrix_text(a)?)?;
            let shift = match b {
                Some(b) => rational_list(flag, b)?,
                None => vec![Rational::from_integer(0.into()); matrix.dim()],
            };
            plain(affine_torus(matrix, shift)?)
        }
        "interval" => {
            let map = match rest {
                "square" => IntervalMap::Square,
                "tent" => IntervalMap::Tent,
                _ if rest.starts_with("logistic:r=") => {
                    let r = &rest["logistic:r=".len()..];
                    IntervalMap::Logistic(parse_rational(r).ok_or_else(|| usage(flag, format!("bad logistic parameter {r:?}")))?)
                }
                _ if rest.starts_with("pwl=") => IntervalMap::PiecewiseLinear(knots_from_json(&read(&rest[4..])?)?),
                _ => return Err(usage(flag, format!("unknown interval map {rest:?}"))),
            };
            plain(interval_map(map)?)
        }
        "shift" => {
            let default_point = if rest.is_empty() { None } else { Some(parse_symbolic(flag, rest)?) };
            Ok(ParsedSystem { system: bernoulli_shift(), default_point })
        }
        "projective" => {
            let t = rest.strip_prefix("T=").ok_or_else(|| usage(flag, "expected projective:T=<matrix>"))?;
            plain(projective_action(real_matrix_from_json(&matrix_text(t)?)?)?)
        }
        _ => Err(usage(flag, format!("unknown system {head:?}"))),
    }
}

fn knots_from_json(text: &str) -> Result<Vec<(Rational, Rational)>, CliError> {
    let doc: serde_json::Value = serde_json::from_str(text).map_err(ergolab_core::Error::from)?;
    let bad = || CliError::Domain(ergolab_core::Error::Parse("knots must be [[x, y], ...]".into()));
    let items = doc.get("knots").unwrap_or(&doc).as_array().ok_or_else(bad)?;
    items
        .iter()
        .map(|k| {
            let pair = k.as_array().filter(|p| p.len() == 2).ok_or_else(bad)?;
            let num = |v: &serde_json::Value| match v {
                serde_json::Value::String(s) => parse_rational(s),
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                _ => None,
            };
            Ok((num(&pair[0]).ok_or_else(bad)?, num(&pair[1]).ok_or_else(bad)?))
        })
        .collect()
}

/// Adds observables from a JSON file to the system dictionary.
pub fn extend_dictionary(system: SystemSpec, path: Option<&Path>) -> Result<SystemSpec, CliError> {
    match path {
        None => Ok(system),
        Some(p) => {
            let extra = observables_from_json(&read(&p.display().to_string())?)?;
            Ok(system.with_observables(extra))
        }
    }
}

fn word(flag: &str, w: &str) -> Result<Vec<u8>, CliError> {
    SymbolicPoint::parse_word(w).ok_or_else(|| usage(flag, format!("bad binary word {w:?}")))
}

/// `pre=<w>,per=<w>`, `per=<w>`, `rule=blocks<b>`, or a bare period word.
pub fn parse_symbolic(flag: &str, text: &str) -> Result<PointRepr, CliError> {
    if let Some(rule) = text.strip_prefix("rule=") {
        let base = rule
            .strip_prefix("blocks")
            .and_then(|b| b.parse::<u64>().ok())
            .filter(|b| *b >= 2)
            .ok_or_else(|| usage(flag, format!("unknown rule {rule:?}")))?;
        return Ok(PointRepr::Symbolic(SymbolicPoint::blocks(base)));
    }
    let mut prefix = Vec::new();
    let mut period = None;
    if text.contains('=') {
        for part in text.split(',') {
            match part.split_once('=') {
                Some(("pre", w)) => prefix = word(flag, w)?,
                Some(("per", w)) => period = Some(word(flag, w)?),
                _ => return Err(usage(flag, format!("bad symbolic point component {part:?}"))),
            }
        }
    } else {
        period = Some(word(flag, text)?);
    }
    let period = period.ok_or_else(|| usage(flag, "symbolic point needs per=<word>"))?;
    SymbolicPoint::periodic(prefix, period)
        .map(PointRepr::Symbolic)
        .ok_or_else(|| usage(flag, "period word must be nonempty"))
}

/// Coordinates `a,b,...` (each `p/q` or decimal), or a symbolic point for the shift.
pub fn parse_point(flag: &str, text: &str, system: &SystemSpec, exact: bool) -> Result<PointRepr, CliError> {
    let text = text.trim();
    if system.dimension().is_none() {
        return parse_symbolic(flag, text);
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let point = if exact {
        PointRepr::Rational(
            parts
                .iter()
                .map(|x| parse_rational(x).ok_or_else(|| usage(flag, format!("bad coordinate {x:?}"))))
                .collect::<Result<_, _>>()?,
        )
    } else {
        PointRepr::Real(
            parts
                .iter()
                .map(|x| f64::parse_str(x).ok_or_else(|| usage(flag, format!("bad coordinate {x:?}"))))
                .collect::<Result<_, _>>()?,
        )
    };
    Ok(system.normalize_point(point)?)
}

/// `G` (default lattice), `list:<p>;<p>;...`, `file=<path>` (JSON array of
/// point strings) or `cylinder` (shift only; needs the shift list).
pub fn parse_grid(text: &str, system: &SystemSpec, exact: bool, shifts: Option<&[usize]>) -> Result<Vec<PointRepr>, CliError> {
    let flag = "--grid";
    if let Ok(g) = text.parse::<usize>() {
        return Ok(system.default_grid(g, exact)?);
    }
    if text == "cylinder" {
        let shifts = shifts.ok_or_else(|| usage(flag, "cylinder grid needs --shifts"))?;
        if system.dimension().is_some() {
            return Err(usage(flag, "cylinder grid is only defined for the shift"));
        }
        return Ok(cylinder_grid(shifts)?);
    }
    if let Some(list) = text.strip_prefix("list:") {
        return list.split(';').map(|p| parse_point(flag, p, system, exact)).collect();
    }
    let path = text.strip_prefix("file=").unwrap_or(text);
    let doc: serde_json::Value = serde_json::from_str(&read(path)?).map_err(ergolab_core::Error::from)?;
    let items = doc
        .get("points")
        .unwrap_or(&doc)
        .as_array()
        .ok_or_else(|| CliError::Domain(ergolab_core::Error::Parse("grid file must be an array of points".into())))?;
    items
        .iter()
        .map(|v| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Array(a) => a.iter().map(|x| x.to_string().trim_matches('"').to_string()).collect::<Vec<_>>().join(","),
                other => return Err(CliError::Domain(ergolab_core::Error::Parse(format!("bad grid point {other}")))),
            };
            parse_point(flag, &s, system, exact)
        })
        .collect()
}

/// `0,1,2`, `a..b` or `a..=b`.
pub fn parse_shifts(text: &str) -> Result<Vec<usize>, CliError> {
    let flag = "--shifts";
    let int = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(flag, format!("bad shift {x:?}")));
    if let Some((a, b)) = text.split_once("..=") {
        return Ok((int(a)?..=int(b)?).collect());
    }
    if let Some((a, b)) = text.split_once("..") {
        return Ok((int(a)?..int(b)?).collect());
    }
    text.split(',').map(int).collect()
}

/// `geometric:<r>[,from=<m>]` (up to `n`), `list:a,b,...` or `a,b,...`.
pub fn parse_checkpoints(text: Option<&str>, n: usize) -> Result<Vec<usize>, CliError> {
    let flag = "--checkpoints";
    let text = text.unwrap_or("geometric:1.5");
    if let Some(rest) = text.strip_prefix("geometric:") {
        let (r, from) = match rest.split_once(",from=") {
            Some((r, m)) => (r, m.parse::<usize>().map_err(|_| usage(flag, format!("bad start {m:?}")))?),
            None => (rest, 0),
        };
        let r: f64 = r.parse().map_err(|_| usage(flag, format!("bad ratio {r:?}")))?;
        return Ok(geometric_indices(r, n)?.into_iter().filter(|&c| c >= from).collect());
    }
    let list = text.strip_prefix("list:").unwrap_or(text);
    list.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(flag, format!("bad checkpoint {x:?}"))))
        .collect()
}

/// Splits at the first comma outside parentheses.
fn split_top(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&text[..i], &text[i + 1..])),
            _ => {}
        }
    }
    None
}

fn call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

/// `cesaro`, `riesz:log`, `riesz:file=<path>`, `matrix:file=<path>`,
/// `interleave(<m>,<m>)`, `subseq(<m>,even|odd|geometric:<r>|file=<path>|list:a,b,...)`.
pub fn parse_method<S: Scalar>(text: &str) -> Result<SummationMethod<S>, CliError> {
    let flag = "--method";
    let text = text.trim();
    if text == "cesaro" {
        return Ok(cesaro());
    }
    if text == "riesz:log" {
        return Ok(riesz_log());
    }
    if let Some(path) = text.strip_prefix("riesz:file=") {
        return Ok(riesz_from_file(Path::new(path))?);
    }
    if let Some(path) = text.strip_prefix("matrix:file=") {
        return Ok(matrix_from_file(Path::new(path))?);
    }
    if let Some(args) = call(text, "interleave") {
        let (a, b) = split_top(args).ok_or_else(|| usage(flag, "interleave needs two methods"))?;
        return Ok(interleave(parse_method(a)?, parse_method(b)?));
    }
    if let Some(args) = call(text, "subseq") {
        let (base, map) = split_top(args).ok_or_else(|| usage(flag, "subseq needs a method and an index map"))?;
        let map = match map.trim() {
            "even" => IndexMap::Even,
            "odd" => IndexMap::Odd,
            m if m.starts_with("geometric:") => {
                let r: f64 = m["geometric:".len()..].parse().map_err(|_| usage(flag, format!("bad ratio in {m:?}")))?;
                IndexMap::geometric(r)?
            }
            m if m.starts_with("file=") => index_map_from_json(&read(&m[5..])?)?,
            m if m.starts_with("list:") => IndexMap::explicit(
                m[5..]
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|_| usage(flag, format!("bad index {x:?}"))))
                    .collect::<Result<_, _>>()?,
            )?,
            m => return Err(usage(flag, format!("unknown index map {m:?}"))),
        };
        return Ok(subsequence(parse_method(base)?, map)?);
    }
    Err(usage(flag, format!("unknown method {text:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systems() {
        assert!(parse_system("rotation:alpha=1/3").unwrap().system.exact_by_default());
        assert!(!parse_system("rotation:alpha=golden").unwrap().system.exact_by_default());
        let t = parse_system("torus:A=[[1,1],[0,1]],b=0,1/2").unwrap().system;
        assert_eq!(t.dimension(), Some(2));
        assert!(parse_system("torus:A=[[2]]").is_ok());
        assert!(parse_system("interval:logistic:r=4").is_ok());
        let s = parse_system("shift:rule=blocks4").unwrap();
        assert!(s.default_point.is_some());
        assert!(parse_system("projective:T=[[2,0],[0,1]]").is_ok());
        assert!(matches!(parse_system("bogus"), Err(CliError::Usage(_))));
    }

    #[test]
    fn methods() {
        let m = parse_method::<f64>("subseq(interleave(cesaro,riesz:log),list:1,3,5)").unwrap();
        assert_eq!(m.row(1).unwrap().n(), 1);
        assert!(parse_method::<f64>("subseq(cesaro,geometric:1.5)").is_ok());
        assert!(matches!(parse_method::<f64>("abel"), Err(CliError::Usage(_))));
    }

    #[test]
    fn points_and_grids() {
        let t = parse_system("torus:A=[[2]]").unwrap().system;
        assert_eq!(parse_point("--point", "8/7", &t, true).unwrap(), PointRepr::rational(vec![Rational::new(1.into(), 7.into())]));
        let grid = parse_grid("list:1/7;2/7", &t, true, None).unwrap();
        assert_eq!(grid.len(), 2);
        let shift = parse_system("shift").unwrap().system;
        assert_eq!(parse_grid("cylinder", &shift, true, Some(&[0, 1, 2])).unwrap().len(), 8);
        assert_eq!(parse_shifts("0..=5").unwrap(), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(parse_checkpoints(Some("list:1,5,9"), 9).unwrap(), vec![1, 5, 9]);
        assert!(parse_checkpoints(Some("geometric:1.5,from=100"), 2000).unwrap().iter().all(|&c| c >= 100));
    }
}
