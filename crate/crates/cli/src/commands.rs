//! Subcommand bodies.

use std::str::FromStr;

use ergolab_core::averaging::{detect_convergence, trace_observables};
use ergolab_core::decomposition::{decompose as run_decompose, PsiParams};
use ergolab_core::matrix::{int_matrix_from_json, IntMatrix};
use ergolab_core::summation::validate_method;
use ergolab_core::systems::{Observable, SystemSpec};
use ergolab_core::tameness::{decide_tame, decide_tame_affine, flatness_lp};
use ergolab_core::{Error, Rational, Scalar};
use serde_json::{json, Map, Number, Value};

use crate::output::{emit, exact, gap, measure, num, nums, point, scalar, verdict};
use crate::spec::{
    extend_dictionary, matrix_text, parse_checkpoints, parse_grid, parse_method, parse_point, parse_shifts, parse_system,
    rational_list,
};
use crate::{Arith, AverageArgs, CliError, Command, DecomposeArgs, FlatnessArgs, SystemArgs, TameArgs, ValidateArgs};

/// Largest dimension `tame` accepts without `--allow-large-d`.
pub const LARGE_DIMENSION: usize = 8;

/// Largest `--max-n` for which `validate-method --arith auto` uses exact arithmetic.
pub const AUTO_EXACT_MAX_N: usize = 1000;

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Tame(a) => tame(&a),
        Command::Flatness(a) => flatness(&a),
        Command::Average(a) => average(&a),
        Command::Decompose(a) => decompose(&a),
        Command::ValidateMethod(a) => validate(&a),
        Command::Scenarios(a) => crate::scenarios::command(&a),
    }
}

fn big(x: &impl ToString) -> Value {
    Number::from_str(&x.to_string()).map(Value::Number).unwrap_or(Value::Null)
}

fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.rows().iter().map(|r| Value::Array(r.iter().map(big).collect())).collect())
}

fn tame(args: &TameArgs) -> Result<(), CliError> {
    let a = int_matrix_from_json(&matrix_text(&args.matrix)?)?;
    if a.dim() > LARGE_DIMENSION {
        if !args.allow_large_d {
            return Err(CliError::Usage(format!(
                "--matrix: dimension {} exceeds {LARGE_DIMENSION}; pass --allow-large-d to proceed",
                a.dim()
            )));
        }
        eprintln!("warning: d = {} makes L(d) large; powering may be slow", a.dim());
    }
    let cert = match &args.shift {
        Some(b) => decide_tame_affine(&a, rational_list("--shift", b)?)?,
        None => decide_tame(&a)?,
    };
    let value = json!({
        "verdict": cert.verdict.as_str(),
        "witness": cert.witness.map(|(k, l)| json!([k, l])),
        "d": cert.d,
        "L": cert.bound,
        "matrix": matrix_json(&cert.matrix),
        "shift": cert.shift.as_ref().map(|b| b.iter().map(|q| q.to_string()).collect::<Vec<_>>()),
        "note": cert.note,
    });
    emit(&value, args.out.as_deref())
}

struct Loaded {
    system: SystemSpec,
    default_point: Option<ergolab_core::systems::PointRepr>,
    exact_points: bool,
}

fn load_system(args: &SystemArgs) -> Result<Loaded, CliError> {
    let parsed = parse_system(&args.system)?;
    let system = extend_dictionary(parsed.system, args.observables.as_deref())?;
    let exact_points = !args.float_points && system.exact_by_default();
    Ok(Loaded { system, default_point: parsed.default_point, exact_points })
}

fn observable<'a>(system: &'a SystemSpec, name: &str) -> Result<&'a Observable, CliError> {
    system.observable(name).ok_or_else(|| {
        let names: Vec<&str> = system.dictionary().iter().map(Observable::name).collect();
        CliError::Usage(format!("--observable: unknown observable {name:?}; available: {}", names.join(", ")))
    })
}

fn flatness(args: &FlatnessArgs) -> Result<(), CliError> {
    let loaded = load_system(&args.sys)?;
    let shifts = parse_shifts(&args.shifts)?;
    let x = observable(&loaded.system, &args.observable)?;
    let grid = parse_grid(&args.grid, &loaded.system, loaded.exact_points, Some(&shifts))?;
    let r = flatness_lp(&loaded.system, x, &shifts, &grid)?;
    let value = json!({
        "system": loaded.system.name(),
        "observable": r.observable,
        "shifts": r.shifts,
        "grid_points": r.grid.len(),
        "value": num(r.value),
        "lp_objective": num(r.lp_objective),
        "coefficients": nums(r.coefficients.iter().copied()),
        "note": "a small value on a fine grid is evidence of flatness; a large value on the cylinder grid is an obstruction",
    });
    emit(&value, args.out.as_deref())
}

fn use_exact(arith: Arith, auto: bool) -> bool {
    match arith {
        Arith::Exact => true,
        Arith::Float => false,
        Arith::Auto => auto,
    }
}

fn average(args: &AverageArgs) -> Result<(), CliError> {
    let loaded = load_system(&args.sys)?;
    if use_exact(args.arith, loaded.exact_points) {
        average_as::<Rational>(args, &loaded)
    } else {
        average_as::<f64>(args, &loaded)
    }
}

fn average_as<S: Scalar>(args: &AverageArgs, loaded: &Loaded) -> Result<(), CliError> {
    let s = &loaded.system;
    let method = parse_method::<S>(&args.method)?;
    let start = match (&args.point, &loaded.default_point) {
        (Some(p), _) => parse_point("--point", p, s, loaded.exact_points)?,
        (None, Some(p)) => p.clone(),
        (None, None) => return Err(CliError::Usage("--point: required for this system".into())),
    };
    let checkpoints = parse_checkpoints(args.checkpoints.as_deref(), args.n)?;
    if checkpoints.last().is_some_and(|&c| c > args.n) {
        return Err(CliError::Usage(format!("--checkpoints: checkpoints exceed --n {}", args.n)));
    }
    let observables: Vec<Observable> = match &args.observable {
        Some(name) => vec![observable(s, name)?.clone()],
        None => s.dictionary().to_vec(),
    };
    let t = trace_observables(s, &method, &start, &checkpoints, &observables)?;

    let mut values = Map::new();
    let mut values_exact = Map::new();
    let mut residuals = Map::new();
    for (j, x) in t.observables.iter().enumerate() {
        values.insert(x.name().into(), Value::Array(t.values[j].iter().map(scalar).collect()));
        residuals.insert(x.name().into(), Value::Array(t.residuals[j].iter().map(scalar).collect()));
        if S::EXACT {
            values_exact.insert(x.name().into(), Value::Array(t.values[j].iter().map(exact).collect()));
        }
    }
    let mut out = Map::new();
    out.insert("system".into(), json!(s.name()));
    out.insert("method".into(), json!(t.method));
    out.insert("point".into(), point(&t.start));
    out.insert("n".into(), json!(args.n));
    out.insert("arith".into(), json!(if S::EXACT { "exact" } else { "float" }));
    out.insert("checkpoints".into(), json!(t.checkpoints));
    out.insert("values".into(), Value::Object(values));
    if S::EXACT {
        out.insert("values_exact".into(), Value::Object(values_exact));
    }
    out.insert("residuals".into(), Value::Object(residuals));
    out.insert("final_measure".into(), measure(&t.final_measure, &t.observables, args.max_atoms)?);
    match detect_convergence(&t, args.tol, args.sep) {
        Ok(v) => {
            out.insert("verdict".into(), verdict(&v, &t.observables, args.max_atoms)?);
        }
        Err(e @ Error::TooFewCheckpoints { .. }) => {
            out.insert("verdict".into(), Value::Null);
            out.insert("verdict_error".into(), json!(e.to_string()));
        }
        Err(e) => return Err(e.into()),
    }
    emit(&Value::Object(out), args.out.as_deref())
}

fn decompose(args: &DecomposeArgs) -> Result<(), CliError> {
    let loaded = load_system(&args.sys)?;
    if use_exact(args.arith, loaded.exact_points) {
        decompose_as::<Rational>(args, &loaded)
    } else {
        decompose_as::<f64>(args, &loaded)
    }
}

fn decompose_as<S: Scalar>(args: &DecomposeArgs, loaded: &Loaded) -> Result<(), CliError> {
    let s = &loaded.system;
    let method = parse_method::<S>(&args.method)?;
    let grid = parse_grid(&args.grid, s, loaded.exact_points, None)?;
    let mut params = PsiParams::new(args.n, args.tol, args.sep);
    if args.checkpoints.is_some() {
        params.checkpoints = Some(parse_checkpoints(args.checkpoints.as_deref(), args.n)?);
    }
    let r = run_decompose(s, &method, &grid, &params, args.eps, args.separation_tol)?;
    let dictionary = s.dictionary();

    let mut components = Vec::new();
    for (k, members) in r.components.iter().enumerate() {
        let rep = &r.representatives[k];
        let mut pairings = Map::new();
        for x in dictionary {
            pairings.insert(x.name().into(), num(rep.pair_f64(x)?));
        }
        let certificate = match &r.certificates[k] {
            Some(c) => json!({"kind": "ergodic (certified exact cycle)", "period": c.period}),
            None => json!({"kind": "quasi-ergodic (empirical)", "period": null}),
        };
        components.push(json!({
            "members": members,
            "member_points": members.iter().map(|&i| point(&r.grid[i])).collect::<Vec<_>>(),
            "representative": r.representative_index[k],
            "representative_point": point(&r.grid[r.representative_index[k]]),
            "diameter": num(r.diameters[k]),
            "certificate": certificate,
            "pairings": pairings,
            "measure": measure(rep, dictionary, args.max_atoms)?,
        }));
    }
    let undecided: Vec<Value> = r
        .undecided
        .iter()
        .map(|&i| {
            let v = &r.limits[i].verdict;
            json!({
                "index": i,
                "point": point(&r.grid[i]),
                "status": v.status.as_str(),
                "cauchy_gap": num(v.cauchy_gap),
                "evidence": gap(&v.evidence),
            })
        })
        .collect();
    let pairs: Vec<Value> = r
        .separation
        .pairs
        .iter()
        .map(|p| {
            json!({
                "a": p.a,
                "b": p.b,
                "separating": p.separating.map(|j| r.separation.observables[j].clone()),
                "gaps": nums(p.gaps.iter().copied()),
            })
        })
        .collect();
    let residuals: Vec<Value> = r
        .limits
        .iter()
        .map(|l| json!({"trace": num(l.trace_residual), "limit": l.limit_residual.map_or(Value::Null, num)}))
        .collect();
    if r.chained() {
        eprintln!("warning: a component's diameter exceeds eps; single-linkage chaining may have merged distinct limits");
    }
    let value = json!({
        "system": r.system,
        "method": r.method,
        "arith": if S::EXACT { "exact" } else { "float" },
        "n": args.n,
        "eps": num(r.eps),
        "grid_points": r.grid.len(),
        "components": components,
        "chained": r.chained(),
        "undecided": undecided,
        "separation": {
            "observables": r.separation.observables,
            "tolerance": num(r.separation.tolerance),
            "pass": r.separation.pass,
            "pairs": pairs,
        },
        "residuals": residuals,
    });
    emit(&value, args.out.as_deref())
}

fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    if use_exact(args.arith, args.max_n <= AUTO_EXACT_MAX_N) {
        validate_as::<Rational>(args)
    } else {
        validate_as::<f64>(args)
    }
}

fn validate_as<S: Scalar>(args: &ValidateArgs) -> Result<(), CliError> {
    let method = parse_method::<S>(&args.method)?;
    let r = validate_method(&method, args.max_n, args.threshold)?;
    let v = r.final_variation();
    let value = json!({
        "method": r.method,
        "max_n": r.max_n,
        "arith": if S::EXACT { "exact" } else { "float" },
        "row_sum_defect": scalar(&r.row_sum_defect),
        "row_sum_defect_exact": exact(&r.row_sum_defect),
        "variation": scalar(v),
        "variation_exact": exact(v),
        "threshold": num(r.threshold),
        "pass": r.pass,
    });
    emit(&value, args.out.as_deref())
}
