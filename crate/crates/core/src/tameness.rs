//! Tameness of affine torus maps `ω ↦ Aω + b` (decided by eventual
//! periodicity of the powers of `A`) and an ℓ¹-flatness linear program.

use std::collections::HashMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_integer::Integer;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::systems::{Observable, PointRepr, SymbolicPoint, SystemSpec};

/// Euler's totient.
pub fn totient(m: u64) -> u64 {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// `L(d) = lcm{m ≥ 1 : φ(m) ≤ d}`. Every `m` with `φ(m) ≤ d` satisfies
/// `m ≤ 2d²`, so the enumeration stops there.
pub fn totient_lcm_bound(d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let d64 = d as u64;
    let limit = 2 * d64 * d64;
    let mut l: u64 = 1;
    for m in 1..=limit.max(2) {
        if totient(m) <= d64 {
            let g = l.gcd(&m);
            l = (l / g).checked_mul(m).ok_or(Error::BoundOverflow { dim: d })?;
        }
    }
    Ok(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tameness {
    Tame,
    Untame,
}

impl Tameness {
    pub fn as_str(self) -> &'static str {
        match self {
            Tameness::Tame => "tame",
            Tameness::Untame => "untame",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TamenessCertificate {
    pub matrix: IntMatrix,
    pub d: usize,
    /// `L(d)`
    pub bound: u64,
    pub verdict: Tameness,
    /// Minimal `(k, l)` with `k < l` and `A^k = A^l`, when tame.
    pub witness: Option<(u64, u64)>,
    /// Recorded but not used by the decision.
    pub shift: Option<Vec<BigRational>>,
    pub note: Option<String>,
}

/// Decides tameness of the linear part `A`: tame iff `A^{d+L(d)} = A^d`.
pub fn decide_tame(a: &IntMatrix) -> Result<TamenessCertificate> {
    let d = a.dim();
    let bound = totient_lcm_bound(d)?;
    let top = (d as u64).checked_add(bound).ok_or(Error::BoundOverflow { dim: d })?;
    let verdict = if a.pow(d as u64) == a.pow(top) { Tameness::Tame } else { Tameness::Untame };
    let witness = match verdict {
        Tameness::Tame => {
            let (k, l) = first_repeat(a, top).expect("A^d = A^(d+L) forces a repeat by exponent d+L");
            assert!(a.pow(k) == a.pow(l), "witness failed big-integer verification");
            Some((k, l))
        }
        Tameness::Untame => None,
    };
    Ok(TamenessCertificate { matrix: a.clone(), d, bound, verdict, witness, shift: None, note: None })
}

/// As [`decide_tame`] for `ω ↦ Aω + b`; `b` is recorded with a note.
pub fn decide_tame_affine(a: &IntMatrix, shift: Vec<BigRational>) -> Result<TamenessCertificate> {
    if shift.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: shift.len() });
    }
    let mut cert = decide_tame(a)?;
    cert.shift = Some(shift);
    cert.note = Some("verdict depends only on the linear part A; the shift b is recorded, not used".into());
    Ok(cert)
}

/// First `(k, l)` with `A^k = A^l`, scanning exponents up to `max_exp`.
pub fn first_repeat(a: &IntMatrix, max_exp: u64) -> Option<(u64, u64)> {
    let mut seen: HashMap<IntMatrix, u64> = HashMap::new();
    let mut power = IntMatrix::identity(a.dim());
    for e in 0..=max_exp {
        if let Some(&k) = seen.get(&power) {
            return Some((k, e));
        }
        let next = &power * a;
        seen.insert(power, e);
        power = next;
    }
    None
}

#[derive(Debug, Clone)]
pub struct FlatnessResult {
    pub observable: String,
    pub shifts: Vec<usize>,
    pub grid: Vec<PointRepr>,
    /// `max_i |Σ_k a_k x(φ^{n(k)} ω_i)|` for the returned coefficients.
    pub value: f64,
    /// Optimum reported by the solver before normalization.
    pub lp_objective: f64,
    /// `Σ |a_k| = 1`
    pub coefficients: Vec<f64>,
}

/// `V[i][k] = x(φ^{n(k)} ω_i)`.
pub fn shifted_values(s: &SystemSpec, x: &Observable, shifts: &[usize], grid: &[PointRepr]) -> Result<Vec<Vec<f64>>> {
    let top = shifts.iter().copied().max().unwrap_or(0);
    grid.iter()
        .map(|p| {
            let orbit = s.iterate(p, top)?;
            shifts.iter().map(|&n| x.eval(&orbit.points[n])).collect()
        })
        .collect()
}

/// Grid max of `|Σ_k a_k V[i][k]|`.
pub fn grid_norm(values: &[Vec<f64>], a: &[f64]) -> f64 {
    values
        .iter()
        .map(|row| row.iter().zip(a).map(|(v, c)| v * c).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Largest `K` accepted by [`flatness_lp`]; the solve enumerates `2^{K-1}` orthants.
pub const MAX_FLATNESS_SHIFTS: usize = 16;

/// `min ‖Σ_k a_k x∘φ^{n(k)}‖_grid` over `Σ |a_k| = 1`.
pub fn flatness_lp(s: &SystemSpec, x: &Observable, shifts: &[usize], grid: &[PointRepr]) -> Result<FlatnessResult> {
    if shifts.len() < 2 || shifts.len() > MAX_FLATNESS_SHIFTS {
        return Err(Error::InvalidParameter(format!(
            "flatness needs between 2 and {MAX_FLATNESS_SHIFTS} shifts, got {}",
            shifts.len()
        )));
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let grid = grid.iter().map(|p| s.normalize_point(p.clone())).collect::<Result<Vec<_>>>()?;
    let values = shifted_values(s, x, shifts, &grid)?;
    let (lp_objective, raw) = solve_flatness(&values)?;
    let total: f64 = raw.iter().map(|c| c.abs()).sum();
    if total.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::LpNumericalFailure("solver returned zero coefficients".into()));
    }
    let coefficients: Vec<f64> = raw.iter().map(|c| c / total).collect();
    let value = grid_norm(&values, &coefficients);
    Ok(FlatnessResult { observable: x.name().to_string(), shifts: shifts.to_vec(), grid, value, lp_objective, coefficients })
}

/// Solves the flatness problem for a value table; returns `(t*, a)`.
///
/// On each orthant `σ` the constraint `Σ |a_k| = 1` is the linear
/// `Σ σ_k a_k = 1`, so the minimum over the sphere is the best of one LP
/// per orthant. `a ↦ -a` halves the count. The first best orthant wins ties.
pub fn solve_flatness(values: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let k = values.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::InvalidParameter("flatness needs at least one shift".into()));
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for pattern in 0..1u32 << (k - 1) {
        let signs: Vec<f64> = (0..k).map(|j| if j > 0 && pattern >> (j - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let (t, a) = solve_orthant(values, &signs)?;
        if best.as_ref().is_none_or(|(b, _)| t < *b) {
            best = Some((t, a));
        }
    }
    Ok(best.expect("at least one orthant"))
}

/// `min t` subject to `|Σ_k σ_k b_k V[i][k]| ≤ t`, `Σ b_k = 1`, `b ≥ 0`.
fn solve_orthant(values: &[Vec<f64>], signs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let k = signs.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let b: Vec<_> = (0..k).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let t = lp.add_var(1.0, (0.0, f64::INFINITY));
    for row in values {
        let mut upper: Vec<_> = row.iter().zip(&b).zip(signs).map(|((v, &var), s)| (var, s * v)).collect();
        let mut lower = upper.clone();
        upper.push((t, -1.0));
        lower.push((t, 1.0));
        lp.add_constraint(&upper, ComparisonOp::Le, 0.0);
        lp.add_constraint(&lower, ComparisonOp::Ge, 0.0);
    }
    let mass: Vec<_> = b.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(&mass, ComparisonOp::Eq, 1.0);
    let solution = lp
        .solve()
        .map_err(|e| match e {
            microlp::Error::Infeasible => Error::LpInfeasible,
            other => Error::LpNumericalFailure(other.to_string()),
        })?
        .into_solution()
        .map_err(|_| Error::LpNumericalFailure("solver interrupted".into()))?;
    let a = b.iter().zip(signs).map(|(&var, s)| s * solution.var_value(var)).collect();
    Ok((solution.objective(), a))
}

/// Points of the shift whose symbols at `shifts` run through all `2^K`
/// patterns, with zeros elsewhere.
pub fn cylinder_grid(shifts: &[usize]) -> Result<Vec<PointRepr>> {
    if shifts.len() > 20 {
        return Err(Error::InvalidParameter("cylinder grid supports at most 20 shifts".into()));
    }
    let len = shifts.iter().copied().max().map_or(0, |m| m + 1);
    Ok((0..1u32 << shifts.len())
        .map(|bits| {
            let mut word = vec![0u8; len];
            for (i, &n) in shifts.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    word[n] = 1;
                }
            }
            PointRepr::Symbolic(SymbolicPoint::periodic(word, vec![0]).expect("binary word"))
        })
        .collect())
}
