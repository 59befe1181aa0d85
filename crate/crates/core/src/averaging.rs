//! Weighted ergodic averages `(U_n x)(ω) = Σ_k s_{n,k} x(φ^k ω)`, the
//! empirical measures `V_n δ_ω` behind them, and a convergence detector.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::summation::{geometric_indices, SummationMethod, WeightVector};
use crate::systems::{Observable, OrbitSegment, PointKey, PointRepr, SystemSpec};
use crate::Scalar;

/// Ratio of the default geometric checkpoint sequence.
pub const DEFAULT_CHECKPOINT_RATIO: f64 = 1.5;

/// A finite weighted combination of Dirac measures.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<S> {
    support: Vec<(PointRepr, S)>,
}

impl<S: Scalar> EmpiricalMeasure<S> {
    /// Builds a measure, merging atoms whose representations are identical.
    /// Atom order is the order of first occurrence.
    pub fn new(atoms: impl IntoIterator<Item = (PointRepr, S)>) -> Result<Self> {
        let mut support: Vec<(PointRepr, S)> = Vec::new();
        let mut index: HashMap<PointKey, usize> = HashMap::new();
        for (p, w) in atoms {
            if w < S::zero() {
                return Err(Error::InvalidParameter(format!("negative atom weight at {p}")));
            }
            match index.get(&p.key()) {
                Some(&i) => support[i].1 = support[i].1.clone() + w,
                None => {
                    index.insert(p.key(), support.len());
                    support.push((p, w));
                }
            }
        }
        Ok(EmpiricalMeasure { support })
    }

    pub fn dirac(p: PointRepr) -> Self {
        EmpiricalMeasure { support: vec![(p, S::one())] }
    }

    pub fn support(&self) -> &[(PointRepr, S)] {
        &self.support
    }

    /// Total mass `Σ w_i`.
    pub fn normalization(&self) -> S {
        S::sum_all(self.support.iter().map(|(_, w)| w.clone()))
    }

    /// `⟨x, μ⟩ = Σ w_i x(p_i)`.
    pub fn pair(&self, x: &Observable) -> Result<S> {
        let terms = self
            .support
            .iter()
            .map(|(p, w)| Ok(w.clone() * x.eval_as::<S>(p)?))
            .collect::<Result<Vec<S>>>()?;
        Ok(S::sum_all(terms))
    }

    pub fn pair_f64(&self, x: &Observable) -> Result<f64> {
        self.pair(x).map(|v| v.to_f64_lossy())
    }

    /// Image measure `μ ∘ φ^{-1}`.
    pub fn pushforward(&self, s: &SystemSpec) -> Result<Self> {
        let atoms = self
            .support
            .iter()
            .map(|(p, w)| Ok((s.step(p)?, w.clone())))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn to_f64(&self) -> EmpiricalMeasure<f64> {
        EmpiricalMeasure { support: self.support.iter().map(|(p, w)| (p.clone(), w.to_f64_lossy())).collect() }
    }
}

/// Orbit plus dictionary values, evaluated once per distinct orbit position.
struct OrbitTable<'a, S> {
    orbit: OrbitSegment,
    observables: &'a [Observable],
    /// `values[j][slot]`
    values: Vec<Vec<S>>,
}

impl<'a, S: Scalar> OrbitTable<'a, S> {
    fn build(s: &SystemSpec, start: &PointRepr, len: usize, observables: &'a [Observable]) -> Result<Self> {
        let orbit = s.iterate(start, len)?;
        let distinct = match orbit.cycle {
            Some(c) => c.preperiod + c.period,
            None => orbit.points.len(),
        };
        let values = observables
            .iter()
            .map(|x| orbit.points[..distinct].iter().map(|p| x.eval_as::<S>(p)).collect::<Result<Vec<S>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(OrbitTable { orbit, observables, values })
    }

    fn slot(&self, k: usize) -> usize {
        match self.orbit.cycle {
            Some(c) if k >= c.preperiod + c.period => c.preperiod + (k - c.preperiod) % c.period,
            _ => k,
        }
    }

    fn average(&self, row: &WeightVector<S>, j: usize, lag: usize) -> S {
        S::sum_all(row.entries().iter().map(|(k, w)| w.clone() * self.values[j][self.slot(k + lag)].clone()))
    }

    fn measure(&self, row: &WeightVector<S>) -> EmpiricalMeasure<S> {
        EmpiricalMeasure::new(row.entries().iter().map(|(k, w)| (self.orbit.points[self.slot(*k)].clone(), w.clone())))
            .expect("summation weights are nonnegative")
    }
}

fn orbit_length<S: Scalar>(rows: &[WeightVector<S>]) -> usize {
    rows.iter().filter_map(WeightVector::max_index).max().unwrap_or(0)
}

/// `(U_n x)(ω)`.
pub fn weighted_average<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    start: &PointRepr,
    n: usize,
    x: &Observable,
) -> Result<S> {
    let row = m.row(n)?;
    let dict = std::slice::from_ref(x);
    let table = OrbitTable::<S>::build(s, start, orbit_length(std::slice::from_ref(&row)), dict)?;
    Ok(table.average(&row, 0, 0))
}

/// `V_n δ_ω`.
pub fn empirical_measure<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    start: &PointRepr,
    n: usize,
) -> Result<EmpiricalMeasure<S>> {
    let row = m.row(n)?;
    let table = OrbitTable::<S>::build(s, start, orbit_length(std::slice::from_ref(&row)), &[])?;
    Ok(table.measure(&row))
}

/// Averages and invariance residuals along a sequence of checkpoints.
#[derive(Debug, Clone)]
pub struct AverageTrace<S> {
    pub start: PointRepr,
    pub method: String,
    pub checkpoints: Vec<usize>,
    pub observables: Vec<Observable>,
    /// `values[j][i] = (U_{n_i} x_j)(ω)`
    pub values: Vec<Vec<S>>,
    /// `residuals[j][i] = |⟨x_j∘φ, V_{n_i}δ_ω⟩ − ⟨x_j, V_{n_i}δ_ω⟩|`
    pub residuals: Vec<Vec<S>>,
    /// `V_n δ_ω` at the last checkpoint.
    pub final_measure: EmpiricalMeasure<S>,
    /// Length of the computed orbit segment.
    pub orbit_len: usize,
}

impl<S: Scalar> AverageTrace<S> {
    pub fn observable_index(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|o| o.name() == name)
    }
}

/// Trace over the system's dictionary.
pub fn trace<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    start: &PointRepr,
    checkpoints: &[usize],
) -> Result<AverageTrace<S>> {
    trace_observables(s, m, start, checkpoints, s.dictionary())
}

/// Trace over an explicit list of observables. The orbit is computed once,
/// to the largest index any checkpoint row needs.
pub fn trace_observables<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    start: &PointRepr,
    checkpoints: &[usize],
    observables: &[Observable],
) -> Result<AverageTrace<S>> {
    if checkpoints.is_empty() {
        return Err(Error::TooFewCheckpoints { needed: 1, found: 0 });
    }
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedCheckpoints);
    }
    let rows = checkpoints.iter().map(|&n| m.row(n)).collect::<Result<Vec<_>>>()?;
    let len = orbit_length(&rows) + 1;
    let table = OrbitTable::<S>::build(s, start, len, observables)?;
    let mut values = Vec::with_capacity(observables.len());
    let mut residuals = Vec::with_capacity(observables.len());
    for j in 0..observables.len() {
        let here: Vec<S> = rows.iter().map(|r| table.average(r, j, 0)).collect();
        let next: Vec<S> = rows.iter().map(|r| table.average(r, j, 1)).collect();
        residuals.push(next.into_iter().zip(&here).map(|(a, b)| (a - b.clone()).abs()).collect());
        values.push(here);
    }
    let final_measure = table.measure(rows.last().expect("nonempty"));
    debug_assert_eq!(table.observables.len(), observables.len());
    Ok(AverageTrace {
        start: table.orbit.start.clone(),
        method: m.name().to_string(),
        checkpoints: checkpoints.to_vec(),
        observables: observables.to_vec(),
        values,
        residuals,
        final_measure,
        orbit_len: len,
    })
}

/// `⌈r^i⌉` checkpoints up to and including `n`.
pub fn geometric_checkpoints(ratio: f64, n: usize) -> Result<Vec<usize>> {
    geometric_indices(ratio, n)
}

pub fn default_checkpoints(n: usize) -> Vec<usize> {
    geometric_checkpoints(DEFAULT_CHECKPOINT_RATIO, n).expect("valid ratio")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceStatus {
    Converged,
    Oscillating,
    Undecided,
}

impl ConvergenceStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergenceStatus::Converged => "converged",
            ConvergenceStatus::Oscillating => "oscillating",
            ConvergenceStatus::Undecided => "undecided",
        }
    }
}

/// Two checkpoints and the values one observable takes there.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEvidence {
    pub observable: String,
    pub checkpoints: (usize, usize),
    pub values: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ConvergenceVerdict<S> {
    pub status: ConvergenceStatus,
    pub limit: Option<EmpiricalMeasure<S>>,
    /// Largest tail range over the dictionary.
    pub cauchy_gap: f64,
    /// Checkpoints realizing `cauchy_gap`.
    pub evidence: Option<GapEvidence>,
    /// Largest jump between consecutive tail checkpoints.
    pub max_step_gap: f64,
    pub step_evidence: Option<GapEvidence>,
}

/// Converged when every observable's values over the last half of the
/// checkpoints lie in a range of at most `tol`; oscillating when some
/// observable jumps by at least `sep` between consecutive tail checkpoints;
/// undecided otherwise.
pub fn detect_convergence<S: Scalar>(t: &AverageTrace<S>, tol: f64, sep: f64) -> Result<ConvergenceVerdict<S>> {
    let count = t.checkpoints.len();
    if count < 4 {
        return Err(Error::TooFewCheckpoints { needed: 4, found: count });
    }
    let tail_start = count / 2;
    let mut range: (f64, Option<GapEvidence>) = (0.0, None);
    let mut step: (f64, Option<GapEvidence>) = (0.0, None);
    for (j, series) in t.values.iter().enumerate() {
        let tail: Vec<(usize, f64)> = (tail_start..count).map(|i| (t.checkpoints[i], series[i].to_f64_lossy())).collect();
        let name = t.observables[j].name();
        let lo = tail.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty tail");
        let hi = tail.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty tail");
        if hi.1 - lo.1 > range.0 || range.1.is_none() {
            let (a, b) = if lo.0 < hi.0 { (lo, hi) } else { (hi, lo) };
            range = (hi.1 - lo.1, Some(GapEvidence { observable: name.into(), checkpoints: (a.0, b.0), values: (a.1, b.1) }));
        }
        for w in tail.windows(2) {
            let gap = (w[1].1 - w[0].1).abs();
            if gap > step.0 || step.1.is_none() {
                step = (gap, Some(GapEvidence { observable: name.into(), checkpoints: (w[0].0, w[1].0), values: (w[0].1, w[1].1) }));
            }
        }
    }
    let status = if range.0 <= tol {
        ConvergenceStatus::Converged
    } else if step.0 >= sep {
        ConvergenceStatus::Oscillating
    } else {
        ConvergenceStatus::Undecided
    };
    let limit = (status == ConvergenceStatus::Converged).then(|| t.final_measure.clone());
    Ok(ConvergenceVerdict { status, limit, cauchy_gap: range.0, evidence: range.1, max_step_gap: step.0, step_evidence: step.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::summation::cesaro;
    use crate::systems::{affine_torus, bernoulli_shift, interval_map, rotation, IntervalMap, SymbolicPoint};
    use crate::Rational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn rq(n: i64, d: i64) -> PointRepr {
        PointRepr::rational(vec![q(n, d)])
    }

    fn doubling() -> SystemSpec {
        affine_torus(IntMatrix::from_i64_rows(&[[2]]).unwrap(), vec![q(0, 1)]).unwrap()
    }

    #[test]
    fn fixed_point_average() {
        let sq = interval_map(IntervalMap::Square).unwrap();
        let t = sq.observable("t").unwrap();
        let v = weighted_average(&sq, &cesaro::<f64>(), &PointRepr::real(vec![1.0]), 99, t).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn doubling_cycle_average() {
        let s = doubling();
        let x = s.observable("coord0").unwrap();
        let v = weighted_average(&s, &cesaro::<Rational>(), &rq(1, 7), 2, x).unwrap();
        assert_eq!(v, q(1, 3));
        let mu = empirical_measure(&s, &cesaro::<Rational>(), &rq(1, 7), 5).unwrap();
        assert_eq!(mu.support(), &[(rq(1, 7), q(1, 3)), (rq(2, 7), q(1, 3)), (rq(4, 7), q(1, 3))]);
    }

    #[test]
    fn quarter_rotation_measure() {
        let r = rotation(q(1, 4));
        let mu = empirical_measure(&r, &cesaro::<Rational>(), &rq(0, 1), 3).unwrap();
        let atoms: Vec<_> = mu.support().iter().map(|(p, w)| (p.clone(), w.clone())).collect();
        assert_eq!(atoms, vec![(rq(0, 1), q(1, 4)), (rq(1, 4), q(1, 4)), (rq(1, 2), q(1, 4)), (rq(3, 4), q(1, 4))]);
    }

    #[test]
    fn fixed_point_trace_converges() {
        let tent = interval_map(IntervalMap::Tent).unwrap();
        let start = rq(0, 1);
        let t = trace(&tent, &cesaro::<Rational>(), &start, &default_checkpoints(200)).unwrap();
        assert!(t.residuals.iter().flatten().all(|r| *r == q(0, 1)));
        let v = detect_convergence(&t, 1e-9, 0.4).unwrap();
        assert_eq!(v.status, ConvergenceStatus::Converged);
        assert_eq!(v.limit.unwrap(), EmpiricalMeasure::dirac(start));
    }

    #[test]
    fn too_few_checkpoints() {
        let tent = interval_map(IntervalMap::Tent).unwrap();
        let t = trace(&tent, &cesaro::<f64>(), &rq(0, 1), &[1, 2, 3]).unwrap();
        assert!(matches!(detect_convergence(&t, 0.1, 0.4), Err(Error::TooFewCheckpoints { needed: 4, found: 3 })));
        assert!(matches!(trace(&tent, &cesaro::<f64>(), &rq(0, 1), &[3, 2]), Err(Error::UnorderedCheckpoints)));
    }

    #[test]
    fn block_point_oscillates() {
        let s = bernoulli_shift();
        let x0 = s.observable("x0").unwrap().clone();
        let start = PointRepr::Symbolic(SymbolicPoint::blocks(4));
        let ck: Vec<usize> = (3..=6).map(|j| crate::systems::block_boundary(4, j) as usize - 1).collect();
        let t = trace_observables(&s, &cesaro::<Rational>(), &start, &ck, &[x0]).unwrap();
        assert_eq!(t.values[0][0], q(68, 84));
        assert_eq!(t.values[0][1], q(1, 5));
        let v = detect_convergence(&t, 0.05, 0.4).unwrap();
        assert_eq!(v.status, ConvergenceStatus::Oscillating);
        assert!(v.cauchy_gap >= 0.4);
    }

    #[test]
    fn periodic_orbit_uniform_on_cycle() {
        let s = doubling();
        let x = s.observable("coord0").unwrap();
        for m in 1..6 {
            let v = weighted_average(&s, &cesaro::<Rational>(), &rq(1, 7), 3 * m - 1, x).unwrap();
            assert_eq!(v, q(1, 3));
        }
    }

    fn doubling_start() -> impl Strategy<Value = PointRepr> {
        (1i64..60, 61i64..128).prop_map(|(n, d)| rq(n, d))
    }

    proptest! {
        #[test]
        fn cesaro_residual_bound(start in doubling_start(), n in 1usize..400) {
            let s = doubling();
            let t = trace(&s, &cesaro::<Rational>(), &start, &[n]).unwrap();
            for (j, o) in t.observables.iter().enumerate() {
                let r = t.residuals[j][0].to_f64_lossy();
                prop_assert!(r <= 2.0 * o.sup_norm() / (n as f64 + 1.0) + 1e-12);
            }
        }

        #[test]
        fn measure_pairing_matches_average(start in doubling_start(), n in 0usize..200) {
            let s = doubling();
            let m = cesaro::<Rational>();
            let mu = empirical_measure(&s, &m, &start, n).unwrap();
            prop_assert_eq!(mu.normalization(), q(1, 1));
            for x in s.dictionary().iter().filter(|o| o.name() == "coord0" || o.name() == "one") {
                prop_assert_eq!(mu.pair(x).unwrap(), weighted_average(&s, &m, &start, n, x).unwrap());
            }
        }

        #[test]
        fn pairing_is_linear(start in doubling_start(), n in 0usize..200, a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let s = doubling();
            let mu = empirical_measure(&s, &cesaro::<f64>(), &start, n).unwrap();
            let x = s.observable("cos1").unwrap();
            let y = s.observable("sin2").unwrap();
            let combo = crate::systems::piecewise_linear("tmp", 0, vec![(q(0, 1), q(0, 1)), (q(1, 1), q(1, 1))]).unwrap();
            let lhs: f64 = mu.support().iter().map(|(p, w)| w * (a * x.eval(p).unwrap() + b * y.eval(p).unwrap())).sum();
            let rhs = a * mu.pair(x).unwrap() + b * mu.pair(y).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
            prop_assert!(mu.pair(&combo).unwrap().abs() <= combo.sup_norm() + 1e-12);
        }

        #[test]
        fn merging_preserves_pairings(start in doubling_start(), n in 0usize..100) {
            let s = doubling();
            let row = cesaro::<Rational>().row(n).unwrap();
            let orbit = s.iterate(&start, n).unwrap();
            let x = s.observable("coord0").unwrap();
            let unmerged: Rational = row.entries().iter().map(|(k, w)| w * x.eval_as::<Rational>(&orbit.points[*k]).unwrap()).sum();
            let merged = EmpiricalMeasure::new(row.entries().iter().map(|(k, w)| (orbit.points[*k].clone(), w.clone()))).unwrap();
            prop_assert_eq!(merged.pair(x).unwrap(), unmerged);
        }
    }
}
