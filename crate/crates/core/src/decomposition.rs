//! The map `Ψ : ω ↦ μ_ω` over a grid of initial points, single-linkage
//! clustering of the limit measures, and checks on the resulting components.

use rayon::prelude::*;

use crate::averaging::{default_checkpoints, detect_convergence, trace, ConvergenceStatus, ConvergenceVerdict, EmpiricalMeasure};
use crate::error::Result;
use crate::summation::SummationMethod;
use crate::systems::{Observable, PointRepr, SystemSpec};
use crate::Scalar;

/// `d(μ, ν) = Σ_j 2^{-j} |⟨x_j, μ⟩ − ⟨x_j, ν⟩| / ‖x_j‖∞`, `j = 1..J`.
#[derive(Debug, Clone)]
pub struct MeasureDistance {
    dictionary: Vec<Observable>,
    scale: Vec<f64>,
}

impl MeasureDistance {
    pub fn new(dictionary: Vec<Observable>) -> Self {
        let scale = dictionary
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let norm = x.sup_norm();
                if norm > 0.0 {
                    0.5f64.powi(j as i32 + 1) / norm
                } else {
                    0.0
                }
            })
            .collect();
        MeasureDistance { dictionary, scale }
    }

    pub fn for_system(s: &SystemSpec) -> Self {
        Self::new(s.dictionary().to_vec())
    }

    pub fn dictionary(&self) -> &[Observable] {
        &self.dictionary
    }

    /// Pairings of `μ` with every dictionary observable.
    pub fn profile<S: Scalar>(&self, mu: &EmpiricalMeasure<S>) -> Result<Vec<f64>> {
        self.dictionary.iter().map(|x| mu.pair_f64(x)).collect()
    }

    pub fn between_profiles(&self, a: &[f64], b: &[f64]) -> f64 {
        self.scale.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y).abs()).sum()
    }

    pub fn distance<S: Scalar>(&self, mu: &EmpiricalMeasure<S>, nu: &EmpiricalMeasure<S>) -> Result<f64> {
        Ok(self.between_profiles(&self.profile(mu)?, &self.profile(nu)?))
    }
}

/// Limit verdict for one grid point.
#[derive(Debug, Clone)]
pub struct GridLimit<S> {
    pub point: PointRepr,
    pub verdict: ConvergenceVerdict<S>,
    /// Largest normalized invariance residual at the last checkpoint.
    pub trace_residual: f64,
    /// `ergodicity_residual` of the limit, when converged.
    pub limit_residual: Option<f64>,
}

impl<S> GridLimit<S> {
    pub fn converged(&self) -> bool {
        self.verdict.status == ConvergenceStatus::Converged
    }
}

/// Averaging parameters shared by every grid point.
#[derive(Debug, Clone)]
pub struct PsiParams {
    pub n: usize,
    /// Defaults to geometric checkpoints up to `n`.
    pub checkpoints: Option<Vec<usize>>,
    pub tol: f64,
    pub sep: f64,
}

impl PsiParams {
    pub fn new(n: usize, tol: f64, sep: f64) -> Self {
        PsiParams { n, checkpoints: None, tol, sep }
    }

    fn checkpoints(&self) -> Vec<usize> {
        self.checkpoints.clone().unwrap_or_else(|| default_checkpoints(self.n))
    }
}

fn limit_for<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    point: &PointRepr,
    checkpoints: &[usize],
    p: &PsiParams,
) -> Result<GridLimit<S>> {
    let t = trace(s, m, point, checkpoints)?;
    let last = t.checkpoints.len() - 1;
    let trace_residual = t
        .residuals
        .iter()
        .zip(&t.observables)
        .map(|(r, x)| r[last].to_f64_lossy() / x.sup_norm().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let verdict = detect_convergence(&t, p.tol, p.sep)?;
    let limit_residual = verdict.limit.as_ref().map(|mu| ergodicity_residual(s, mu)).transpose()?;
    Ok(GridLimit { point: t.start, verdict, trace_residual, limit_residual })
}

/// Per-point limit verdicts, computed in parallel and returned in grid order.
pub fn psi_map<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    grid: &[PointRepr],
    params: &PsiParams,
) -> Result<Vec<GridLimit<S>>> {
    if grid.is_empty() {
        return Err(crate::Error::EmptyGrid);
    }
    let checkpoints = params.checkpoints();
    grid.par_iter().map(|p| limit_for(s, m, p, &checkpoints, params)).collect()
}

/// Single-linkage clusters of `profiles` at threshold `eps`, as lists of
/// input indices. Members are sorted and clusters are ordered by their
/// smallest member.
pub fn cluster(metric: &MeasureDistance, profiles: &[Vec<f64>], eps: f64) -> Vec<Vec<usize>> {
    let n = profiles.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if metric.between_profiles(&profiles[i], &profiles[j]) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    // keep the lower index as root so labels follow input order
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[r]].push(i);
    }
    groups
}

/// One pair of representatives and how they are told apart.
#[derive(Debug, Clone)]
pub struct SeparationPair {
    pub a: usize,
    pub b: usize,
    /// First dictionary observable whose pairings differ by more than the
    /// tolerance; `None` means the dictionary is too coarse for this pair.
    pub separating: Option<usize>,
    /// `|⟨x_j, μ_a⟩ − ⟨x_j, μ_b⟩|` for every observable.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub observables: Vec<String>,
    pub tolerance: f64,
    pub pairs: Vec<SeparationPair>,
    pub pass: bool,
}

pub fn separation_check<S: Scalar>(
    reps: &[EmpiricalMeasure<S>],
    dictionary: &[Observable],
    tolerance: f64,
) -> Result<SeparationReport> {
    let profiles = reps
        .iter()
        .map(|mu| dictionary.iter().map(|x| mu.pair_f64(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for a in 0..reps.len() {
        for b in a + 1..reps.len() {
            let gaps: Vec<f64> = profiles[a].iter().zip(&profiles[b]).map(|(x, y)| (x - y).abs()).collect();
            let separating = gaps.iter().position(|g| *g > tolerance);
            pairs.push(SeparationPair { a, b, separating, gaps });
        }
    }
    let pass = pairs.iter().all(|p| p.separating.is_some());
    Ok(SeparationReport {
        observables: dictionary.iter().map(|x| x.name().to_string()).collect(),
        tolerance,
        pairs,
        pass,
    })
}

/// `max_j |⟨x_j∘φ, μ⟩ − ⟨x_j, μ⟩| / ‖x_j‖∞` over the system's dictionary.
pub fn ergodicity_residual<S: Scalar>(s: &SystemSpec, mu: &EmpiricalMeasure<S>) -> Result<f64> {
    let image = mu.pushforward(s)?;
    let mut worst = 0.0f64;
    for x in s.dictionary() {
        let diff = (image.pair(x)? - mu.pair(x)?).abs().to_f64_lossy();
        let norm = x.sup_norm();
        if norm > 0.0 {
            worst = worst.max(diff / norm);
        }
    }
    Ok(worst)
}

/// Proof that a measure is ergodic: it is uniform on one exact cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErgodicCertificate {
    pub period: usize,
}

/// Certifies `μ` when it is uniform on a single periodic orbit whose points
/// are represented exactly (or a float fixed point that maps to itself bit
/// for bit). Anything else returns `None`; that is not evidence against
/// ergodicity.
pub fn certify_ergodic<S: Scalar>(s: &SystemSpec, mu: &EmpiricalMeasure<S>) -> Result<Option<ErgodicCertificate>> {
    let support = mu.support();
    let Some((first, w0)) = support.first() else { return Ok(None) };
    let p = support.len();
    if support.iter().any(|(_, w)| w != w0) {
        return Ok(None);
    }
    if !first.is_exact() && p != 1 {
        return Ok(None);
    }
    let keys: std::collections::HashSet<_> = support.iter().map(|(q, _)| q.key()).collect();
    let mut current = first.clone();
    let mut visited = std::collections::HashSet::new();
    for _ in 0..p {
        if !keys.contains(&current.key()) || !visited.insert(current.key()) {
            return Ok(None);
        }
        current = s.step(&current)?;
    }
    Ok((current.key() == first.key()).then_some(ErgodicCertificate { period: p }))
}

/// Checks that `φ(ω)` has a limit linked to the same component as `ω` and to
/// no other, for every decided grid point.
#[derive(Debug, Clone)]
pub struct BiInvarianceReport {
    pub checked: usize,
    /// Grid indices whose image limit fell into a different component or none.
    pub failures: Vec<usize>,
    /// Grid indices whose image verdict was not `converged`.
    pub undecided_images: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DecompositionReport<S> {
    pub system: String,
    pub method: String,
    pub grid: Vec<PointRepr>,
    pub limits: Vec<GridLimit<S>>,
    /// Grid indices per component.
    pub components: Vec<Vec<usize>>,
    /// Medoid limit of each component.
    pub representatives: Vec<EmpiricalMeasure<S>>,
    pub representative_index: Vec<usize>,
    /// Largest pairwise distance inside each component; single linkage may
    /// chain points further apart than `eps`.
    pub diameters: Vec<f64>,
    pub certificates: Vec<Option<ErgodicCertificate>>,
    pub undecided: Vec<usize>,
    pub separation: SeparationReport,
    pub eps: f64,
    profiles: Vec<Option<Vec<f64>>>,
}

impl<S: Scalar> DecompositionReport<S> {
    pub fn profile(&self, grid_index: usize) -> Option<&[f64]> {
        self.profiles[grid_index].as_deref()
    }

    pub fn component_of(&self, grid_index: usize) -> Option<usize> {
        self.components.iter().position(|c| c.contains(&grid_index))
    }

    /// True when some component's diameter exceeds `eps`.
    pub fn chained(&self) -> bool {
        self.diameters.iter().any(|d| *d > self.eps)
    }
}

/// `psi_map`, then clustering of the converged limits, medoid
/// representatives, exact ergodicity certificates and the separation check.
pub fn decompose<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    grid: &[PointRepr],
    params: &PsiParams,
    eps: f64,
    separation_tolerance: f64,
) -> Result<DecompositionReport<S>> {
    let limits = psi_map(s, m, grid, params)?;
    let metric = MeasureDistance::for_system(s);
    let profiles = limits
        .iter()
        .map(|l| l.verdict.limit.as_ref().map(|mu| metric.profile(mu)).transpose())
        .collect::<Result<Vec<_>>>()?;
    let decided: Vec<usize> = (0..grid.len()).filter(|&i| profiles[i].is_some()).collect();
    let undecided: Vec<usize> = (0..grid.len()).filter(|&i| profiles[i].is_none()).collect();
    let decided_profiles: Vec<Vec<f64>> = decided.iter().map(|&i| profiles[i].clone().expect("decided")).collect();
    let components: Vec<Vec<usize>> = cluster(&metric, &decided_profiles, eps)
        .into_iter()
        .map(|c| c.into_iter().map(|i| decided[i]).collect())
        .collect();

    let mut representative_index = Vec::new();
    let mut diameters = Vec::new();
    for c in &components {
        let mut best = (f64::INFINITY, c[0]);
        let mut diameter = 0.0f64;
        for &i in c {
            let pi = profiles[i].as_ref().expect("decided");
            let ecc = c
                .iter()
                .map(|&j| metric.between_profiles(pi, profiles[j].as_ref().expect("decided")))
                .fold(0.0, f64::max);
            diameter = diameter.max(ecc);
            if ecc < best.0 {
                best = (ecc, i);
            }
        }
        representative_index.push(best.1);
        diameters.push(diameter);
    }
    let representatives: Vec<EmpiricalMeasure<S>> = representative_index
        .iter()
        .map(|&i| limits[i].verdict.limit.clone().expect("decided"))
        .collect();
    let certificates = representatives.iter().map(|mu| certify_ergodic(s, mu)).collect::<Result<Vec<_>>>()?;
    let separation = separation_check(&representatives, s.dictionary(), separation_tolerance)?;
    Ok(DecompositionReport {
        system: s.name().to_string(),
        method: m.name().to_string(),
        grid: limits.iter().map(|l| l.point.clone()).collect(),
        limits,
        components,
        representatives,
        representative_index,
        diameters,
        certificates,
        undecided,
        separation,
        eps,
        profiles,
    })
}

/// Recomputes the limit of `φ(ω)` for each decided grid point and checks it
/// links (distance ≤ eps) to `ω`'s component only.
pub fn bi_invariance<S: Scalar>(
    s: &SystemSpec,
    m: &SummationMethod<S>,
    report: &DecompositionReport<S>,
    params: &PsiParams,
) -> Result<BiInvarianceReport> {
    let metric = MeasureDistance::for_system(s);
    let decided: Vec<usize> = report.components.iter().flatten().copied().collect();
    let images = decided
        .iter()
        .map(|&i| s.step(&report.grid[i]))
        .collect::<Result<Vec<_>>>()?;
    let image_limits = psi_map(s, m, &images, params)?;
    let mut failures = Vec::new();
    let mut undecided_images = Vec::new();
    for (&i, limit) in decided.iter().zip(&image_limits) {
        let Some(mu) = &limit.verdict.limit else {
            undecided_images.push(i);
            continue;
        };
        let profile = metric.profile(mu)?;
        let linked: Vec<usize> = report
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.iter().any(|&j| {
                    metric.between_profiles(&profile, report.profile(j).expect("decided")) <= report.eps
                })
            })
            .map(|(k, _)| k)
            .collect();
        if linked != [report.component_of(i).expect("decided")] {
            failures.push(i);
        }
    }
    let pass = failures.is_empty() && undecided_images.is_empty();
    Ok(BiInvarianceReport { checked: decided.len(), failures, undecided_images, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::summation::cesaro;
    use crate::systems::{affine_torus, interval_map, rotation, IntervalMap};
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
    fn doubling_cycles_split() {
        let s = doubling();
        let grid = vec![rq(1, 7), rq(2, 7), rq(4, 7), rq(1, 15)];
        let params = PsiParams::new(1199, 0.05, 0.4);
        let report = decompose(&s, &cesaro::<Rational>(), &grid, &params, 0.01, 1e-9).unwrap();
        assert_eq!(report.components, vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(report.certificates, vec![Some(ErgodicCertificate { period: 3 }), Some(ErgodicCertificate { period: 4 })]);
        assert!(report.separation.pass);
        let coord = report.separation.observables.iter().position(|n| n == "coord0").unwrap();
        assert!((report.separation.pairs[0].gaps[coord] - 1.0 / 12.0).abs() < 1e-15);
        for l in &report.limits {
            assert_eq!(l.limit_residual, Some(0.0));
        }
        assert!(bi_invariance(&s, &cesaro::<Rational>(), &report, &params).unwrap().pass);
    }

    #[test]
    fn square_map_two_components() {
        let s = interval_map(IntervalMap::Square).unwrap();
        let mut grid: Vec<PointRepr> = (0..10).map(|i| PointRepr::real(vec![i as f64 / 10.0])).collect();
        grid.push(PointRepr::real(vec![1.0]));
        let params = PsiParams::new(2000, 0.15, 0.4);
        let report = decompose(&s, &cesaro::<f64>(), &grid, &params, 0.05, 0.5).unwrap();
        assert!(report.undecided.is_empty());
        assert_eq!(report.components.len(), 2);
        assert_eq!(report.components[1], vec![10]);
        assert_eq!(report.separation.observables[report.separation.pairs[0].separating.unwrap()], "t");
    }

    #[test]
    fn single_representative_passes() {
        let s = rotation(q(1, 3));
        let r = separation_check(&[EmpiricalMeasure::<f64>::dirac(rq(0, 1))], s.dictionary(), 1e-9).unwrap();
        assert!(r.pass && r.pairs.is_empty());
    }

    #[test]
    fn cluster_is_deterministic() {
        let metric = MeasureDistance::new(vec![Observable::new("t", crate::systems::ObservableKind::Coordinate(0))]);
        let profiles = vec![vec![0.0], vec![1.0], vec![0.01], vec![0.99]];
        assert_eq!(cluster(&metric, &profiles, 0.01), vec![vec![0, 2], vec![1, 3]]);
    }

    fn measure_strategy() -> impl Strategy<Value = EmpiricalMeasure<f64>> {
        proptest::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..6).prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            EmpiricalMeasure::new(atoms.into_iter().map(|(x, w)| (PointRepr::real(vec![x]), w / total))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn pseudo_metric_axioms(a in measure_strategy(), b in measure_strategy(), c in measure_strategy()) {
            let d = MeasureDistance::for_system(&rotation(0.3));
            let (ab, bc, ac) = (d.distance(&a, &b).unwrap(), d.distance(&b, &c).unwrap(), d.distance(&a, &c).unwrap());
            prop_assert_eq!(d.distance(&a, &a).unwrap(), 0.0);
            prop_assert!((ab - d.distance(&b, &a).unwrap()).abs() <= 1e-12);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!(ab <= 2.0);
        }

        #[test]
        fn clusters_partition(points in proptest::collection::vec(0.0f64..1.0, 1..30), eps in 0.0f64..0.2) {
            let metric = MeasureDistance::new(vec![Observable::new("t", crate::systems::ObservableKind::Coordinate(0))]);
            let profiles: Vec<Vec<f64>> = points.iter().map(|x| vec![*x]).collect();
            let groups = cluster(&metric, &profiles, eps);
            let mut seen: Vec<usize> = groups.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..points.len()).collect::<Vec<_>>());
            for (g, h) in groups.iter().zip(groups.iter().skip(1)) {
                prop_assert!(g[0] < h[0]);
            }
        }

        #[test]
        fn cesaro_measure_residual(n in 1usize..300, num in 1i64..50) {
            let s = doubling();
            let mu = crate::averaging::empirical_measure(&s, &cesaro::<Rational>(), &rq(num, 101), n).unwrap();
            prop_assert!(ergodicity_residual(&s, &mu).unwrap() <= 2.0 / (n as f64 + 1.0) + 1e-12);
        }
    }
}
