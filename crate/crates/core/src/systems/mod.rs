//! Concrete semicascades `(Ω, φ)`: phase points, the map, a metric and a
//! fixed observable dictionary per system.

mod observable;
mod point;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Zero};

pub use observable::{observables_from_json, piecewise_linear, Observable, ObservableKind, Trig};
pub use point::{block_boundary, PointKey, PointRepr, SymbolicPoint};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::scalar::{frac, frac_f64, rational_bits, rational_to_f64};

/// Default cap on numerator/denominator bits for exact orbits.
pub const DEFAULT_BIT_LIMIT: u64 = 1 << 16;

/// Positions searched for a difference between non-periodic symbolic points.
const SYMBOLIC_SEARCH_CAP: u64 = 1 << 20;

/// A parameter that is either an exact rational or a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Coord {
    Exact(BigRational),
    Float(f64),
}

impl Coord {
    pub fn to_f64(&self) -> f64 {
        match self {
            Coord::Exact(q) => rational_to_f64(q),
            Coord::Float(x) => *x,
        }
    }
}

impl From<f64> for Coord {
    fn from(x: f64) -> Self {
        Coord::Float(x)
    }
}

impl From<BigRational> for Coord {
    fn from(q: BigRational) -> Self {
        Coord::Exact(q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntervalMap {
    /// `t ↦ t²`
    Square,
    /// `t ↦ r t (1 - t)`, `r ∈ [0, 4]`
    Logistic(BigRational),
    /// `t ↦ 1 - |2t - 1|`
    Tent,
    /// Interpolation through knots spanning `[0, 1]` with values in `[0, 1]`.
    PiecewiseLinear(Vec<(BigRational, BigRational)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemKind {
    Rotation { alpha: Coord },
    AffineTorus { matrix: IntMatrix, shift: Vec<BigRational> },
    Interval(IntervalMap),
    BernoulliShift,
    Projective { matrix: Vec<Vec<f64>> },
}

/// An immutable semicascade with its observable dictionary.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    name: String,
    kind: SystemKind,
    dictionary: Vec<Observable>,
    bit_limit: u64,
}

/// `φ^k(start)` for `k = 0..=N`, with the first exact repeat if one was seen.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub start: PointRepr,
    pub points: Vec<PointRepr>,
    pub cycle: Option<CycleInfo>,
}

/// `φ^{preperiod} ω = φ^{preperiod + period} ω` with both minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleInfo {
    pub preperiod: usize,
    pub period: usize,
}

fn obs(name: &str, kind: ObservableKind) -> Observable {
    Observable::new(name, kind)
}

fn character_dictionary(dim: usize) -> Vec<Observable> {
    let mut freqs: Vec<Vec<i64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        freqs.push(e.clone());
        e[i] = 2;
        freqs.push(e);
    }
    for i in 0..dim {
        for j in i + 1..dim {
            for s in [1, -1] {
                let mut m = vec![0; dim];
                m[i] = 1;
                m[j] = s;
                freqs.push(m);
            }
        }
    }
    let mut out = Vec::new();
    for m in freqs {
        let label = if dim == 1 {
            m[0].to_string()
        } else {
            format!("[{}]", m.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        };
        out.push(obs(&format!("cos{label}"), ObservableKind::Character { freq: m.clone(), trig: Trig::Cos }));
        out.push(obs(&format!("sin{label}"), ObservableKind::Character { freq: m, trig: Trig::Sin }));
    }
    out
}

fn check_bits(p: &PointRepr, limit: u64, step: usize) -> Result<()> {
    if let PointRepr::Rational(v) = p {
        if v.iter().any(|c| rational_bits(c) > limit) {
            return Err(Error::RationalOverflow { step, limit });
        }
    }
    Ok(())
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(1.0);
    d.min(1.0 - d)
}

fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).expect("nonempty");
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        let pivot_row = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] / pivot_row[col];
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * p;
            }
        }
    }
    det
}

/// Circle rotation `t ↦ t + α mod 1`.
pub fn rotation(alpha: impl Into<Coord>) -> SystemSpec {
    let alpha = alpha.into();
    let alpha = match alpha {
        Coord::Exact(q) => Coord::Exact(frac(&q)),
        Coord::Float(x) => Coord::Float(frac_f64(x)),
    };
    let dictionary = vec![
        obs("one", ObservableKind::Constant),
        obs("cos1", ObservableKind::Character { freq: vec![1], trig: Trig::Cos }),
        obs("sin1", ObservableKind::Character { freq: vec![1], trig: Trig::Sin }),
        obs("cos2", ObservableKind::Character { freq: vec![2], trig: Trig::Cos }),
        obs("sin2", ObservableKind::Character { freq: vec![2], trig: Trig::Sin }),
    ];
    let label = match &alpha {
        Coord::Exact(q) => q.to_string(),
        Coord::Float(x) => format!("{x:?}"),
    };
    SystemSpec {
        name: format!("rotation:alpha={label}"),
        kind: SystemKind::Rotation { alpha },
        dictionary,
        bit_limit: DEFAULT_BIT_LIMIT,
    }
}

/// Affine torus endomorphism `ω ↦ Aω + b mod 1`.
pub fn affine_torus(matrix: IntMatrix, shift: Vec<BigRational>) -> Result<SystemSpec> {
    let d = matrix.dim();
    if shift.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: shift.len() });
    }
    let shift: Vec<BigRational> = shift.iter().map(frac).collect();
    let mut dictionary = vec![obs("one", ObservableKind::Constant)];
    for i in 0..d {
        dictionary.push(obs(&format!("coord{i}"), ObservableKind::Coordinate(i)));
    }
    dictionary.extend(character_dictionary(d));
    let b: Vec<String> = shift.iter().map(|x| x.to_string()).collect();
    Ok(SystemSpec {
        name: format!("torus:A={matrix},b={}", b.join(",")),
        kind: SystemKind::AffineTorus { matrix, shift },
        dictionary,
        bit_limit: DEFAULT_BIT_LIMIT,
    })
}

/// Interval map on `[0, 1]`.
pub fn interval_map(map: IntervalMap) -> Result<SystemSpec> {
    let name = match &map {
        IntervalMap::Square => "interval:square".to_string(),
        IntervalMap::Logistic(r) => {
            if r < &BigRational::zero() || r > &BigRational::from_integer(4.into()) {
                return Err(Error::InvalidParameter(format!("logistic parameter {r} outside [0,4]")));
            }
            format!("interval:logistic:r={r}")
        }
        IntervalMap::Tent => "interval:tent".to_string(),
        IntervalMap::PiecewiseLinear(knots) => {
            let unit = |x: &BigRational| *x >= BigRational::zero() && *x <= BigRational::one();
            let ok = knots.len() >= 2
                && knots[0].0.is_zero()
                && knots[knots.len() - 1].0.is_one()
                && knots.windows(2).all(|w| w[1].0 > w[0].0)
                && knots.iter().all(|(_, y)| unit(y));
            if !ok {
                return Err(Error::InvalidParameter(
                    "piecewise-linear map needs increasing knots from 0 to 1 with values in [0,1]".into(),
                ));
            }
            "interval:pwl".to_string()
        }
    };
    let dictionary = vec![
        obs("one", ObservableKind::Constant),
        obs("t", ObservableKind::Coordinate(0)),
        obs("t2", ObservableKind::Power { coord: 0, exponent: 2 }),
        obs("cospi", ObservableKind::CosPi(0)),
    ];
    Ok(SystemSpec { name, kind: SystemKind::Interval(map), dictionary, bit_limit: DEFAULT_BIT_LIMIT })
}

/// Left shift on `{0,1}^ℕ`.
pub fn bernoulli_shift() -> SystemSpec {
    let dictionary = vec![
        obs("x0", ObservableKind::Symbol(0)),
        obs("x1", ObservableKind::Symbol(1)),
        obs("x0x1", ObservableKind::SymbolProduct(0, 1)),
        obs("cyl0", ObservableKind::Cylinder(vec![0])),
        obs("cyl1", ObservableKind::Cylinder(vec![1])),
        obs("cyl01", ObservableKind::Cylinder(vec![0, 1])),
    ];
    SystemSpec { name: "shift".into(), kind: SystemKind::BernoulliShift, dictionary, bit_limit: DEFAULT_BIT_LIMIT }
}

/// `v ↦ Tv / ‖Tv‖₂` on the unit sphere.
pub fn projective_action(matrix: Vec<Vec<f64>>) -> Result<SystemSpec> {
    let n = matrix.len();
    if let Some(bad) = matrix.iter().find(|r| r.len() != n) {
        return Err(Error::NonSquareMatrix { rows: n, cols: bad.len() });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("projective action needs n >= 2".into()));
    }
    let scale = matrix.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let det = determinant(&matrix);
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(n as i32) {
        return Err(Error::SingularMatrix);
    }
    let mut dictionary = Vec::new();
    for i in 0..n {
        dictionary.push(obs(&format!("v{i}"), ObservableKind::Coordinate(i)));
    }
    for i in 0..n {
        for j in i..n {
            dictionary.push(obs(&format!("v{i}v{j}"), ObservableKind::Product(i, j)));
        }
    }
    Ok(SystemSpec { name: "projective".into(), kind: SystemKind::Projective { matrix }, dictionary, bit_limit: DEFAULT_BIT_LIMIT })
}

impl SystemSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn dictionary(&self) -> &[Observable] {
        &self.dictionary
    }

    pub fn observable(&self, name: &str) -> Option<&Observable> {
        self.dictionary.iter().find(|o| o.name() == name)
    }

    /// Appends observables after the built-in ones.
    pub fn with_observables(mut self, extra: impl IntoIterator<Item = Observable>) -> Self {
        self.dictionary.extend(extra);
        self
    }

    pub fn with_bit_limit(mut self, bits: u64) -> Self {
        self.bit_limit = bits;
        self
    }

    pub fn bit_limit(&self) -> u64 {
        self.bit_limit
    }

    /// Coordinate dimension; `None` for the shift.
    pub fn dimension(&self) -> Option<usize> {
        match &self.kind {
            SystemKind::Rotation { .. } | SystemKind::Interval(_) => Some(1),
            SystemKind::AffineTorus { matrix, .. } => Some(matrix.dim()),
            SystemKind::Projective { matrix } => Some(matrix.len()),
            SystemKind::BernoulliShift => None,
        }
    }

    /// Whether points should be exact unless the caller asks for floats.
    /// Expanding maps lose their orbit in floating point within ~50 steps.
    pub fn exact_by_default(&self) -> bool {
        match &self.kind {
            SystemKind::Rotation { alpha } => matches!(alpha, Coord::Exact(_)),
            SystemKind::AffineTorus { .. } | SystemKind::BernoulliShift => true,
            SystemKind::Interval(m) => matches!(m, IntervalMap::Tent | IntervalMap::PiecewiseLinear(_)),
            SystemKind::Projective { .. } => false,
        }
    }

    fn is_torus(&self) -> bool {
        matches!(self.kind, SystemKind::Rotation { .. } | SystemKind::AffineTorus { .. })
    }

    /// Checks that `p` is a valid point and brings it to normal form
    /// (torus coordinates reduced mod 1, sphere points normalized).
    pub fn normalize_point(&self, p: PointRepr) -> Result<PointRepr> {
        if let SystemKind::BernoulliShift = self.kind {
            return match p {
                PointRepr::Symbolic(_) => Ok(p),
                other => Err(Error::InvalidPoint(format!("shift expects a symbolic point, got {other}"))),
            };
        }
        let d = self.dimension().expect("coordinate system");
        let found = p.dimension().ok_or_else(|| Error::InvalidPoint("expected coordinates".into()))?;
        if found != d {
            return Err(Error::DimensionMismatch { expected: d, found });
        }
        if let SystemKind::Projective { .. } = self.kind {
            let v = p.coords_f64().expect("coordinates");
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::InvalidPoint("sphere point must be nonzero".into()));
            }
            return Ok(PointRepr::Real(v.iter().map(|x| x / norm).collect()));
        }
        if self.is_torus() {
            return Ok(match p {
                PointRepr::Real(v) => PointRepr::Real(v.into_iter().map(frac_f64).collect()),
                PointRepr::Rational(v) => PointRepr::Rational(v.iter().map(frac).collect()),
                PointRepr::Symbolic(_) => unreachable!(),
            });
        }
        let inside = match &p {
            PointRepr::Real(v) => (0.0..=1.0).contains(&v[0]),
            PointRepr::Rational(v) => v[0] >= BigRational::zero() && v[0] <= BigRational::one(),
            PointRepr::Symbolic(_) => false,
        };
        if !inside {
            return Err(Error::InvalidPoint(format!("{p} is outside [0,1]")));
        }
        Ok(p)
    }

    /// One application of `φ`.
    pub fn step(&self, p: &PointRepr) -> Result<PointRepr> {
        let wrong = || Error::InvalidPoint(format!("{p} is not a point of {}", self.name));
        match (&self.kind, p) {
            (SystemKind::BernoulliShift, PointRepr::Symbolic(s)) => Ok(PointRepr::Symbolic(s.shift())),
            (SystemKind::BernoulliShift, _) | (_, PointRepr::Symbolic(_)) => Err(wrong()),
            (SystemKind::Rotation { alpha }, PointRepr::Rational(v)) => match alpha {
                Coord::Exact(a) => Ok(PointRepr::Rational(vec![frac(&(&v[0] + a))])),
                Coord::Float(a) => Ok(PointRepr::Real(vec![frac_f64(rational_to_f64(&v[0]) + a)])),
            },
            (SystemKind::Rotation { alpha }, PointRepr::Real(v)) => Ok(PointRepr::Real(vec![frac_f64(v[0] + alpha.to_f64())])),
            (SystemKind::AffineTorus { matrix, shift }, PointRepr::Rational(v)) => {
                let image = matrix.apply(v);
                Ok(PointRepr::Rational(image.iter().zip(shift).map(|(x, b)| frac(&(x + b))).collect()))
            }
            (SystemKind::AffineTorus { matrix, shift }, PointRepr::Real(v)) => {
                let image = matrix.apply_f64(v);
                Ok(PointRepr::Real(image.iter().zip(shift).map(|(x, b)| frac_f64(x + rational_to_f64(b))).collect()))
            }
            (SystemKind::Interval(map), PointRepr::Rational(v)) => Ok(PointRepr::Rational(vec![interval_exact(map, &v[0])])),
            (SystemKind::Interval(map), PointRepr::Real(v)) => Ok(PointRepr::Real(vec![interval_f64(map, v[0])])),
            (SystemKind::Projective { matrix }, point) => {
                let v = point.coords_f64().ok_or_else(wrong)?;
                let image: Vec<f64> = matrix.iter().map(|row| row.iter().zip(&v).map(|(a, x)| a * x).sum()).collect();
                let norm = image.iter().map(|x| x * x).sum::<f64>().sqrt();
                Ok(PointRepr::Real(image.iter().map(|x| x / norm).collect()))
            }
        }
    }

    /// Metric on Ω.
    pub fn distance(&self, p: &PointRepr, q: &PointRepr) -> Result<f64> {
        if let SystemKind::BernoulliShift = self.kind {
            return match (p, q) {
                (PointRepr::Symbolic(a), PointRepr::Symbolic(b)) => Ok(match a.first_difference(b, SYMBOLIC_SEARCH_CAP) {
                    Some(k) => 1.0 / (1.0 + k as f64),
                    None if matches!((a, b), (SymbolicPoint::Periodic { .. }, SymbolicPoint::Periodic { .. })) || a == b => 0.0,
                    // no difference within the search window
                    None => 1.0 / (1.0 + SYMBOLIC_SEARCH_CAP as f64),
                }),
                _ => Err(Error::InvalidPoint("shift metric needs symbolic points".into())),
            };
        }
        let a = p.coords_f64().ok_or_else(|| Error::InvalidPoint(p.to_string()))?;
        let b = q.coords_f64().ok_or_else(|| Error::InvalidPoint(q.to_string()))?;
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        Ok(match &self.kind {
            SystemKind::Rotation { .. } | SystemKind::AffineTorus { .. } => {
                a.iter().zip(&b).map(|(x, y)| circle_distance(*x, *y)).fold(0.0, f64::max)
            }
            SystemKind::Interval(_) => (a[0] - b[0]).abs(),
            SystemKind::Projective { .. } => a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            SystemKind::BernoulliShift => unreachable!(),
        })
    }

    /// `φ^k(start)` for `0 ≤ k ≤ steps`. For exact points the first repeat is
    /// recorded and the rest of the segment is read off the cycle.
    pub fn iterate(&self, start: &PointRepr, steps: usize) -> Result<OrbitSegment> {
        let start = self.normalize_point(start.clone())?;
        let exact = start.is_exact();
        let mut points = Vec::with_capacity(steps + 1);
        let mut seen: HashMap<PointKey, usize> = HashMap::new();
        let mut cycle = None;
        points.push(start.clone());
        if exact {
            seen.insert(start.key(), 0);
        }
        while points.len() <= steps {
            let k = points.len();
            if let Some(CycleInfo { preperiod, period }) = cycle {
                let p = points[preperiod + (k - preperiod) % period].clone();
                points.push(p);
                continue;
            }
            let next = self.step(&points[k - 1])?;
            check_bits(&next, self.bit_limit, k)?;
            if exact {
                let key = next.key();
                if let Some(&first) = seen.get(&key) {
                    cycle = Some(CycleInfo { preperiod: first, period: k - first });
                } else {
                    seen.insert(key, k);
                }
            }
            points.push(next);
        }
        Ok(OrbitSegment { start, points, cycle })
    }

    /// Uniform lattice with `resolution` steps per coordinate (rational when
    /// `exact`); for the shift, all periodic points with a period word of
    /// length `resolution`; for the sphere, normalized nonzero points of the
    /// cube lattice.
    pub fn default_grid(&self, resolution: usize, exact: bool) -> Result<Vec<PointRepr>> {
        if resolution == 0 {
            return Err(Error::InvalidParameter("grid resolution must be positive".into()));
        }
        let g = resolution as i64;
        let level = |i: i64| -> (BigRational, f64) { (BigRational::new(i.into(), g.into()), i as f64 / g as f64) };
        let lattice = |dim: usize, levels: Vec<i64>| -> Vec<PointRepr> {
            let mut out = Vec::new();
            let total = levels.len().pow(dim as u32);
            for mut idx in 0..total {
                let mut ex = Vec::with_capacity(dim);
                let mut fl = Vec::with_capacity(dim);
                for _ in 0..dim {
                    let (q, x) = level(levels[idx % levels.len()]);
                    idx /= levels.len();
                    ex.push(q);
                    fl.push(x);
                }
                out.push(if exact { PointRepr::Rational(ex) } else { PointRepr::Real(fl) });
            }
            out
        };
        Ok(match &self.kind {
            SystemKind::Rotation { .. } | SystemKind::AffineTorus { .. } => {
                lattice(self.dimension().expect("torus"), (0..g).collect())
            }
            SystemKind::Interval(_) => lattice(1, (0..=g).collect()),
            SystemKind::BernoulliShift => {
                if resolution > 16 {
                    return Err(Error::InvalidParameter("shift grid word length must be at most 16".into()));
                }
                (0..1u32 << resolution)
                    .map(|bits| {
                        let word = (0..resolution).map(|i| ((bits >> i) & 1) as u8).collect();
                        PointRepr::Symbolic(SymbolicPoint::periodic(Vec::new(), word).expect("binary word"))
                    })
                    .collect()
            }
            SystemKind::Projective { matrix } => {
                let n = matrix.len();
                let levels: Vec<f64> = (0..=g).map(|i| -1.0 + 2.0 * i as f64 / g as f64).collect();
                let mut out = Vec::new();
                for mut idx in 0..levels.len().pow(n as u32) {
                    let mut v = Vec::with_capacity(n);
                    for _ in 0..n {
                        v.push(levels[idx % levels.len()]);
                        idx /= levels.len();
                    }
                    let on_surface = v.iter().any(|x| x.abs() == 1.0);
                    if on_surface {
                        out.push(self.normalize_point(PointRepr::Real(v))?);
                    }
                }
                out
            }
        })
    }
}

fn interval_exact(map: &IntervalMap, t: &BigRational) -> BigRational {
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    match map {
        IntervalMap::Square => t * t,
        IntervalMap::Logistic(r) => r * t * (&one - t),
        IntervalMap::Tent => {
            if *t <= BigRational::new(1.into(), 2.into()) {
                &two * t
            } else {
                &two * (&one - t)
            }
        }
        IntervalMap::PiecewiseLinear(knots) => {
            for w in knots.windows(2) {
                let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
                if t <= x1 {
                    return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
                }
            }
            knots[knots.len() - 1].1.clone()
        }
    }
}

fn interval_f64(map: &IntervalMap, t: f64) -> f64 {
    let y = match map {
        IntervalMap::Square => t * t,
        IntervalMap::Logistic(r) => rational_to_f64(r) * t * (1.0 - t),
        IntervalMap::Tent => {
            if t <= 0.5 {
                2.0 * t
            } else {
                2.0 * (1.0 - t)
            }
        }
        IntervalMap::PiecewiseLinear(knots) => {
            let mut out = rational_to_f64(&knots[knots.len() - 1].1);
            for w in knots.windows(2) {
                let (x0, y0) = (rational_to_f64(&w[0].0), rational_to_f64(&w[0].1));
                let (x1, y1) = (rational_to_f64(&w[1].0), rational_to_f64(&w[1].1));
                if t <= x1 {
                    out = y0 + (y1 - y0) * (t - x0) / (x1 - x0);
                    break;
                }
            }
            out
        }
    };
    y.clamp(0.0, 1.0)
}

/// `cos(2π t)` character used for unit-circle checks.
pub fn unit_character(t: f64) -> f64 {
    (2.0 * PI * t).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rq(n: i64, d: i64) -> PointRepr {
        PointRepr::rational(vec![q(n, d)])
    }

    fn doubling() -> SystemSpec {
        affine_torus(IntMatrix::from_i64_rows(&[[2]]).unwrap(), vec![q(0, 1)]).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let id = rotation(0.0);
        assert_eq!(id.step(&PointRepr::real(vec![0.3])).unwrap(), PointRepr::real(vec![0.3]));
        let third = rotation(q(1, 3));
        let orbit = third.iterate(&rq(0, 1), 10).unwrap();
        assert_eq!(orbit.cycle, Some(CycleInfo { preperiod: 0, period: 3 }));
        let quarter = rotation(q(1, 4));
        assert_eq!(quarter.iterate(&rq(0, 1), 8).unwrap().cycle, Some(CycleInfo { preperiod: 0, period: 4 }));
    }

    #[test]
    fn doubling_seventh() {
        let orbit = doubling().iterate(&rq(1, 7), 10).unwrap();
        assert_eq!(orbit.points[..3], [rq(1, 7), rq(2, 7), rq(4, 7)]);
        assert_eq!(orbit.cycle, Some(CycleInfo { preperiod: 0, period: 3 }));
        assert_eq!(orbit.points.len(), 11);
        assert_eq!(orbit.points[10], rq(2, 7));
        assert_eq!(doubling().iterate(&rq(1, 7), 2).unwrap().cycle, None);
    }

    #[test]
    fn shear_half_point() {
        let shear = affine_torus(IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap(), vec![q(0, 1), q(0, 1)]).unwrap();
        let p = PointRepr::rational(vec![q(0, 1), q(1, 2)]);
        let orbit = shear.iterate(&p, 4).unwrap();
        assert_eq!(orbit.points[1], PointRepr::rational(vec![q(1, 2), q(1, 2)]));
        assert_eq!(orbit.points[2], p);
        assert_eq!(orbit.cycle, Some(CycleInfo { preperiod: 0, period: 2 }));
        assert!(matches!(
            affine_torus(IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap(), vec![q(0, 1)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn quarter_shift_period_four() {
        let sys = affine_torus(IntMatrix::from_i64_rows(&[[1]]).unwrap(), vec![q(1, 4)]).unwrap();
        for start in [rq(0, 1), rq(2, 9), rq(5, 7)] {
            assert_eq!(sys.iterate(&start, 10).unwrap().cycle.unwrap().period, 4);
        }
    }

    #[test]
    fn interval_examples() {
        let sq = interval_map(IntervalMap::Square).unwrap();
        assert_eq!(sq.step(&rq(1, 1)).unwrap(), rq(1, 1));
        let orbit = sq.iterate(&rq(1, 2), 4).unwrap();
        assert_eq!(orbit.points[..4], [rq(1, 2), rq(1, 4), rq(1, 16), rq(1, 256)]);
        assert_eq!(sq.iterate(&rq(0, 1), 5).unwrap().points, vec![rq(0, 1); 6]);
        let tent = interval_map(IntervalMap::Tent).unwrap();
        assert_eq!(tent.step(&rq(2, 3)).unwrap(), rq(2, 3));
        assert!(matches!(interval_map(IntervalMap::Logistic(q(9, 2))), Err(Error::InvalidParameter(_))));
        assert!(sq.normalize_point(PointRepr::real(vec![1.5])).is_err());
    }

    #[test]
    fn exact_square_orbit_overflows() {
        let sq = interval_map(IntervalMap::Square).unwrap().with_bit_limit(256);
        assert!(matches!(sq.iterate(&rq(1, 3), 20), Err(Error::RationalOverflow { .. })));
    }

    #[test]
    fn shift_examples() {
        let s = bernoulli_shift();
        let p01 = PointRepr::Symbolic(SymbolicPoint::periodic(vec![], vec![0, 1]).unwrap());
        let p10 = PointRepr::Symbolic(SymbolicPoint::periodic(vec![], vec![1, 0]).unwrap());
        assert_eq!(s.step(&p01).unwrap(), p10);
        let one_then_zero = PointRepr::Symbolic(SymbolicPoint::periodic(vec![1], vec![0]).unwrap());
        let orbit = s.iterate(&one_then_zero, 3).unwrap();
        assert_eq!(orbit.cycle, Some(CycleInfo { preperiod: 1, period: 1 }));
        let blocks = PointRepr::Symbolic(SymbolicPoint::blocks(4));
        let x0 = s.observable("x0").unwrap();
        let orbit = s.iterate(&blocks, 20).unwrap();
        assert_eq!(x0.eval(&orbit.points[20]).unwrap(), 1.0);
        assert_eq!(x0.eval(&orbit.points[19]).unwrap(), 0.0);
        assert_eq!(s.distance(&p01, &p10).unwrap(), 1.0);
        assert_eq!(s.distance(&p01, &p01).unwrap(), 0.0);
    }

    #[test]
    fn projective_examples() {
        let id = projective_action(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let v = PointRepr::real(vec![0.6, 0.8]);
        assert_eq!(id.step(&v).unwrap(), v);
        let t = projective_action(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(t.step(&PointRepr::real(vec![1.0, 0.0])).unwrap(), PointRepr::real(vec![1.0, 0.0]));
        let s = 1.0 / 2f64.sqrt();
        let image = t.step(&PointRepr::real(vec![s, s])).unwrap().coords_f64().unwrap();
        assert!((image[0] - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((image[1] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(projective_action(vec![vec![1.0, 2.0], vec![2.0, 4.0]]), Err(Error::SingularMatrix)));
        assert!(projective_action(vec![vec![1.0]]).is_err());
    }

    #[test]
    fn grids() {
        let sq = interval_map(IntervalMap::Square).unwrap();
        assert_eq!(sq.default_grid(10, false).unwrap().len(), 11);
        let shear = affine_torus(IntMatrix::identity(2), vec![q(0, 1), q(0, 1)]).unwrap();
        let g = shear.default_grid(3, true).unwrap();
        assert_eq!(g.len(), 9);
        assert!(g.iter().all(PointRepr::is_exact));
        assert_eq!(bernoulli_shift().default_grid(3, true).unwrap().len(), 8);
    }

    fn symbolic_strategy() -> impl Strategy<Value = PointRepr> {
        (proptest::collection::vec(0u8..2, 0..4), proptest::collection::vec(0u8..2, 1..4))
            .prop_map(|(pre, per)| PointRepr::Symbolic(SymbolicPoint::periodic(pre, per).unwrap()))
    }

    proptest! {
        #[test]
        fn iterate_is_deterministic(n in 1i64..50, d in 51i64..200, steps in 0usize..60) {
            let sys = doubling();
            let a = sys.iterate(&rq(n, d), steps).unwrap();
            let b = sys.iterate(&rq(n, d), steps).unwrap();
            prop_assert_eq!(&a.points, &b.points);
            for w in a.points.windows(2) {
                prop_assert_eq!(&sys.step(&w[0]).unwrap(), &w[1]);
                if let PointRepr::Rational(v) = &w[1] {
                    prop_assert!(v[0] >= q(0, 1) && v[0] < q(1, 1));
                }
            }
        }

        #[test]
        fn shift_metric_axioms(a in symbolic_strategy(), b in symbolic_strategy(), c in symbolic_strategy()) {
            let s = bernoulli_shift();
            let (ab, bc, ac) = (s.distance(&a, &b).unwrap(), s.distance(&b, &c).unwrap(), s.distance(&a, &c).unwrap());
            prop_assert_eq!(ab, s.distance(&b, &a).unwrap());
            prop_assert!(ac <= ab + bc + 1e-12);
            let (fa, fb) = (s.step(&a).unwrap(), s.step(&b).unwrap());
            prop_assert!(s.distance(&fa, &fb).unwrap() <= 2.0 * ab + 1e-15);
        }

        #[test]
        fn torus_metric_axioms(x in 0.0f64..1.0, y in 0.0f64..1.0, z in 0.0f64..1.0) {
            let r = rotation(0.25);
            let (p, q_, s) = (PointRepr::real(vec![x]), PointRepr::real(vec![y]), PointRepr::real(vec![z]));
            let pq = r.distance(&p, &q_).unwrap();
            prop_assert!((pq - r.distance(&q_, &p).unwrap()).abs() <= 1e-12);
            prop_assert!(r.distance(&p, &s).unwrap() <= pq + r.distance(&q_, &s).unwrap() + 1e-12);
        }

        #[test]
        fn observables_respect_sup_norm(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            let systems = [
                (rotation(0.3), PointRepr::real(vec![x])),
                (interval_map(IntervalMap::Square).unwrap(), PointRepr::real(vec![x])),
                (affine_torus(IntMatrix::from_i64_rows(&[[2, 1], [1, 1]]).unwrap(), vec![q(0, 1), q(0, 1)]).unwrap(), PointRepr::real(vec![x, y])),
                (projective_action(vec![vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap(), PointRepr::real(vec![x - 0.5, y + 0.1])),
            ];
            for (sys, p) in systems {
                let p = sys.normalize_point(p).unwrap();
                for o in sys.dictionary() {
                    prop_assert!(o.eval(&p).unwrap().abs() <= o.sup_norm() + 1e-12);
                }
            }
        }
    }
}
