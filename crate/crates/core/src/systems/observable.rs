//! Test functions standing in for `C(Ω)`.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use super::point::PointRepr;
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind {
    Constant,
    Coordinate(usize),
    /// `ω_i^e`
    Power { coord: usize, exponent: u32 },
    /// `cos(π ω_i)`
    CosPi(usize),
    /// `cos` or `sin` of `2π⟨m, ω⟩`.
    Character { freq: Vec<i64>, trig: Trig },
    /// `v_i v_j`
    Product(usize, usize),
    /// `ω_i` of a binary sequence.
    Symbol(u64),
    /// `ω_i ω_j`
    SymbolProduct(u64, u64),
    /// Indicator of the cylinder fixing the first symbols to `word`.
    Cylinder(Vec<u8>),
    /// Linear interpolation through `(x, y)` knots in coordinate `coord`,
    /// constant beyond the end knots.
    PiecewiseLinear { coord: usize, knots: Vec<(BigRational, BigRational)> },
}

/// A named bounded function on phase points.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    name: String,
    kind: ObservableKind,
    sup_norm: f64,
}

impl Observable {
    pub fn new(name: impl Into<String>, kind: ObservableKind) -> Self {
        let sup_norm = match &kind {
            ObservableKind::PiecewiseLinear { knots, .. } => {
                knots.iter().map(|(_, y)| rational_to_f64(&y.abs())).fold(0.0, f64::max)
            }
            _ => 1.0,
        };
        Observable { name: name.into(), kind, sup_norm }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &ObservableKind {
        &self.kind
    }

    /// Declared bound on `|x(ω)|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn mismatch(&self) -> Error {
        Error::ObservableMismatch { name: self.name.clone() }
    }

    fn coord(&self, p: &PointRepr, i: usize) -> Result<f64> {
        match p {
            PointRepr::Real(v) => v.get(i).copied().ok_or_else(|| self.mismatch()),
            PointRepr::Rational(v) => v.get(i).map(rational_to_f64).ok_or_else(|| self.mismatch()),
            PointRepr::Symbolic(_) => Err(self.mismatch()),
        }
    }

    fn symbol(&self, p: &PointRepr, i: u64) -> Result<u8> {
        match p {
            PointRepr::Symbolic(s) => Ok(s.symbol(i)),
            _ => Err(self.mismatch()),
        }
    }

    pub fn eval(&self, p: &PointRepr) -> Result<f64> {
        if let Some(exact) = self.eval_exact(p)? {
            return Ok(rational_to_f64(&exact));
        }
        Ok(match &self.kind {
            ObservableKind::Constant => 1.0,
            ObservableKind::Coordinate(i) => self.coord(p, *i)?,
            ObservableKind::Power { coord, exponent } => self.coord(p, *coord)?.powi(*exponent as i32),
            ObservableKind::CosPi(i) => (PI * self.coord(p, *i)?).cos(),
            ObservableKind::Character { freq, trig } => {
                if let PointRepr::Symbolic(_) = p {
                    return Err(self.mismatch());
                }
                let mut phase = 0.0;
                for (i, m) in freq.iter().enumerate() {
                    phase += *m as f64 * self.coord(p, i)?;
                }
                // reduce before scaling so large frequencies keep precision
                let phase = 2.0 * PI * (phase - phase.floor());
                match trig {
                    Trig::Cos => phase.cos(),
                    Trig::Sin => phase.sin(),
                }
            }
            ObservableKind::Product(i, j) => self.coord(p, *i)? * self.coord(p, *j)?,
            ObservableKind::PiecewiseLinear { coord, knots } => {
                let t = self.coord(p, *coord)?;
                interpolate_f64(knots, t)
            }
            ObservableKind::Symbol(_) | ObservableKind::SymbolProduct(..) | ObservableKind::Cylinder(_) => {
                unreachable!("symbolic observables are always exact")
            }
        })
    }

    /// Exact value when the observable is rational-valued on this point;
    /// `Ok(None)` when only a float value exists.
    pub fn eval_exact(&self, p: &PointRepr) -> Result<Option<BigRational>> {
        let rat = |i: usize| -> Result<Option<&BigRational>> {
            match p {
                PointRepr::Rational(v) => v.get(i).map(Some).ok_or_else(|| self.mismatch()),
                PointRepr::Real(v) if i < v.len() => Ok(None),
                _ => Err(self.mismatch()),
            }
        };
        let bit = |b: u8| if b == 1 { BigRational::one() } else { BigRational::zero() };
        Ok(match &self.kind {
            ObservableKind::Constant => Some(BigRational::one()),
            ObservableKind::Coordinate(i) => rat(*i)?.cloned(),
            ObservableKind::Power { coord, exponent } => rat(*coord)?.map(|c| num_traits::pow(c.clone(), *exponent as usize)),
            ObservableKind::Product(i, j) => match (rat(*i)?, rat(*j)?) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
            ObservableKind::PiecewiseLinear { coord, knots } => rat(*coord)?.map(|t| interpolate_exact(knots, t)),
            ObservableKind::Symbol(i) => Some(bit(self.symbol(p, *i)?)),
            ObservableKind::SymbolProduct(i, j) => Some(bit(self.symbol(p, *i)? * self.symbol(p, *j)?)),
            ObservableKind::Cylinder(word) => {
                let mut inside = true;
                for (i, &w) in word.iter().enumerate() {
                    if self.symbol(p, i as u64)? != w {
                        inside = false;
                        break;
                    }
                }
                Some(bit(inside as u8))
            }
            ObservableKind::CosPi(_) | ObservableKind::Character { .. } => {
                if matches!(p, PointRepr::Symbolic(_)) {
                    return Err(self.mismatch());
                }
                None
            }
        })
    }

    /// Value in the scalar field `S`: exact when both `S` and the value are.
    pub fn eval_as<S: Scalar>(&self, p: &PointRepr) -> Result<S> {
        if S::EXACT {
            if let Some(exact) = self.eval_exact(p)? {
                return Ok(S::from_rational(&exact));
            }
        }
        self.eval(p).map(S::from_f64_lossy)
    }
}

fn interpolate_f64(knots: &[(BigRational, BigRational)], t: f64) -> f64 {
    let pts: Vec<(f64, f64)> = knots.iter().map(|(x, y)| (rational_to_f64(x), rational_to_f64(y))).collect();
    if t <= pts[0].0 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if t <= x1 {
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        }
    }
    pts[pts.len() - 1].1
}

fn interpolate_exact(knots: &[(BigRational, BigRational)], t: &BigRational) -> BigRational {
    if *t <= knots[0].0 {
        return knots[0].1.clone();
    }
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
        if t <= x1 {
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0);
        }
    }
    knots[knots.len() - 1].1.clone()
}

/// Builds a piecewise-linear observable; knots must have strictly increasing
/// abscissae and there must be at least two.
pub fn piecewise_linear(name: impl Into<String>, coord: usize, knots: Vec<(BigRational, BigRational)>) -> Result<Observable> {
    if knots.len() < 2 {
        return Err(Error::InvalidParameter("piecewise-linear observable needs at least two knots".into()));
    }
    if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParameter("knot abscissae must be strictly increasing".into()));
    }
    Ok(Observable::new(name, ObservableKind::PiecewiseLinear { coord, knots }))
}

/// Parses `{"observables": [{"name": .., "coord": 0, "breakpoints": [[x, y], ..]}]}`.
pub fn observables_from_json(text: &str) -> Result<Vec<Observable>> {
    let doc: Value = serde_json::from_str(text)?;
    let list = doc
        .get("observables")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"observables\" array".into()))?;
    let num = |v: &Value| -> Result<BigRational> {
        let s = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(Error::Parse("breakpoint must be a number".into())),
        };
        BigRational::parse_str(&s).ok_or_else(|| Error::Parse(format!("bad number {s:?}")))
    };
    list.iter()
        .map(|o| {
            let name = o.get("name").and_then(Value::as_str).ok_or_else(|| Error::Parse("observable needs a name".into()))?;
            let coord = o.get("coord").and_then(Value::as_u64).unwrap_or(0) as usize;
            let bps = o
                .get("breakpoints")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("observable needs breakpoints".into()))?;
            let knots = bps
                .iter()
                .map(|bp| {
                    let pair = bp.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse("breakpoint must be [x, y]".into()))?;
                    Ok((num(&pair[0])?, num(&pair[1])?))
                })
                .collect::<Result<Vec<_>>>()?;
            piecewise_linear(name, coord, knots)
        })
        .collect()
}
