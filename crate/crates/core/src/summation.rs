//! Summation matrices `S = {s[n][k]}` and the averaging methods built from them.
//!
//! A method is a pure row generator: `row(n)` returns the finitely supported,
//! nonnegative weights applied to `φ^k ω` in the n-th average. Rows are built on
//! demand and never cached.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance on `|Σ_k s[n][k] - 1|` for floating rows.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// One row of a summation matrix, sorted by column with no repeated columns.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<S> {
    n: usize,
    weights: Vec<(usize, S)>,
}

impl<S: Scalar> WeightVector<S> {
    /// Builds a row, merging repeated columns. Negative weights are rejected.
    pub fn new(n: usize, mut weights: Vec<(usize, S)>) -> Result<Self> {
        if let Some(&(col, _)) = weights.iter().find(|(_, w)| *w < S::zero()) {
            return Err(Error::NegativeWeight { row: n, col });
        }
        weights.sort_by_key(|(k, _)| *k);
        let mut merged: Vec<(usize, S)> = Vec::with_capacity(weights.len());
        for (k, w) in weights {
            match merged.last_mut() {
                Some((last, acc)) if *last == k => *acc = acc.clone() + w,
                _ => merged.push((k, w)),
            }
        }
        Ok(WeightVector { n, weights: merged })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, S)] {
        &self.weights
    }

    /// Largest column carrying an entry, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.weights.last().map(|(k, _)| *k)
    }

    pub fn sum(&self) -> S {
        S::sum_all(self.weights.iter().map(|(_, w)| w.clone()))
    }

    /// `|Σ_k s[n][k] - 1|`.
    pub fn sum_defect(&self) -> S {
        (self.sum() - S::one()).abs()
    }

    /// `s[n][0] + Σ_{k=1}^{K} |s[n][k] - s[n][k-1]|` where `K` is the last
    /// column of the row.
    pub fn variation(&self) -> S {
        let Some(last) = self.max_index() else {
            return S::zero();
        };
        let mut dense = vec![S::zero(); last + 1];
        for (k, w) in &self.weights {
            dense[*k] = w.clone();
        }
        let jumps = dense.windows(2).map(|w| (w[1].clone() - w[0].clone()).abs());
        S::sum_all(std::iter::once(dense[0].clone()).chain(jumps))
    }

    fn reindexed(self, n: usize) -> Self {
        WeightVector { n, ..self }
    }
}

/// Positive nonincreasing sequence `p_k` for Riesz means. `None` marks the end
/// of a finite (file-backed) sequence.
#[derive(Clone)]
pub struct WeightSequence<S> {
    label: String,
    term: Arc<dyn Fn(usize) -> Option<S> + Send + Sync>,
}

impl<S: Scalar> WeightSequence<S> {
    pub fn new<F>(label: impl Into<String>, term: F) -> Self
    where
        F: Fn(usize) -> Option<S> + Send + Sync + 'static,
    {
        WeightSequence { label: label.into(), term: Arc::new(term) }
    }

    /// Finite sequence; rows past its end are out of range.
    pub fn from_values(label: impl Into<String>, values: Vec<S>) -> Self {
        let values = Arc::new(values);
        Self::new(label, move |k| values.get(k).cloned())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term(&self, k: usize) -> Option<S> {
        (self.term)(k)
    }
}

/// Strictly increasing map `n ↦ index(n)` used to extract subsequences.
#[derive(Debug, Clone)]
pub enum IndexMap {
    Identity,
    /// `n ↦ 2n`
    Even,
    /// `0 ↦ 0`, `n ↦ 2n - 1`; inverts [`interleave`] on its first argument.
    Odd,
    /// `⌈r^n⌉`, bumped by one wherever rounding would repeat a value.
    Geometric(f64),
    Explicit(Arc<Vec<usize>>),
}

impl IndexMap {
    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::InvalidParameter(format!("geometric ratio must exceed 1, got {ratio}")));
        }
        Ok(IndexMap::Geometric(ratio))
    }

    pub fn explicit(indices: Vec<usize>) -> Result<Self> {
        if let Some(pos) = indices.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingIndexMap { position: pos + 1 });
        }
        Ok(IndexMap::Explicit(Arc::new(indices)))
    }

    pub fn index(&self, n: usize) -> Result<usize> {
        match self {
            IndexMap::Identity => Ok(n),
            IndexMap::Even => Ok(2 * n),
            IndexMap::Odd => Ok((2 * n).saturating_sub(1)),
            IndexMap::Geometric(r) => {
                let mut prev: Option<usize> = None;
                let mut value = 1.0f64;
                for _ in 0..=n {
                    let c = value.ceil() as usize;
                    let next = match prev {
                        Some(p) if c <= p => p + 1,
                        _ => c,
                    };
                    prev = Some(next);
                    value *= r;
                }
                Ok(prev.expect("loop runs at least once"))
            }
            IndexMap::Explicit(v) => v
                .get(n)
                .copied()
                .ok_or(Error::RowOutOfRange { row: n, available: v.len() }),
        }
    }

    fn describe(&self) -> String {
        match self {
            IndexMap::Identity => "identity".into(),
            IndexMap::Even => "even".into(),
            IndexMap::Odd => "odd".into(),
            IndexMap::Geometric(r) => format!("geometric:{r}"),
            IndexMap::Explicit(v) => format!("explicit[{}]", v.len()),
        }
    }
}

/// Strictly increasing indices `⌈r^i⌉` (bumped on ties) not exceeding `limit`,
/// with `limit` itself appended if missing.
pub fn geometric_indices(ratio: f64, limit: usize) -> Result<Vec<usize>> {
    let map = IndexMap::geometric(ratio)?;
    let mut out = Vec::new();
    let mut value = 1.0f64;
    let mut prev: Option<usize> = None;
    loop {
        let c = value.ceil() as usize;
        let next = match prev {
            Some(p) if c <= p => p + 1,
            _ => c,
        };
        if next > limit {
            break;
        }
        out.push(next);
        prev = Some(next);
        value *= ratio;
    }
    debug_assert!(out.iter().enumerate().all(|(i, &v)| map.index(i).ok() == Some(v)));
    if out.last() != Some(&limit) {
        out.push(limit);
    }
    Ok(out)
}

#[derive(Clone)]
pub enum MethodKind<S> {
    Cesaro,
    Riesz(WeightSequence<S>),
    Matrix(Arc<Vec<Vec<(usize, S)>>>),
    Interleaved(Arc<SummationMethod<S>>, Arc<SummationMethod<S>>),
    Subsequence(Arc<SummationMethod<S>>, IndexMap),
}

/// A generalized averaging method: a lazily generated summation matrix.
#[derive(Clone)]
pub struct SummationMethod<S> {
    name: String,
    kind: MethodKind<S>,
}

impl<S> fmt::Debug for SummationMethod<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SummationMethod").field("name", &self.name).finish()
    }
}

impl<S: Scalar> SummationMethod<S> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &MethodKind<S> {
        &self.kind
    }

    /// Number of rows when the method is backed by finite data.
    pub fn row_limit(&self) -> Option<usize> {
        match &self.kind {
            MethodKind::Matrix(rows) => Some(rows.len()),
            _ => None,
        }
    }

    pub fn row(&self, n: usize) -> Result<WeightVector<S>> {
        match &self.kind {
            MethodKind::Cesaro => {
                let w = S::from_ratio(1, n as i64 + 1);
                Ok(WeightVector { n, weights: (0..=n).map(|k| (k, w.clone())).collect() })
            }
            MethodKind::Riesz(p) => riesz_row(p, n),
            MethodKind::Matrix(rows) => {
                let row = rows.get(n).ok_or(Error::RowOutOfRange { row: n, available: rows.len() })?;
                WeightVector::new(n, row.clone())
            }
            MethodKind::Interleaved(a, b) => {
                if n == 0 {
                    a.row(0).map(|r| r.reindexed(0))
                } else if n % 2 == 1 {
                    a.row(n.div_ceil(2)).map(|r| r.reindexed(n))
                } else {
                    b.row(n / 2).map(|r| r.reindexed(n))
                }
            }
            MethodKind::Subsequence(base, map) => base.row(map.index(n)?).map(|r| r.reindexed(n)),
        }
    }
}

fn riesz_row<S: Scalar>(p: &WeightSequence<S>, n: usize) -> Result<WeightVector<S>> {
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let value = p.term(k).ok_or(Error::RowOutOfRange { row: n, available: k })?;
        if value <= S::zero() {
            return Err(Error::NonPositiveWeight { k, value: value.to_f64_lossy() });
        }
        if let Some(prev) = terms.last() {
            if value > *prev {
                return Err(Error::NonMonotoneWeights {
                    k: k - 1,
                    prev: prev.to_f64_lossy(),
                    next: value.to_f64_lossy(),
                });
            }
        }
        terms.push(value);
    }
    let total = S::sum_all(terms.iter().cloned());
    let weights = terms.into_iter().enumerate().map(|(k, t)| (k, t / total.clone())).collect();
    Ok(WeightVector { n, weights })
}

/// Uniform weights `1/(n+1)` on `0..=n`.
pub fn cesaro<S: Scalar>() -> SummationMethod<S> {
    SummationMethod { name: "cesaro".into(), kind: MethodKind::Cesaro }
}

/// Riesz means `s[n][k] = p_k / (p_0 + … + p_n)` for `k ≤ n`. Monotonicity and
/// positivity of `p` are checked when rows are generated.
pub fn riesz<S: Scalar>(p: WeightSequence<S>) -> SummationMethod<S> {
    SummationMethod { name: format!("riesz:{}", p.label()), kind: MethodKind::Riesz(p) }
}

/// Riesz means with `p_k = 1/(k+1)` (logarithmic means).
pub fn riesz_log<S: Scalar>() -> SummationMethod<S> {
    riesz(WeightSequence::new("log", |k| Some(S::from_ratio(1, k as i64 + 1))))
}

/// Method backed by explicit rows. Rows need not sum to one; that is what
/// [`validate_method`] reports on.
pub fn custom_matrix<S: Scalar>(name: impl Into<String>, rows: Vec<Vec<(usize, S)>>) -> Result<SummationMethod<S>> {
    for (n, row) in rows.iter().enumerate() {
        if let Some((col, _)) = row.iter().find(|(_, w)| *w < S::zero()) {
            return Err(Error::NegativeWeight { row: n, col: *col });
        }
    }
    Ok(SummationMethod { name: name.into(), kind: MethodKind::Matrix(Arc::new(rows)) })
}

/// Mixed sequence: odd rows `2n-1` come from `a.row(n)`, even rows `2n` from
/// `b.row(n)`, and row 0 is `a.row(0)`.
pub fn interleave<S: Scalar>(a: SummationMethod<S>, b: SummationMethod<S>) -> SummationMethod<S> {
    SummationMethod {
        name: format!("interleave({},{})", a.name, b.name),
        kind: MethodKind::Interleaved(Arc::new(a), Arc::new(b)),
    }
}

pub fn subsequence<S: Scalar>(base: SummationMethod<S>, map: IndexMap) -> Result<SummationMethod<S>> {
    if let IndexMap::Geometric(r) = map {
        IndexMap::geometric(r)?;
    }
    if let IndexMap::Explicit(v) = &map {
        IndexMap::explicit(v.as_ref().clone())?;
    }
    Ok(SummationMethod {
        name: format!("subseq({},{})", base.name, map.describe()),
        kind: MethodKind::Subsequence(Arc::new(base), map),
    })
}

/// Finite-prefix evidence for the row conditions of a summation matrix.
#[derive(Debug, Clone)]
pub struct MethodValidationReport<S> {
    pub method: String,
    pub max_n: usize,
    /// `max_{n ≤ max_n} |Σ_k s[n][k] - 1|`
    pub row_sum_defect: S,
    /// `v(n)` for `n = 0..=max_n`.
    pub variation: Vec<S>,
    pub threshold: f64,
    pub pass: bool,
}

impl<S: Scalar> MethodValidationReport<S> {
    pub fn final_variation(&self) -> &S {
        self.variation.last().expect("max_n >= 1")
    }
}

/// Checks rows `0..=max_n`. The vanishing-variation condition is a limit, so
/// `pass` only says `v(max_n) ≤ threshold` and rows sum to one.
pub fn validate_method<S: Scalar>(
    method: &SummationMethod<S>,
    max_n: usize,
    threshold: f64,
) -> Result<MethodValidationReport<S>> {
    if max_n < 1 {
        return Err(Error::InvalidParameter("max_n must be at least 1".into()));
    }
    let mut defect = S::zero();
    let mut variation = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let row = method.row(n)?;
        let d = row.sum_defect();
        if d > defect {
            defect = d;
        }
        variation.push(row.variation());
    }
    let sums_ok = if S::EXACT { defect.is_zero() } else { defect.to_f64_lossy() <= ROW_SUM_TOLERANCE };
    let pass = sums_ok && variation[max_n].to_f64_lossy() <= threshold;
    Ok(MethodValidationReport {
        method: method.name.clone(),
        max_n,
        row_sum_defect: defect,
        variation,
        threshold,
        pass,
    })
}

fn json_scalar<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::String(s) => S::parse_str(s).ok_or_else(|| Error::Parse(format!("bad number {s:?}"))),
        Value::Number(n) => {
            S::parse_str(&n.to_string()).ok_or_else(|| Error::Parse(format!("bad number {n}")))
        }
        other => Err(Error::Parse(format!("expected number or \"p/q\" string, got {other}"))),
    }
}

/// Parses `{"rows": [[[k, s], ...], ...]}` with `s` a number or `"p/q"`.
pub fn matrix_from_json<S: Scalar>(name: impl Into<String>, text: &str) -> Result<SummationMethod<S>> {
    let doc: Value = serde_json::from_str(text)?;
    let rows = doc
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"rows\" array".into()))?;
    let mut parsed = Vec::with_capacity(rows.len());
    for row in rows {
        let entries = row.as_array().ok_or_else(|| Error::Parse("row must be an array".into()))?;
        let mut out = Vec::with_capacity(entries.len());
        for e in entries {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| Error::Parse("entry must be [k, s]".into()))?;
            let k = pair[0].as_u64().ok_or_else(|| Error::Parse("column index must be a nonnegative integer".into()))?;
            out.push((k as usize, json_scalar::<S>(&pair[1])?));
        }
        parsed.push(out);
    }
    custom_matrix(name, parsed)
}

pub fn matrix_from_file<S: Scalar>(path: &Path) -> Result<SummationMethod<S>> {
    let text = std::fs::read_to_string(path)?;
    matrix_from_json(format!("matrix:file={}", path.display()), &text)
}

/// Parses `{"p": [...]}` or a bare array of weights.
pub fn weight_sequence_from_json<S: Scalar>(label: impl Into<String>, text: &str) -> Result<WeightSequence<S>> {
    let doc: Value = serde_json::from_str(text)?;
    let items = match &doc {
        Value::Array(a) => a,
        Value::Object(o) => o.get("p").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing \"p\" array".into()))?,
        _ => return Err(Error::Parse("expected array or {\"p\": [...]}".into())),
    };
    let values = items.iter().map(json_scalar::<S>).collect::<Result<Vec<_>>>()?;
    Ok(WeightSequence::from_values(label, values))
}

pub fn riesz_from_file<S: Scalar>(path: &Path) -> Result<SummationMethod<S>> {
    let text = std::fs::read_to_string(path)?;
    Ok(riesz(weight_sequence_from_json(format!("file={}", path.display()), &text)?))
}

/// Parses a JSON list of strictly increasing indices (`[..]` or `{"indices": [..]}`).
pub fn index_map_from_json(text: &str) -> Result<IndexMap> {
    let doc: Value = serde_json::from_str(text)?;
    let items = match &doc {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("indices")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing \"indices\" array".into()))?,
        _ => return Err(Error::Parse("expected index array".into())),
    };
    let v = items
        .iter()
        .map(|x| x.as_u64().map(|u| u as usize).ok_or_else(|| Error::Parse("indices must be nonnegative integers".into())))
        .collect::<Result<Vec<_>>>()?;
    IndexMap::explicit(v)
}

/// Harmonic number `H_m = 1 + 1/2 + … + 1/m`, compensated.
pub fn harmonic(m: usize) -> f64 {
    f64::sum_all((1..=m).rev().map(|k| 1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn cesaro_rows() {
        let m = cesaro::<Q>();
        assert_eq!(m.row(0).unwrap().entries(), &[(0, q(1, 1))]);
        assert_eq!(m.row(2).unwrap().entries(), &[(0, q(1, 3)), (1, q(1, 3)), (2, q(1, 3))]);
        assert_eq!(m.row(4).unwrap().variation(), q(1, 5));
    }

    #[test]
    fn riesz_log_row_two() {
        let row = riesz_log::<Q>().row(2).unwrap();
        assert_eq!(row.entries(), &[(0, q(6, 11)), (1, q(3, 11)), (2, q(2, 11))]);
    }

    #[test]
    fn riesz_flat_equals_cesaro() {
        let flat = riesz(WeightSequence::new("one", |_| Some(Q::one())));
        let c = cesaro::<Q>();
        for n in 0..=1000 {
            assert_eq!(flat.row(n).unwrap().entries(), c.row(n).unwrap().entries());
        }
    }

    #[test]
    fn riesz_log_variation_closed_form_exact() {
        // v(n) = (2 - 1/(n+1)) / H_{n+1}
        let m = riesz_log::<Q>();
        for n in [1usize, 5, 30] {
            let h = (1..=n + 1).fold(Q::zero(), |acc, k| acc + q(1, k as i64));
            let expected = (q(2, 1) - q(1, n as i64 + 1)) / h;
            assert_eq!(m.row(n).unwrap().variation(), expected);
        }
    }

    #[test]
    fn riesz_rejects_increasing_and_nonpositive() {
        let up = riesz(WeightSequence::new("up", |k| Some(k as f64 + 1.0)));
        assert!(matches!(up.row(3), Err(Error::NonMonotoneWeights { k: 0, .. })));
        let zero = riesz(WeightSequence::new("z", |k| Some(if k < 2 { 1.0 } else { 0.0 })));
        assert!(zero.row(1).is_ok());
        assert!(matches!(zero.row(2), Err(Error::NonPositiveWeight { k: 2, .. })));
    }

    #[test]
    fn interleave_index_bookkeeping() {
        let c = cesaro::<Q>();
        let a = riesz_log::<Q>();
        let mixed = interleave(a.clone(), c.clone());
        assert_eq!(mixed.row(4).unwrap().entries(), c.row(2).unwrap().entries());
        assert_eq!(mixed.row(3).unwrap().entries(), a.row(2).unwrap().entries());
        assert_eq!(mixed.row(0).unwrap().entries(), a.row(0).unwrap().entries());
        let self_mixed = interleave(c.clone(), c.clone());
        assert_eq!(self_mixed.row(3).unwrap().entries(), c.row(2).unwrap().entries());
        assert_eq!(self_mixed.row(3).unwrap().n(), 3);
    }

    #[test]
    fn subsequence_maps() {
        let c = cesaro::<Q>();
        let ident = subsequence(c.clone(), IndexMap::Identity).unwrap();
        assert_eq!(ident.row(7).unwrap().entries(), c.row(7).unwrap().entries());
        let even = subsequence(c.clone(), IndexMap::Even).unwrap();
        assert_eq!(even.row(1).unwrap().entries(), c.row(2).unwrap().entries());
        assert!(matches!(IndexMap::explicit(vec![1, 3, 3]), Err(Error::NonIncreasingIndexMap { position: 2 })));
        let short = subsequence(c, IndexMap::explicit(vec![2, 5]).unwrap()).unwrap();
        assert!(matches!(short.row(2), Err(Error::RowOutOfRange { .. })));
    }

    #[test]
    fn geometric_index_map_is_strict() {
        let g = IndexMap::geometric(1.5).unwrap();
        let first: Vec<usize> = (0..8).map(|n| g.index(n).unwrap()).collect();
        assert_eq!(first, vec![1, 2, 3, 4, 6, 8, 12, 18]);
        let slow = IndexMap::geometric(1.1).unwrap();
        let v: Vec<usize> = (0..30).map(|n| slow.index(n).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert!(IndexMap::geometric(1.0).is_err());
        assert_eq!(geometric_indices(1.5, 20).unwrap(), vec![1, 2, 3, 4, 6, 8, 12, 18, 20]);
    }

    #[test]
    fn validate_cesaro_closed_form() {
        let report = validate_method(&cesaro::<Q>(), 100, 0.02).unwrap();
        assert_eq!(*report.final_variation(), q(1, 101));
        assert!(report.pass);
        assert!(report.row_sum_defect.is_zero());
        for (n, v) in report.variation.iter().enumerate() {
            assert_eq!(v.clone() * q(n as i64 + 1, 1), Q::one());
        }
    }

    #[test]
    fn validate_flags_short_row() {
        let m = custom_matrix("bad", vec![vec![(0, 1.0f64)], vec![(0, 0.5), (1, 0.4)]]).unwrap();
        let report = validate_method(&m, 1, 1.0).unwrap();
        assert!((report.row_sum_defect - 0.1).abs() < 1e-15);
        assert!(!report.pass);
        assert!(validate_method(&m, 0, 1.0).is_err());
    }

    #[test]
    fn matrix_json_accepts_fraction_strings() {
        let m: SummationMethod<Q> =
            matrix_from_json("m", r#"{"rows": [[[0, "1"]], [[0, "1/3"], [1, 0.5], [1, "1/6"]]]}"#).unwrap();
        let row = m.row(1).unwrap();
        assert_eq!(row.entries(), &[(0, q(1, 3)), (1, q(2, 3))]);
        assert!(matrix_from_json::<f64>("m", r#"{"rows": [[[0, -1]]]}"#).is_err());
        assert!(matrix_from_json::<f64>("m", r#"{"cols": []}"#).is_err());
    }

    #[test]
    fn weight_sequence_json() {
        let p: WeightSequence<Q> = weight_sequence_from_json("f", r#"{"p": [1, "1/2", 0.25]}"#).unwrap();
        let m = riesz(p);
        assert_eq!(m.row(1).unwrap().entries(), &[(0, q(2, 3)), (1, q(1, 3))]);
        assert!(matches!(m.row(3), Err(Error::RowOutOfRange { .. })));
    }

    proptest! {
        #[test]
        fn builtin_rows_are_stochastic(n in 0usize..2000) {
            for m in [cesaro::<f64>(), riesz_log::<f64>()] {
                let row = m.row(n).unwrap();
                prop_assert!(row.entries().iter().all(|(k, w)| *w >= 0.0 && *k <= n));
                prop_assert!(row.sum_defect() <= ROW_SUM_TOLERANCE);
                prop_assert_eq!(row.clone(), m.row(n).unwrap());
            }
        }

        #[test]
        fn odd_subsequence_recovers_first_method(n in 0usize..300) {
            let a = riesz_log::<Q>();
            let mixed = interleave(a.clone(), cesaro::<Q>());
            let back = subsequence(mixed, IndexMap::Odd).unwrap();
            let (got, want) = (back.row(n).unwrap(), a.row(n).unwrap());
            prop_assert_eq!(got.entries(), want.entries());
        }
    }
}
