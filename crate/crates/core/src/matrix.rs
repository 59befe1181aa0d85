//! Square integer matrices with arbitrary-precision entries.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    /// row-major
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::NonSquareMatrix { rows: 0, cols: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::NonSquareMatrix { rows: dim, cols: bad.len() });
        }
        Ok(IntMatrix { dim, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        IntMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.dim).map(<[BigInt]>::to_vec).collect()
    }

    /// `A^e` by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = IntMatrix::identity(self.dim);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(BigRational::zero(), |acc, j| {
                    acc + BigRational::from_integer(self.get(i, j).clone()) * &v[j]
                })
            })
            .collect()
    }

    pub fn apply_f64(&self, v: &[f64]) -> Vec<f64> {
        let a: Vec<f64> = self.entries.iter().map(|x| BigRational::from_integer(x.clone()).to_f64_lossy()).collect();
        (0..self.dim).map(|i| (0..self.dim).map(|j| a[i * self.dim + j] * v[j]).sum()).collect()
    }

    pub fn max_entry_bits(&self) -> u64 {
        self.entries.iter().map(BigInt::bits).max().unwrap_or(0)
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigInt::zero();
                for k in 0..d {
                    let a = self.get(i, k);
                    if !a.is_zero() {
                        acc += a * rhs.get(k, j);
                    }
                }
                entries.push(acc);
            }
        }
        IntMatrix { dim: d, entries }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Parses `{"rows": [[...], ...]}` with integer, decimal or `"p/q"` entries.
pub fn rows_from_json(text: &str) -> Result<Vec<Vec<BigRational>>> {
    let doc: Value = serde_json::from_str(text)?;
    let rows = doc
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing \"rows\" array".into()))?;
    rows.iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                .iter()
                .map(|v| {
                    let s = match v {
                        Value::String(s) => s.clone(),
                        Value::Number(n) => n.to_string(),
                        other => return Err(Error::Parse(format!("bad matrix entry {other}"))),
                    };
                    parse_rational(&s).ok_or_else(|| Error::Parse(format!("bad matrix entry {s:?}")))
                })
                .collect()
        })
        .collect()
}

/// Integer matrix from JSON; non-integer entries are rejected.
pub fn int_matrix_from_json(text: &str) -> Result<IntMatrix> {
    let rows = rows_from_json(text)?;
    let ints = rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| {
                    if x.is_integer() {
                        Ok(x.to_integer())
                    } else {
                        Err(Error::Parse(format!("matrix entry {x} is not an integer")))
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_rows(ints)
}

/// Real matrix from JSON, checked square.
pub fn real_matrix_from_json(text: &str) -> Result<Vec<Vec<f64>>> {
    let rows = rows_from_json(text)?;
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NonSquareMatrix { rows: n, cols: bad.len() });
    }
    Ok(rows.iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect())
}
