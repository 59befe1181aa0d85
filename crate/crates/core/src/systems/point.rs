use std::fmt;

use num_rational::BigRational;

use crate::scalar::rational_to_f64;

/// Sequences in `{0,1}^ℕ` with a finite description.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymbolicPoint {
    /// `prefix` followed by `period` repeated forever, kept in canonical form
    /// (shortest period, shortest prefix).
    Periodic { prefix: Vec<u8>, period: Vec<u8> },
    /// Tail starting at `offset` of the block sequence whose j-th block
    /// (j ≥ 1) is the symbol `j mod 2` repeated `base^j` times.
    Blocks { base: u64, offset: u64 },
}

impl SymbolicPoint {
    /// Canonical eventually periodic sequence. Returns `None` for an empty
    /// period or symbols other than 0/1.
    pub fn periodic(prefix: Vec<u8>, period: Vec<u8>) -> Option<Self> {
        if period.is_empty() || prefix.iter().chain(&period).any(|&b| b > 1) {
            return None;
        }
        let mut period = minimal_period(period);
        let mut prefix = prefix;
        while let Some(&last) = prefix.last() {
            if last != *period.last().expect("nonempty") {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        Some(SymbolicPoint::Periodic { prefix, period })
    }

    /// Parses words like `"0110"`.
    pub fn parse_word(word: &str) -> Option<Vec<u8>> {
        word.chars()
            .map(|c| match c {
                '0' => Some(0),
                '1' => Some(1),
                _ => None,
            })
            .collect()
    }

    pub fn blocks(base: u64) -> Self {
        SymbolicPoint::Blocks { base, offset: 0 }
    }

    /// Symbol at position `i`.
    pub fn symbol(&self, i: u64) -> u8 {
        match self {
            SymbolicPoint::Periodic { prefix, period } => {
                let p = prefix.len() as u64;
                if i < p {
                    prefix[i as usize]
                } else {
                    period[((i - p) % period.len() as u64) as usize]
                }
            }
            SymbolicPoint::Blocks { base, offset } => block_symbol(*base, offset + i),
        }
    }

    /// Left shift.
    pub fn shift(&self) -> Self {
        match self {
            SymbolicPoint::Periodic { prefix, period } => {
                if prefix.is_empty() {
                    let mut period = period.clone();
                    period.rotate_left(1);
                    SymbolicPoint::Periodic { prefix: Vec::new(), period }
                } else {
                    SymbolicPoint::Periodic { prefix: prefix[1..].to_vec(), period: period.clone() }
                }
            }
            SymbolicPoint::Blocks { base, offset } => SymbolicPoint::Blocks { base: *base, offset: offset + 1 },
        }
    }

    /// First index where the sequences differ, searching at most `cap`
    /// positions when one side is not eventually periodic.
    pub fn first_difference(&self, other: &Self, cap: u64) -> Option<u64> {
        let horizon = match (self, other) {
            (
                SymbolicPoint::Periodic { prefix: a, period: pa },
                SymbolicPoint::Periodic { prefix: b, period: pb },
            ) => {
                let l = num_integer::lcm(pa.len(), pb.len()) as u64;
                a.len().max(b.len()) as u64 + l
            }
            _ => cap,
        };
        (0..horizon).find(|&i| self.symbol(i) != other.symbol(i))
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word = |w: &[u8]| w.iter().map(|b| char::from(b'0' + b)).collect::<String>();
        match self {
            SymbolicPoint::Periodic { prefix, period } => {
                write!(f, "pre={},per={}", word(prefix), word(period))
            }
            SymbolicPoint::Blocks { base, offset } => write!(f, "rule=blocks{base}+{offset}"),
        }
    }
}

fn minimal_period(period: Vec<u8>) -> Vec<u8> {
    let n = period.len();
    for d in 1..n {
        if n.is_multiple_of(d) && (d..n).all(|i| period[i] == period[i - d]) {
            return period[..d].to_vec();
        }
    }
    period
}

/// Symbol at absolute position `pos` of the block sequence with lengths
/// `base^1, base^2, …` and symbols `1, 0, 1, 0, …`.
fn block_symbol(base: u64, pos: u64) -> u8 {
    let mut start: u128 = 0;
    let mut len: u128 = base as u128;
    let mut j: u64 = 1;
    let pos = pos as u128;
    loop {
        if pos < start + len {
            return (j % 2) as u8;
        }
        start += len;
        len *= base as u128;
        j += 1;
    }
}

/// End (exclusive) of block `j` of the block sequence: `Σ_{i=1}^{j} base^i`.
pub fn block_boundary(base: u64, j: u32) -> u64 {
    (1..=j).map(|i| base.pow(i)).sum()
}

/// A phase point.
#[derive(Debug, Clone, PartialEq)]
pub enum PointRepr {
    Real(Vec<f64>),
    Rational(Vec<BigRational>),
    Symbolic(SymbolicPoint),
}

/// Hashable identity of a representation, used for atom merging and cycle
/// detection. Floats compare by bit pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PointKey {
    Bits(Vec<u64>),
    Rational(Vec<BigRational>),
    Symbolic(SymbolicPoint),
}

impl PointRepr {
    pub fn real(coords: impl Into<Vec<f64>>) -> Self {
        PointRepr::Real(coords.into())
    }

    pub fn rational(coords: impl Into<Vec<BigRational>>) -> Self {
        PointRepr::Rational(coords.into())
    }

    /// True for rational and symbolic points.
    pub fn is_exact(&self) -> bool {
        !matches!(self, PointRepr::Real(_))
    }

    pub fn key(&self) -> PointKey {
        match self {
            PointRepr::Real(v) => PointKey::Bits(v.iter().map(|x| x.to_bits()).collect()),
            PointRepr::Rational(v) => PointKey::Rational(v.clone()),
            PointRepr::Symbolic(s) => PointKey::Symbolic(s.clone()),
        }
    }

    /// Coordinates as floats; `None` for symbolic points.
    pub fn coords_f64(&self) -> Option<Vec<f64>> {
        match self {
            PointRepr::Real(v) => Some(v.clone()),
            PointRepr::Rational(v) => Some(v.iter().map(rational_to_f64).collect()),
            PointRepr::Symbolic(_) => None,
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            PointRepr::Real(v) => Some(v.len()),
            PointRepr::Rational(v) => Some(v.len()),
            PointRepr::Symbolic(_) => None,
        }
    }

    /// Float copy of an exact coordinate point; symbolic points are unchanged.
    pub fn to_float(&self) -> Self {
        match self {
            PointRepr::Rational(v) => PointRepr::Real(v.iter().map(rational_to_f64).collect()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for PointRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointRepr::Real(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "{}", parts.join(","))
            }
            PointRepr::Rational(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            PointRepr::Symbolic(s) => write!(f, "{s}"),
        }
    }
}
