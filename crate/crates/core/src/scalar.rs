//! The scalar field that summation weights and pairings live in.
//!
//! Floating types give fast approximate averages; [`BigRational`] gives exact
//! ones, which the cycle-measure and validation oracles rely on.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Arithmetic needed by weights, measures and pairings.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &BigRational) -> Self;

    fn from_f64_lossy(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Sum of a sequence. Floating types override this with compensated
    /// summation so long orbit averages keep their last digits.
    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        terms.into_iter().fold(Self::zero(), |acc, t| acc + t)
    }

    /// Parses `"p/q"`, integers and decimal literals (with optional exponent).
    fn parse_str(s: &str) -> Option<Self> {
        parse_rational(s).map(|r| Self::from_rational(&r))
    }

    /// Exact `p/q` form, for exact types only.
    fn exact_string(&self) -> Option<String> {
        None
    }
}

/// Neumaier's variant of Kahan summation.
fn neumaier<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn from_f64_lossy(x: f64) -> Self {
        x
    }

    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        neumaier(terms)
    }

    fn parse_str(s: &str) -> Option<Self> {
        if s.contains('/') {
            parse_rational(s).map(|r| rational_to_f64(&r))
        } else {
            f64::from_str(s.trim()).ok()
        }
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }

    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }

    fn sum_all<I: IntoIterator<Item = Self>>(terms: I) -> Self {
        neumaier(terms.into_iter().map(f64::from)) as f32
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    /// Exact binary value of `x`; non-finite input maps to zero.
    fn from_f64_lossy(x: f64) -> Self {
        BigRational::from_f64(x).unwrap_or_else(BigRational::zero)
    }

    fn to_f64_lossy(&self) -> f64 {
        rational_to_f64(self)
    }

    fn exact_string(&self) -> Option<String> {
        Some(self.to_string())
    }
}

/// Correctly scaled conversion that survives numerators and denominators
/// far beyond the f64 range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nbits = r.numer().bits() as i64;
    let dbits = r.denom().bits() as i64;
    // shift so both fit comfortably in an f64 mantissa window
    let shift_n = (nbits - 60).max(0);
    let shift_d = (dbits - 60).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    let exp = shift_n - shift_d;
    (n / d) * 2f64.powi(exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// Parses a rational literal: `p/q`, an integer, or a decimal such as
/// `-0.125` or `1.5e-3`. Decimals are converted exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).ok()?;
        let q = BigInt::from_str(q.trim()).ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], i64::from_str(&s[i + 1..]).ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str_radix(&digits, 10).ok()?);
    let scale = exponent - frac_part.len() as i64;
    if exponent.unsigned_abs() > 10_000 {
        return None;
    }
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= BigRational::from_integer(pow);
    } else {
        value /= BigRational::from_integer(pow);
    }
    if neg {
        value = -value;
    }
    Some(value)
}

/// Larger of the numerator and denominator bit lengths.
pub fn rational_bits(r: &BigRational) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

pub fn frac_f64(x: f64) -> f64 {
    let f = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("1/7"), Some(q(1, 7)));
        assert_eq!(parse_rational("-3/6"), Some(q(-1, 2)));
        assert_eq!(parse_rational("0.1"), Some(q(1, 10)));
        assert_eq!(parse_rational("1.5e-3"), Some(q(3, 2000)));
        assert_eq!(parse_rational("2E2"), Some(q(200, 1)));
        assert_eq!(parse_rational(".25"), Some(q(1, 4)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn float_parse_falls_back_to_std() {
        assert_eq!(f64::parse_str("0.3"), Some(0.3));
        assert_eq!(f64::parse_str("1/4"), Some(0.25));
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let terms: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat_n(1e-16, 10_000))
            .collect();
        let s = f64::sum_all(terms.iter().copied());
        assert!((s - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigInt::from(3) << 4000usize;
        let r = BigRational::new(big.clone(), big * 4);
        assert_eq!(rational_to_f64(&r), 0.25);
    }

    #[test]
    fn frac_reduces_into_unit_interval() {
        assert_eq!(frac(&q(9, 7)), q(2, 7));
        assert_eq!(frac(&q(-1, 3)), q(2, 3));
        assert_eq!(frac_f64(-1e-20), 0.0);
    }
}
