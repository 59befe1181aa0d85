//! Generalized ergodic averages, quasi-ergodic decomposition and tameness
//! checks for discrete-time dynamical systems.

pub mod averaging;
pub mod decomposition;
pub mod error;
pub mod matrix;
pub mod scalar;
pub mod summation;
pub mod systems;
pub mod tameness;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact scalar.
pub type Rational = num_rational::BigRational;
pub type ExactMethod = summation::SummationMethod<Rational>;
pub type FloatMethod = summation::SummationMethod<f64>;
pub type ExactMeasure = averaging::EmpiricalMeasure<Rational>;
pub type FloatMeasure = averaging::EmpiricalMeasure<f64>;
