//! Exact rational helpers shared by the BXOS code paths.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{ToPrimitive, Zero};

/// Exact value type for binary (and integer-valued) welfare, objectives and payments.
pub type Rational = Ratio<i128>;

/// Converts an integral `f64` to an exact rational, `None` if it has a fractional part.
pub fn integral(x: f64) -> Option<Rational> {
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e30 {
        Some(Rational::from_integer(x as i128))
    } else {
        None
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn widen(r: Rational64) -> Rational {
    Rational::new(*r.numer() as i128, *r.denom() as i128)
}

/// Exact conversion of any finite float.
pub fn big_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn big_from_small(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `value >= alpha * threshold`, evaluated as `value * den >= num * threshold`.
pub fn at_least_fraction(value: f64, alpha: Rational64, threshold: f64) -> bool {
    value * (*alpha.denom() as f64) >= (*alpha.numer() as f64) * threshold
}

/// Serializes a rational as its `p/q` string.
pub fn serialize_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}
