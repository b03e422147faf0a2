//! Coefficient types shared by every cochain in the crate.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact coefficients. Values are measured in turns: `1` stands for the real number 2π.
pub type Rational = num_rational::Rational64;

/// Coefficient ring of a cochain.
///
/// `from_winding(w)` is the representation of the constant real number 2πw; it is how
/// the integer (“2πℤ”) layer of a Deligne–Beilinson cochain is injected into functions.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Send
    + Sync
    + 'static
{
    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn from_winding(w: i64) -> Self;

    fn from_i64(v: i64) -> Self;

    /// Numeric value in the scalar's own units.
    fn value(&self) -> f64;

    /// Value converted to radians-based reals.
    fn to_real(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.value().abs()
    }

    /// Equality up to `tol` for inexact scalars; exact equality otherwise.
    fn near(&self, other: &Self, tol: f64) -> bool;

    /// The integer `w` with `self == from_winding(w)` (up to `tol` for reals).
    fn as_winding(&self, tol: f64) -> Option<i64>;

    /// Representative of `self` modulo `from_winding(1)` in `[0, from_winding(1))`.
    fn frac_winding(&self) -> Self;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_winding(w: i64) -> Self {
        Rational::from_integer(w)
    }

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(v)
    }

    fn value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn to_real(&self) -> f64 {
        std::f64::consts::TAU * self.value()
    }

    fn magnitude(&self) -> f64 {
        self.abs().value()
    }

    fn near(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn as_winding(&self, _tol: f64) -> Option<i64> {
        self.is_integer().then(|| self.to_integer())
    }

    fn frac_winding(&self) -> Self {
        self - self.floor()
    }

    /// `["numerator", "denominator"]`.
    fn to_json(&self) -> Value {
        Value::Array(vec![
            Value::String(self.numer().to_string()),
            Value::String(self.denom().to_string()),
        ])
    }

    fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Shape(format!("expected [\"num\", \"den\"] rational, found {v}"));
        let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
        let parse = |x: &Value| -> Result<i64> {
            match x {
                Value::String(s) => s.parse().map_err(|_| bad()),
                Value::Number(n) => n.as_i64().ok_or_else(bad),
                _ => Err(bad()),
            }
        };
        let (n, d) = (parse(&pair[0])?, parse(&pair[1])?);
        if d == 0 {
            return Err(bad());
        }
        Ok(Rational::new(n, d))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_winding(w: i64) -> Self {
        std::f64::consts::TAU * w as f64
    }

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn value(&self) -> f64 {
        *self
    }

    fn to_real(&self) -> f64 {
        *self
    }

    fn near(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn as_winding(&self, tol: f64) -> Option<i64> {
        let w = (self / std::f64::consts::TAU).round();
        ((self - w * std::f64::consts::TAU).abs() <= tol).then_some(w as i64)
    }

    fn frac_winding(&self) -> Self {
        self.rem_euclid(std::f64::consts::TAU)
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self).map_or(Value::Null, Value::Number)
    }

    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::Shape(format!("expected a number, found {v}")))
    }
}

/// Exact rational value of an `f64` (every finite double is dyadic).
pub fn exact_rational(x: f64) -> num_rational::BigRational {
    num_rational::BigRational::from_float(x).unwrap_or_else(num_rational::BigRational::zero)
}
