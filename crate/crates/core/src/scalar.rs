//! Scalar abstraction shared by every numeric module.
//!
//! The calculus is written once against [`Scalar`] and instantiated for
//! `f32`, `f64` and exact rationals ([`BigRational`]).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// Ordered field element usable by the tail-box calculus.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    /// Converts an exact rational literal into this scalar.
    fn from_rational(r: &BigRational) -> Self;

    /// Slack used for every tie comparison: `1e-12` for floating point,
    /// zero for exact arithmetic.
    fn tie() -> Self;

    /// Exact rational value. Binary floats convert without rounding.
    fn to_rational(&self) -> BigRational;

    /// Converts a finite `f64`. Panics on NaN or infinity.
    fn cast_f64(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64")
    }

    fn cast_u64(n: u64) -> Self {
        Self::from_u64(n).expect("u64 representable")
    }

    /// Nearest `f64`, for reporting.
    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn tie() -> Self {
        1e-12
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite f64")
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r) as f32
    }

    fn tie() -> Self {
        1e-12
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite f32")
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn tie() -> Self {
        BigRational::zero()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fallback for magnitudes the direct conversion rejects.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational `num/den`.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_of<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

/// `base^exp` by repeated squaring.
pub(crate) fn powu<S: Scalar>(base: &S, exp: u64) -> S {
    let mut result = S::one();
    let mut acc = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * acc.clone();
        }
        e >>= 1;
        if e > 0 {
            acc = acc.clone() * acc;
        }
    }
    result
}
