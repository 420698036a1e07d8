//! Scalar abstractions shared by the exact and floating-point layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Coefficient field for polynomial arithmetic and Gröbner bases.
///
/// Exact work uses [`BigRational`]; `f64`/`f32` are accepted so the same
/// code paths can be exercised in floating point, but exactness guarantees
/// (reduction to zero, Hilbert-function preservation) only hold for the
/// rationals.
pub trait Field: Num + Clone + Neg<Output = Self> + Debug + Display + Send + Sync {
    fn from_ratio(numer: BigInt, denom: BigInt) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_ratio(BigInt::from(v), BigInt::from(1))
    }

    /// Canonical text form used by the polynomial printer.
    fn to_text(&self) -> String {
        format!("{self}")
    }

    fn is_negative_coeff(&self) -> bool;
}

impl Field for BigRational {
    fn from_ratio(numer: BigInt, denom: BigInt) -> Self {
        BigRational::new(numer, denom)
    }

    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }
}

macro_rules! float_field {
    ($t:ty) => {
        impl Field for $t {
            fn from_ratio(numer: BigInt, denom: BigInt) -> Self {
                let r = BigRational::new(numer, denom);
                r.to_f64().unwrap_or(f64::NAN) as $t
            }

            fn is_negative_coeff(&self) -> bool {
                *self < 0.0
            }
        }
    };
}

float_field!(f64);
float_field!(f32);

/// Floating-point scalar for the numerical geometry layer.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Send + Sync + Debug + Display + 'static
{
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite conversion")
    }

    fn rational(r: &BigRational) -> Self {
        Self::of(r.to_f64().unwrap_or(f64::NAN))
    }

    /// Smallest pivot accepted by Cholesky-type factorizations.
    fn pivot_floor() -> Self;
}

impl Real for f64 {
    fn pivot_floor() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn pivot_floor() -> Self {
        1e-5
    }
}
