//! Scalar abstractions.
//!
//! Everything that integrates or fits works over [`Scalar`] (`f32` or `f64`);
//! the pure exponent arithmetic only needs field operations and also accepts
//! exact rationals through [`ExponentField`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, Num};

/// Floating point scalar used by the geometry, ODE and diagnostics code.
pub trait Scalar: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Ordered field used for exponent classification. Implemented by the float
/// types and by `num_rational::Ratio<i64>` so boundary cases can be decided
/// exactly.
pub trait ExponentField: Num + Copy + PartialOrd + FromPrimitive + Debug {
    fn to_f64_lossy(self) -> f64;
}

impl ExponentField for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl ExponentField for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl ExponentField for num_rational::Ratio<i64> {
    fn to_f64_lossy(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// `|x|^(r-1) x`, the odd power used by the nonlinearity.
#[inline]
pub fn odd_pow<T: Scalar>(x: T, r: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    x.abs().powf(r - T::one()) * x
}
