//! Scalar abstractions.
//!
//! The numerical core is written against [`Scalar`], which is satisfied by
//! `f32` and `f64`. Alcove classification only needs ordered-field arithmetic
//! plus `floor`, captured by [`AlcoveCoord`]; it is implemented for the float
//! types (with a tolerance band) and for exact rationals (no band at all).

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_rational::Rational64;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Real scalar type for the matrix-group numerics.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Send + Sync + 'static
{
    /// Factor applied to the f64-tuned default tolerances.
    const TOLERANCE_SCALE: f64;
    /// Distance to a regularity wall treated as "on the wall".
    const EXACT_BAND: f64;
    /// Distance to a regularity wall below which the decision is ambiguous.
    const AMBIGUITY_BAND: f64;

    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TOLERANCE_SCALE: f64 = 1.0;
    const EXACT_BAND: f64 = 1.0e-12;
    const AMBIGUITY_BAND: f64 = 1.0e-9;
}

impl Scalar for f32 {
    const TOLERANCE_SCALE: f64 = 1.0e5;
    const EXACT_BAND: f64 = 1.0e-6;
    const AMBIGUITY_BAND: f64 = 1.0e-5;
}

/// Coordinate type for torus points in the Cartan subalgebra.
pub trait AlcoveCoord: Clone + PartialOrd + Signed + FromPrimitive + Debug {
    /// Half-width of the "numerically on the wall" band. Zero for exact types.
    fn exact_band() -> Self;
    /// Half-width of the ambiguity band around a wall.
    fn ambiguity_band() -> Self;
    /// Band used to decide whether two eigenvalues coincide.
    fn multiplicity_band() -> Self;
    fn floor_value(&self) -> Self;
    fn to_f64_lossy(&self) -> f64;
}

impl AlcoveCoord for f64 {
    fn exact_band() -> Self {
        1.0e-12
    }
    fn ambiguity_band() -> Self {
        1.0e-9
    }
    fn multiplicity_band() -> Self {
        1.0e-7
    }
    fn floor_value(&self) -> Self {
        self.floor()
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl AlcoveCoord for f32 {
    fn exact_band() -> Self {
        1.0e-6
    }
    fn ambiguity_band() -> Self {
        1.0e-5
    }
    fn multiplicity_band() -> Self {
        1.0e-4
    }
    fn floor_value(&self) -> Self {
        self.floor()
    }
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl AlcoveCoord for Rational64 {
    fn exact_band() -> Self {
        Rational64::from_integer(0)
    }
    fn ambiguity_band() -> Self {
        Rational64::from_integer(0)
    }
    fn multiplicity_band() -> Self {
        Rational64::from_integer(0)
    }
    fn floor_value(&self) -> Self {
        self.floor()
    }
    fn to_f64_lossy(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
