//! Scalar traits the solver is generic over.
//!
//! Constraint costs and fitness values live in an exact signed integer type
//! (`Cost`); rank and weight arithmetic used for sampling lives in a floating
//! point type (`Real`).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, PrimInt, Signed, ToPrimitive};

/// Exact integer cost type. Deltas can be negative, so it must be signed.
pub trait Cost:
    PrimInt + Signed + NumCast + Sum + Default + Debug + Display + Send + Sync + 'static
{
    fn to_real<F: Real>(self) -> F {
        F::from(self).expect("cost representable as a float")
    }
}

impl<T> Cost for T where
    T: PrimInt + Signed + NumCast + Sum + Default + Debug + Display + Send + Sync + 'static
{
}

/// floating point: f32 or f64
pub trait Real: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Uniform draw in `[0, 1)`.
    fn unit<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_f64(rng.gen::<f64>()).expect("f64 converts")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}
