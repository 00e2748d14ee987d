//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// The S-curve and the swarming signal need `exp`/`ln`, so only IEEE floats
/// qualify; exact rationals are not supported.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + FromStr
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot
    /// represent at all, which never happens for the constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Closed interval `[lo, hi]` in domain units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `true` when `other` lies entirely inside `self`.
    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn clamp(&self, x: T) -> T {
        x.max(self.lo).min(self.hi)
    }

    pub fn intersect(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }
}

impl<T: Scalar> From<(T, T)> for Interval<T> {
    fn from((lo, hi): (T, T)) -> Self {
        Self { lo, hi }
    }
}
