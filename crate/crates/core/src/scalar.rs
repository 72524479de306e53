//! Scalar abstractions shared by the numeric routines.
//!
//! Two tiers are used:
//!
//! - [`Scalar`] needs only field arithmetic and an ordering. Counting-based
//!   quantities (betweenness, unpredictability, per-entity averages, season
//!   normalization, min-max scaling) are generic over it, so they also run on
//!   exact rationals such as [`crate::Exact`].
//! - [`Real`] adds the floating point operations (`sqrt`, `NaN`, ...) needed by
//!   correlation, clustering and the null-model standard deviations.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Field-like scalar: `+ - * /`, ordering, and conversion from counts.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts a non-negative count into the scalar type.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion used for reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

/// Floating point scalar.
pub trait Real: Scalar + Float + Sum {
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::nan)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let total = values.iter().fold(T::zero(), |acc, &v| acc + v);
    Some(total / T::from_count(values.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_counts_are_exact() {
        let third = Ratio::<i64>::from_count(1) / Ratio::from_count(3);
        assert_eq!(third * Ratio::from_count(3), Ratio::from_count(1));
        assert_eq!(mean(&[third, Ratio::from_count(1)]), Some(Ratio::new(2, 3)));
    }

    #[test]
    fn mean_of_empty_is_none() {
        assert_eq!(mean::<f64>(&[]), None);
    }
}
