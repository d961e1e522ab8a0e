use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type used for probabilities and information values: `f32` or `f64`.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn from_count(count: u64) -> Self {
        Self::from_u64(count).expect("count representable as float")
    }

    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("finite value")
    }

    /// Tolerance applied when checking that a set of probabilities sums to one.
    fn normalization_tolerance(terms: usize) -> Self {
        let floor = Self::from_f64_lossy(1e-12);
        let scaled = Self::epsilon() * Self::from_count(8 * terms.max(1) as u64);
        floor.max(scaled)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sums terms in ascending order, so the result depends only on the
/// multiset of terms and not on the order they were produced in.
pub(crate) fn ordered_sum<T: Scalar>(mut terms: Vec<T>) -> T {
    terms.sort_by(|a, b| a.partial_cmp(b).expect("no NaN terms"));
    terms.into_iter().fold(T::zero(), |acc, t| acc + t)
}
