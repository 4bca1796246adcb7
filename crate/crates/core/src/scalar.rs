//! Scalar abstraction for metric arithmetic.
//!
//! Prices, distances and demands are integers throughout. Ratios derived
//! from them (the performance criteria and their aggregates) are computed in
//! any [`Scalar`]: exact rationals by default, `f64` for quick looks.

use num_traits::{FromPrimitive, Num, ToPrimitive};
use std::fmt::Debug;

pub trait Scalar:
    Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer representable in scalar")
    }

    /// `num / den`; `den` must be non-zero.
    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let third = Rational64::ratio(1, 3);
        assert_eq!(third * Rational64::from_int(3), Rational64::from_int(1));
        assert!((f64::ratio(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }
}
