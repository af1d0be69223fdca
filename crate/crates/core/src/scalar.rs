//! The scalar type used for edge weights and objective values.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// An exact, totally ordered weight type.
///
/// Every solver in this crate is generic over `Weight`. The bound asks for
/// exact ring arithmetic plus division (the blossom dual updates halve
/// slacks, which is exact for the integer weights the algorithm feeds it and
/// for rationals). Floating-point types are intentionally not covered since
/// they are not `Ord`.
pub trait Weight:
    Num + Signed + Ord + Copy + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Halves the value. Callers only halve quantities that are known to be even
    /// when the weight type is integral.
    fn half(self) -> Self {
        self / (Self::one() + Self::one())
    }

    fn double(self) -> Self {
        self + self
    }

    /// Lossy conversion used for reporting ratios.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count fits the weight type")
    }
}

impl<T> Weight for T where
    T: Num
        + Signed
        + Ord
        + Copy
        + Debug
        + Display
        + FromStr
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Sums an iterator of weights.
pub fn sum<W: Weight>(it: impl IntoIterator<Item = W>) -> W {
    it.into_iter().fold(W::zero(), |acc, w| acc + w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn halving_is_exact_for_rationals() {
        let x = Ratio::new(3i64, 1);
        assert_eq!(x.half(), Ratio::new(3, 2));
        assert_eq!(10i64.half(), 5);
        assert_eq!(7i32.double(), 14);
    }

    #[test]
    fn sum_of_empty_is_zero() {
        assert_eq!(sum::<i64>(vec![]), 0);
        assert_eq!(sum(vec![1i64, 2, 3]), 6);
    }
}
