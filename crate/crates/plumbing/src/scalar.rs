use num_integer::Integer as IntegerOps;
use num_rational::Ratio;
use num_traits::{Num, Signed};
use std::fmt::Debug;

/// Exact field arithmetic. Implemented for `Ratio<T>` over any signed integer
/// type, so rounding never enters a definiteness or integrality decision.
pub trait ExactField: Clone + Debug + PartialEq + PartialOrd + Num + Signed {
    fn from_i64(v: i64) -> Self;
    /// `Some(n)` when the value is an integer that fits in `i64`.
    fn to_i64_exact(&self) -> Option<i64>;
}

impl<T> ExactField for Ratio<T>
where
    T: Clone + Debug + IntegerOps + Signed + From<i32> + TryInto<i64> + TryFrom<i64>,
{
    fn from_i64(v: i64) -> Self {
        match T::try_from(v) {
            Ok(t) => Ratio::from_integer(t),
            Err(_) => panic!("{v} does not fit the scalar type"),
        }
    }

    fn to_i64_exact(&self) -> Option<i64> {
        if !self.is_integer() {
            return None;
        }
        self.to_integer().try_into().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, SmallRational};

    #[test]
    fn both_widths_round_trip() {
        assert_eq!(Rational::from_i64(-7).to_i64_exact(), Some(-7));
        assert_eq!(SmallRational::from_i64(12).to_i64_exact(), Some(12));
        let half = SmallRational::new(1, 2);
        assert_eq!(half.to_i64_exact(), None);
    }
}
