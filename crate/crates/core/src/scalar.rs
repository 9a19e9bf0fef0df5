use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Coefficient field for forms.
///
/// Implemented for `f64` (numerical evaluation, irrational parameter points)
/// and [`BigRational`] (exact identity checks at rational points).
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("integer is representable")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync
{
}

/// `p/q` as a big rational.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
