//! The exact scalar abstraction the whole crate is generic over.
//!
//! Only exact fields implement [`Scalar`]: every algorithm here relies on
//! exact zero tests (polynomial gcd, residue extraction, rank), so floating
//! point types are deliberately not admitted.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Num, Signed};

/// An exact field element.
///
/// The `*_ref` methods exist so generic code can work on borrowed values
/// without cloning big-integer backed numbers for every operation.
pub trait Scalar: Clone + Debug + Display + FromStr + PartialEq + Num + Signed + Send + Sync + 'static {
    fn from_int(n: i64) -> Self;

    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn div_ref(&self, other: &Self) -> Self;

    /// `self += a * b`
    fn add_product(&mut self, a: &Self, b: &Self);

    /// The value `twice / 2`.
    fn from_half(twice: i64) -> Self {
        Self::from_int(twice).div_ref(&Self::from_int(2))
    }

    /// Parses `p` or `p/q` with optional surrounding whitespace.
    fn parse_rational(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: Self = n.trim().parse().ok()?;
                let d: Self = d.trim().parse().ok()?;
                if d.is_zero() {
                    None
                } else {
                    Some(n.div_ref(&d))
                }
            }
            None => s.parse().ok(),
        }
    }
}

macro_rules! impl_ratio_scalar {
    ($int:ty, $conv:expr) => {
        impl Scalar for Ratio<$int> {
            fn from_int(n: i64) -> Self {
                Ratio::from_integer($conv(n))
            }
            fn add_ref(&self, other: &Self) -> Self {
                self + other
            }
            fn sub_ref(&self, other: &Self) -> Self {
                self - other
            }
            fn mul_ref(&self, other: &Self) -> Self {
                self * other
            }
            fn div_ref(&self, other: &Self) -> Self {
                self / other
            }
            fn add_product(&mut self, a: &Self, b: &Self) {
                *self += a * b;
            }
        }
    };
}

impl_ratio_scalar!(BigInt, BigInt::from);
// Fixed-width rationals are exact until they overflow; they are useful for
// small windows and for checking that nothing depends on the big-integer type.
impl_ratio_scalar!(i64, |n: i64| n);
impl_ratio_scalar!(i128, |n: i64| n as i128);

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn half_values() {
        assert_eq!(BigRational::from_half(3).to_string(), "3/2");
        assert_eq!(BigRational::from_half(-4).to_string(), "-2");
        assert_eq!(Ratio::<i64>::from_half(1), Ratio::new(1, 2));
    }

    #[test]
    fn parse_forms() {
        let q = BigRational::parse_rational(" -6/4 ").unwrap();
        assert_eq!(q.to_string(), "-3/2");
        assert_eq!(BigRational::parse_rational("7").unwrap().to_string(), "7");
        assert!(BigRational::parse_rational("1/0").is_none());
        assert!(BigRational::parse_rational("x").is_none());
    }
}
