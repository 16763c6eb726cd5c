//! Exact non-negative rational weights and their extension with ±∞.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WeightError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("negative weight `{0}`")]
    Negative(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// A non-negative rational number in lowest terms.
///
/// `BigRational` keeps its value reduced with a positive denominator, so
/// derived equality and hashing are structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(BigRational);

impl Weight {
    pub fn new(value: BigRational) -> Result<Self, WeightError> {
        if value.is_negative() {
            return Err(WeightError::Negative(value.to_string()));
        }
        Ok(Weight(value))
    }

    pub fn zero() -> Self {
        Weight(BigRational::zero())
    }

    pub fn from_integer(n: u64) -> Self {
        Weight(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`; panics on a zero denominator.
    pub fn ratio(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        Weight(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(&self.0 + &other.0)
    }

    /// Arithmetic mean of two weights.
    pub fn midpoint(&self, other: &Weight) -> Weight {
        Weight((&self.0 + &other.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn plus_one(&self) -> Weight {
        Weight(&self.0 + BigRational::one())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

/// Accepts `N`, `N/D` and `N.M`; decimals are converted exactly.
impl FromStr for Weight {
    type Err = WeightError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let malformed = || WeightError::Malformed(text.to_string());
        let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        let (negative, body) = match text.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let value = if let Some((num, den)) = body.split_once('/') {
            if !digits(num) || !digits(den) {
                return Err(malformed());
            }
            let den: BigInt = den.parse().map_err(|_| malformed())?;
            if den.is_zero() {
                return Err(WeightError::ZeroDenominator(text.to_string()));
            }
            BigRational::new(num.parse().map_err(|_| malformed())?, den)
        } else if let Some((int, frac)) = body.split_once('.') {
            if !digits(int) || !digits(frac) {
                return Err(malformed());
            }
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let int: BigInt = int.parse().map_err(|_| malformed())?;
            let frac: BigInt = frac.parse().map_err(|_| malformed())?;
            BigRational::new(int * &scale + frac, scale)
        } else {
            if !digits(body) {
                return Err(malformed());
            }
            BigRational::from_integer(body.parse().map_err(|_| malformed())?)
        };
        if negative && !value.is_zero() {
            return Err(WeightError::Negative(text.to_string()));
        }
        Ok(Weight(value))
    }
}

/// A weight extended with −∞ and +∞: the codomain of the image-set bounds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtendedBound {
    NegInf,
    Finite(Weight),
    PosInf,
}

impl ExtendedBound {
    pub fn finite(&self) -> Option<&Weight> {
        match self {
            ExtendedBound::Finite(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedBound::Finite(_))
    }

    fn rank(&self) -> u8 {
        match self {
            ExtendedBound::NegInf => 0,
            ExtendedBound::Finite(_) => 1,
            ExtendedBound::PosInf => 2,
        }
    }
}

impl From<Weight> for ExtendedBound {
    fn from(w: Weight) -> Self {
        ExtendedBound::Finite(w)
    }
}

impl Ord for ExtendedBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedBound::Finite(a), ExtendedBound::Finite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ExtendedBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtendedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedBound::NegInf => f.write_str("-inf"),
            ExtendedBound::Finite(w) => w.fmt(f),
            ExtendedBound::PosInf => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_three_forms() {
        assert_eq!("3".parse::<Weight>().unwrap(), Weight::from_integer(3));
        assert_eq!("6/4".parse::<Weight>().unwrap(), Weight::ratio(3, 2));
        assert_eq!("1.25".parse::<Weight>().unwrap(), Weight::ratio(5, 4));
        assert_eq!("0.0".parse::<Weight>().unwrap(), Weight::zero());
    }

    #[test]
    fn rejects_negative_and_malformed() {
        assert!(matches!(
            "-1".parse::<Weight>(),
            Err(WeightError::Negative(_))
        ));
        assert!(matches!(
            "-1/2".parse::<Weight>(),
            Err(WeightError::Negative(_))
        ));
        assert!(matches!(
            "1/0".parse::<Weight>(),
            Err(WeightError::ZeroDenominator(_))
        ));
        for bad in ["", "a", "1/", "/2", "1.", ".5", "1e3", "+1", "1 / 2"] {
            assert!(
                matches!(bad.parse::<Weight>(), Err(WeightError::Malformed(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn display_is_reduced() {
        assert_eq!(Weight::ratio(4, 2).to_string(), "2");
        assert_eq!(Weight::ratio(17, 3).to_string(), "17/3");
        assert_eq!("0.50".parse::<Weight>().unwrap().to_string(), "1/2");
    }

    #[test]
    fn extended_order() {
        let lo = ExtendedBound::NegInf;
        let hi = ExtendedBound::PosInf;
        let zero = ExtendedBound::Finite(Weight::zero());
        let big = ExtendedBound::Finite(Weight::from_integer(1_000_000));
        assert!(lo < zero && zero < big && big < hi);
        assert_eq!(lo.to_string(), "-inf");
        assert_eq!(hi.to_string(), "inf");
    }

    #[test]
    fn midpoint_is_exact() {
        assert_eq!(
            Weight::from_integer(2).midpoint(&Weight::from_integer(3)),
            Weight::ratio(5, 2)
        );
    }
}
