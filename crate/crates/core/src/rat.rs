//! Exact rational scalars.
//!
//! `Rat` wraps an arbitrary precision rational kept in canonical form
//! (`gcd(num, den) = 1`, `den > 0`). Serialized as a `"p/q"` string.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: i64, den: i64) -> Rat {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Rat {
        Rat(BigRational::new(num, den))
    }

    pub fn int(n: i64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    /// `2^e` for any signed exponent.
    pub fn pow2(e: i64) -> Rat {
        let p = BigInt::one() << (e.unsigned_abs() as usize);
        if e >= 0 {
            Rat(BigRational::from_integer(p))
        } else {
            Rat(BigRational::new(BigInt::one(), p))
        }
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

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn square(&self) -> Rat {
        Rat(&self.0 * &self.0)
    }

    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    pub fn max(self, other: Rat) -> Rat {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Option<Rat> {
        BigRational::from_float(x).map(Rat)
    }

    /// Encoding size used by the catalog ordering: `bitlen(|p|) + bitlen(q)`,
    /// plus one for a negative sign. `bitlen(0)` is taken as 1.
    pub fn encoding_size(&self) -> u64 {
        fn bitlen(x: &BigInt) -> u64 {
            x.bits().max(1)
        }
        bitlen(self.numer()) + bitlen(self.denom()) + u64::from(self.is_negative())
    }

    /// Floor of the rational as a big integer.
    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Enclosure `[lo, hi]` of `sqrt(self)` with `hi - lo <= eps`.
    ///
    /// Exact when `self` is the square of a rational.
    pub fn sqrt_bounds(&self, eps: &Rat) -> (Rat, Rat) {
        assert!(!self.is_negative(), "sqrt of negative rational");
        assert!(eps.is_positive(), "eps must be positive");
        if self.is_zero() {
            return (Rat::zero(), Rat::zero());
        }
        if let Some(r) = self.exact_sqrt() {
            return (r.clone(), r);
        }
        // Integer square root at a scale fine enough for eps.
        let mut shift: u64 = 0;
        let target = eps.clone();
        loop {
            let scale = BigInt::one() << (shift as usize);
            let scaled = &self.0 * BigRational::from_integer(&scale * &scale);
            let fl = scaled.floor().to_integer();
            let s = fl.sqrt();
            let lo = Rat(BigRational::new(s.clone(), scale.clone()));
            let hi = Rat(BigRational::new(s + BigInt::one(), scale));
            if &hi - &lo <= target {
                return (lo, hi);
            }
            shift += 8;
        }
    }

    /// Rational square root when one exists.
    pub fn exact_sqrt(&self) -> Option<Rat> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rat(BigRational::new(n, d)))
        } else {
            None
        }
    }

    /// Nearby rational with denominator `2^bits` (round to nearest).
    pub fn round_dyadic(&self, bits: u32) -> Rat {
        let scale = BigInt::one() << (bits as usize);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        Rat(BigRational::new(scaled.round().to_integer(), scale))
    }

    pub fn gcd_den_lcm(values: &[Rat]) -> BigInt {
        values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::int(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Rat {
        Rat(r)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat> {
        let s = s.trim();
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.trim().parse().map_err(|_| bad())?;
                let q: BigInt = q.trim().parse().map_err(|_| bad())?;
                if q.is_zero() {
                    return Err(bad());
                }
                Ok(Rat(BigRational::new(p, q)))
            }
            None => {
                let p: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Rat(BigRational::from_integer(p)))
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(&self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0 $op rhs.0)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0 $op &rhs.0)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl<'a> std::iter::Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

/// Total order helper for callers that hold references.
pub fn cmp(a: &Rat, b: &Rat) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let r = Rat::new(6, -4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!("-6/4".parse::<Rat>().unwrap(), r);
        assert_eq!("7".parse::<Rat>().unwrap(), Rat::int(7));
        assert!("1/0".parse::<Rat>().is_err());
    }

    #[test]
    fn encoding_size_matches_definition() {
        assert_eq!(Rat::zero().encoding_size(), 2);
        assert_eq!(Rat::one().encoding_size(), 2);
        assert_eq!(Rat::new(1, 2).encoding_size(), 3);
        assert_eq!(Rat::new(-1, 2).encoding_size(), 4);
        assert_eq!(Rat::new(8, 7).encoding_size(), 7);
    }

    #[test]
    fn sqrt_bounds_enclose() {
        let two = Rat::int(2);
        let eps = Rat::new(1, 1_000_000_000);
        let (lo, hi) = two.sqrt_bounds(&eps);
        assert!(&hi - &lo <= eps);
        assert!(lo.square() <= two && two <= hi.square());
        let (lo, hi) = Rat::new(9, 4).sqrt_bounds(&eps);
        assert_eq!(lo, Rat::new(3, 2));
        assert_eq!(hi, Rat::new(3, 2));
    }

    #[test]
    fn pow2_signs() {
        assert_eq!(Rat::pow2(3), Rat::int(8));
        assert_eq!(Rat::pow2(-3), Rat::new(1, 8));
        assert_eq!(Rat::pow2(0), Rat::one());
    }
}
