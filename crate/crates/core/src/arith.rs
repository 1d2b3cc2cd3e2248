//! Exact arithmetic: unbounded integers and canonical rationals.
//!
//! Every probability, matrix entry and ratio in this crate is a [`Rational`].
//! Values are always stored in lowest terms with a strictly positive
//! denominator, so structural equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use num_bigint::BigInt as BigInteger;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("lcm of an empty list")]
    EmptyLcm,
    #[error("lcm input must be positive, got {0}")]
    NonPositive(BigInt),
    #[error("invalid number {0:?}")]
    Parse(String),
}

/// Exact fraction in canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `num/den` reduced to lowest terms with a positive denominator.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ArithError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self, ArithError> {
        if rhs.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        Rational::one().checked_div(self)
    }

    /// Nearest `f64`; display only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded to `digits` significant digits, computed
    /// exactly (no floating point involved).
    pub fn to_decimal(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_zero() {
            return format!("0.{}", "0".repeat(digits - 1));
        }
        let neg = self.is_negative();
        let num = self.numer().abs();
        let den = self.denom().clone();
        let ten = BigInt::from(10u32);

        // exponent e with 10^e <= |x| < 10^(e+1)
        let mut e: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
        let cmp_pow = |e: i64| -> Ordering {
            // compare num/den with 10^e
            if e >= 0 {
                num.cmp(&(&den * ten.pow(e as u32)))
            } else {
                (&num * ten.pow((-e) as u32)).cmp(&den)
            }
        };
        while cmp_pow(e) == Ordering::Less {
            e -= 1;
        }
        while cmp_pow(e + 1) != Ordering::Less {
            e += 1;
        }

        // scaled = round(|x| * 10^(digits-1-e))
        let shift = digits as i64 - 1 - e;
        let (sn, sd) = if shift >= 0 {
            (&num * ten.pow(shift as u32), den.clone())
        } else {
            (num.clone(), &den * ten.pow((-shift) as u32))
        };
        let (q, r) = sn.div_rem(&sd);
        let mut scaled = if &r * 2 >= sd { q + 1 } else { q };
        let mut shift = shift;
        if scaled.to_string().len() > digits {
            // rounding carried into a new leading digit
            scaled /= &ten;
            shift -= 1;
        }
        let s = scaled.to_string();
        let body = if shift <= 0 {
            format!("{}{}", s, "0".repeat((-shift) as usize))
        } else if (shift as usize) < s.len() {
            let (int, frac) = s.split_at(s.len() - shift as usize);
            format!("{int}.{frac}")
        } else {
            format!("0.{}{}", "0".repeat(shift as usize - s.len()), s)
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Rational::from_integer(BigInt::from_biguint(Sign::Plus, n))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($tr::$method(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    /// Accepts `p/q` or a bare integer `p`. Surrounding whitespace is not
    /// allowed; callers trim.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ArithError::Parse(s.to_string());
        let parse_int = |t: &str| -> Result<BigInt, ArithError> {
            let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            t.parse::<BigInt>().map_err(|_| err())
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::new(parse_int(n)?, parse_int(d)?),
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

/// Least common multiple of a non-empty list of positive integers.
pub fn lcm_all<'a, I>(values: I) -> Result<BigInt, ArithError>
where
    I: IntoIterator<Item = &'a BigInt>,
{
    let mut acc: Option<BigInt> = None;
    for v in values {
        if !v.is_positive() {
            return Err(ArithError::NonPositive(v.clone()));
        }
        acc = Some(match acc {
            None => v.clone(),
            Some(a) => a.lcm(v),
        });
    }
    acc.ok_or(ArithError::EmptyLcm)
}
