use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An element of ℚ in lowest terms with a positive denominator.
///
/// Serializes to the canonical string `"num/den"`, with `/den` omitted when
/// the denominator is 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BigRat(BigRational);

impl BigRat {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self, Error> {
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(BigRat(BigRational::new(numer, denom)))
    }

    pub fn from_i64(n: i64) -> Self {
        BigRat(BigRational::from_integer(BigInt::from(n)))
    }

    /// `n/d` reduced; panics on `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        BigRat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_integer(n: BigInt) -> Self {
        BigRat(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        BigRat(BigRational::zero())
    }

    pub fn one() -> Self {
        BigRat(BigRational::one())
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
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

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        BigRat(self.0.abs())
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(BigRat(self.0.recip()))
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        BigRat(num_traits::pow(self.0.clone(), e as usize))
    }

    /// Total bit length of numerator and denominator; a size measure for
    /// bounding exact orbit iteration.
    pub fn bits(&self) -> u64 {
        self.numer().bits() + self.denom().bits()
    }

    /// `ln |x|`; accurate for numerators and denominators of any size.
    pub fn ln_abs(&self) -> f64 {
        ln_biguint(self.numer().magnitude()) - ln_biguint(self.denom().magnitude())
    }

    pub fn to_f64(&self) -> f64 {
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                if self.is_zero() {
                    0.0
                } else {
                    let s = if self.is_negative() { -1.0 } else { 1.0 };
                    s * self.ln_abs().exp()
                }
            }
        }
    }

    /// Compares `|self|` with `|other|` exactly.
    pub fn cmp_abs(&self, other: &BigRat) -> Ordering {
        let l = self.numer().magnitude() * other.denom().magnitude();
        let r = other.numer().magnitude() * self.denom().magnitude();
        l.cmp(&r)
    }
}

/// `ln n` for a positive big integer, 0 for 0.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits f64").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit prefix");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

impl fmt::Display for BigRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for BigRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for BigRat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || Error::Parse(format!("malformed rational {s:?}"));
        match s.split_once('/') {
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(BigRat::from_integer(n))
            }
            Some((a, b)) => {
                let n: BigInt = a.trim().parse().map_err(|_| bad())?;
                let d: BigInt = b.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                BigRat::new(n, d)
            }
        }
    }
}

impl Serialize for BigRat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BigRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<BigRational> for BigRat {
    fn from(r: BigRational) -> Self {
        BigRat(r)
    }
}

impl From<i64> for BigRat {
    fn from(n: i64) -> Self {
        BigRat::from_i64(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&BigRat> for &BigRat {
            type Output = BigRat;
            fn $m(self, rhs: &BigRat) -> BigRat {
                BigRat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<BigRat> for BigRat {
            type Output = BigRat;
            fn $m(self, rhs: BigRat) -> BigRat {
                BigRat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&BigRat> for BigRat {
            type Output = BigRat;
            fn $m(self, rhs: &BigRat) -> BigRat {
                BigRat(self.0.$m(&rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for BigRat {
    type Output = BigRat;
    fn neg(self) -> BigRat {
        BigRat(-self.0)
    }
}

impl Neg for &BigRat {
    type Output = BigRat;
    fn neg(self) -> BigRat {
        BigRat(-&self.0)
    }
}

/// Exponent of `p` in `n`, for nonzero `n`.
pub(crate) fn int_valuation(n: &BigInt, p: &BigUint) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from_biguint(Sign::Plus, p.clone());
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}
