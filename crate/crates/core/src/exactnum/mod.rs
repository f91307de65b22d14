//! Exact arithmetic over ℚ: rationals, factorization, places, valuations and
//! logarithmic values with symbolic finite-place parts.

mod factor;
mod lognum;
mod rational;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;

pub use factor::{factorize, factorize_u64, is_prime_big, is_prime_u64, FactorMap};
pub use lognum::LogNumber;
pub use rational::{ln_biguint, BigRat};

use crate::error::Error;

/// A place of ℚ. Over ℚ every local degree `r_v` is 1 and `N_p = log p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Archimedean,
    Finite(BigUint),
}

impl Place {
    /// A finite place; rejects composite `p`.
    pub fn prime(p: u64) -> Result<Place, Error> {
        if is_prime_u64(p) {
            Ok(Place::Finite(BigUint::from(p)))
        } else {
            Err(Error::NotPrime(p.to_string()))
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "∞"),
            Place::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// `v_p(x)`, with a dedicated sentinel for `v_p(0)`.
///
/// Only comparison is defined on the sentinel; use [`Valuation::finite`] or
/// [`Valuation::checked_add`] for arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn checked_add(self, other: Valuation) -> Result<Valuation, Error> {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Ok(Valuation::Finite(a + b)),
            _ => Err(Error::InfiniteValuation),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

pub fn valuation(x: &BigRat, p: &BigUint) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(rational::int_valuation(x.numer(), p) - rational::int_valuation(x.denom(), p))
}

/// Finite valuation of a nonzero rational.
pub(crate) fn vp(x: &BigRat, p: &BigUint) -> i64 {
    valuation(x, p).finite().expect("nonzero argument")
}

/// Primes dividing the numerator or denominator of `x` (empty for 0).
pub fn support_primes(x: &BigRat) -> BTreeSet<BigUint> {
    let mut out = BTreeSet::new();
    if x.is_zero() {
        return out;
    }
    for n in [x.numer().magnitude(), x.denom().magnitude()] {
        if !n.is_one() {
            out.extend(factorize(n).primes().cloned());
        }
    }
    out
}

/// `log |x|_v` for nonzero `x`.
pub fn log_abs_v(x: &BigRat, v: &Place) -> LogNumber {
    match v {
        Place::Archimedean => LogNumber::arch(x.ln_abs()),
        Place::Finite(p) => {
            let e = -vp(x, p);
            LogNumber::log_prime(p.clone(), BigRational::from_integer(BigInt::from(e)))
        }
    }
}

/// `λ_v(x) = log max{1, |x|_v}`; exact at finite places, never negative.
pub fn lambda_v(x: &BigRat, v: &Place) -> LogNumber {
    match v {
        Place::Archimedean => {
            let l = if x.is_zero() { 0.0 } else { x.ln_abs() };
            LogNumber::arch(l.max(0.0))
        }
        Place::Finite(p) => match valuation(x, p) {
            Valuation::Finite(e) if e < 0 => {
                LogNumber::log_prime(p.clone(), BigRational::from_integer(BigInt::from(-e)))
            }
            _ => LogNumber::zero(),
        },
    }
}

/// `Σ_v log|x|_v` with the finite part summed symbolically.
pub fn product_formula_sum(x: &BigRat) -> Result<LogNumber, Error> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("product formula"));
    }
    let mut total = log_abs_v(x, &Place::Archimedean);
    for p in support_primes(x) {
        total = &total + &log_abs_v(x, &Place::Finite(p));
    }
    Ok(total)
}

/// `Σ_v r_v log|x|_v`; zero up to archimedean floating error.
pub fn product_formula_residual(x: &BigRat) -> Result<f64, Error> {
    Ok(product_formula_sum(x)?.real_value())
}

/// Naive height `h(x) = log max(|numerator|, denominator)` of `(x : 1)`.
pub fn height_scalar(x: &BigRat) -> f64 {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    ln_biguint(if n > d { n } else { d })
}

/// Naive height as a place-by-place sum: `Σ_p −min{v_p(x),0}·log p + log max{|x|,1}`.
pub fn height_scalar_log(x: &BigRat) -> LogNumber {
    let mut h = lambda_v(x, &Place::Archimedean);
    for p in support_primes(x) {
        h = &h + &lambda_v(x, &Place::Finite(p));
    }
    h
}
