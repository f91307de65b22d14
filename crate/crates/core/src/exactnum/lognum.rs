use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use super::rational::{ln_biguint, BigRat};

/// A real number of the form `arch + Σ q_p·log p` with the finite-place part
/// kept symbolic, so sums of local contributions cancel exactly.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LogNumber {
    finite: BTreeMap<BigUint, BigRational>,
    arch: f64,
}

impl LogNumber {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `q·log p`.
    pub fn log_prime(p: BigUint, q: BigRational) -> Self {
        let mut finite = BTreeMap::new();
        if !q.is_zero() {
            finite.insert(p, q);
        }
        LogNumber { finite, arch: 0.0 }
    }

    pub fn arch(x: f64) -> Self {
        LogNumber {
            finite: BTreeMap::new(),
            arch: x,
        }
    }

    pub fn arch_term(&self) -> f64 {
        self.arch
    }

    pub fn finite_terms(&self) -> &BTreeMap<BigUint, BigRational> {
        &self.finite
    }

    /// Coefficient of `log p` (zero when absent).
    pub fn coefficient(&self, p: &BigUint) -> BigRational {
        self.finite.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn finite_is_zero(&self) -> bool {
        self.finite.is_empty()
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.finite.is_empty() && self.arch == 0.0
    }

    /// Finite part only, as a real.
    pub fn finite_value(&self) -> f64 {
        self.finite
            .iter()
            .map(|(p, q)| q.to_f64().unwrap_or(f64::NAN) * ln_biguint(p))
            .sum()
    }

    pub fn real_value(&self) -> f64 {
        self.arch + self.finite_value()
    }

    pub fn add_log_prime(&mut self, p: &BigUint, q: &BigRational) {
        if q.is_zero() {
            return;
        }
        let e = self.finite.entry(p.clone()).or_insert_with(BigRational::zero);
        *e += q;
        if e.is_zero() {
            self.finite.remove(p);
        }
    }

    pub fn add_arch(&mut self, x: f64) {
        self.arch += x;
    }

    /// Multiplies by a rational; exact on the finite part.
    pub fn scale(&self, q: &BigRat) -> LogNumber {
        if q.is_zero() {
            return LogNumber::zero();
        }
        let q = q.as_ratio();
        LogNumber {
            finite: self.finite.iter().map(|(p, c)| (p.clone(), c * q)).collect(),
            arch: self.arch * q.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Removes the archimedean term.
    pub fn finite_part(&self) -> LogNumber {
        LogNumber {
            finite: self.finite.clone(),
            arch: 0.0,
        }
    }
}

impl Add<&LogNumber> for &LogNumber {
    type Output = LogNumber;
    fn add(self, rhs: &LogNumber) -> LogNumber {
        let mut out = self.clone();
        for (p, q) in &rhs.finite {
            out.add_log_prime(p, q);
        }
        out.arch += rhs.arch;
        out
    }
}

impl Add for LogNumber {
    type Output = LogNumber;
    fn add(self, rhs: LogNumber) -> LogNumber {
        &self + &rhs
    }
}

impl Neg for &LogNumber {
    type Output = LogNumber;
    fn neg(self) -> LogNumber {
        LogNumber {
            finite: self.finite.iter().map(|(p, q)| (p.clone(), -q)).collect(),
            arch: -self.arch,
        }
    }
}

impl Sub<&LogNumber> for &LogNumber {
    type Output = LogNumber;
    fn sub(self, rhs: &LogNumber) -> LogNumber {
        self + &(-rhs)
    }
}

impl Sub for LogNumber {
    type Output = LogNumber;
    fn sub(self, rhs: LogNumber) -> LogNumber {
        &self - &rhs
    }
}

impl std::iter::Sum for LogNumber {
    fn sum<I: Iterator<Item = LogNumber>>(iter: I) -> Self {
        iter.fold(LogNumber::zero(), |a, b| &a + &b)
    }
}

impl fmt::Display for LogNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, q) in &self.finite {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})·log {}", BigRat::from(q.clone()), p)?;
        }
        if self.arch != 0.0 || first {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.arch)?;
        }
        Ok(())
    }
}

/// `{"finite": {"2": "3/2"}, "arch": x, "value": y}`; reals rounded to 12
/// significant digits.
impl Serialize for LogNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Finite<'a>(&'a BTreeMap<BigUint, BigRational>);
        impl Serialize for Finite<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (p, q) in self.0 {
                    m.serialize_entry(&p.to_string(), &BigRat::from(q.clone()).to_string())?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("finite", &Finite(&self.finite))?;
        m.serialize_entry("arch", &crate::report::sig12(self.arch))?;
        m.serialize_entry("value", &crate::report::sig12(self.real_value()))?;
        m.end()
    }
}
