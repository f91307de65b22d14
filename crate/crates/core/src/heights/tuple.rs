use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::{factorize, ln_biguint, support_primes, vp, BigRat, LogNumber};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TupleKind {
    Hexagon,
    #[serde(rename = "quad")]
    Quadrilateral,
    #[serde(rename = "triple")]
    AbcTriple,
    Raw,
}

impl TupleKind {
    pub fn name(self) -> &'static str {
        match self {
            TupleKind::Hexagon => "hexagon",
            TupleKind::Quadrilateral => "quad",
            TupleKind::AbcTriple => "triple",
            TupleKind::Raw => "raw",
        }
    }
}

/// A point of projective space with nonzero rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjTuple {
    kind: TupleKind,
    coords: Vec<BigRat>,
}

impl ProjTuple {
    /// All kinds except [`TupleKind::Raw`] must sum to zero.
    pub fn new(kind: TupleKind, coords: Vec<BigRat>) -> Result<ProjTuple, Error> {
        if coords.len() < 3 {
            return Err(Error::TooFewPoints {
                need: 3,
                have: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|x| x.is_zero()) {
            return Err(Error::ZeroCoordinate(i));
        }
        let t = ProjTuple { kind, coords };
        if kind != TupleKind::Raw && !t.sums_to_zero() {
            return Err(Error::NotSumZero);
        }
        Ok(t)
    }

    pub fn raw(coords: Vec<BigRat>) -> Result<ProjTuple, Error> {
        ProjTuple::new(TupleKind::Raw, coords)
    }

    pub fn kind(&self) -> TupleKind {
        self.kind
    }

    pub fn coords(&self) -> &[BigRat] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn sums_to_zero(&self) -> bool {
        self.coords.iter().fold(BigRat::zero(), |acc, x| acc + x).is_zero()
    }

    /// Coordinatewise product with a nonzero scalar.
    pub fn scaled(&self, s: &BigRat) -> Result<ProjTuple, Error> {
        if s.is_zero() {
            return Err(Error::ZeroArgument("scale factor"));
        }
        Ok(ProjTuple {
            kind: self.kind,
            coords: self.coords.iter().map(|x| x * s).collect(),
        })
    }

    /// The coprime integer representative, unique up to sign.
    pub fn primitive(&self) -> Vec<BigInt> {
        let l = self.coords.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = self.coords.iter().map(|x| x.numer() * (&l / x.denom())).collect();
        let g = ints.iter().fold(BigInt::from(0), |acc, x| acc.gcd(x));
        ints.into_iter().map(|x| x / &g).collect()
    }

    /// Primes at which the coordinates do not all have the same valuation.
    pub fn support(&self) -> BTreeSet<BigUint> {
        let mut out = BTreeSet::new();
        for n in self.primitive() {
            let n = n.magnitude().clone();
            if !n.is_one() {
                out.extend(factorize(&n).primes().cloned());
            }
        }
        out
    }

    /// Every prime dividing a numerator or denominator of a coordinate.
    pub(crate) fn all_primes(&self) -> BTreeSet<BigUint> {
        self.coords.iter().flat_map(support_primes).collect()
    }

    /// `log max_i |x_i|_∞`.
    pub(crate) fn arch_log_max(&self) -> f64 {
        self.coords.iter().map(|x| x.ln_abs()).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `min_i v_p(x_i)`.
    pub(crate) fn min_valuation(&self, p: &BigUint) -> i64 {
        self.coords.iter().map(|x| vp(x, p)).min().expect("nonempty")
    }

    pub(crate) fn equal_valuations(&self, p: &BigUint) -> bool {
        let v0 = vp(&self.coords[0], p);
        self.coords[1..].iter().all(|x| vp(x, p) == v0)
    }
}

/// `h(P)`, the logarithm of the largest entry of the primitive representative.
pub fn proj_height(t: &ProjTuple) -> f64 {
    let m = t
        .primitive()
        .into_iter()
        .map(|x| x.magnitude().clone())
        .max()
        .expect("nonempty");
    ln_biguint(&m)
}

/// `h(P) = Σ_p −min_i v_p(x_i)·log p + log max_i |x_i|` with exact finite part.
pub fn proj_height_log(t: &ProjTuple) -> LogNumber {
    let mut h = LogNumber::arch(t.arch_log_max());
    for p in t.all_primes() {
        let e = -t.min_valuation(&p);
        h.add_log_prime(&p, &BigRational::from_integer(BigInt::from(e)));
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct Radical {
    pub primes: BTreeSet<BigUint>,
    pub rad: f64,
}

impl Radical {
    /// `Σ_{p∈I(P)} log p` with exact coefficients.
    pub fn as_log(&self) -> LogNumber {
        let mut r = LogNumber::zero();
        for p in &self.primes {
            r.add_log_prime(p, &BigRational::one());
        }
        r
    }
}

/// `I(P)` and `rad(P) = Σ_{p∈I(P)} log p`.
pub fn support_and_rad(t: &ProjTuple) -> Radical {
    let primes = t.support();
    let rad = primes.iter().map(ln_biguint).sum();
    Radical { primes, rad }
}

pub const STRESS_NOTE: &str = "stress value only: the conjecture's exceptional set is unknown and not excluded";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AbcdMargin {
    #[serde(serialize_with = "crate::report::serde_real::one")]
    pub value: f64,
    pub note: &'static str,
}

/// `h(P) − (1+ε)·rad(P) − C`; positive values stress the abcd inequality.
pub fn abcd_margin(t: &ProjTuple, eps: f64, c: f64) -> Result<AbcdMargin, Error> {
    if !t.sums_to_zero() {
        return Err(Error::NotSumZero);
    }
    let value = proj_height(t) - (1.0 + eps) * support_and_rad(t).rad - c;
    Ok(AbcdMargin {
        value,
        note: STRESS_NOTE,
    })
}

/// `h_+(P) = Σ_v log max{1, |x_i|_v}` and `h_−(P) = h_+(P) − h(P) ≥ 0`.
pub fn h_plus_minus(t: &ProjTuple) -> (LogNumber, LogNumber) {
    let mut plus = LogNumber::arch(t.arch_log_max().max(0.0));
    for p in t.all_primes() {
        let e = -t.min_valuation(&p).min(0);
        plus.add_log_prime(&p, &BigRational::from_integer(BigInt::from(e)));
    }
    let minus = &plus - &proj_height_log(t);
    (plus, minus)
}

/// `Σ_v (log max_i|x_i|_v − rad_v(P))` over each class of places.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaceBreakdown {
    /// Bad primes not dividing `d` where all coordinates have equal valuation.
    pub s11: LogNumber,
    /// The other bad primes not dividing `d`.
    pub s12: LogNumber,
    /// Good primes not dividing `d`.
    pub s2: LogNumber,
    /// The archimedean place and the primes dividing `d`.
    pub arch_and_d: LogNumber,
}

impl PlaceBreakdown {
    pub fn total(&self) -> LogNumber {
        [&self.s11, &self.s12, &self.s2, &self.arch_and_d]
            .into_iter()
            .fold(LogNumber::zero(), |acc, x| &acc + x)
    }
}

pub fn per_place_breakdown(t: &ProjTuple, f: &UnicriticalMap) -> PlaceBreakdown {
    let support = t.support();
    let mut primes = t.all_primes();
    primes.extend(f.bad_places().iter().cloned());
    primes.extend(factorize(&BigUint::from(f.degree())).primes().cloned());
    let mut out = PlaceBreakdown {
        s11: LogNumber::zero(),
        s12: LogNumber::zero(),
        s2: LogNumber::zero(),
        arch_and_d: LogNumber::arch(t.arch_log_max()),
    };
    for p in primes {
        let mut e = -t.min_valuation(&p);
        if support.contains(&p) {
            e -= 1;
        }
        let term = BigRational::from_integer(BigInt::from(e));
        let class = if f.divides_degree(&p) {
            &mut out.arch_and_d
        } else if !f.is_bad(&p) {
            &mut out.s2
        } else if t.equal_valuations(&p) {
            &mut out.s11
        } else {
            &mut out.s12
        };
        class.add_log_prime(&p, &term);
    }
    out
}

impl Serialize for ProjTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.coords.iter())
    }
}
