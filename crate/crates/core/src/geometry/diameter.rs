use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

use super::valmatrix::reject_duplicates;
use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::{support_primes, vp, BigRat, LogNumber, Place};

fn check_points(points: &[BigRat]) -> Result<(), Error> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            have: points.len(),
        });
    }
    reject_duplicates(points)
}

/// `log d_v(T) = (1/(n(n−1)))·Σ_{i≠j} log|z_i − z_j|_v`.
pub fn transfinite_diameter(points: &[BigRat], v: &Place) -> Result<LogNumber, Error> {
    check_points(points)?;
    let n = points.len() as i64;
    let pairs = n * (n - 1) / 2;
    match v {
        Place::Archimedean => {
            let mut s = 0.0;
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    s += (a - b).ln_abs();
                }
            }
            Ok(LogNumber::arch(s / pairs as f64))
        }
        Place::Finite(p) => {
            let mut s: i64 = 0;
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    s -= vp(&(a - b), p);
                }
            }
            Ok(LogNumber::log_prime(
                p.clone(),
                BigRational::new(BigInt::from(s), BigInt::from(pairs)),
            ))
        }
    }
}

/// `Σ_v log d_v(T)` over all places; zero by the product formula.
pub fn global_diameter_residual(points: &[BigRat]) -> Result<f64, Error> {
    check_points(points)?;
    let mut primes = BTreeSet::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            primes.extend(support_primes(&(a - b)));
        }
    }
    let mut total = transfinite_diameter(points, &Place::Archimedean)?;
    for p in primes {
        total = &total + &transfinite_diameter(points, &Place::Finite(p))?;
    }
    Ok(total.real_value())
}

/// Weights `Σ_{p∈S} λ_p(c)` and `Σ_{p∈Σ} λ_p(c)` together with their ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub slice_weight: LogNumber,
    pub ambient_weight: LogNumber,
    pub fraction: f64,
}

/// Fraction of the bad-place weight carried by `s`. The ambient set defaults
/// to the bad primes not dividing `d`.
pub fn slice_fraction(f: &UnicriticalMap, s: &[BigUint], ambient: Option<&[BigUint]>) -> Result<Slice, Error> {
    let ambient: Vec<BigUint> = match ambient {
        Some(a) => a.to_vec(),
        None => f
            .bad_places()
            .iter()
            .filter(|p| !f.divides_degree(p))
            .cloned()
            .collect(),
    };
    if let Some(p) = s.iter().find(|p| !ambient.contains(p)) {
        return Err(Error::Precondition(format!("{p} is not in the ambient set of places")));
    }
    let weight = |set: &[BigUint]| -> LogNumber {
        set.iter()
            .filter(|p| f.is_bad(p))
            .map(|p| {
                let e = -f.vp_c(p).expect("bad prime");
                LogNumber::log_prime(p.clone(), BigRational::from_integer(BigInt::from(e)))
            })
            .sum()
    };
    let ambient_weight = weight(&ambient);
    if ambient_weight.finite_is_zero() {
        return Err(Error::UndefinedSlice);
    }
    let slice_weight = weight(s);
    let fraction = slice_weight.real_value() / ambient_weight.real_value();
    Ok(Slice {
        slice_weight,
        ambient_weight,
        fraction,
    })
}
