use num_bigint::BigUint;
use num_traits::Zero;

use super::map::UnicriticalMap;
use super::portrait::Portrait;
use crate::exactnum::{factorize, height_scalar, vp, BigRat};

/// A prime dividing two distinct periodic points of the same period.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimalityViolation {
    pub prime: BigUint,
    pub first: BigRat,
    pub second: BigRat,
}

/// Pairs of distinct nonzero periodic points of equal period that share a
/// prime in their numerators. `0` is excluded: `v_p(0) = ∞` makes the
/// hypothesis degenerate.
pub fn newton_coprimality_violations(_f: &UnicriticalMap, portrait: &Portrait) -> Vec<CoprimalityViolation> {
    let periodic: Vec<_> = portrait.periodic_points().filter(|p| !p.z.is_zero()).collect();
    let mut out = Vec::new();
    for a in &periodic {
        let num = a.z.numer().magnitude();
        if num.is_zero() || *num == BigUint::from(1u32) {
            continue;
        }
        for p in factorize(num).primes() {
            for b in &periodic {
                if a.z == b.z || a.period != b.period {
                    continue;
                }
                if vp(&b.z, p) != 0 {
                    out.push(CoprimalityViolation {
                        prime: p.clone(),
                        first: a.z.clone(),
                        second: b.z.clone(),
                    });
                }
            }
        }
    }
    out
}

/// `h(p_i − p_j) − (h(c)/d + log 4)` over all pairs; the maximum is
/// returned together with the pair attaining it.
pub fn lemma82_max_margin(f: &UnicriticalMap, portrait: &Portrait) -> Option<(f64, BigRat, BigRat)> {
    let bound = f.h_c() / f.degree() as f64 + 4f64.ln();
    let pts = portrait.values();
    let mut best: Option<(f64, BigRat, BigRat)> = None;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            let m = height_scalar(&(a - b)) - bound;
            if best.as_ref().is_none_or(|(x, _, _)| m > *x) {
                best = Some((m, a.clone(), b.clone()));
            }
        }
    }
    best
}
