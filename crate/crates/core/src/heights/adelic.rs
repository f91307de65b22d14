use serde::Serialize;

use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::{ln_biguint, support_primes, vp, BigRat};

/// Fractions of `h(c)` bounding the good-prime and archimedean sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdelicThresholds {
    pub good_prime: f64,
    pub arch: f64,
}

impl Default for AdelicThresholds {
    fn default() -> Self {
        AdelicThresholds {
            good_prime: 1.0 / 600.0,
            arch: 1.0 / 800.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdelicGoodnessReport {
    /// `Σ_{p good} v_p(a)·log p`.
    #[serde(serialize_with = "crate::report::serde_real::one")]
    pub good_prime_sum: f64,
    /// `Σ_{v ∈ {∞} ∪ {p | d}} log|a|_v`.
    #[serde(serialize_with = "crate::report::serde_real::one")]
    pub arch_sum: f64,
    pub passes: bool,
    /// Slack in each inequality; both nonnegative exactly when `passes`.
    #[serde(serialize_with = "crate::report::serde_real::many")]
    pub margins: [f64; 2],
}

pub fn is_adelically_good(
    a: &BigRat,
    f: &UnicriticalMap,
    thresholds: &AdelicThresholds,
) -> Result<AdelicGoodnessReport, Error> {
    if a.is_zero() {
        return Err(Error::ZeroArgument("adelic goodness"));
    }
    let h = f.h_c();
    if h == 0.0 {
        return Err(Error::HeightZero);
    }
    let mut good_prime_sum = 0.0;
    let mut arch_sum = a.ln_abs();
    for p in support_primes(a) {
        let term = vp(a, &p) as f64 * ln_biguint(&p);
        if !f.is_bad(&p) {
            good_prime_sum += term;
        }
        if f.divides_degree(&p) {
            arch_sum -= term;
        }
    }
    let margins = [
        thresholds.good_prime * h - good_prime_sum,
        arch_sum + thresholds.arch * h,
    ];
    Ok(AdelicGoodnessReport {
        good_prime_sum,
        arch_sum,
        passes: margins[0] >= 0.0 && margins[1] >= 0.0,
        margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_at_minus_29_16() {
        // S_{2,2} = {∞, 2}: log|1/2|_∞ + log|1/2|_2 = 0, so both sums vanish.
        let f = UnicriticalMap::new(2, BigRat::ratio(-29, 16)).unwrap();
        let r = is_adelically_good(&BigRat::ratio(1, 2), &f, &AdelicThresholds::default()).unwrap();
        assert_eq!(r.good_prime_sum, 0.0);
        assert!(r.arch_sum.abs() < 1e-15);
        assert!(r.passes);
    }

    #[test]
    fn failures_and_errors() {
        let f = UnicriticalMap::new(2, BigRat::ratio(-29, 16)).unwrap();
        let t = AdelicThresholds::default();
        // A good prime in the numerator.
        assert!(!is_adelically_good(&BigRat::from_i64(3), &f, &t).unwrap().passes);
        // Small archimedean size with no compensating place above 2.
        assert!(!is_adelically_good(&BigRat::ratio(1, 3), &f, &t).unwrap().passes);
        assert!(is_adelically_good(&BigRat::from_i64(4), &f, &t).unwrap().passes);
        let g = UnicriticalMap::new(2, BigRat::from_i64(-1)).unwrap();
        assert!(matches!(
            is_adelically_good(&BigRat::one(), &g, &t),
            Err(Error::HeightZero)
        ));
    }
}
