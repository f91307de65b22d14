use num_bigint::BigUint;
use num_traits::One;

use crate::error::Error;
use crate::exactnum::{factorize, height_scalar, vp, BigRat};

/// `f(z) = z^d + c` over ℚ, with its bad primes precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnicriticalMap {
    d: u32,
    c: BigRat,
    bad_places: Vec<BigUint>,
}

impl UnicriticalMap {
    pub fn new(d: u32, c: BigRat) -> Result<Self, Error> {
        if d < 2 {
            return Err(Error::InvalidDegree(d));
        }
        let den = c.denom().magnitude();
        let bad_places = if den.is_one() {
            Vec::new()
        } else {
            factorize(den).primes().cloned().collect()
        };
        Ok(UnicriticalMap { d, c, bad_places })
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> &BigRat {
        &self.c
    }

    /// Primes `p` with `v_p(c) < 0`, ascending.
    pub fn bad_places(&self) -> &[BigUint] {
        &self.bad_places
    }

    pub fn is_bad(&self, p: &BigUint) -> bool {
        self.bad_places.binary_search(p).is_ok()
    }

    /// `h(c)`.
    pub fn h_c(&self) -> f64 {
        height_scalar(&self.c)
    }

    /// `v_p(c)`; finite because callers pass bad primes or `c ≠ 0`.
    pub fn vp_c(&self, p: &BigUint) -> Option<i64> {
        (!self.c.is_zero()).then(|| vp(&self.c, p))
    }

    pub fn divides_degree(&self, p: &BigUint) -> bool {
        (BigUint::from(self.d) % p) == BigUint::from(0u32)
    }

    pub fn apply(&self, z: &BigRat) -> BigRat {
        z.pow(self.d) + &self.c
    }

    pub fn iterate(&self, z: &BigRat, n: usize) -> BigRat {
        (0..n).fold(z.clone(), |w, _| self.apply(&w))
    }
}

/// Bad primes of `f`: exactly the primes dividing the denominator of `c`.
pub fn bad_places(f: &UnicriticalMap) -> Vec<BigUint> {
    f.bad_places().to_vec()
}
