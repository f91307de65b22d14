//! Integer factorization: trial division by the primes below 10⁶, then
//! Brent's variant of Pollard rho with Miller–Rabin primality checks.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

const TRIAL_LIMIT: u32 = 1_000_000;

/// Prime factorization as an ordered map prime → exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactorMap {
    factors: BTreeMap<BigUint, u32>,
}

impl FactorMap {
    pub fn iter(&self) -> impl Iterator<Item = (&BigUint, u32)> {
        self.factors.iter().map(|(p, e)| (p, *e))
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.keys()
    }

    pub fn exponent(&self, p: &BigUint) -> u32 {
        self.factors.get(p).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Product of `p^e`.
    pub fn value(&self) -> BigUint {
        self.factors.iter().fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e))
    }

    fn insert(&mut self, p: BigUint, e: u32) {
        *self.factors.entry(p).or_insert(0) += e;
    }
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i as u32))
            .collect()
    })
}

/// Factors `n ≥ 1`; `1` yields the empty map. Panics on `n = 0`.
pub fn factorize(n: &BigUint) -> FactorMap {
    assert!(!n.is_zero(), "factorize(0) is undefined");
    let mut out = FactorMap::default();
    if let Some(small) = n.to_u64() {
        for (p, e) in factorize_u64(small) {
            out.insert(BigUint::from(p), e);
        }
        return out;
    }
    let mut rest = n.clone();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.insert(pb, e);
        }
    }
    if rest.is_one() {
        return out;
    }
    if let Some(small) = rest.to_u64() {
        for (p, e) in factorize_u64(small) {
            out.insert(BigUint::from(p), e);
        }
        return out;
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(small) = m.to_u64() {
            for (p, e) in factorize_u64(small) {
                out.insert(BigUint::from(p), e);
            }
        } else if is_prime_big(&m) {
            out.insert(m, 1);
        } else {
            let f = rho_big(&m);
            let g = &m / &f;
            stack.push(f);
            stack.push(g);
        }
    }
    out
}

pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: BTreeMap<u64, u32> = BTreeMap::new();
    for &p in small_primes() {
        let p = p as u64;
        if p * p > n {
            break;
        }
        while n.is_multiple_of(p) {
            n /= p;
            *out.entry(p).or_insert(0) += 1;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_insert(0) += 1;
        } else {
            let f = rho_u64(m);
            stack.push(f);
            stack.push(m / f);
        }
    }
    out.into_iter().collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1usize;
        let mut ys = 2u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Strong probable-prime test to the first 20 prime bases; this is a proof
/// of primality below 3.3·10²⁴.
pub fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    'witness: for &a in &small_primes()[..20] {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rho_big(n: &BigUint) -> BigUint {
    let one = BigUint::one();
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut g = one.clone();
        while g.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            g = diff.gcd(n);
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm(n: u64) -> Vec<(u64, u32)> {
        factorize(&BigUint::from(n))
            .iter()
            .map(|(p, e)| (p.to_u64().unwrap(), e))
            .collect()
    }

    #[test]
    fn small_cases() {
        assert_eq!(fm(48), vec![(2, 4), (3, 1)]);
        assert!(fm(1).is_empty());
        assert_eq!(fm(10403), vec![(101, 1), (103, 1)]);
    }

    /// Plain trial division; the oracle for the sieve/rho path.
    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = vec![];
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn matches_trial_division() {
        for n in (1..3000u64).chain([10403, 999_983 * 999_979, 600_851_475_143]) {
            assert_eq!(fm(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn semiprime_beyond_trial_limit() {
        let p = 1_000_000_007u64;
        let q = 998_244_353u64;
        assert_eq!(fm(p * q), vec![(q, 1), (p, 1)]);
    }

    #[test]
    fn big_composite() {
        let p = BigUint::from(18_446_744_073_709_551_557u64); // largest 64-bit prime
        let q = BigUint::from(1_000_000_007u64);
        let n = &p * &q * &q;
        let f = factorize(&n);
        assert_eq!(f.exponent(&q), 2);
        assert_eq!(f.exponent(&p), 1);
        assert_eq!(f.value(), n);
    }

    #[test]
    fn primality() {
        assert!(is_prime_u64(2));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(3_215_031_751)); // strong pseudoprime to 2,3,5,7
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }
}
