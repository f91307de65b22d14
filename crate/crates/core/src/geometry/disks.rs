use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::valmatrix::{pairwise_valuation_matrix, ValMatrix};
use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::{is_prime_big, BigRat};

/// `v_p(c)` after checking that `p` is a bad prime not dividing `d` and that
/// `d | v_p(c)`; the disk-tree description needs all three.
pub fn tree_prime_valuation(f: &UnicriticalMap, p: &BigUint) -> Result<i64, Error> {
    if !is_prime_big(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if !f.is_bad(p) {
        return Err(Error::Precondition(format!(
            "{p} is a prime of good reduction for c = {}",
            f.c()
        )));
    }
    if f.divides_degree(p) {
        return Err(Error::Precondition(format!(
            "{p} divides d = {}; the disk structure at p needs p ∤ d",
            f.degree()
        )));
    }
    let v = f.vp_c(p).expect("c is nonzero at a bad prime");
    if v % f.degree() as i64 != 0 {
        return Err(Error::Precondition(format!(
            "v_{p}(c) = {v} is not divisible by d = {}",
            f.degree()
        )));
    }
    Ok(v)
}

/// Level `m` of the disk tree: `d^m` disks of radius `|c|_p^{e_m}` with
/// `e_m = 1/d − m(d−1)/d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiskLevel {
    pub m: u32,
    pub radius_exponent: BigRat,
    pub fundamental_modulus: BigRat,
}

impl DiskLevel {
    pub fn new(d: u32, m: u32) -> DiskLevel {
        DiskLevel {
            m,
            radius_exponent: radius_exponent(d, m),
            fundamental_modulus: BigRat::ratio(d as i64 - 1, d as i64),
        }
    }

    /// Smallest `v_p(z − w)` for `z, w` in one level-`m` disk.
    pub fn valuation_threshold(&self, vp_c: i64) -> i64 {
        let t = &self.radius_exponent * &BigRat::from_i64(vp_c);
        assert!(t.is_integer(), "d | v_p(c) makes every threshold integral");
        t.numer().to_i64().expect("threshold fits in i64")
    }
}

pub(crate) fn radius_exponent(d: u32, m: u32) -> BigRat {
    let d = d as i64;
    BigRat::ratio(1 - m as i64 * (d - 1), d)
}

/// Level index `k` of one pair of points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairLevel {
    pub i: usize,
    pub j: usize,
    pub valuation: i64,
    /// `k` with `v_p(z_i − z_j) = e_k · v_p(c)`, when it is a nonnegative integer.
    pub k: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantization {
    pub vp_c: i64,
    pub pairs: Vec<PairLevel>,
}

impl Quantization {
    pub fn passes(&self) -> bool {
        self.pairs.iter().all(|p| p.k.is_some())
    }

    pub fn violations(&self) -> Vec<&PairLevel> {
        self.pairs.iter().filter(|p| p.k.is_none()).collect()
    }
}

/// Solves `v_p(z_i − z_j) = (1/d − k(d−1)/d)·v_p(c)` for every pair.
pub fn quantization_check(f: &UnicriticalMap, points: &[BigRat], p: &BigUint) -> Result<Quantization, Error> {
    let vp_c = tree_prime_valuation(f, p)?;
    let vm = pairwise_valuation_matrix(points, p)?;
    let d = f.degree() as i64;
    let mut pairs = Vec::new();
    for i in 0..vm.len() {
        for j in i + 1..vm.len() {
            let v = vm.finite(i, j);
            let num = BigInt::from(vp_c - d * v);
            let den = BigInt::from((d - 1) * vp_c);
            let k = BigRational::new(num, den);
            let k = (k.is_integer() && !k.is_negative()).then(|| k.to_integer().to_u64().expect("small level"));
            pairs.push(PairLevel { i, j, valuation: v, k });
        }
    }
    Ok(Quantization { vp_c, pairs })
}

/// Blocks of point indices, in order of first appearance.
fn cluster_indices(vm: &ValMatrix, members: &[usize], threshold: i64) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &i in members {
        match blocks
            .iter_mut()
            .find(|b| vm.get(b[0], i).finite().is_none_or(|v| v >= threshold))
        {
            Some(b) => b.push(i),
            None => blocks.push(vec![i]),
        }
    }
    blocks
}

/// The partition of `points` cut out by the level-`m` disks.
pub fn cluster_at_level(f: &UnicriticalMap, points: &[BigRat], p: &BigUint, m: u32) -> Result<Vec<Vec<BigRat>>, Error> {
    let vp_c = tree_prime_valuation(f, p)?;
    let vm = pairwise_valuation_matrix(points, p)?;
    let t = DiskLevel::new(f.degree(), m).valuation_threshold(vp_c);
    let all: Vec<usize> = (0..points.len()).collect();
    let blocks = cluster_indices(&vm, &all, t);
    check_block_count(blocks.len(), f.degree(), m)?;
    Ok(blocks
        .into_iter()
        .map(|b| b.into_iter().map(|i| points[i].clone()).collect())
        .collect())
}

fn check_block_count(n: usize, d: u32, m: u32) -> Result<(), Error> {
    let cap = (d as u64).checked_pow(m).unwrap_or(u64::MAX);
    if n as u64 > cap {
        return Err(Error::Precondition(format!(
            "{n} level-{m} blocks exceed d^m = {cap}: points are not in the filled Julia set"
        )));
    }
    Ok(())
}

/// Level-2 bucket of each point, numbered `parent·d + child` where parents
/// and children are indexed in order of first appearance.
pub fn level2_buckets(f: &UnicriticalMap, points: &[BigRat], p: &BigUint) -> Result<Vec<usize>, Error> {
    let vp_c = tree_prime_valuation(f, p)?;
    let vm = pairwise_valuation_matrix(points, p)?;
    let d = f.degree();
    let t1 = DiskLevel::new(d, 1).valuation_threshold(vp_c);
    let t2 = DiskLevel::new(d, 2).valuation_threshold(vp_c);
    let all: Vec<usize> = (0..points.len()).collect();
    let parents = cluster_indices(&vm, &all, t1);
    check_block_count(parents.len(), d, 1)?;
    let mut bucket = vec![0; points.len()];
    for (pi, parent) in parents.iter().enumerate() {
        let children = cluster_indices(&vm, parent, t2);
        check_block_count(children.len(), d, 1)?;
        for (ci, child) in children.iter().enumerate() {
            for &i in child {
                bucket[i] = pi * d as usize + ci;
            }
        }
    }
    Ok(bucket)
}

/// Number of points in each of the `d²` level-2 disks.
pub fn level2_counts(f: &UnicriticalMap, points: &[BigRat], p: &BigUint) -> Result<Vec<u64>, Error> {
    let d = f.degree() as usize;
    let mut counts = vec![0; d * d];
    for b in level2_buckets(f, points, p)? {
        counts[b] += 1;
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equidistribution {
    pub pass: bool,
    /// Signed distance of each count to the nearer bound; positive inside.
    pub margins: Vec<f64>,
}

/// Tests `(1−ε)n/k < b_i < (1+ε)n/k` for `k = counts.len()` buckets, exactly.
pub fn epsilon_equidistribution(counts: &[u64], n: u64, eps: f64) -> Result<Equidistribution, Error> {
    if counts.iter().sum::<u64>() != n {
        return Err(Error::Precondition("bucket counts must sum to n".into()));
    }
    let e = BigRational::from_float(eps).ok_or_else(|| Error::Parse(format!("ε = {eps}")))?;
    let one = BigRational::from_integer(1.into());
    let mean = BigRational::new(BigInt::from(n), BigInt::from(counts.len()));
    let lo = (&one - &e) * &mean;
    let hi = (&one + &e) * &mean;
    let mut pass = true;
    let mut margins = Vec::with_capacity(counts.len());
    for &b in counts {
        let b = BigRational::from_integer(BigInt::from(b));
        let margin = (&b - &lo).min(&hi - &b);
        pass &= margin > BigRational::zero();
        margins.push(BigRat::from(margin).to_f64());
    }
    Ok(Equidistribution { pass, margins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::find_preperiodic;

    fn map(d: u32, n: i64, den: i64) -> UnicriticalMap {
        UnicriticalMap::new(d, BigRat::ratio(n, den)).unwrap()
    }

    #[test]
    fn levels() {
        let l0 = DiskLevel::new(2, 0);
        assert_eq!(l0.radius_exponent, BigRat::ratio(1, 2));
        assert_eq!(DiskLevel::new(2, 3).radius_exponent, BigRat::ratio(-1, 1));
        assert_eq!(l0.fundamental_modulus, BigRat::ratio(1, 2));
        // d = 2, v_5(c) = −2: thresholds −1, 0, 1, 2.
        let t: Vec<i64> = (0..4).map(|m| DiskLevel::new(2, m).valuation_threshold(-2)).collect();
        assert_eq!(t, vec![-1, 0, 1, 2]);
    }

    #[test]
    fn refusals() {
        let f = map(2, -29, 16);
        let r = quantization_check(&f, &[BigRat::one()], &BigUint::from(2u32));
        assert!(matches!(r, Err(Error::Precondition(_))));
        let r = quantization_check(&f, &[BigRat::one()], &BigUint::from(3u32));
        assert!(matches!(r, Err(Error::Precondition(_))));
        let g = map(2, 1, 5);
        let r = quantization_check(&g, &[BigRat::one()], &BigUint::from(5u32));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn singleton_is_vacuous() {
        let f = map(2, 6, 25);
        let q = quantization_check(&f, &[BigRat::ratio(1, 5)], &BigUint::from(5u32)).unwrap();
        assert!(q.passes() && q.pairs.is_empty());
    }

    #[test]
    fn portrait_with_odd_bad_prime() {
        // c = 6/25 fixes 2/5 and 3/5; their preimages are ±2/5 and ±3/5.
        let f = map(2, 6, 25);
        let pts = find_preperiodic(&f).values();
        assert!(pts.len() >= 4, "{pts:?}");
        let five = BigUint::from(5u32);
        let q = quantization_check(&f, &pts, &five).unwrap();
        assert!(q.passes(), "{:?}", q.violations());
        let mut prev = 1;
        for m in 0..6 {
            let blocks = cluster_at_level(&f, &pts, &five, m).unwrap();
            assert!(blocks.len() <= 2usize.pow(m));
            assert!(blocks.len() >= prev);
            prev = blocks.len();
        }
        assert_eq!(cluster_at_level(&f, &pts, &five, 0).unwrap().len(), 1);
        assert_eq!(cluster_at_level(&f, &pts, &five, 5).unwrap().len(), pts.len());
        let counts = level2_counts(&f, &pts, &five).unwrap();
        assert_eq!(counts.iter().sum::<u64>(), pts.len() as u64);
    }

    #[test]
    fn equidistribution_examples() {
        assert!(epsilon_equidistribution(&[4, 4, 4, 4], 16, 0.1).unwrap().pass);
        let r = epsilon_equidistribution(&[5, 4, 4, 3], 16, 0.1).unwrap();
        assert!(!r.pass);
        assert!(r.margins[0] < 0.0);
        assert!(epsilon_equidistribution(&[5, 4, 4, 3], 16, 0.3).unwrap().pass);
        assert!(!epsilon_equidistribution(&[4, 4, 4, 4], 16, 0.0).unwrap().pass);
        assert!(epsilon_equidistribution(&[4, 4], 16, 0.1).is_err());
    }
}
