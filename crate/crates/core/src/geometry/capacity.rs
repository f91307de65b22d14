//! Discrete measures on the level-`m` disks of the tree and their energies.
//!
//! Two level-`m` nodes whose deepest common ancestor sits at level `l` are at
//! Hsia distance `|c|_p^{e_l}`, `e_l = 1/d − l(d−1)/d`, and a node is at
//! distance `r_m = |c|_p^{e_m}` from itself. Every quantity is therefore a
//! rational multiple of `λ_p(c) = log|c|_p`, and only that rational is kept.

use num_bigint::{BigInt, BigUint};

use super::diameter::transfinite_diameter;
use super::disks::{level2_counts, radius_exponent, tree_prime_valuation};
use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::{BigRat, Place};

/// Probability weights on the `d^level` disks of one tree level, indexed so
/// that the children of node `i` are `i·d, …, i·d + d − 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    d: u32,
    level: u32,
    weights: Vec<BigRat>,
}

impl WeightVector {
    pub fn new(d: u32, level: u32, weights: Vec<BigRat>) -> Result<WeightVector, Error> {
        if d < 2 {
            return Err(Error::InvalidDegree(d));
        }
        let len = (d as usize)
            .checked_pow(level)
            .ok_or_else(|| Error::InvalidWeights(format!("level {level} is too deep")))?;
        if weights.len() != len {
            return Err(Error::InvalidWeights(format!(
                "level {level} needs {len} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative() || *w > &BigRat::one()) {
            return Err(Error::InvalidWeights(format!("weight {w} is outside [0, 1]")));
        }
        let total = weights.iter().fold(BigRat::zero(), |acc, w| acc + w);
        if total != BigRat::one() {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(WeightVector { d, level, weights })
    }

    pub fn uniform(d: u32, level: u32) -> WeightVector {
        let n = (d as i64).pow(level);
        WeightVector {
            d,
            level,
            weights: vec![BigRat::ratio(1, n); n as usize],
        }
    }

    /// All mass on node `index`.
    pub fn point_mass(d: u32, level: u32, index: usize) -> Result<WeightVector, Error> {
        let n = (d as usize).pow(level);
        let mut w = vec![BigRat::zero(); n];
        *w.get_mut(index)
            .ok_or_else(|| Error::InvalidWeights(format!("index {index} out of range")))? = BigRat::one();
        WeightVector::new(d, level, w)
    }

    /// Normalized counts.
    pub fn from_counts(d: u32, level: u32, counts: &[u64]) -> Result<WeightVector, Error> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::InvalidWeights("all counts are zero".into()));
        }
        let w = counts
            .iter()
            .map(|&c| BigRat::from(num_rational::BigRational::new(BigInt::from(c), BigInt::from(n))))
            .collect();
        WeightVector::new(d, level, w)
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn weights(&self) -> &[BigRat] {
        &self.weights
    }

    /// Masses of the level-`l` ancestors, `l ≤ level`.
    pub fn coarsen(&self, l: u32) -> Vec<BigRat> {
        let block = (self.d as usize).pow(self.level - l);
        self.weights
            .chunks(block)
            .map(|c| c.iter().fold(BigRat::zero(), |acc, w| acc + w))
            .collect()
    }

    /// `Σ w_i²` over level-`l` ancestors.
    pub fn collision_mass(&self, l: u32) -> BigRat {
        self.coarsen(l).iter().fold(BigRat::zero(), |acc, w| acc + w * w)
    }
}

/// Splits each weight equally among its `d` children until level `m`.
pub fn refine_weights(k: &WeightVector, m: u32) -> Result<WeightVector, Error> {
    if m < k.level {
        return Err(Error::InvalidWeights(format!(
            "cannot refine level {} down to level {m}",
            k.level
        )));
    }
    let d = k.d as usize;
    let split = BigRat::ratio(1, k.d as i64);
    let mut w = k.weights.clone();
    for _ in k.level..m {
        w = w.iter().flat_map(|x| std::iter::repeat_n(x * &split, d)).collect();
    }
    Ok(WeightVector {
        d: k.d,
        level: m,
        weights: w,
    })
}

/// A weight vector on the disk tree of `f` at a bad prime `p ∤ d`.
#[derive(Clone, Debug)]
pub struct TreeMeasure {
    weights: WeightVector,
    prime: BigUint,
    vp_c: i64,
}

impl TreeMeasure {
    pub fn new(weights: WeightVector, p: &BigUint, f: &UnicriticalMap) -> Result<TreeMeasure, Error> {
        let vp_c = tree_prime_valuation(f, p)?;
        if weights.d != f.degree() {
            return Err(Error::InvalidWeights(format!(
                "weights are for d = {}, map has d = {}",
                weights.d,
                f.degree()
            )));
        }
        Ok(TreeMeasure {
            weights,
            prime: p.clone(),
            vp_c,
        })
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn prime(&self) -> &BigUint {
        &self.prime
    }

    pub fn vp_c(&self) -> i64 {
        self.vp_c
    }
}

/// `q` with `I(μ) = −Σ_{i,j} w_i w_j log δ(ζ_i, ζ_j) = q·λ_p(c)`.
///
/// Pairs with deepest common ancestor at level `l < m` carry total mass
/// `Q_l − Q_{l+1}` (`Q_l` the collision mass at level `l`), diagonal pairs
/// carry `Q_m`.
pub fn energy(tm: &TreeMeasure) -> BigRat {
    weight_energy(&tm.weights)
}

pub(crate) fn weight_energy(k: &WeightVector) -> BigRat {
    let m = k.level;
    let q: Vec<BigRat> = (0..=m).map(|l| k.collision_mass(l)).collect();
    let mut s = &radius_exponent(k.d, m) * &q[m as usize];
    for l in 0..m as usize {
        s = s + &radius_exponent(k.d, l as u32) * &(&q[l] - &q[l + 1]);
    }
    -s
}

/// `(log γ_m − log γ_{m+1})/λ_p(c) − (1/d^{m+1} − 1/d^{m+2})` for the
/// refinements of `k2`, with `log γ = −I`.
pub fn telescoping_check(k2: &WeightVector, f: &UnicriticalMap, p: &BigUint, m: u32) -> Result<BigRat, Error> {
    if k2.level != 2 {
        return Err(Error::InvalidWeights("telescoping starts from a level-2 vector".into()));
    }
    let here = energy(&TreeMeasure::new(refine_weights(k2, m)?, p, f)?);
    let there = energy(&TreeMeasure::new(refine_weights(k2, m + 1)?, p, f)?);
    let d = f.degree() as i64;
    let expected = BigRat::ratio(1, d.pow(m + 1)) - BigRat::ratio(1, d.pow(m + 2));
    Ok((there - here) - expected)
}

/// Exponent `q` with `γ(μ_k) = |c|_p^q`, the limit of `−I(μ_{k(m)})/λ_p(c)`.
///
/// Refining past level 2 changes the capacity exponent by exactly
/// `−Q_2·(d−1)/d^m` per step, so the limit is the level-2 value minus `Q_2/d`.
pub fn gamma_limit(k2: &WeightVector, f: &UnicriticalMap, p: &BigUint) -> Result<BigRat, Error> {
    if k2.level != 2 {
        return Err(Error::InvalidWeights(
            "capacity limit starts from a level-2 vector".into(),
        ));
    }
    let level2 = -energy(&TreeMeasure::new(k2.clone(), p, f)?);
    Ok(level2 - k2.collision_mass(2) * BigRat::ratio(1, f.degree() as i64))
}

/// `(log d_p(T) − log γ(μ_{k(T)}))/λ_p(c)`, where `k(T)` is the empirical
/// distribution of `T` over the level-2 disks.
pub fn idealization_margin(f: &UnicriticalMap, points: &[BigRat], p: &BigUint) -> Result<BigRat, Error> {
    let ratio = log_diameter_over_lambda(f, points, p)?;
    let counts = level2_counts(f, points, p)?;
    let k = WeightVector::from_counts(f.degree(), 2, &counts)?;
    Ok(ratio - gamma_limit(&k, f, p)?)
}

/// `log d_p(T)/λ_p(c)` as an exact rational.
pub fn log_diameter_over_lambda(f: &UnicriticalMap, points: &[BigRat], p: &BigUint) -> Result<BigRat, Error> {
    let vp_c = tree_prime_valuation(f, p)?;
    let coeff = transfinite_diameter(points, &Place::Finite(p.clone()))?.coefficient(p);
    Ok(BigRat::from(coeff) / BigRat::from_i64(-vp_c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn map(d: u32) -> (UnicriticalMap, BigUint) {
        match d {
            2 => (
                UnicriticalMap::new(2, BigRat::ratio(6, 25)).unwrap(),
                BigUint::from(5u32),
            ),
            3 => (
                UnicriticalMap::new(3, BigRat::ratio(1, 8)).unwrap(),
                BigUint::from(2u32),
            ),
            _ => unreachable!(),
        }
    }

    /// Direct double sum over all ordered pairs of level-`m` nodes.
    fn direct_energy(k: &WeightVector) -> BigRat {
        let d = k.degree() as usize;
        let m = k.level();
        let w = k.weights();
        let mut s = BigRat::zero();
        for i in 0..w.len() {
            for j in 0..w.len() {
                let mut l = m;
                while i / d.pow(m - l) != j / d.pow(m - l) {
                    l -= 1;
                }
                s = s + &(&w[i] * &w[j]) * &radius_exponent(k.degree(), l);
            }
        }
        -s
    }

    fn random_weights(rng: &mut ChaCha8Rng, d: u32) -> WeightVector {
        let n = (d * d) as usize;
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(0..20)).collect();
        let raw = if raw.iter().all(|&x| x == 0) { vec![1; n] } else { raw };
        let total: i64 = raw.iter().sum();
        WeightVector::new(d, 2, raw.iter().map(|&x| BigRat::ratio(x, total)).collect()).unwrap()
    }

    #[test]
    fn weight_validation() {
        let half = BigRat::ratio(1, 2);
        assert!(WeightVector::new(2, 2, vec![half.clone(), half.clone(), BigRat::zero(), BigRat::zero()]).is_ok());
        assert!(WeightVector::new(2, 2, vec![half.clone(), half.clone()]).is_err());
        assert!(WeightVector::new(2, 1, vec![half.clone(), BigRat::ratio(1, 3)]).is_err());
        assert!(WeightVector::new(2, 1, vec![BigRat::ratio(3, 2), -half]).is_err());
    }

    #[test]
    fn refinement_examples() {
        let k = WeightVector::point_mass(2, 2, 0).unwrap();
        let r = refine_weights(&k, 3).unwrap();
        let mut expected = vec![BigRat::ratio(1, 2), BigRat::ratio(1, 2)];
        expected.extend(vec![BigRat::zero(); 6]);
        assert_eq!(r.weights(), &expected[..]);
        assert_eq!(
            refine_weights(&WeightVector::uniform(3, 2), 4).unwrap(),
            WeightVector::uniform(3, 4)
        );
        assert!(refine_weights(&k, 1).is_err());
    }

    #[test]
    fn uniform_energy_step() {
        let (f, p) = map(2);
        let e = |m| energy(&TreeMeasure::new(WeightVector::uniform(2, m), &p, &f).unwrap());
        assert_eq!(e(3) - e(2), BigRat::ratio(1, 16));
    }

    #[test]
    fn aggregated_energy_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [2, 3] {
            for m in 2..=4 {
                for _ in 0..5 {
                    let k = refine_weights(&random_weights(&mut rng, d), m).unwrap();
                    assert_eq!(weight_energy(&k), direct_energy(&k));
                }
                let pm = refine_weights(&WeightVector::point_mass(d, 2, 1).unwrap(), m).unwrap();
                assert_eq!(weight_energy(&pm), direct_energy(&pm));
            }
        }
    }

    #[test]
    fn telescoping_uniform_is_exact() {
        for d in [2, 3] {
            let (f, p) = map(d);
            for m in 2..=6 {
                assert!(telescoping_check(&WeightVector::uniform(d, 2), &f, &p, m)
                    .unwrap()
                    .is_zero());
            }
        }
    }

    #[test]
    fn gamma_limit_is_the_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3] {
            let (f, p) = map(d);
            for _ in 0..5 {
                let k2 = random_weights(&mut rng, d);
                let q = gamma_limit(&k2, &f, &p).unwrap();
                // −I_m/λ exceeds the limit by exactly Q_2·d^{−(m−1)}.
                for m in [2, 5, 9] {
                    let lm = -energy(&TreeMeasure::new(refine_weights(&k2, m).unwrap(), &p, &f).unwrap());
                    let gap = k2.collision_mass(2) * BigRat::ratio(1, (d as i64).pow(m - 1));
                    assert_eq!(lm - &q, gap);
                }
            }
        }
    }

    #[test]
    fn gamma_limit_examples() {
        for d in [2, 3] {
            let (f, p) = map(d);
            assert!(gamma_limit(&WeightVector::uniform(d, 2), &f, &p).unwrap().is_zero());
            let q = gamma_limit(&WeightVector::point_mass(d, 2, 0).unwrap(), &f, &p).unwrap();
            assert!(q.is_negative());
        }
    }

    #[test]
    fn idealization_margin_on_portrait() {
        let (f, p) = map(2);
        // {±2/5, ±3/5}: one point in each level-2 disk.
        let pts: Vec<BigRat> = [-3, -2, 2, 3].iter().map(|&a| BigRat::ratio(a, 5)).collect();
        assert_eq!(level2_counts(&f, &pts, &p).unwrap(), vec![1, 1, 1, 1]);
        let margin = idealization_margin(&f, &pts, &p).unwrap();
        assert_eq!(margin, log_diameter_over_lambda(&f, &pts, &p).unwrap());
    }
}
