use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::map::UnicriticalMap;
use crate::exactnum::{vp, BigRat};

/// Search space for rational preperiodic points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateGrid {
    /// Candidates are `a/b` with `|a| ≤ numerator_bound` and `a` prime to
    /// every bad prime, where `b = denominator`.
    Grid {
        denominator: BigInt,
        numerator_bound: BigInt,
    },
    /// No rational preperiodic point exists.
    Empty(EmptyReason),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmptyReason {
    pub prime: BigUint,
    pub valuation: i64,
    pub degree: u32,
}

impl std::fmt::Display for EmptyReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "v_{}(c) = {} not divisible by d = {}",
            self.prime, self.valuation, self.degree
        )
    }
}

/// At a bad prime `p` a preperiodic point must have `v_p(z) = v_p(c)/d`
/// exactly (any other valuation escapes within two steps), which fixes the
/// denominator; at good primes it must be `p`-integral. The archimedean
/// bound is `|z| ≤ 2·max(1, |c|)^{1/d}`.
pub fn preperiodic_candidate_grid(f: &UnicriticalMap) -> CandidateGrid {
    let d = f.degree();
    let mut b = BigInt::one();
    for p in f.bad_places() {
        let v = vp(f.c(), p);
        if v.rem_euclid(d as i64) != 0 {
            return CandidateGrid::Empty(EmptyReason {
                prime: p.clone(),
                valuation: v,
                degree: d,
            });
        }
        let e = (-v / d as i64) as u32;
        b *= BigInt::from(p.clone()).pow(e);
    }
    // Smallest A ≥ 0 with A^d·md ≥ (2b)^d·mn, where max(1,|c|) = mn/md.
    let m = if f.c().cmp_abs(&BigRat::one()).is_gt() {
        f.c().abs()
    } else {
        BigRat::one()
    };
    let rhs = num_traits::pow(BigInt::from(2) * &b, d as usize) * m.numer();
    let md = m.denom();
    let ok = |a: &BigInt| num_traits::pow(a.clone(), d as usize) * md >= rhs;
    let est = (2.0 * b.to_f64().unwrap_or(f64::MAX) * m.to_f64().powf(1.0 / d as f64)).ceil();
    let mut a = if est.is_finite() && est < 1e300 {
        BigInt::from(est.max(0.0) as u128)
    } else {
        BigInt::zero()
    };
    while a > BigInt::zero() && ok(&(&a - 1)) {
        a -= 1;
    }
    if !ok(&a) {
        // Float estimate overshot below; exponential then binary search.
        let mut hi = a.clone().max(BigInt::one());
        while !ok(&hi) {
            hi *= 2;
        }
        let mut lo = hi.clone() / 2;
        while &lo + 1 < hi {
            let mid: BigInt = (&lo + &hi) / 2;
            if ok(&mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        a = hi;
    }
    CandidateGrid::Grid {
        denominator: b,
        numerator_bound: a,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PortraitPoint {
    pub z: BigRat,
    pub tail: usize,
    pub period: usize,
    pub image: BigRat,
}

impl PortraitPoint {
    pub fn is_periodic(&self) -> bool {
        self.tail == 0
    }
}

/// The functional graph of `f` on its ℚ-rational preperiodic points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Portrait {
    d: u32,
    c: BigRat,
    bad_places: Vec<BigUint>,
    points: Vec<PortraitPoint>,
    index: HashMap<BigRat, usize>,
    empty_reason: Option<EmptyReason>,
}

impl Portrait {
    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn c(&self) -> &BigRat {
        &self.c
    }

    /// Points in ascending order.
    pub fn points(&self) -> &[PortraitPoint] {
        &self.points
    }

    pub fn values(&self) -> Vec<BigRat> {
        self.points.iter().map(|p| p.z.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, z: &BigRat) -> bool {
        self.index.contains_key(z)
    }

    pub fn get(&self, z: &BigRat) -> Option<&PortraitPoint> {
        self.index.get(z).map(|&i| &self.points[i])
    }

    pub fn successor(&self, z: &BigRat) -> Option<&BigRat> {
        self.get(z).map(|p| &p.image)
    }

    pub fn empty_reason(&self) -> Option<&EmptyReason> {
        self.empty_reason.as_ref()
    }

    pub fn max_period(&self) -> usize {
        self.points.iter().map(|p| p.period).max().unwrap_or(0)
    }

    pub fn periodic_points(&self) -> impl Iterator<Item = &PortraitPoint> {
        self.points.iter().filter(|p| p.is_periodic())
    }

    /// Cycles, each listed from its smallest element in orbit order.
    pub fn cycles(&self) -> Vec<Vec<BigRat>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for p in self.periodic_points() {
            if seen.contains(&p.z) {
                continue;
            }
            let mut cyc = vec![p.z.clone()];
            seen.insert(p.z.clone());
            let mut w = p.image.clone();
            while w != p.z {
                seen.insert(w.clone());
                cyc.push(w.clone());
                w = self.successor(&w).expect("closed under f").clone();
            }
            out.push(cyc);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "schema": 1,
            "d": self.d,
            "c": self.c,
            "points": self.points,
            "bad_places": self.bad_places.iter().map(|p| p.to_u64().map(serde_json::Value::from)
                .unwrap_or_else(|| serde_json::Value::String(p.to_string()))).collect::<Vec<_>>(),
        });
        if let Some(r) = &self.empty_reason {
            v["reason"] = serde_json::Value::String(r.to_string());
        }
        v
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Fate {
    Preperiodic,
    Escapes,
}

/// Every ℚ-rational preperiodic point of `f`, with tail and period data.
///
/// A candidate is rejected as soon as its orbit leaves the finite candidate
/// set and accepted once its orbit revisits a point, so the search is exact
/// and needs no iteration cap.
pub fn find_preperiodic(f: &UnicriticalMap) -> Portrait {
    let empty = |reason| Portrait {
        d: f.degree(),
        c: f.c().clone(),
        bad_places: f.bad_places().to_vec(),
        points: Vec::new(),
        index: HashMap::new(),
        empty_reason: reason,
    };
    let (b, bound) = match preperiodic_candidate_grid(f) {
        CandidateGrid::Empty(r) => return empty(Some(r)),
        CandidateGrid::Grid {
            denominator,
            numerator_bound,
        } => (denominator, numerator_bound),
    };
    let in_grid = |w: &BigRat| w.denom() == &b && w.numer().abs() <= bound;

    let mut fate: HashMap<BigRat, Fate> = HashMap::new();
    let mut a = -bound.clone();
    while a <= bound {
        let z = BigRat::from_integer(a.clone()) / BigRat::from_integer(b.clone());
        a += 1;
        if !in_grid(&z) || fate.contains_key(&z) {
            continue;
        }
        let mut path = vec![z.clone()];
        let mut on_path: HashMap<BigRat, usize> = HashMap::from([(z.clone(), 0)]);
        let verdict = loop {
            let w = f.apply(path.last().expect("nonempty"));
            if let Some(&known) = fate.get(&w) {
                break known;
            }
            if on_path.contains_key(&w) {
                break Fate::Preperiodic;
            }
            if !in_grid(&w) {
                break Fate::Escapes;
            }
            on_path.insert(w.clone(), path.len());
            path.push(w);
        };
        for w in path {
            fate.insert(w, verdict);
        }
    }

    let mut zs: Vec<BigRat> = fate
        .into_iter()
        .filter_map(|(z, v)| (v == Fate::Preperiodic).then_some(z))
        .collect();
    zs.sort();
    let index: HashMap<BigRat, usize> = zs.iter().cloned().enumerate().map(|(i, z)| (z, i)).collect();
    let succ: Vec<usize> = zs.iter().map(|z| index[&f.apply(z)]).collect();

    // Periodic nodes: those on a cycle of the functional graph.
    let n = zs.len();
    let mut period = vec![0usize; n];
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![];
        let mut u = start;
        while state[u] == 0 {
            state[u] = 1;
            stack.push(u);
            u = succ[u];
        }
        if state[u] == 1 {
            let pos = stack.iter().position(|&x| x == u).expect("on stack");
            let len = stack.len() - pos;
            for &x in &stack[pos..] {
                period[x] = len;
            }
        }
        for x in stack {
            state[x] = 2;
        }
    }
    let mut tail = vec![usize::MAX; n];
    for i in 0..n {
        if period[i] > 0 {
            tail[i] = 0;
        }
    }
    for i in 0..n {
        if tail[i] != usize::MAX {
            continue;
        }
        let mut chain = vec![i];
        let mut u = succ[i];
        while tail[u] == usize::MAX {
            chain.push(u);
            u = succ[u];
        }
        let (base_tail, base_period) = (tail[u], period[u]);
        for (k, &x) in chain.iter().rev().enumerate() {
            tail[x] = base_tail + k + 1;
            period[x] = base_period;
        }
    }

    let points = (0..n)
        .map(|i| PortraitPoint {
            z: zs[i].clone(),
            tail: tail[i],
            period: period[i],
            image: zs[succ[i]].clone(),
        })
        .collect();
    Portrait {
        points,
        index,
        ..empty(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(d: u32, n: i64, den: i64) -> UnicriticalMap {
        UnicriticalMap::new(d, BigRat::ratio(n, den)).unwrap()
    }

    #[test]
    fn grid_examples() {
        // Ceiling of 4·2·sqrt(29/16) ≈ 10.77.
        assert_eq!(
            preperiodic_candidate_grid(&map(2, -29, 16)),
            CandidateGrid::Grid {
                denominator: 4.into(),
                numerator_bound: 11.into()
            }
        );
        match preperiodic_candidate_grid(&map(2, 1, 8)) {
            CandidateGrid::Empty(r) => {
                assert_eq!(r.valuation, -3);
                assert_eq!(r.to_string(), "v_2(c) = -3 not divisible by d = 2");
            }
            g => panic!("expected empty grid, got {g:?}"),
        }
        assert_eq!(
            preperiodic_candidate_grid(&map(2, 0, 1)),
            CandidateGrid::Grid {
                denominator: 1.into(),
                numerator_bound: 2.into()
            }
        );
    }

    #[test]
    fn grid_bound_is_minimal() {
        for (d, n, den) in [(2, -29, 16), (3, 7, 1), (2, -2, 1), (4, 5, 16), (3, -1, 27000)] {
            let f = map(d, n, den);
            if let CandidateGrid::Grid {
                denominator,
                numerator_bound,
            } = preperiodic_candidate_grid(&f)
            {
                let m = f.c().abs().to_f64().max(1.0);
                let target = 2.0 * m.powf(1.0 / d as f64);
                let a = numerator_bound.to_f64().unwrap();
                let b = denominator.to_f64().unwrap();
                assert!(a / b >= target - 1e-12);
                assert!((a - 1.0) / b < target + 1e-12);
            }
        }
    }

    #[test]
    fn portrait_c_minus_29_16() {
        let p = find_preperiodic(&map(2, -29, 16));
        let expect: Vec<BigRat> = [-7, -5, -3, -1, 1, 3, 5, 7]
            .iter()
            .map(|&a| BigRat::ratio(a, 4))
            .collect();
        assert_eq!(p.values(), expect);
        let cycles = p.cycles();
        assert_eq!(cycles.len(), 1);
        assert_eq!(
            cycles[0],
            vec![BigRat::ratio(-7, 4), BigRat::ratio(5, 4), BigRat::ratio(-1, 4)]
        );
        assert_eq!(p.max_period(), 3);
        assert!(p.points().iter().all(|q| q.period == 3));
    }

    #[test]
    fn portrait_c_zero() {
        let p = find_preperiodic(&map(2, 0, 1));
        assert_eq!(p.values(), vec![BigRat::from_i64(-1), BigRat::zero(), BigRat::one()]);
        let m1 = p.get(&BigRat::from_i64(-1)).unwrap();
        assert_eq!((m1.tail, m1.period, m1.image.clone()), (1, 1, BigRat::one()));
        assert_eq!(p.get(&BigRat::zero()).unwrap().period, 1);
        assert_eq!(p.get(&BigRat::one()).unwrap().tail, 0);
    }

    #[test]
    fn portrait_c_quarter() {
        let p = find_preperiodic(&map(2, 1, 4));
        assert_eq!(p.values(), vec![BigRat::ratio(-1, 2), BigRat::ratio(1, 2)]);
        assert_eq!(p.get(&BigRat::ratio(-1, 2)).unwrap().tail, 1);
    }

    #[test]
    fn empty_portrait_has_reason() {
        let p = find_preperiodic(&map(2, 1, 8));
        assert!(p.is_empty());
        let j = p.to_json();
        assert_eq!(j["reason"], "v_2(c) = -3 not divisible by d = 2");
        assert_eq!(j["bad_places"], serde_json::json!([2]));
    }

    #[test]
    fn json_shape() {
        let j = find_preperiodic(&map(2, 0, 1)).to_json();
        assert_eq!(j["d"], 2);
        assert_eq!(j["c"], "0");
        assert_eq!(
            j["points"][0],
            serde_json::json!({"z": "-1", "tail": 1, "period": 1, "image": "1"})
        );
    }
}
