use std::cmp::Ordering;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::adelic::{is_adelically_good, AdelicThresholds};
use super::builders::{build_hexagon, build_quadrilateral, rational_roots_of_unity, triple_gap};
use super::tuple::{proj_height, support_and_rad, ProjTuple, TupleKind};
use crate::dynamics::{lemma82_max_margin, Portrait, UnicriticalMap};
use crate::error::Error;
use crate::exactnum::BigRat;
use crate::geometry::slice_fraction;

/// Height, radical and adelic data of one tuple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QualityReport {
    pub kind: TupleKind,
    pub coords: ProjTuple,
    #[serde(serialize_with = "crate::report::serde_real::one")]
    pub h: f64,
    #[serde(serialize_with = "crate::report::serde_real::one")]
    pub rad: f64,
    /// `h/rad`; absent when `rad = 0`.
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub quality: Option<f64>,
    /// Per coordinate; absent when `h(c) = 0`.
    pub adelically_good: Option<Vec<bool>>,
    /// Fraction of the weight of bad primes `p ∤ d` at which all coordinates
    /// have equal valuation; absent when that weight is zero.
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub equal_sides_slice: Option<f64>,
}

impl QualityReport {
    pub fn abcd_value(&self, eps: f64, c: f64) -> f64 {
        self.h - (1.0 + eps) * self.rad - c
    }
}

pub fn quality_report(t: &ProjTuple, f: &UnicriticalMap, thresholds: &AdelicThresholds) -> QualityReport {
    let h = proj_height(t);
    let rad = support_and_rad(t).rad;
    let adelically_good = (f.h_c() > 0.0).then(|| {
        t.coords()
            .iter()
            .map(|x| is_adelically_good(x, f, thresholds).map(|r| r.passes).unwrap_or(false))
            .collect()
    });
    let equal: Vec<BigUint> = f
        .bad_places()
        .iter()
        .filter(|p| !f.divides_degree(p) && t.equal_valuations(p))
        .cloned()
        .collect();
    let equal_sides_slice = slice_fraction(f, &equal, None).ok().map(|s| s.fraction);
    QualityReport {
        kind: t.kind(),
        coords: t.clone(),
        h,
        rad,
        quality: (rad > 0.0).then(|| h / rad),
        adelically_good,
        equal_sides_slice,
    }
}

/// Descending quality, undefined quality last, then ascending coordinates.
fn rank(a: &QualityReport, b: &QualityReport) -> Ordering {
    let by_quality = match (a.quality, b.quality) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_quality.then_with(|| a.coords.coords().cmp(b.coords.coords()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    /// Maximum number of candidate tuples evaluated.
    pub budget: u64,
    pub seed: u64,
    pub thresholds: AdelicThresholds,
    pub top: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            budget: 100_000,
            seed: 0,
            thresholds: AdelicThresholds::default(),
            top: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanStats {
    /// Fraction of differences `p_j − p_i` that are adelically good.
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub adelic_good_fraction: Option<f64>,
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub mean_equal_sides_slice: Option<f64>,
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub max_quality: Option<f64>,
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub lemma82_max_margin: Option<f64>,
    /// Smallest `prop84_gap` with `ξ = 0`; triples only.
    #[serde(serialize_with = "crate::report::serde_real::opt")]
    pub min_prop84_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleScan {
    pub kind: TupleKind,
    pub candidates: u64,
    pub evaluated: u64,
    pub degenerate: u64,
    pub sampled: bool,
    pub top: Vec<QualityReport>,
    pub stats: ScanStats,
}

/// Candidate indices: all of `0..total` within budget, otherwise a sorted
/// uniform sample without replacement.
fn choose(total: u64, opts: &ScanOptions) -> (Vec<u64>, bool) {
    if total <= opts.budget {
        return ((0..total).collect(), false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut idx: Vec<u64> = rand::seq::index::sample(&mut rng, total as usize, opts.budget as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    idx.sort_unstable();
    (idx, true)
}

/// The `index`-th ordered `k`-arrangement of `0..n` in lexicographic order.
fn arrangement(mut index: u64, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let radices: Vec<u64> = (0..k).map(|i| (n - i) as u64).collect();
    let mut weights = vec![1u64; k];
    for i in (0..k.saturating_sub(1)).rev() {
        weights[i] = weights[i + 1] * radices[i + 1];
    }
    let mut out = Vec::with_capacity(k);
    for w in weights {
        let digit = (index / w) as usize;
        index %= w;
        out.push(pool.remove(digit));
    }
    out
}

fn arrangements(n: usize, k: usize) -> u64 {
    (0..k).map(|i| n.saturating_sub(i) as u64).product()
}

fn adelic_fraction(f: &UnicriticalMap, pts: &[BigRat], thresholds: &AdelicThresholds) -> Option<f64> {
    if f.h_c() == 0.0 || pts.len() < 2 {
        return None;
    }
    let diffs: Vec<BigRat> = pts
        .iter()
        .flat_map(|a| pts.iter().filter(move |b| *b != a).map(move |b| a - b))
        .collect();
    let good = diffs
        .par_iter()
        .filter(|x| is_adelically_good(x, f, thresholds).map(|r| r.passes).unwrap_or(false))
        .count();
    Some(good as f64 / diffs.len() as f64)
}

fn finish(
    kind: TupleKind,
    f: &UnicriticalMap,
    portrait: &Portrait,
    candidates: u64,
    sampled: bool,
    results: Vec<Option<QualityReport>>,
    opts: &ScanOptions,
) -> TupleScan {
    let evaluated = results.len() as u64;
    let mut reports: Vec<QualityReport> = results.into_iter().flatten().collect();
    let degenerate = evaluated - reports.len() as u64;
    let slices: Vec<f64> = reports.iter().filter_map(|r| r.equal_sides_slice).collect();
    let mean_equal_sides_slice = (!slices.is_empty()).then(|| slices.iter().sum::<f64>() / slices.len() as f64);
    let min_prop84_gap = (kind == TupleKind::AbcTriple)
        .then(|| {
            reports
                .iter()
                .map(|r| triple_gap(f, &r.coords, 0.0))
                .min_by(f64::total_cmp)
        })
        .flatten();
    reports.sort_by(rank);
    reports.truncate(opts.top);
    TupleScan {
        kind,
        candidates,
        evaluated,
        degenerate,
        sampled,
        stats: ScanStats {
            adelic_good_fraction: if evaluated == 0 {
                None
            } else {
                adelic_fraction(f, &portrait.values(), &opts.thresholds)
            },
            mean_equal_sides_slice,
            max_quality: reports.first().and_then(|r| r.quality),
            lemma82_max_margin: lemma82_max_margin(f, portrait).map(|m| m.0),
            min_prop84_gap,
        },
        top: reports,
    }
}

/// Hexagons over ordered 5-arrangements of the portrait.
pub fn hexagon_scan(f: &UnicriticalMap, portrait: &Portrait, opts: &ScanOptions) -> Result<TupleScan, Error> {
    let pts = portrait.values();
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            need: 5,
            have: pts.len(),
        });
    }
    let total = arrangements(pts.len(), 5);
    let (idx, sampled) = choose(total, opts);
    let results = idx
        .par_iter()
        .map(|&i| {
            let a = arrangement(i, pts.len(), 5);
            build_hexagon([&pts[a[0]], &pts[a[1]], &pts[a[2]], &pts[a[3]], &pts[a[4]]])
                .ok()
                .map(|t| quality_report(&t, f, &opts.thresholds))
        })
        .collect();
    Ok(finish(TupleKind::Hexagon, f, portrait, total, sampled, results, opts))
}

/// Quadrilaterals over ordered triples and every rational `ζ` with `ζ^d = 1`.
pub fn quadrilateral_scan(f: &UnicriticalMap, portrait: &Portrait, opts: &ScanOptions) -> Result<TupleScan, Error> {
    let pts = portrait.values();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints {
            need: 3,
            have: pts.len(),
        });
    }
    let zetas = rational_roots_of_unity(f.degree());
    let per = arrangements(pts.len(), 3);
    let total = per * zetas.len() as u64;
    let (idx, sampled) = choose(total, opts);
    let results = idx
        .par_iter()
        .map(|&i| {
            let a = arrangement(i % per, pts.len(), 3);
            let zeta = &zetas[(i / per) as usize];
            build_quadrilateral(f.degree(), &pts[a[0]], &pts[a[1]], &pts[a[2]], zeta)
                .ok()
                .map(|t| quality_report(&t, f, &opts.thresholds))
        })
        .collect();
    Ok(finish(
        TupleKind::Quadrilateral,
        f,
        portrait,
        total,
        sampled,
        results,
        opts,
    ))
}

/// Periodic abc triples over unordered pairs of distinct periodic points of
/// equal period.
pub fn triple_scan(f: &UnicriticalMap, portrait: &Portrait, opts: &ScanOptions) -> Result<TupleScan, Error> {
    let periodic: Vec<_> = portrait.periodic_points().collect();
    let mut pairs = Vec::new();
    for (i, a) in periodic.iter().enumerate() {
        for b in &periodic[i + 1..] {
            if a.period == b.period {
                pairs.push((a.z.clone(), b.z.clone()));
            }
        }
    }
    if pairs.is_empty() {
        let largest = periodic
            .iter()
            .map(|a| periodic.iter().filter(|b| b.period == a.period).count())
            .max()
            .unwrap_or(0);
        return Err(Error::TooFewPoints { need: 2, have: largest });
    }
    let total = pairs.len() as u64;
    let (idx, sampled) = choose(total, opts);
    let results = idx
        .par_iter()
        .map(|&i| {
            let (a, b) = &pairs[i as usize];
            super::builders::periodic_abc_triple(f, portrait, a, b)
                .ok()
                .map(|t| quality_report(&t, f, &opts.thresholds))
        })
        .collect();
    Ok(finish(TupleKind::AbcTriple, f, portrait, total, sampled, results, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::find_preperiodic;

    fn minus_29_16() -> (UnicriticalMap, Portrait) {
        let f = UnicriticalMap::new(2, BigRat::ratio(-29, 16)).unwrap();
        let p = find_preperiodic(&f);
        (f, p)
    }

    #[test]
    fn arrangement_decoding_is_a_bijection() {
        let n = 6;
        let all: Vec<Vec<usize>> = (0..arrangements(n, 3)).map(|i| arrangement(i, n, 3)).collect();
        assert_eq!(all.len(), 120);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, all);
    }

    #[test]
    fn full_hexagon_enumeration() {
        let (f, portrait) = minus_29_16();
        let scan = hexagon_scan(&f, &portrait, &ScanOptions::default()).unwrap();
        assert_eq!(scan.candidates, 8 * 7 * 6 * 5 * 4);
        assert!(!scan.sampled);
        assert!(scan.top.len() <= 10);
        assert!(scan.top.iter().all(|r| r.coords.sums_to_zero()));
        for w in scan.top.windows(2) {
            assert_ne!(rank(&w[0], &w[1]), Ordering::Greater);
        }
        // The hexagon (1/2, −1, −1, 3/2, −1, 1) is among the evaluated ones.
        let pts = [-1, 1, 3, 5, 7].map(|a| BigRat::ratio(a, 4));
        let hex = build_hexagon([&pts[0], &pts[1], &pts[2], &pts[3], &pts[4]]).unwrap();
        let r = quality_report(&hex, &f, &AdelicThresholds::default());
        assert!((r.quality.unwrap() - 3f64.ln() / 6f64.ln()).abs() < 1e-12);
        assert_eq!(r.equal_sides_slice, None);
    }

    #[test]
    fn budget_zero_and_sampling() {
        let (f, portrait) = minus_29_16();
        let opts = ScanOptions {
            budget: 0,
            ..ScanOptions::default()
        };
        let scan = hexagon_scan(&f, &portrait, &opts).unwrap();
        assert_eq!(scan.evaluated, 0);
        assert!(scan.top.is_empty());
        let opts = ScanOptions {
            budget: 500,
            seed: 3,
            ..ScanOptions::default()
        };
        let a = hexagon_scan(&f, &portrait, &opts).unwrap();
        let b = hexagon_scan(&f, &portrait, &opts).unwrap();
        assert!(a.sampled && a.evaluated == 500);
        assert_eq!(a, b);
    }

    #[test]
    fn triples_and_quads() {
        let (f, portrait) = minus_29_16();
        let t = triple_scan(&f, &portrait, &ScanOptions::default()).unwrap();
        assert_eq!(t.candidates, 3);
        let best = &t.top[0];
        assert!(best.quality.unwrap() > 1.0);
        assert!(t.stats.min_prop84_gap.unwrap() < 0.0);
        let q = quadrilateral_scan(&f, &portrait, &ScanOptions::default()).unwrap();
        assert_eq!(q.candidates, 8 * 7 * 6 * 2);
        let small = UnicriticalMap::new(2, BigRat::from_i64(0)).unwrap();
        let err = hexagon_scan(&small, &find_preperiodic(&small), &ScanOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { need: 5, .. }));
    }
}
