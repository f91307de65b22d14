//! Families of maps `z^d + a/b` and the per-map checks run over them.

use std::io::Write;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    check_transformation_rule, find_preperiodic, lemma82_max_margin, min_distance_to_f3_roots,
    newton_coprimality_violations, Portrait, RuleCheck, UnicriticalMap,
};
use crate::error::Error;
use crate::exactnum::{BigRat, Place};
use crate::geometry::{geometry_report, global_diameter_residual, tree_prime_valuation, GeometryReport};
use crate::heights::{
    hexagon_scan, quadrilateral_scan, triple_scan, AdelicThresholds, QualityReport, ScanOptions, TupleScan,
};
use crate::report::fmt_real;

/// Maps `z^d + a/b` for `d ∈ degrees`, `|a| ≤ a_max`, `b ∈ denominators`
/// with `b` a perfect `d`-th power and `gcd(a, b) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSpec {
    pub degrees: Vec<u32>,
    pub a_max: i64,
    pub denominators: Vec<i64>,
    pub exclude: Vec<BigRat>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            degrees: vec![2],
            a_max: 50,
            denominators: vec![1, 4, 16],
            exclude: Vec::new(),
        }
    }
}

fn is_perfect_power(b: i64, d: u32) -> bool {
    let r = (b as f64).powf(1.0 / d as f64).round() as i64;
    (r.saturating_sub(1)..=r + 1).any(|x| x >= 1 && x.checked_pow(d) == Some(b))
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if let Some(&d) = self.degrees.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDegree(d));
        }
        if self.a_max < 0 {
            return Err(Error::Parse("numerator bound must be nonnegative".into()));
        }
        if self.denominators.iter().any(|&b| b < 1) {
            return Err(Error::Parse("denominators must be positive".into()));
        }
        Ok(())
    }

    /// Maps in order of degree, then denominator, then numerator.
    pub fn maps(&self) -> Result<Vec<UnicriticalMap>, Error> {
        self.validate()?;
        let mut out = Vec::new();
        for &d in &self.degrees {
            let mut bs: Vec<i64> = self
                .denominators
                .iter()
                .copied()
                .filter(|&b| is_perfect_power(b, d))
                .collect();
            bs.sort_unstable();
            bs.dedup();
            for b in bs {
                for a in -self.a_max..=self.a_max {
                    if a.gcd(&b) != 1 {
                        continue;
                    }
                    let c = BigRat::ratio(a, b);
                    if self.exclude.contains(&c) {
                        continue;
                    }
                    out.push(UnicriticalMap::new(d, c)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_max_escape: usize,
    pub epsilons: Vec<f64>,
    pub thresholds: AdelicThresholds,
    pub seed: u64,
    pub workers: usize,
    /// Tuples evaluated per kind per map.
    pub tuple_budget: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_max_escape: 64,
            epsilons: vec![0.5],
            thresholds: AdelicThresholds::default(),
            seed: 0,
            workers: 1,
            tuple_budget: 20_000,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_max_escape < 1 || self.workers < 1 {
            return Err(Error::Parse("caps and worker count must be at least 1".into()));
        }
        if !(self.thresholds.good_prime > 0.0 && self.thresholds.arch > 0.0) {
            return Err(Error::Parse("adelic thresholds must be positive".into()));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Parse("ε list must be nonempty and nonnegative".into()));
        }
        Ok(())
    }
}

/// Quantization outcome at one prime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeCheck {
    pub p: u64,
    pub pairs: usize,
    pub violations: usize,
}

/// Everything computed for one map of the corpus.
#[derive(Clone, Debug)]
pub struct MapResult {
    pub map: UnicriticalMap,
    pub portrait: Portrait,
    pub lemma82_margin: Option<f64>,
    pub coprimality_violations: usize,
    pub quantization: Vec<PrimeCheck>,
    pub geometry: Vec<GeometryReport>,
    pub global_diameter_residual: Option<f64>,
    pub best_tuple: Option<QualityReport>,
    pub min_prop84_gap: Option<f64>,
    pub adelic_good_fraction: Option<f64>,
    pub escape_rule_residual: Option<f64>,
    /// `None` when the root finder hit its iteration cap.
    pub f3_residual: Option<f64>,
}

impl MapResult {
    pub fn quantization_violations(&self) -> usize {
        self.quantization.iter().map(|q| q.violations).sum()
    }
}

/// Primes at which the disk-tree geometry applies.
pub fn tree_primes(f: &UnicriticalMap) -> Vec<BigUint> {
    f.bad_places()
        .iter()
        .filter(|p| tree_prime_valuation(f, p).is_ok())
        .cloned()
        .collect()
}

fn best_of(scans: &[TupleScan]) -> Option<QualityReport> {
    let mut best: Option<&QualityReport> = None;
    for r in scans.iter().filter_map(|s| s.top.first()) {
        let better = match (best.and_then(|b| b.quality), r.quality) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(x), Some(y)) => y > x,
        };
        if best.is_none() || better {
            best = Some(r);
        }
    }
    best.cloned()
}

/// All per-map checks; sequential within the map.
pub fn analyze_map(f: &UnicriticalMap, config: &RunConfig) -> MapResult {
    let portrait = find_preperiodic(f);
    let pts = portrait.values();
    let eps = config.epsilons[0];
    let mut quantization = Vec::new();
    let mut geometry = Vec::new();
    if !pts.is_empty() {
        for p in tree_primes(f) {
            let p64 = p.to_u64().expect("corpus primes are small");
            if let Ok(r) = geometry_report(f, &pts, p64, eps, 3) {
                let violations = match &r.quantization {
                    crate::geometry::QuantizationOutcome::Pass(_) => 0,
                    crate::geometry::QuantizationOutcome::Violations(v) => v.len(),
                };
                quantization.push(PrimeCheck {
                    p: p64,
                    pairs: pts.len() * (pts.len() - 1) / 2,
                    violations,
                });
                geometry.push(r);
            }
        }
    }
    let opts = ScanOptions {
        budget: config.tuple_budget,
        seed: config.seed,
        thresholds: config.thresholds,
        top: 10,
    };
    let scans: Vec<TupleScan> = [
        hexagon_scan(f, &portrait, &opts).ok(),
        quadrilateral_scan(f, &portrait, &opts).ok(),
        triple_scan(f, &portrait, &opts).ok(),
    ]
    .into_iter()
    .flatten()
    .collect();
    let min_prop84_gap = scans.iter().find_map(|s| s.stats.min_prop84_gap);
    let adelic_good_fraction = scans.iter().find_map(|s| s.stats.adelic_good_fraction);

    let mut places = vec![Place::Archimedean];
    places.extend(f.bad_places().iter().cloned().map(Place::Finite));
    let mut escape_rule_residual: Option<f64> = None;
    for v in &places {
        if let Ok(RuleCheck::Residual(r)) = check_transformation_rule(f, f.c(), v, config.n_max_escape) {
            // A nonzero finite part would be an exact failure.
            let res = if r.finite_is_zero() {
                r.real_value().abs()
            } else {
                f64::INFINITY
            };
            escape_rule_residual = Some(escape_rule_residual.map_or(res, |x| x.max(res)));
        }
    }
    let f3_residual = min_distance_to_f3_roots(f, &BigRat::zero())
        .ok()
        .map(|r| r.max_scaled_residual);

    MapResult {
        lemma82_margin: lemma82_max_margin(f, &portrait).map(|m| m.0),
        coprimality_violations: newton_coprimality_violations(f, &portrait).len(),
        global_diameter_residual: global_diameter_residual(&pts).ok(),
        best_tuple: best_of(&scans),
        min_prop84_gap,
        adelic_good_fraction,
        escape_rule_residual,
        f3_residual,
        quantization,
        geometry,
        map: f.clone(),
        portrait,
    }
}

/// Runs every map on a pool of `config.workers` threads; results come back
/// in corpus order.
pub fn run_scan(corpus: &CorpusSpec, config: &RunConfig) -> Result<Vec<MapResult>, Error> {
    config.validate()?;
    let maps = corpus.maps()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    Ok(pool.install(|| maps.par_iter().map(|f| analyze_map(f, config)).collect()))
}

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 15] = [
    "d",
    "c",
    "portrait_size",
    "max_period",
    "lemma82_margin",
    "coprimality_violations",
    "quantization",
    "quantization_violations",
    "global_diameter_residual",
    "top_quality",
    "top_kind",
    "min_prop84_gap",
    "adelic_good_fraction",
    "escape_rule_residual",
    "f3_residual",
];

fn opt_real(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_default()
}

fn csv_row(r: &MapResult) -> Vec<String> {
    let quant = if r.quantization.is_empty() {
        "-".to_string()
    } else {
        r.quantization
            .iter()
            .map(|q| {
                if q.violations == 0 {
                    format!("{}:pass", q.p)
                } else {
                    format!("{}:fail({})", q.p, q.violations)
                }
            })
            .collect::<Vec<_>>()
            .join(";")
    };
    vec![
        r.map.degree().to_string(),
        r.map.c().to_string(),
        r.portrait.len().to_string(),
        r.portrait.max_period().to_string(),
        opt_real(r.lemma82_margin),
        r.coprimality_violations.to_string(),
        quant,
        r.quantization_violations().to_string(),
        opt_real(r.global_diameter_residual),
        opt_real(r.best_tuple.as_ref().and_then(|t| t.quality)),
        r.best_tuple
            .as_ref()
            .map(|t| t.kind.name().to_string())
            .unwrap_or_default(),
        opt_real(r.min_prop84_gap),
        opt_real(r.adelic_good_fraction),
        opt_real(r.escape_rule_residual),
        opt_real(r.f3_residual),
    ]
}

pub fn write_csv<W: Write>(out: W, results: &[MapResult]) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in results {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

fn max_opt(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.flatten().fold(None, |m, x| Some(m.map_or(x, |y: f64| y.max(x))))
}

/// Corpus-level aggregates.
pub fn summary_json(corpus: &CorpusSpec, config: &RunConfig, results: &[MapResult]) -> serde_json::Value {
    use crate::report::sig12;
    let real = |x: Option<f64>| x.map(sig12);
    let largest = results.iter().max_by_key(|r| r.portrait.len());
    let best = results
        .iter()
        .filter_map(|r| r.best_tuple.as_ref().map(|t| (r, t)))
        .filter(|(_, t)| t.quality.is_some())
        .max_by(|a, b| a.1.quality.unwrap().total_cmp(&b.1.quality.unwrap()));
    let min_gap = results
        .iter()
        .filter_map(|r| r.min_prop84_gap.map(|g| (r, g)))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    let mut checked = 0;
    let mut violations = Vec::new();
    for r in results.iter().filter(|r| r.portrait.len() >= 8) {
        for g in &r.geometry {
            if let Some(ok) = g.penalized_diameter_holds() {
                checked += 1;
                if !ok {
                    violations.push(serde_json::json!({"c": r.map.c(), "d": r.map.degree(), "p": g.p}));
                }
            }
        }
    }
    serde_json::json!({
        "schema": 1,
        "corpus": corpus,
        "seed": config.seed,
        "maps": results.len(),
        "nonempty_portraits": results.iter().filter(|r| !r.portrait.is_empty()).count(),
        "total_points": results.iter().map(|r| r.portrait.len()).sum::<usize>(),
        "largest_portrait": largest.map(|r| serde_json::json!({
            "d": r.map.degree(), "c": r.map.c(), "size": r.portrait.len()
        })),
        "coprimality_violations": results.iter().map(|r| r.coprimality_violations).sum::<usize>(),
        "quantization_pairs": results.iter().flat_map(|r| &r.quantization).map(|q| q.pairs).sum::<usize>(),
        "quantization_violations": results.iter().map(|r| r.quantization_violations()).sum::<usize>(),
        "lemma82_max_margin": real(max_opt(results.iter().map(|r| r.lemma82_margin))),
        "max_global_diameter_residual": real(max_opt(results.iter().map(|r| r.global_diameter_residual.map(f64::abs)))),
        "max_escape_rule_residual": real(max_opt(results.iter().map(|r| r.escape_rule_residual))),
        "max_f3_residual": real(max_opt(results.iter().map(|r| r.f3_residual))),
        "root_finder_failures": results.iter().filter(|r| r.f3_residual.is_none()).count(),
        "best_tuple": best.map(|(r, t)| serde_json::json!({"d": r.map.degree(), "c": r.map.c(), "report": t})),
        "min_prop84_gap": min_gap.map(|(r, g)| serde_json::json!({
            "d": r.map.degree(), "c": r.map.c(), "value": sig12(g)
        })),
        "penalized_diameter": {"checked": checked, "violations": violations},
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_generation() {
        let spec = CorpusSpec {
            degrees: vec![2],
            a_max: 3,
            denominators: vec![1, 2, 4],
            exclude: vec![BigRat::zero()],
        };
        let cs: Vec<String> = spec.maps().unwrap().iter().map(|f| f.c().to_string()).collect();
        // b = 2 is not a square; even numerators over 4 are not in lowest terms.
        assert_eq!(cs, ["-3", "-2", "-1", "1", "2", "3", "-3/4", "-1/4", "1/4", "3/4"]);
        let empty = CorpusSpec {
            denominators: vec![2],
            ..CorpusSpec::default()
        };
        assert!(empty.maps().unwrap().is_empty());
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn perfect_powers() {
        assert!(is_perfect_power(1, 5));
        assert!(is_perfect_power(16, 2) && is_perfect_power(16, 4));
        assert!(!is_perfect_power(16, 3));
        assert!(is_perfect_power(27000, 3));
    }

    #[test]
    fn analyze_known_map() {
        let f = UnicriticalMap::new(2, BigRat::ratio(-29, 16)).unwrap();
        let r = analyze_map(&f, &RunConfig::default());
        assert_eq!(r.portrait.len(), 8);
        assert_eq!(r.coprimality_violations, 0);
        assert!(r.quantization.is_empty());
        assert!(r.global_diameter_residual.unwrap().abs() < 1e-9);
        assert!(r.lemma82_margin.unwrap() <= 0.0);
        assert!(r.f3_residual.unwrap() < 1e-10);
        assert!(r.escape_rule_residual.unwrap() < 1e-8);
    }
}
