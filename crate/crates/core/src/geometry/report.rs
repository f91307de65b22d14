use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::Serialize;

use super::capacity::{idealization_margin, log_diameter_over_lambda};
use super::disks::{cluster_at_level, epsilon_equidistribution, level2_counts, quantization_check, PairLevel};
use crate::dynamics::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::BigRat;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum QuantizationOutcome {
    Pass(&'static str),
    Violations(Vec<PairLevel>),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquidSummary {
    pub eps: f64,
    pub counts: Vec<u64>,
    pub pass: bool,
}

/// Disk-tree summary of a point set at one bad prime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReport {
    pub p: u64,
    pub vp_c: i64,
    pub quantization: QuantizationOutcome,
    pub clusters: BTreeMap<u32, Vec<Vec<BigRat>>>,
    pub equid: EquidSummary,
    /// `None` for fewer than two points.
    pub log_dv_over_lambda: Option<f64>,
    pub idealization_margin: Option<f64>,
}

impl GeometryReport {
    /// A point set failing ε-equidistribution should have `log d_p(T) < 0`.
    pub fn penalized_diameter_holds(&self) -> Option<bool> {
        if self.equid.pass {
            return None;
        }
        self.log_dv_over_lambda.map(|r| r < 0.0)
    }
}

/// Clusters are listed for levels `0..=max_level`.
pub fn geometry_report(
    f: &UnicriticalMap,
    points: &[BigRat],
    p: u64,
    eps: f64,
    max_level: u32,
) -> Result<GeometryReport, Error> {
    let pb = BigUint::from(p);
    let q = quantization_check(f, points, &pb)?;
    let quantization = if q.passes() {
        QuantizationOutcome::Pass("pass")
    } else {
        QuantizationOutcome::Violations(q.violations().into_iter().cloned().collect())
    };
    let mut clusters = BTreeMap::new();
    for m in 0..=max_level {
        clusters.insert(m, cluster_at_level(f, points, &pb, m)?);
    }
    let counts = level2_counts(f, points, &pb)?;
    let eq = epsilon_equidistribution(&counts, points.len() as u64, eps)?;
    let (ratio, margin) = if points.len() >= 2 {
        (
            Some(log_diameter_over_lambda(f, points, &pb)?.to_f64()),
            Some(idealization_margin(f, points, &pb)?.to_f64()),
        )
    } else {
        (None, None)
    };
    Ok(GeometryReport {
        p,
        vp_c: q.vp_c,
        quantization,
        clusters,
        equid: EquidSummary {
            eps,
            counts,
            pass: eq.pass,
        },
        log_dv_over_lambda: ratio,
        idealization_margin: margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::find_preperiodic;

    #[test]
    fn report_json_shape() {
        let f = UnicriticalMap::new(2, BigRat::ratio(6, 25)).unwrap();
        let pts = find_preperiodic(&f).values();
        let r = geometry_report(&f, &pts, 5, 0.5, 2).unwrap();
        let j = serde_json::to_value(&r).unwrap();
        assert_eq!(j["p"], 5);
        assert_eq!(j["vp_c"], -2);
        assert_eq!(j["quantization"], "pass");
        assert_eq!(j["clusters"]["0"].as_array().unwrap().len(), 1);
        assert_eq!(j["equid"]["counts"].as_array().unwrap().len(), 4);
        assert!(j["idealization_margin"].is_number());
    }
}
