use num_complex::Complex64;

use super::map::UnicriticalMap;
use crate::error::Error;
use crate::exactnum::BigRat;

const MAX_ITER: usize = 500;
const TOL: f64 = 1e-12;
const POLISH_STEPS: usize = 3;

/// Coefficients of `f^3(z)`, lowest degree first.
fn third_iterate_coeffs(c: f64, d: usize) -> Vec<f64> {
    let mul = |a: &[f64], b: &[f64]| {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut poly = vec![0.0, 1.0];
    for _ in 0..3 {
        let mut pw = vec![1.0];
        for _ in 0..d {
            pw = mul(&pw, &poly);
        }
        pw[0] += c;
        poly = pw;
    }
    poly
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// `f^3(z)` by direct iteration.
pub fn eval_f3(c: f64, d: u32, z: Complex64) -> Complex64 {
    (0..3).fold(z, |w, _| w.powu(d) + c)
}

/// Newton steps on the iterated form, which is better conditioned than the
/// expanded polynomial when `|c|` is large.
fn polish(c: f64, d: u32, mut z: Complex64) -> Complex64 {
    for _ in 0..POLISH_STEPS {
        let (mut w, mut dw) = (z, Complex64::new(1.0, 0.0));
        for _ in 0..3 {
            dw *= w.powu(d - 1) * d as f64;
            w = w.powu(d) + c;
        }
        if dw.norm() == 0.0 {
            break;
        }
        let next = z - w / dw;
        if !next.is_finite() {
            break;
        }
        z = next;
    }
    z
}

/// All `d³` complex roots of `f^3(z) = 0` by simultaneous Weierstrass
/// (Durand–Kerner) iteration, started from rotated roots of unity on a
/// circle enclosing the filled Julia set.
pub fn f3_roots(f: &UnicriticalMap) -> Result<Vec<Complex64>, Error> {
    let d = f.degree() as usize;
    let c = f.c().to_f64();
    let coeffs = third_iterate_coeffs(c, d);
    let n = coeffs.len() - 1;
    let radius = 2.0 * c.abs().max(1.0).powf(1.0 / d as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let step = horner(&coeffs, z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < TOL {
            let d = f.degree();
            return Ok(z.into_iter().map(|r| polish(c, d, r)).collect());
        }
    }
    Err(Error::RootFinderNoConvergence { iterations: MAX_ITER })
}

/// Result of measuring a point against the roots of `f^3`.
#[derive(Clone, Debug)]
pub struct F3Distance {
    /// `min_β log|y − β|`; `-∞` when `y` is itself a root.
    pub min_log_distance: f64,
    /// `(3/d − 2)·λ_∞(c)`, the comparison value without the unknown constant.
    pub bound: f64,
    pub roots: Vec<Complex64>,
    /// Largest `|f^3(β)| / (1+|β|)^{d³}` over the returned roots.
    pub max_scaled_residual: f64,
}

/// Archimedean distance from `y` to the nearest root of `f^3`.
pub fn min_distance_to_f3_roots(f: &UnicriticalMap, y: &BigRat) -> Result<F3Distance, Error> {
    let roots = f3_roots(f)?;
    let d = f.degree();
    let c = f.c().to_f64();
    let n = d.pow(3) as i32;
    let max_scaled_residual = roots
        .iter()
        .map(|b| eval_f3(c, d, *b).norm() / (1.0 + b.norm()).powi(n))
        .fold(0.0, f64::max);
    let lam_c = if f.c().is_zero() { 0.0 } else { f.c().ln_abs().max(0.0) };
    let bound = (3.0 / d as f64 - 2.0) * lam_c;
    let min_log_distance = if f.iterate(y, 3).is_zero() {
        f64::NEG_INFINITY
    } else {
        let yf = Complex64::new(y.to_f64(), 0.0);
        roots.iter().map(|b| (yf - b).norm()).fold(f64::INFINITY, f64::min).ln()
    };
    Ok(F3Distance {
        min_log_distance,
        bound,
        roots,
        max_scaled_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(n: i64, den: i64) -> UnicriticalMap {
        UnicriticalMap::new(2, BigRat::ratio(n, den)).unwrap()
    }

    /// All roots of f^3 by backward branching through complex square roots;
    /// independent of the simultaneous iteration.
    fn backward_roots(c: f64) -> Vec<Complex64> {
        let mut level = vec![Complex64::new(0.0, 0.0)];
        for _ in 0..3 {
            level = level
                .iter()
                .flat_map(|w| {
                    let s = (w - c).sqrt();
                    [s, -s]
                })
                .collect();
        }
        level
    }

    #[test]
    fn c_zero_y_one() {
        let r = min_distance_to_f3_roots(&map(0, 1), &BigRat::one()).unwrap();
        assert!(r.min_log_distance.abs() < 1e-2, "{}", r.min_log_distance);
        assert!(r.max_scaled_residual < 1e-10);
    }

    #[test]
    fn root_gives_neg_infinity() {
        let r = min_distance_to_f3_roots(&map(-1, 1), &BigRat::one()).unwrap();
        assert_eq!(r.min_log_distance, f64::NEG_INFINITY);
    }

    #[test]
    fn c_minus_one_y_zero_matches_backward_roots() {
        let r = min_distance_to_f3_roots(&map(-1, 1), &BigRat::zero()).unwrap();
        let oracle = backward_roots(-1.0)
            .iter()
            .map(|b| b.norm())
            .fold(f64::INFINITY, f64::min)
            .ln();
        assert!(
            (r.min_log_distance - oracle).abs() < 1e-6,
            "{} vs {oracle}",
            r.min_log_distance
        );
        for b in &r.roots {
            assert!(eval_f3(-1.0, 2, *b).norm() < 1e-10 * (1.0 + b.norm()).powi(8));
        }
    }

    #[test]
    fn root_sets_match_backward_branching() {
        for (n, den) in [
            (-29, 16),
            (3, 1),
            (-2, 1),
            (1, 4),
            (-21, 16),
            (-50, 1),
            (-43, 1),
            (47, 16),
        ] {
            let f = map(n, den);
            let roots = f3_roots(&f).unwrap();
            let oracle = backward_roots(n as f64 / den as f64);
            for b in &oracle {
                let nearest = roots.iter().map(|r| (r - b).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-6, "c = {n}/{den}: {nearest}");
            }
        }
    }
}
