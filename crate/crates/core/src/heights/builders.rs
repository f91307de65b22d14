use num_bigint::BigUint;

use super::tuple::{proj_height, support_and_rad, ProjTuple, TupleKind};
use crate::dynamics::{Portrait, UnicriticalMap};
use crate::error::Error;
use crate::exactnum::{is_prime_big, lambda_v, valuation, BigRat, LogNumber, Place, Valuation};

const HEXAGON_SIDES: [&str; 6] = ["x_0", "x_1", "x_2", "x_3", "x_4", "x_5"];
const QUAD_SIDES: [&str; 4] = ["x_0", "x_1", "x_2", "x_3"];

fn first_zero(coords: &[BigRat], names: &[&'static str], kind: &'static str) -> Result<(), Error> {
    match coords.iter().position(|x| x.is_zero()) {
        Some(i) => Err(Error::DegenerateTuple { kind, side: names[i] }),
        None => Ok(()),
    }
}

/// `(p_2−p_1, p_1−p_3, −p_1−p_4, p_5+p_1, p_3−p_5, p_4−p_2)`.
pub fn build_hexagon(p: [&BigRat; 5]) -> Result<ProjTuple, Error> {
    let [p1, p2, p3, p4, p5] = p;
    let coords = vec![p2 - p1, p1 - p3, -(p1 + p4), p5 + p1, p3 - p5, p4 - p2];
    first_zero(&coords, &HEXAGON_SIDES, "hexagon")?;
    ProjTuple::new(TupleKind::Hexagon, coords)
}

/// Roots of unity of order dividing `d` that lie in ℚ.
pub fn rational_roots_of_unity(d: u32) -> Vec<BigRat> {
    if d.is_multiple_of(2) {
        vec![BigRat::one(), BigRat::from_i64(-1)]
    } else {
        vec![BigRat::one()]
    }
}

fn check_zeta(zeta: &BigRat, d: u32) -> Result<(), Error> {
    if !rational_roots_of_unity(d).contains(zeta) {
        return Err(Error::UnsupportedRootOfUnity(format!("{zeta} for d = {d}")));
    }
    Ok(())
}

/// `(p_2−p_1, ζp_1−p_2, p_3−ζp_1, p_1−p_3)` with `ζ^d = 1`, `ζ ∈ ℚ`.
pub fn build_quadrilateral(d: u32, p1: &BigRat, p2: &BigRat, p3: &BigRat, zeta: &BigRat) -> Result<ProjTuple, Error> {
    check_zeta(zeta, d)?;
    let zp1 = zeta * p1;
    let coords = vec![p2 - p1, &zp1 - p2, p3 - &zp1, p1 - p3];
    first_zero(&coords, &QUAD_SIDES, "quadrilateral")?;
    ProjTuple::new(TupleKind::Quadrilateral, coords)
}

/// `λ_p(c)` when `|p_j − p_1|_p = |p_j − ζp_1|_p = |c|_p^{1/d}`, else 0.
pub fn chi_indicator(
    f: &UnicriticalMap,
    pj: &BigRat,
    p1: &BigRat,
    zeta: &BigRat,
    p: &BigUint,
) -> Result<LogNumber, Error> {
    if !is_prime_big(p) {
        return Err(Error::NotPrime(p.to_string()));
    }
    if !f.is_bad(p) || f.divides_degree(p) {
        return Err(Error::Precondition(format!(
            "{p} must be a bad prime not dividing d = {}",
            f.degree()
        )));
    }
    check_zeta(zeta, f.degree())?;
    let target = f.vp_c(p).expect("bad prime");
    let d = f.degree() as i64;
    let on_sphere = |x: BigRat| matches!(valuation(&x, p), Valuation::Finite(v) if v * d == target);
    if on_sphere(pj - p1) && on_sphere(pj - &(zeta * p1)) {
        Ok(lambda_v(f.c(), &Place::Finite(p.clone())))
    } else {
        Ok(LogNumber::zero())
    }
}

/// `(p_1^d, −p_2^d, −(f(p_1) − f(p_2)))`, projectively the triple
/// `(p_1^d, p_2^d, f(p_1) − f(p_2))` arranged to sum to zero.
pub fn periodic_abc_triple(
    f: &UnicriticalMap,
    portrait: &Portrait,
    p1: &BigRat,
    p2: &BigRat,
) -> Result<ProjTuple, Error> {
    if p1 == p2 {
        return Err(Error::InvalidPair("p1 = p2".into()));
    }
    for (name, z) in [("p1", p1), ("p2", p2)] {
        if z.is_zero() {
            return Err(Error::InvalidPair(format!("{name} is zero")));
        }
        match portrait.get(z) {
            Some(pt) if pt.is_periodic() => {}
            _ => return Err(Error::InvalidPair(format!("{name} = {z} is not periodic"))),
        }
    }
    let (a, b) = (portrait.get(p1).unwrap(), portrait.get(p2).unwrap());
    if a.period != b.period {
        return Err(Error::InvalidPair(format!(
            "periods differ: {} and {}",
            a.period, b.period
        )));
    }
    let diff = f.apply(p1) - f.apply(p2);
    if diff.is_zero() {
        return Err(Error::InvalidPair("f(p1) = f(p2)".into()));
    }
    let d = f.degree();
    ProjTuple::new(TupleKind::AbcTriple, vec![p1.pow(d), -p2.pow(d), -diff])
}

/// `h(P) − [((d−1−ξ)/d)·h(c) + rad(P)]` for the periodic triple of `(p_1, p_2)`.
pub fn prop84_gap(f: &UnicriticalMap, portrait: &Portrait, p1: &BigRat, p2: &BigRat, xi: f64) -> Result<f64, Error> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::Precondition(format!("ξ = {xi} is outside [0, 1)")));
    }
    let t = periodic_abc_triple(f, portrait, p1, p2)?;
    Ok(triple_gap(f, &t, xi))
}

pub(crate) fn triple_gap(f: &UnicriticalMap, t: &ProjTuple, xi: f64) -> f64 {
    let d = f.degree() as f64;
    proj_height(t) - ((d - 1.0 - xi) / d * f.h_c() + support_and_rad(t).rad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::find_preperiodic;

    fn q(a: i64, b: i64) -> BigRat {
        BigRat::ratio(a, b)
    }

    #[test]
    fn hexagon_example() {
        let pts = [q(-1, 4), q(1, 4), q(3, 4), q(5, 4), q(7, 4)];
        let h = build_hexagon([&pts[0], &pts[1], &pts[2], &pts[3], &pts[4]]).unwrap();
        let expected = [q(1, 2), q(-1, 1), q(-1, 1), q(3, 2), q(-1, 1), q(1, 1)];
        assert_eq!(h.coords(), &expected[..]);
        assert!(h.sums_to_zero());
        let err = build_hexagon([&pts[0], &pts[0], &pts[2], &pts[3], &pts[4]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateTuple { side: "x_0", .. }));
        let err = build_hexagon([&pts[1], &pts[2], &pts[3], &pts[0], &pts[4]]).unwrap_err();
        assert!(matches!(err, Error::DegenerateTuple { side: "x_2", .. }));
    }

    #[test]
    fn quadrilateral_example() {
        let t = build_quadrilateral(2, &q(1, 4), &q(3, 4), &q(5, 4), &q(-1, 1)).unwrap();
        assert_eq!(t.coords(), &[q(1, 2), q(-1, 1), q(3, 2), q(-1, 1)][..]);
        assert!(build_quadrilateral(2, &q(1, 4), &q(3, 4), &q(1, 4), &q(-1, 1)).is_err());
        assert!(matches!(
            build_quadrilateral(3, &q(1, 4), &q(3, 4), &q(5, 4), &q(-1, 1)),
            Err(Error::UnsupportedRootOfUnity(_))
        ));
        assert!(matches!(
            build_quadrilateral(2, &q(1, 4), &q(3, 4), &q(5, 4), &q(2, 1)),
            Err(Error::UnsupportedRootOfUnity(_))
        ));
    }

    #[test]
    fn triple_example() {
        let f = UnicriticalMap::new(2, q(-29, 16)).unwrap();
        let portrait = find_preperiodic(&f);
        let t = periodic_abc_triple(&f, &portrait, &q(-1, 4), &q(-7, 4)).unwrap();
        assert!(t.sums_to_zero());
        let prim: Vec<i64> = t.primitive().iter().map(|x| x.try_into().unwrap()).collect();
        assert!(prim == vec![1, -49, 48] || prim == vec![-1, 49, -48], "{prim:?}");
        assert!((proj_height(&t) - 49f64.ln()).abs() < 1e-12);
        assert!((support_and_rad(&t).rad - 42f64.ln()).abs() < 1e-12);
        let gap = prop84_gap(&f, &portrait, &q(-1, 4), &q(-7, 4), 0.0).unwrap();
        let expected = 49f64.ln() - (0.5 * 29f64.ln() + 42f64.ln());
        assert!((gap - expected).abs() < 1e-12);
        assert!(periodic_abc_triple(&f, &portrait, &q(-1, 4), &q(-1, 4)).is_err());
        // 1/4 is preperiodic but not periodic.
        assert!(periodic_abc_triple(&f, &portrait, &q(1, 4), &q(-7, 4)).is_err());
        assert!(prop84_gap(&f, &portrait, &q(-1, 4), &q(-7, 4), 1.0).is_err());
    }

    #[test]
    fn chi_branches() {
        // c = 6/25, p = 5: |c|_5^{1/2} = 5 so v_5 must be −1.
        let f = UnicriticalMap::new(2, q(6, 25)).unwrap();
        let five = BigUint::from(5u32);
        let hit = chi_indicator(&f, &q(3, 5), &q(1, 5), &q(-1, 1), &five).unwrap();
        assert_eq!(hit, lambda_v(f.c(), &Place::Finite(five.clone())));
        // 2/5 − (−3/5) = 1 has valuation 0 > −1.
        let miss = chi_indicator(&f, &q(2, 5), &q(-3, 5), &q(1, 1), &five).unwrap();
        assert!(miss.is_exactly_zero());
        let g = UnicriticalMap::new(2, q(-29, 16)).unwrap();
        assert!(chi_indicator(&g, &q(1, 4), &q(3, 4), &q(1, 1), &BigUint::from(2u32)).is_err());
    }
}
