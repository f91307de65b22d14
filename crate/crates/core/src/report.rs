//! Number formatting shared by the JSON and CSV writers.

/// Rounds to 12 significant digits; non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// A real as text with 12 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let r = sig12(x);
        if r != 0.0 && (r.abs() >= 1e15 || r.abs() < 1e-6) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

/// `serialize_with` helpers writing reals rounded by [`sig12`].
pub mod serde_real {
    use serde::Serializer;

    pub fn one<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::sig12(*x))
    }

    pub fn opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) if x.is_finite() => s.serialize_f64(super::sig12(*x)),
            _ => s.serialize_none(),
        }
    }

    pub fn many<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(x.iter().map(|v| super::sig12(*v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_real(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(-1.5), "-1.5");
        assert_eq!(fmt_real(f64::NEG_INFINITY), "-inf");
        assert_eq!(sig12(3f64.ln()), 1.09861228867);
    }
}
