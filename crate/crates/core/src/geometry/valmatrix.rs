use num_bigint::BigUint;

use crate::error::Error;
use crate::exactnum::{valuation, BigRat, Valuation};

/// Pairwise `p`-adic valuations `v_p(z_i − z_j)` of a finite point set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValMatrix {
    points: Vec<BigRat>,
    entries: Vec<Vec<Valuation>>,
}

impl ValMatrix {
    pub fn points(&self) -> &[BigRat] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `v_p(z_i − z_j)`; the diagonal is [`Valuation::Infinite`].
    pub fn get(&self, i: usize, j: usize) -> Valuation {
        self.entries[i][j]
    }

    /// Off-diagonal entry as an integer.
    pub fn finite(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j].finite().expect("off-diagonal entry")
    }

    pub fn rows(&self) -> &[Vec<Valuation>] {
        &self.entries
    }

    /// First triple violating `v(i,k) ≥ min(v(i,j), v(j,k))`, if any.
    pub fn ultrametric_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.entries[i][k] < self.entries[i][j].min(self.entries[j][k]) {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }
}

pub(crate) fn reject_duplicates(points: &[BigRat]) -> Result<(), Error> {
    let mut sorted: Vec<&BigRat> = points.iter().collect();
    sorted.sort();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::DuplicatePoint(w[0].to_string())),
        None => Ok(()),
    }
}

pub fn pairwise_valuation_matrix(points: &[BigRat], p: &BigUint) -> Result<ValMatrix, Error> {
    reject_duplicates(points)?;
    let n = points.len();
    let mut entries = vec![vec![Valuation::Infinite; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = valuation(&(&points[i] - &points[j]), p);
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    let m = ValMatrix {
        points: points.to_vec(),
        entries,
    };
    assert!(
        m.ultrametric_violation().is_none(),
        "valuations of differences must be ultrametric"
    );
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<BigRat> {
        v.iter().map(|&(a, b)| BigRat::ratio(a, b)).collect()
    }

    #[test]
    fn small_examples() {
        let two = BigUint::from(2u32);
        let m = pairwise_valuation_matrix(&pts(&[(0, 1), (1, 1), (-1, 1)]), &two).unwrap();
        assert_eq!(m.finite(0, 1), 0);
        assert_eq!(m.finite(0, 2), 0);
        assert_eq!(m.finite(1, 2), 1);
        assert_eq!(m.get(1, 1), Valuation::Infinite);

        let m = pairwise_valuation_matrix(&pts(&[(1, 4), (3, 4)]), &two).unwrap();
        assert_eq!(m.finite(0, 1), -1);

        let m = pairwise_valuation_matrix(&pts(&[(5, 3)]), &two).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), Valuation::Infinite);
    }

    #[test]
    fn duplicates_rejected() {
        let r = pairwise_valuation_matrix(&pts(&[(1, 2), (3, 1), (2, 4)]), &BigUint::from(3u32));
        assert!(matches!(r, Err(Error::DuplicatePoint(_))));
    }
}
