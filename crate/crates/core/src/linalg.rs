//! Gaussian elimination over [`Fp`].
//!
//! Two entry points: [`rank`] reduces a whole matrix at once, while
//! [`Echelon`] keeps a row basis and absorbs rows one at a time. The oracle
//! and simulator use the incremental form; [`crate::is_decodable`] uses the
//! batch form. Tests cross-check the two.

use std::collections::BTreeMap;

use crate::field::Fp;

/// Rank of a dense matrix given as rows of equal length.
pub fn rank(mut rows: Vec<Vec<Fp>>) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut r = 0;
    for col in 0..width {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = rows[r][col].inv();
        for v in rows[r][col..].iter_mut() {
            *v *= inv;
        }
        let (head, tail) = rows.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            let f = row[col];
            if f.is_zero() {
                continue;
            }
            for (dst, &src) in row[col..].iter_mut().zip(&prow[col..]) {
                *dst -= f * src;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Incrementally maintained row echelon basis of width `width`.
///
/// Rows are stored normalised at their pivot and reduced against every
/// earlier basis row, so a candidate is reduced by a single pass in
/// insertion order.
#[derive(Clone, Debug)]
pub struct Echelon {
    width: usize,
    rows: Vec<(usize, Vec<Fp>)>,
}

impl Echelon {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::with_capacity(width),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.width
    }

    /// Inserts the unit vector `e_col`. Returns whether the rank grew.
    pub fn insert_unit(&mut self, col: usize) -> bool {
        let mut v = vec![Fp::ZERO; self.width];
        v[col] = Fp::ONE;
        self.insert(v)
    }

    pub fn insert_sparse(&mut self, coeffs: &BTreeMap<usize, Fp>) -> bool {
        let mut v = vec![Fp::ZERO; self.width];
        for (&k, &c) in coeffs {
            v[k] = c;
        }
        self.insert(v)
    }

    /// Inserts a dense row. Returns whether the rank grew.
    pub fn insert(&mut self, mut v: Vec<Fp>) -> bool {
        debug_assert_eq!(v.len(), self.width);
        if self.is_full() {
            return false;
        }
        for (p, row) in &self.rows {
            let f = v[*p];
            if f.is_zero() {
                continue;
            }
            for (dst, &src) in v.iter_mut().zip(row) {
                *dst -= f * src;
            }
        }
        let Some(pivot) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = v[pivot].inv();
        for c in v.iter_mut() {
            *c *= inv;
        }
        self.rows.push((pivot, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp_rows(raw: &[&[u64]]) -> Vec<Vec<Fp>> {
        raw.iter()
            .map(|r| r.iter().map(|&v| Fp::new(v)).collect())
            .collect()
    }

    #[test]
    fn rank_of_identity_and_zero() {
        let id = fp_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(rank(id), 3);
        assert_eq!(rank(fp_rows(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(Vec::new()), 0);
    }

    #[test]
    fn dependent_rows() {
        let m = fp_rows(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(m), 2);
    }

    #[test]
    fn echelon_rejects_repeats() {
        let mut e = Echelon::new(3);
        assert!(e.insert_unit(1));
        assert!(!e.insert_unit(1));
        let mut c = BTreeMap::new();
        c.insert(0, Fp::new(5));
        c.insert(1, Fp::new(7));
        assert!(e.insert_sparse(&c));
        assert!(!e.insert_unit(0));
        assert!(e.insert_unit(2));
        assert!(e.is_full());
    }

    proptest! {
        #[test]
        fn incremental_matches_batch(
            rows in prop::collection::vec(prop::collection::vec(0u64..5, 4), 0..7)
        ) {
            let m: Vec<Vec<Fp>> = rows.iter()
                .map(|r| r.iter().map(|&v| Fp::new(v)).collect())
                .collect();
            let mut e = Echelon::new(4);
            for r in &m {
                e.insert(r.clone());
            }
            prop_assert_eq!(e.rank(), rank(m));
        }
    }
}
