//! Smith normal form with unimodular transforms.
//!
//! For an integer matrix `M` we compute unimodular `U`, `V` and a diagonal `D`
//! with `U·M·V = D`, `D[i][i] ≥ 0` and `D[i][i] | D[i+1][i+1]`. The pivot order
//! is fixed (smallest magnitude, first in row-major order), so the output is a
//! deterministic function of the input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    /// Diagonal entries of `D` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d[(i, i)].clone())
            .collect()
    }

    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let rows = m.rows();
    let cols = m.cols();
    let mut d = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = smallest_entry(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            clear_column(&mut d, &mut u, t);
            if !clear_row(&mut d, &mut v, t) {
                // Row clearing may have refilled the column.
                continue;
            }
            match non_divisible_row(&d, t) {
                Some(i) => {
                    let one = BigInt::from(1);
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }

        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }

    SnfResult { u, d, v }
}

fn smallest_entry(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..d.rows() {
        for j in t..d.cols() {
            let x = &d[(i, j)];
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Zeroes `d[i][t]` for `i > t` by unimodular row operations.
fn clear_column(d: &mut IntMatrix, u: &mut IntMatrix, t: usize) {
    for i in t + 1..d.rows() {
        if d[(i, t)].is_zero() {
            continue;
        }
        let a = d[(t, t)].clone();
        let b = d[(i, t)].clone();
        if b.is_multiple_of(&a) {
            let q = -(&b / &a);
            d.add_row_multiple(i, t, &q);
            u.add_row_multiple(i, t, &q);
        } else {
            let e = a.extended_gcd(&b);
            let c = -(&b / &e.gcd);
            let dd = &a / &e.gcd;
            d.combine_rows(t, i, [&e.x, &e.y, &c, &dd]);
            u.combine_rows(t, i, [&e.x, &e.y, &c, &dd]);
        }
    }
}

/// Zeroes `d[t][j]` for `j > t`; returns true when column `t` is still clean.
fn clear_row(d: &mut IntMatrix, v: &mut IntMatrix, t: usize) -> bool {
    let mut column_clean = true;
    for j in t + 1..d.cols() {
        if d[(t, j)].is_zero() {
            continue;
        }
        let a = d[(t, t)].clone();
        let b = d[(t, j)].clone();
        if b.is_multiple_of(&a) {
            let q = -(&b / &a);
            d.add_col_multiple(j, t, &q);
            v.add_col_multiple(j, t, &q);
        } else {
            let e = a.extended_gcd(&b);
            let c = -(&b / &e.gcd);
            let dd = &a / &e.gcd;
            d.combine_cols(t, j, [&e.x, &e.y, &c, &dd]);
            v.combine_cols(t, j, [&e.x, &e.y, &c, &dd]);
            column_clean = false;
        }
    }
    column_clean && (t + 1..d.rows()).all(|i| d[(i, t)].is_zero())
}

fn non_divisible_row(d: &IntMatrix, t: usize) -> Option<usize> {
    let p = &d[(t, t)];
    if p.is_zero() {
        return None;
    }
    (t + 1..d.rows()).find(|&i| (t + 1..d.cols()).any(|j| !d[(i, j)].is_multiple_of(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(m: &IntMatrix) -> SnfResult {
        let r = smith_normal_form(m);
        assert_eq!(&(&r.u * m) * &r.v, r.d, "U·M·V != D for {m:?}");
        assert!(r.u.is_unimodular());
        assert!(r.v.is_unimodular());
        for i in 0..r.d.rows() {
            for j in 0..r.d.cols() {
                if i != j {
                    assert!(r.d[(i, j)].is_zero());
                }
            }
        }
        let diag = r.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]), "{:?} does not divide {:?}", w[0], w[1]);
            }
        }
        r
    }

    #[test]
    fn zero_one_by_one() {
        let r = check(&IntMatrix::zeros(1, 1));
        assert_eq!(r.d, IntMatrix::zeros(1, 1));
        assert_eq!(r.u, IntMatrix::identity(1));
        assert_eq!(r.v, IntMatrix::identity(1));
    }

    #[test]
    fn coprime_diagonal_merges() {
        let r = check(&IntMatrix::from_rows(2, &[vec![2, 0], vec![0, 3]]));
        assert_eq!(r.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn identity_is_fixed() {
        let r = check(&IntMatrix::identity(3));
        assert_eq!(r.d, IntMatrix::identity(3));
    }

    #[test]
    fn empty_shapes() {
        for (r, c) in [(0, 0), (0, 3), (2, 0)] {
            let res = check(&IntMatrix::zeros(r, c));
            assert_eq!(res.u.rows(), r);
            assert_eq!(res.v.rows(), c);
        }
    }

    #[test]
    fn known_invariant_factors() {
        // Classic example with invariant factors 2, 6, 12.
        let m = IntMatrix::from_rows(
            3,
            &[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]],
        );
        let r = check(&m);
        assert_eq!(
            r.diagonal(),
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
    }

    fn arb_matrix() -> impl Strategy<Value = IntMatrix> {
        (0usize..6, 0usize..6).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-30i64..=30, r * c).prop_map(move |v| {
                let rows: Vec<Vec<i64>> = v.chunks(c.max(1)).map(|ch| ch.to_vec()).collect();
                if c == 0 {
                    IntMatrix::zeros(r, 0)
                } else {
                    IntMatrix::from_rows(c, &rows)
                }
            })
        })
    }

    proptest! {
        #[test]
        fn recomposition_is_exact(m in arb_matrix()) {
            let r = check(&m);
            prop_assert_eq!(r.rank(), m.rank());
        }

        #[test]
        fn deterministic(m in arb_matrix()) {
            prop_assert_eq!(smith_normal_form(&m), smith_normal_form(&m));
        }
    }
}
