//! Hermite normal form of integer lattices and rational kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// Row-style Hermite normal form of the lattice spanned by the rows of `m`.
///
/// The result has one row per basis vector (its rank), is in row echelon form
/// with positive pivots, and every entry above a pivot lies in `[0, pivot)`.
/// Two generating sets span the same lattice iff their forms are equal.
pub fn row_hnf(m: &IntMatrix) -> IntMatrix {
    let mut a = m.clone();
    let rows = a.rows();
    let cols = a.cols();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let pivot = (r..rows)
                .filter(|&i| !a[(i, col)].is_zero())
                .min_by(|&i, &j| a[(i, col)].abs().cmp(&a[(j, col)].abs()));
            let Some(p) = pivot else { break };
            a.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if a[(i, col)].is_zero() {
                    continue;
                }
                let q = a[(i, col)].div_floor(&a[(r, col)]);
                a.add_row_multiple(i, r, &-q);
                if !a[(i, col)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[(r, col)].is_zero() {
            continue;
        }
        if a[(r, col)].is_negative() {
            a.negate_row(r);
        }
        for i in 0..r {
            let q = a[(i, col)].div_floor(&a[(r, col)]);
            a.add_row_multiple(i, r, &-q);
        }
        r += 1;
    }
    let kept: Vec<Vec<BigInt>> = (0..r).map(|i| a.row(i).to_vec()).collect();
    IntMatrix::from_rows(cols, &kept)
}

/// Membership of `v` in the lattice whose row HNF is `hnf`.
pub fn lattice_contains(hnf: &IntMatrix, v: &[BigInt]) -> bool {
    assert_eq!(hnf.cols(), v.len());
    let mut rest = v.to_vec();
    for i in 0..hnf.rows() {
        let row = hnf.row(i);
        let Some(col) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        if rest[..col].iter().any(|x| !x.is_zero()) {
            return false;
        }
        let (q, rem) = rest[col].div_rem(&row[col]);
        if !rem.is_zero() {
            return false;
        }
        for (r, h) in rest.iter_mut().zip(row) {
            *r -= &q * h;
        }
    }
    rest.iter().all(Zero::is_zero)
}

/// Basis of the rational kernel `{x : m·x = 0}` from reduced row echelon form.
pub fn rational_kernel(m: &IntMatrix) -> Vec<Vec<BigRational>> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.to_rational_rows();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                x[p] = -a[i][f].clone();
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_is_generator_independent() {
        let a = IntMatrix::from_rows(2, &[vec![2, 0], vec![0, 3]]);
        let b = IntMatrix::from_rows(2, &[vec![2, 3], vec![4, 3], vec![-2, 0]]);
        assert_eq!(row_hnf(&a), row_hnf(&b));
    }

    #[test]
    fn hnf_drops_dependent_rows() {
        let a = IntMatrix::from_rows(3, &[vec![1, 2, 3], vec![2, 4, 6]]);
        let h = row_hnf(&a);
        assert_eq!(h.rows(), 1);
        assert_eq!(h.row(0), &[BigInt::from(1), BigInt::from(2), BigInt::from(3)]);
    }

    #[test]
    fn membership() {
        let h = row_hnf(&IntMatrix::from_rows(2, &[vec![2, 1], vec![0, 3]]));
        let v = |a: i64, b: i64| vec![BigInt::from(a), BigInt::from(b)];
        assert!(lattice_contains(&h, &v(2, 4)));
        assert!(lattice_contains(&h, &v(0, -3)));
        assert!(!lattice_contains(&h, &v(1, 0)));
        assert!(!lattice_contains(&h, &v(2, 2)));
        assert!(lattice_contains(&IntMatrix::zeros(0, 2), &v(0, 0)));
    }

    #[test]
    fn kernel_annihilates() {
        let m = IntMatrix::from_rows(4, &[vec![1, 0, -1, 2], vec![0, 1, -1, 0]]);
        let k = rational_kernel(&m);
        assert_eq!(k.len(), 2);
        for x in &k {
            for i in 0..m.rows() {
                let s: BigRational = m
                    .row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| BigRational::from_integer(a.clone()) * b)
                    .sum();
                assert!(s.is_zero());
            }
        }
    }
}
