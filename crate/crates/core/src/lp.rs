//! Exact feasibility of `{x : A x = 0, x_j ≥ 1}` over the rationals.
//!
//! Phase I of the dense tableau simplex method with Bland's rule, in
//! `BigRational` arithmetic. Degenerate cones (the singular strata) are
//! exactly the inputs a floating-point solver would misclassify.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::intlin::IntMatrix;

/// Returns a witness `x` with `A x = 0` and every `x_j ≥ 1`, or `None`.
pub fn positive_kernel_point(a: &IntMatrix) -> Option<Vec<BigRational>> {
    let m = a.rows();
    let n = a.cols();
    if n == 0 {
        return Some(Vec::new());
    }
    // Substitute x = 1 + y, y ≥ 0:  A y = -A·1.
    let ones = vec![BigInt::one(); n];
    let rhs: Vec<BigInt> = a.mul_vec(&ones).into_iter().map(|v| -v).collect();

    // Tableau rows: [A | I | b], with rows flipped so b ≥ 0.
    let width = n + m + 1;
    let mut t: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let sign = if rhs[i].is_negative() { -BigInt::one() } else { BigInt::one() };
            let mut row = vec![BigRational::zero(); width];
            for j in 0..n {
                row[j] = BigRational::from_integer(&a[(i, j)] * &sign);
            }
            row[n + i] = BigRational::one();
            row[width - 1] = BigRational::from_integer(&rhs[i] * &sign);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of the phase-I objective  min Σ artificials.
    let mut cost = vec![BigRational::zero(); width];
    for row in &t {
        for j in 0..n {
            cost[j] -= &row[j];
        }
        cost[width - 1] -= &row[width - 1];
    }

    loop {
        // Bland: lowest-index column with negative reduced cost.
        let Some(enter) = (0..n + m).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for (i, row) in t.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[width - 1] / &row[enter];
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((r, _)) = leave else {
            // Phase I is bounded below by zero.
            unreachable!("unbounded phase-I objective");
        };
        pivot(&mut t, &mut cost, r, enter);
        basis[r] = enter;
    }

    if !cost[width - 1].is_zero() {
        return None;
    }
    let mut y = vec![BigRational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i][width - 1].clone();
        }
    }
    let x: Vec<BigRational> = y.into_iter().map(|v| v + BigRational::one()).collect();
    debug_assert!(verify(a, &x));
    Some(x)
}

pub fn is_feasible(a: &IntMatrix) -> bool {
    positive_kernel_point(a).is_some()
}

fn pivot(t: &mut [Vec<BigRational>], cost: &mut [BigRational], r: usize, c: usize) {
    let inv = t[r][c].recip();
    for x in t[r].iter_mut() {
        *x *= &inv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[c].is_zero() {
            continue;
        }
        let f = row[c].clone();
        for (x, p) in row.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
    if !cost[c].is_zero() {
        let f = cost[c].clone();
        for (x, p) in cost.iter_mut().zip(&prow) {
            if !p.is_zero() {
                *x -= &f * p;
            }
        }
    }
}

fn verify(a: &IntMatrix, x: &[BigRational]) -> bool {
    x.iter().all(|v| *v >= BigRational::one())
        && (0..a.rows()).all(|i| {
            a.row(i)
                .iter()
                .zip(x)
                .map(|(c, v)| BigRational::from_integer(c.clone()) * v)
                .sum::<BigRational>()
                .is_zero()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(w: &[i64]) -> IntMatrix {
        IntMatrix::from_rows(w.len(), &[w.to_vec()])
    }

    #[test]
    fn examples() {
        assert!(is_feasible(&IntMatrix::zeros(1, 0)));
        assert!(!is_feasible(&circle(&[1, 1])));
        let x = positive_kernel_point(&circle(&[1, -1])).unwrap();
        assert_eq!(x[0], x[1]);
        assert!(is_feasible(&circle(&[0, 0])));
        assert!(is_feasible(&circle(&[1, 1, -1])));
        assert!(!is_feasible(&circle(&[2, 1])));
    }

    #[test]
    fn two_torus() {
        let a = IntMatrix::from_rows(3, &[vec![1, 0, -1], vec![0, 1, -1]]);
        let x = positive_kernel_point(&a).unwrap();
        assert!(x[0] == x[1] && x[1] == x[2]);
        let a = IntMatrix::from_rows(3, &[vec![1, 0, -1], vec![0, 1, 1]]);
        assert!(!is_feasible(&a));
    }

    #[test]
    fn degenerate_redundant_rows() {
        let a = IntMatrix::from_rows(2, &[vec![1, -1], vec![2, -2], vec![0, 0]]);
        assert!(is_feasible(&a));
    }

    proptest! {
        // For a circle action the cone is feasible iff every weight vanishes or
        // both signs occur.
        #[test]
        fn circle_sign_rule(w in proptest::collection::vec(-4i64..=4, 1..7)) {
            let expected = w.iter().all(|&x| x == 0)
                || (w.iter().any(|&x| x > 0) && w.iter().any(|&x| x < 0));
            prop_assert_eq!(is_feasible(&circle(&w)), expected);
        }

        #[test]
        fn witness_is_valid(rows in proptest::collection::vec(
            proptest::collection::vec(-3i64..=3, 5), 1..4)) {
            let a = IntMatrix::from_rows(5, &rows);
            if let Some(x) = positive_kernel_point(&a) {
                prop_assert!(verify(&a, &x));
            }
        }
    }
}
