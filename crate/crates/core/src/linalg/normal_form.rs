//! Hermite and Smith normal forms over the integers, with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal (rectangular padding).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero invariant factors `d_1 | d_2 | … | d_k`, all positive; `k` is the rank.
    pub diagonal: Vec<BigInt>,
}

/// Row-style Hermite normal form: returns `(H, U)` with `U · A = H`.
///
/// Pivots are positive and entries above each pivot lie in `[0, pivot)`, so two
/// matrices with the same row lattice have identical nonzero rows.
pub fn hnf(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        for i in r + 1..rows {
            if h[(i, c)].is_zero() {
                continue;
            }
            if h[(r, c)].is_zero() {
                h.swap_rows(r, i);
                u.swap_rows(r, i);
                continue;
            }
            let x = h[(r, c)].clone();
            let y = h[(i, c)].clone();
            if (&y % &x).is_zero() {
                let q = -(&y / &x);
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                continue;
            }
            let eg = x.extended_gcd(&y);
            let xg = &x / &eg.gcd;
            let yg = &y / &eg.gcd;
            let neg_yg = -yg;
            let coeffs = [&eg.x, &eg.y, &neg_yg, &xg];
            h.combine_rows(r, i, coeffs);
            u.combine_rows(r, i, coeffs);
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let pivot = h[(r, c)].clone();
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&pivot);
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    (h, u)
}

/// Nonzero rows of the Hermite form: a canonical basis of the row lattice.
pub fn hnf_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (h, _) = hnf(a);
    h.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect()
}

pub fn snf(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        let Some((pi, pj)) = smallest_nonzero(&d, t) else {
            break;
        };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let q = -(&d[(i, t)] / &d[(t, t)]);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let q = -(&d[(t, j)] / &d[(t, t)]);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                // a remainder smaller than the pivot survived; make it the pivot
                let (pi, pj) = smallest_in_cross(&d, t);
                d.swap_rows(t, pi);
                u.swap_rows(t, pi);
                d.swap_cols(t, pj);
                v.swap_cols(t, pj);
                continue;
            }
            let pivot = d[(t, t)].clone();
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(&d[(i, j)] % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
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
        t += 1;
    }
    let diagonal = (0..t).map(|i| d[(i, i)].clone()).collect();
    SmithDecomposition { u, d, v, diagonal }
}

fn smallest_nonzero(d: &IntMatrix, t: usize) -> Option<(usize, usize)> {
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

fn smallest_in_cross(d: &IntMatrix, t: usize) -> (usize, usize) {
    let mut best = (t, t);
    let cands = (t..d.rows()).map(|i| (i, t)).chain((t + 1..d.cols()).map(|j| (t, j)));
    for (i, j) in cands {
        let x = &d[(i, j)];
        if !x.is_zero() && (d[best].is_zero() || x.abs() < d[best].abs()) {
            best = (i, j);
        }
    }
    best
}

/// Determinant via fraction-free elimination; used to check unimodularity.
pub fn determinant(a: &IntMatrix) -> BigInt {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut m = a.to_rows();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if piv != c {
            m.swap(c, piv);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                m[i][j] = (&m[c][c] * &m[i][j] - &m[i][c] * &m[c][j]) / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[c][c].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &m[n - 1][n - 1]
}
