//! Word-size prime field arithmetic used by the fast rank path.
//!
//! The primes sit just below 2^62 so that products fit in `u128` and sums of two
//! residues never overflow `u64`.

use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;

use super::matrix::IntMatrix;

/// Fixed primes; fixed so that every run is reproducible.
pub const PRIMES: [u64; 4] = [
    4_611_686_018_427_387_847,
    4_611_686_018_427_387_817,
    4_611_686_018_427_387_787,
    4_611_686_018_427_387_761,
];

#[inline]
pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue (Fermat).
pub fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

pub fn reduce(x: &BigInt, p: u64) -> u64 {
    if let Some(small) = x.to_i64() {
        let r = small.rem_euclid(p as i64);
        return r as u64;
    }
    let m = BigInt::from(p);
    let r = x % &m;
    let r = if r.sign() == Sign::Minus { r + m } else { r };
    r.to_u64().expect("residue fits in u64")
}

/// Result of Gaussian elimination modulo a prime.
#[derive(Clone, Debug)]
pub struct ModularEchelon {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

/// Row-reduces `a` modulo `p`, returning the rank together with the row and
/// column indices of a nonsingular `rank × rank` minor.
pub fn echelon_mod(a: &IntMatrix, p: u64) -> ModularEchelon {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m: Vec<Vec<u64>> = (0..rows).map(|i| a.row(i).iter().map(|x| reduce(x, p)).collect()).collect();
    let mut row_ids: Vec<usize> = (0..rows).collect();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, piv);
        row_ids.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        for x in &mut m[r][c..] {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = m[r].clone();
        for row in m.iter_mut().skip(r + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                row[j] = sub_mod(row[j], mul_mod(f, pivot_row[j], p), p);
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let mut pivot_rows = row_ids[..r].to_vec();
    pivot_rows.sort_unstable();
    ModularEchelon { rank: r, pivot_rows, pivot_cols }
}

/// Determinant of a square matrix modulo `p`.
pub fn det_mod(a: &IntMatrix, p: u64) -> u64 {
    assert!(a.is_square());
    let n = a.rows();
    let mut m: Vec<Vec<u64>> = (0..n).map(|i| a.row(i).iter().map(|x| reduce(x, p)).collect()).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&i| m[i][c] != 0) else {
            return 0;
        };
        if piv != c {
            m.swap(c, piv);
            det = sub_mod(0, det, p);
        }
        det = mul_mod(det, m[c][c], p);
        let inv = inv_mod(m[c][c], p);
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = mul_mod(row[c], inv, p);
            if f == 0 {
                continue;
            }
            for (x, &y) in row[c..].iter_mut().zip(&pivot[c..]) {
                *x = sub_mod(*x, mul_mod(f, y, p), p);
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues_of_negative_and_large_values() {
        let p = PRIMES[0];
        assert_eq!(reduce(&BigInt::from(-1), p), p - 1);
        let big = BigInt::from(p) * BigInt::from(p) + BigInt::from(5);
        assert_eq!(reduce(&big, p), 5);
        assert_eq!(reduce(&-big, p), p - 5);
    }

    #[test]
    fn inverse_round_trip() {
        let p = PRIMES[1];
        for a in [1u64, 2, 3, 12345, p - 1] {
            assert_eq!(mul_mod(a, inv_mod(a, p), p), 1);
        }
    }

    #[test]
    fn det_matches_hand_value() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let p = PRIMES[0];
        assert_eq!(det_mod(&a, p), p - 8);
    }
}
