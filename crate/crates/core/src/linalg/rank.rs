use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::modular::{det_mod, echelon_mod, PRIMES};

/// Which route `rank_with` takes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMode {
    /// Multi-modular rank with a minor certificate, exact fallback on disagreement.
    #[default]
    Modular,
    /// Fraction-free elimination over the integers only.
    Exact,
    /// Both routes; panics if they disagree.
    Verified,
}

/// Rank over the rationals of the column span of `a`.
pub fn rank(a: &IntMatrix) -> usize {
    rank_with(a, RankMode::Modular)
}

pub fn rank_with(a: &IntMatrix, mode: RankMode) -> usize {
    match mode {
        RankMode::Modular => rank_modular(a).unwrap_or_else(|| rank_exact(a)),
        RankMode::Exact => rank_exact(a),
        RankMode::Verified => {
            let exact = rank_exact(a);
            let fast = rank_modular(a).unwrap_or(exact);
            assert_eq!(fast, exact, "modular and exact rank disagree");
            exact
        }
    }
}

/// Rank modulo two primes. Accepted when both agree and the pivot minor found
/// modulo the first prime is also nonzero modulo a third one; `None` otherwise.
///
/// A nonzero minor modulo any prime is a nonzero integer, so the accepted value is a
/// certified lower bound. It can only undercount when both primes divide every minor of
/// the true size; `RankMode::Exact` or `Verified` rules that out.
pub fn rank_modular(a: &IntMatrix) -> Option<usize> {
    if a.rows() == 0 || a.cols() == 0 {
        return Some(0);
    }
    let first = echelon_mod(a, PRIMES[0]);
    let second = echelon_mod(a, PRIMES[1]);
    if first.rank != second.rank {
        return None;
    }
    if first.rank == 0 {
        return Some(0);
    }
    let minor = a.select(&first.pivot_rows, &first.pivot_cols);
    (det_mod(&minor, PRIMES[2]) != 0).then_some(first.rank)
}

/// Fraction-free (Bareiss) elimination.
pub fn rank_exact(a: &IntMatrix) -> usize {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m = a.to_rows();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let (top, rest) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in rest.iter_mut() {
            let lead = row[c].clone();
            for j in c + 1..cols {
                let num = &pivot_row[c] * &row[j] - &lead * &pivot_row[j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division must be exact");
                row[j] = num / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}
