use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::matrix::IntMatrix;
use super::normal_form::{hnf, snf};
use crate::error::{Error, Result};

/// Basis (as columns) of the integer kernel `{v : A·v = 0}`.
///
/// The kernel of an integer matrix is a saturated lattice; the basis returned here
/// comes from the Hermite transform of `Aᵀ`, so it has exactly `cols − rank(A)` columns.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let (h, u) = hnf(&a.transpose());
    let cols: Vec<Vec<BigInt>> = (0..h.rows())
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .map(|i| u.row(i).to_vec())
        .collect();
    IntMatrix::from_columns(&cols, a.cols()).expect("kernel columns have the right length")
}

/// Integer solution of `A·x = b`, or `None` when `b` is outside the column lattice of `A`.
pub fn solve_in_lattice(a: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for a matrix with {} rows",
            b.len(),
            a.rows()
        )));
    }
    // U·A·V = D, so A·x = b  <=>  D·y = U·b with x = V·y
    let s = snf(a);
    let c = s.u.mul_vec(b)?;
    let k = s.diagonal.len();
    if c[k..].iter().any(|x| !x.is_zero()) {
        return Ok(None);
    }
    let mut y = vec![BigInt::zero(); a.cols()];
    for i in 0..k {
        let (q, r) = c[i].div_rem(&s.diagonal[i]);
        if !r.is_zero() {
            return Ok(None);
        }
        y[i] = q;
    }
    Ok(Some(s.v.mul_vec(&y)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&IntMatrix::from_i64(&[&[1, 1], &[1, 1]]));
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        assert_eq!(&v[0] + &v[1], BigInt::zero());
        assert!(!v[0].is_zero());

        assert_eq!(kernel_basis(&IntMatrix::identity(3)).cols(), 0);

        let z = kernel_basis(&IntMatrix::zeros(1, 1));
        assert_eq!(z.cols(), 1);
        assert_eq!(z.column(0)[0].clone().magnitude().clone(), num_bigint::BigUint::from(1u8));
    }

    #[test]
    fn kernel_is_saturated() {
        // 2x - 4y = 0 has kernel spanned by (2, 1), not by (4, 2)
        let a = IntMatrix::from_i64(&[&[2, -4]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        let g = v[0].gcd(&v[1]);
        assert_eq!(g, BigInt::from(1));
        assert!(a.mul_vec(&v).unwrap().iter().all(Zero::is_zero));
        assert_eq!(k.cols(), a.cols() - rank(&a));
    }

    #[test]
    fn solve_examples() {
        let two = IntMatrix::from_i64(&[&[2]]);
        assert_eq!(solve_in_lattice(&two, &big(&[4])).unwrap(), Some(big(&[2])));
        assert_eq!(solve_in_lattice(&two, &big(&[3])).unwrap(), None);
        let id = IntMatrix::identity(3);
        assert_eq!(solve_in_lattice(&id, &big(&[5, -1, 7])).unwrap(), Some(big(&[5, -1, 7])));
        assert!(solve_in_lattice(&id, &big(&[1])).is_err());
    }

    #[test]
    fn solve_on_empty_lattice() {
        let empty = IntMatrix::zeros(2, 0);
        assert_eq!(solve_in_lattice(&empty, &big(&[0, 0])).unwrap(), Some(vec![]));
        assert_eq!(solve_in_lattice(&empty, &big(&[0, 1])).unwrap(), None);
    }
}
