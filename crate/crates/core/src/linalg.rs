use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major, `n x n`.
pub fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("system is not square".into()));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col] == T::zero() || !a[pivot][col].is_finite() {
            return Err(Error::InvalidArgument("singular system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row);
            for (x, &v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x = *x - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail: T = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_system() {
        let a = vec![vec![0.0f64, 2.0], vec![3.0, 1.0]];
        let x = solve(a, vec![4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        assert!(solve(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![1.0, 2.0]).is_err());
    }
}
