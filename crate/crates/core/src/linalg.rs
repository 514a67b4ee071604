//! Dense linear-algebra helpers shared by the set and learning modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column-major vectorization.
pub fn vec(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`]: reshapes a vector into a matrix with `rows` rows, column-major.
pub fn reshape_convert(b: &DVector<f64>, rows: usize) -> Result<DMatrix<f64>> {
    let len = b.len();
    if rows == 0 || !len.is_multiple_of(rows) {
        return Err(Error::NotDivisible { len, rows });
    }
    Ok(DMatrix::from_column_slice(rows, len / rows, b.as_slice()))
}

fn svd_threshold(m: &DMatrix<f64>, sigma_max: f64) -> f64 {
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sigma_max
}

/// Numerical rank with relative threshold `max(dim) · eps · σ_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    let tol = svd_threshold(m, smax);
    sv.iter().filter(|s| **s > tol).count()
}

/// Moore–Penrose pseudo-inverse via SVD, same threshold as [`numerical_rank`].
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if m.is_empty() {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let sv = &svd.singular_values;
    let smax = sv.max();
    let tol = svd_threshold(m, smax);
    let mut out = DMatrix::zeros(c, r);
    for (k, s) in sv.iter().enumerate() {
        if *s > tol && smax > 0.0 {
            out += (vt.row(k).transpose() / *s) * u.column(k).transpose();
        }
    }
    out
}

/// `∏ₖ alpha[k]^{e[k]}`, skipping zero exponents.
#[inline]
pub fn monomial(e: &[u32], alpha: &[f64]) -> f64 {
    let mut v = 1.0;
    for (k, &p) in e.iter().enumerate() {
        if p != 0 {
            v *= alpha[k].powi(p as i32);
        }
    }
    v
}

/// Block-diagonal stacking of two matrices.
pub fn blkdiag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Side-by-side concatenation of matrices with equal row counts.
pub fn hcat<T: nalgebra::Scalar>(rows: usize, parts: &[&DMatrix<T>]) -> DMatrix<T> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for p in parts {
        debug_assert_eq!(p.nrows(), rows);
        data.extend_from_slice(p.as_slice());
    }
    DMatrix::from_vec(rows, cols, data)
}

/// Vertical concatenation of vectors.
pub fn vcat(parts: &[&DVector<f64>]) -> DVector<f64> {
    DVector::from_iterator(
        parts.iter().map(|p| p.len()).sum(),
        parts.iter().flat_map(|p| p.iter().copied()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reshape_examples() {
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let m = reshape_convert(&b, 2).unwrap();
        assert_eq!(
            m,
            DMatrix::from_row_slice(2, 3, &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0])
        );
        let one = reshape_convert(&DVector::from_vec(vec![7.0]), 1).unwrap();
        assert_eq!(one, DMatrix::from_element(1, 1, 7.0));
        assert_eq!(
            reshape_convert(&DVector::zeros(5), 2),
            Err(Error::NotDivisible { len: 5, rows: 2 })
        );
    }

    #[test]
    fn reshape_inverts_vec() {
        let m = DMatrix::from_fn(3, 4, |i, j| (i * 7 + j) as f64 - 2.5);
        assert_eq!(reshape_convert(&vec(&m), 3).unwrap(), m);
    }

    #[test]
    fn pinv_of_full_row_rank_is_right_inverse() {
        let d = DMatrix::from_fn(3, 7, |i, j| {
            ((i + 1) * (j + 2)) as f64 % 5.0 + (i == j) as u8 as f64
        });
        assert_eq!(numerical_rank(&d), 3);
        let p = pinv(&d);
        assert!((&d * &p - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn rank_deficiency_detected() {
        let mut d = DMatrix::from_fn(3, 6, |i, j| (i as f64 + 1.0).powi(j as i32 % 3));
        let r0 = d.row(0).clone_owned();
        d.row_mut(2).copy_from(&(r0 * 2.0));
        assert_eq!(numerical_rank(&d), 2);
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 2)), 0);
    }
}
