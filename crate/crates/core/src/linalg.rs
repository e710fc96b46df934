//! Small dense linear-algebra helpers shared by the compiler and verifier.

use nalgebra::{DMatrix, DVector};

use crate::C64;

/// Matrices up to this size get their spectral norm from a full SVD; larger
/// ones fall back to power iteration.
pub const SVD_NORM_MAX: usize = 512;

/// Permutes the axes of a row-major tensor. Axis `i` of the result is axis
/// `perm[i]` of the input.
pub fn permute_axes(data: &[C64], dims: &[usize], perm: &[usize]) -> Vec<C64> {
    debug_assert_eq!(dims.len(), perm.len());
    let rank = dims.len();
    let mut in_strides = vec![1usize; rank];
    for a in (0..rank.saturating_sub(1)).rev() {
        in_strides[a] = in_strides[a + 1] * dims[a + 1];
    }
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();

    let mut out = Vec::with_capacity(data.len());
    let mut idx = vec![0usize; rank];
    let mut offset = 0usize;
    for _ in 0..data.len() {
        out.push(data[offset]);
        // odometer increment over the output axes
        for a in (0..rank).rev() {
            idx[a] += 1;
            offset += strides[a];
            if idx[a] < out_dims[a] {
                break;
            }
            offset -= strides[a] * out_dims[a];
            idx[a] = 0;
        }
    }
    out
}

/// Inverse of a permutation.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// Row-major data to an nalgebra matrix.
pub fn matrix_from_row_major(rows: usize, cols: usize, data: &[C64]) -> DMatrix<C64> {
    DMatrix::from_row_slice(rows, cols, data)
}

/// nalgebra matrix to row-major data.
pub fn row_major(m: &DMatrix<C64>) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}

/// Extends orthonormal columns to a full orthonormal basis of `C^rows`.
///
/// Candidates are the standard basis vectors, taken in order of largest
/// residual, each orthogonalised twice (classical Gram-Schmidt with
/// re-orthogonalisation).
pub fn complete_columns(cols: &DMatrix<C64>) -> DMatrix<C64> {
    let rows = cols.nrows();
    let mut basis: Vec<DVector<C64>> = cols.column_iter().map(|c| c.into_owned()).collect();
    while basis.len() < rows {
        let mut best: Option<(f64, DVector<C64>)> = None;
        for e in 0..rows {
            let mut v = DVector::<C64>::zeros(rows);
            v[e] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let proj = b.dotc(&v);
                    v -= b * proj;
                }
            }
            let norm = v.norm();
            if best.as_ref().is_none_or(|(n, _)| norm > *n + 1e-12) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("rows > 0");
        basis.push(v / C64::new(norm, 0.0));
    }
    DMatrix::from_columns(&basis)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().max(m.ncols()) <= SVD_NORM_MAX {
        let f = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        f.singular_values().expect("SVD converges").into_iter().fold(0.0, f64::max)
    } else {
        power_iteration_norm(m, 2000)
    }
}

/// Spectral norm by power iteration on `M†M`, from a fixed start vector.
pub fn power_iteration_norm(m: &DMatrix<C64>, max_iter: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    // deterministic, generic start vector
    let mut v = DVector::<C64>::from_fn(n, |i, _| {
        C64::new(1.0 + (i as f64 * 0.618_033_988_7).fract(), 0.25 * (i as f64).sin())
    });
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let mut z = m.adjoint() * &w;
        let zn = z.norm();
        if zn == 0.0 {
            return 0.0;
        }
        z /= C64::new(zn, 0.0);
        let next = (m * &z).norm();
        v = z;
        if (next - estimate).abs() <= 1e-15 * next.max(1e-300) {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// `‖M†M − I‖₂`.
pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let gram = m.adjoint() * m - DMatrix::<C64>::identity(m.nrows(), m.ncols());
    spectral_norm(&gram)
}

/// Kronecker product with `a` as the most significant factor.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Smallest power of `base` that is at least `x`.
pub fn next_power(x: usize, base: usize) -> usize {
    let mut p = 1;
    while p < x {
        p *= base;
    }
    p
}

/// Whether `x` is an integer power of `base` (including `base^0 = 1`).
pub fn is_power_of(x: usize, base: usize) -> bool {
    next_power(x, base) == x
}

/// `log_base(x)` as a float.
pub fn log_base(x: usize, base: usize) -> f64 {
    (x as f64).ln() / (base as f64).ln()
}

/// Splits a linear index into mixed-radix digits, most significant first.
pub fn unravel(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for (digit, &dim) in digits.iter_mut().zip(dims).rev() {
        *digit = index % dim;
        index /= dim;
    }
    digits
}

/// Inverse of [`unravel`].
pub fn ravel(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn permute_transposes_a_matrix() {
        let data: Vec<C64> = (0..6).map(|x| c(x as f64)).collect();
        let t = permute_axes(&data, &[2, 3], &[1, 0]);
        let expected: Vec<C64> = [0., 3., 1., 4., 2., 5.].iter().map(|&x| c(x)).collect();
        assert_eq!(t, expected);
    }

    #[test]
    fn permute_then_inverse_is_identity() {
        let dims = [2, 3, 4, 2];
        let data: Vec<C64> = (0..48).map(|x| C64::new(x as f64, -(x as f64))).collect();
        let perm = [2, 0, 3, 1];
        let p = permute_axes(&data, &dims, &perm);
        let pdims: Vec<usize> = perm.iter().map(|&i| dims[i]).collect();
        let back = permute_axes(&p, &pdims, &invert_permutation(&perm));
        assert_eq!(back, data);
    }

    #[test]
    fn completion_gives_a_unitary() {
        let v = DMatrix::from_column_slice(3, 1, &[c(0.6), c(0.0), C64::new(0.0, 0.8)]);
        let full = complete_columns(&v);
        assert!(unitarity_error(&full) < 1e-14);
        assert_eq!(full.column(0), v.column(0));
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let m = DMatrix::from_fn(5, 4, |i, j| C64::new((i * 3 + j) as f64 % 7.0 - 3.0, (i + 2 * j) as f64 % 3.0));
        let a = spectral_norm(&m);
        let b = power_iteration_norm(&m, 5000);
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn radix_round_trip() {
        let dims = [3, 2, 4];
        for i in 0..24 {
            assert_eq!(ravel(&unravel(i, &dims), &dims), i);
        }
        assert_eq!(unravel(5, &dims), vec![0, 1, 1]);
    }

    #[test]
    fn powers() {
        assert_eq!(next_power(3, 2), 4);
        assert_eq!(next_power(1, 2), 1);
        assert_eq!(next_power(4, 3), 9);
        assert!(is_power_of(8, 2));
        assert!(!is_power_of(6, 2));
    }
}
