//! Dense symmetric positive-definite linear algebra: Cholesky factorization,
//! log-determinants and linear solves.
//!
//! Matrices are small (one row/column per model coefficient), so everything is
//! stored as a flat row-major `Vec`. Factorization does no pivoting; callers
//! are expected to hand in well-conditioned matrices (the learner adds a ridge
//! term when a prior is configured).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pivots at or below this value are reported as [`Error::NotPositiveDefinite`].
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Square symmetric matrix, row-major.
///
/// Symmetry is checked exactly on construction. Positive definiteness is not
/// a property of the container; it is established by [`cholesky`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Scalar> SpdMatrix<T> {
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidData("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); dim])
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut entries = vec![T::zero(); dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            entries[i * dim + i] = v;
        }
        Self { dim, entries }
    }

    /// Builds a matrix from its upper triangle, mirroring it into the lower
    /// half so the result is symmetric bit for bit.
    pub(crate) fn from_upper(dim: usize, mut entries: Vec<T>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        for i in 0..dim {
            for j in 0..i {
                entries[i * dim + j] = entries[j * dim + i];
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.entries.chunks(self.dim).map(<[T]>::to_vec).collect()
    }

    /// Returns `self + shift·I`.
    pub fn add_diagonal(&self, shift: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += shift;
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        check_len(self.dim, v.len())?;
        Ok(self
            .entries
            .chunks(self.dim)
            .map(|row| crate::scalar::dot(row, v))
            .collect())
    }
}

/// Lower-triangular factor `L` with `L·Lᵀ = A` and a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor<T> {
    dim: usize,
    lower: Vec<T>,
}

impl<T: Scalar> CholeskyFactor<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.lower[row * self.dim + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.lower.chunks(self.dim).map(<[T]>::to_vec).collect()
    }

    /// Multiplies the factor back out into `L·Lᵀ`.
    pub fn reconstruct(&self) -> Vec<Vec<T>> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k)).sum())
                    .collect()
            })
            .collect()
    }

    /// Natural log of the determinant of the factored matrix.
    pub fn log_det(&self) -> T {
        log_det_spd(self)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        solve_spd(self, b)
    }
}

/// Cholesky–Banachiewicz factorization without pivoting.
pub fn cholesky<T: Scalar>(a: &SpdMatrix<T>) -> Result<CholeskyFactor<T>> {
    let n = a.dim;
    let tol = T::lit(PIVOT_TOLERANCE);
    let mut lower = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= lower[i * n + k] * lower[j * n + k];
            }
            if i == j {
                if s.is_nan() || s <= tol {
                    return Err(Error::NotPositiveDefinite {
                        index: i,
                        pivot: s.as_f64(),
                    });
                }
                lower[i * n + i] = s.sqrt();
            } else {
                lower[i * n + j] = s / lower[j * n + j];
            }
        }
    }
    Ok(CholeskyFactor { dim: n, lower })
}

/// `log|A| = 2·Σ log Lᵢᵢ`, in nats.
pub fn log_det_spd<T: Scalar>(factor: &CholeskyFactor<T>) -> T {
    let two = T::lit(2.0);
    two * (0..factor.dim).map(|i| factor.get(i, i).ln()).sum::<T>()
}

/// Solves `A·x = b` by forward then backward substitution.
pub fn solve_spd<T: Scalar>(factor: &CholeskyFactor<T>, b: &[T]) -> Result<Vec<T>> {
    let n = factor.dim;
    check_len(n, b.len())?;
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= factor.get(i, k) * y[k];
        }
        y[i] = s / factor.get(i, i);
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= factor.get(k, i) * y[k];
        }
        y[i] = s / factor.get(i, i);
    }
    Ok(y)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        a.iter()
            .flatten()
            .zip(b.iter().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn identity_factors_to_identity() {
        let f = cholesky(&SpdMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(f.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn two_by_two_factor() {
        let a = SpdMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let f = cholesky(&a).unwrap();
        // [[2,0],[1,√2]]: 2·2 = 4, 2·1 = 2, 1 + 2 = 3.
        assert_eq!(f.get(0, 0), 2.0);
        assert_eq!(f.get(1, 0), 1.0);
        assert_eq!(f.get(0, 1), 0.0);
        assert!((f.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert!(max_abs_diff(&f.reconstruct(), &a.to_rows()) < 1e-10);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn tiny_pivot_is_rejected() {
        let a = SpdMatrix::from_diagonal(&[1.0, 1e-13]);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let err = SpdMatrix::from_rows(&[vec![1.0, 0.5], vec![0.25, 1.0]]).unwrap_err();
        assert_eq!(err, Error::NotSymmetric { row: 0, col: 1 });
    }

    #[test]
    fn log_det_of_identity_and_diagonal() {
        for dim in 1..6 {
            let f = cholesky(&SpdMatrix::<f64>::identity(dim)).unwrap();
            assert_eq!(log_det_spd(&f), 0.0);
        }
        let f = cholesky(&SpdMatrix::from_diagonal(&[2.0, 3.0])).unwrap();
        assert!((log_det_spd(&f) - 6f64.ln()).abs() < 1e-15);
        assert!((log_det_spd(&f) - 1.791759).abs() < 1e-6);
    }

    #[test]
    fn solve_identity_and_two_by_two() {
        let f = cholesky(&SpdMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(solve_spd(&f, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);

        let a = SpdMatrix::from_rows(&[vec![4.0f64, 2.0], vec![2.0, 3.0]]).unwrap();
        let x = solve_spd(&cholesky(&a).unwrap(), &[10.0, 8.0]).unwrap();
        let back = a.mul_vec(&x).unwrap();
        assert!((back[0] - 10.0).abs() < 1e-10 && (back[1] - 8.0).abs() < 1e-10);
    }

    #[test]
    fn solve_dimension_mismatch() {
        let f = cholesky(&SpdMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(
            solve_spd(&f, &[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn works_in_single_precision() {
        let a = SpdMatrix::from_rows(&[vec![4.0f32, 2.0], vec![2.0, 3.0]]).unwrap();
        let f = cholesky(&a).unwrap();
        assert!((f.log_det() - 8f32.ln()).abs() < 1e-6);
    }

    fn spd_strategy() -> impl Strategy<Value = (SpdMatrix<f64>, Vec<f64>)> {
        (1usize..=6, 0.1f64..5.0).prop_flat_map(|(dim, shift)| {
            (
                prop::collection::vec(-2.0f64..2.0, dim * dim),
                prop::collection::vec(-10.0f64..10.0, dim),
            )
                .prop_map(move |(b, rhs)| {
                    let mut upper = vec![0.0; dim * dim];
                    for i in 0..dim {
                        for j in i..dim {
                            let s: f64 = (0..dim).map(|k| b[i * dim + k] * b[j * dim + k]).sum();
                            upper[i * dim + j] = s + if i == j { shift } else { 0.0 };
                        }
                    }
                    (SpdMatrix::from_upper(dim, upper), rhs)
                })
        })
    }

    proptest! {
        #[test]
        fn factor_reconstructs((a, _) in spd_strategy()) {
            let f = cholesky(&a).unwrap();
            prop_assert!(max_abs_diff(&f.reconstruct(), &a.to_rows()) < 1e-10);
            for i in 0..a.dim() {
                prop_assert!(f.get(i, i) > 0.0);
            }
        }

        #[test]
        fn solve_residual_is_small((a, b) in spd_strategy()) {
            let x = solve_spd(&cholesky(&a).unwrap(), &b).unwrap();
            let back = a.mul_vec(&x).unwrap();
            let resid = back.iter().zip(&b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(resid < 1e-8 * (1.0 + bnorm));
        }
    }
}
