//! Dense real linear algebra shared by the solver, the rate bounds and the
//! optimizers.
//!
//! Everything here works on small, dense, row-major `f64` storage. The only
//! decompositions are cyclic Jacobi (symmetric eigenproblems) and Cholesky
//! (log-determinants and SPD solves).

mod cholesky;
mod eigen;
mod qr;

pub use cholesky::{logdet, solve_spd, Cholesky};
pub use qr::HouseholderQr;
pub use eigen::{eig_extremes, symmetric_eigen, EigenExtremes, SymmetricEigen, DEFAULT_DIM_CAP};

use crate::distribution::DistributionVector;
use crate::error::{Error, Result};

/// Smallest row norm accepted by [`row_normalize`].
pub const ZERO_ROW_THRESHOLD: f64 = 1e-300;

/// `sigma_min / sigma_max` at or below which a matrix counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Row-major dense real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        Ok(self.row_iter().map(|r| dot(r, x)).collect())
    }

    /// `AᵀA`.
    pub fn gram(&self) -> SymmetricMatrix {
        let n = self.cols;
        let mut out = vec![0.0; n * n];
        for r in self.row_iter() {
            rank_one_update(&mut out, n, 1.0, r);
        }
        SymmetricMatrix::from_upper(n, out)
    }

    /// Multiplies row `i` by `scales[i]`.
    pub fn scale_rows(&self, scales: &[f64]) -> Result<DenseMatrix> {
        check_len(self.rows, scales.len())?;
        let data = self
            .row_iter()
            .zip(scales)
            .flat_map(|(r, &s)| r.iter().map(move |v| v * s))
            .collect();
        DenseMatrix::new(self.rows, self.cols, data)
    }

    /// Same rows in the order `perm[0], perm[1], ...`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<DenseMatrix> {
        check_len(self.rows, perm.len())?;
        let mut data = Vec::with_capacity(self.data.len());
        for &i in perm {
            if i >= self.rows {
                return Err(Error::DimensionMismatch {
                    expected: self.rows,
                    found: i,
                });
            }
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix::new(self.rows, self.cols, data)
    }
}

/// Dense symmetric matrix, full storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Accepts a square matrix whose asymmetry is within `1e-14` of its
    /// largest entry; the stored matrix is the symmetric part.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                found: m.cols,
            });
        }
        let n = m.rows;
        let scale = m.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let mut data = m.data.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (m.get(i, j), m.get(j, i));
                let defect = (a - b).abs();
                if defect > 1e-14 * scale {
                    return Err(Error::NotSymmetric { defect });
                }
                let avg = 0.5 * (a + b);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Ok(Self { dim: n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_dense(&DenseMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self { dim: n, data }
    }

    /// Mirrors the upper triangle of `data` into the lower one.
    pub(crate) fn from_upper(dim: usize, mut data: Vec<f64>) -> Self {
        for i in 0..dim {
            for j in 0..i {
                data[i * dim + j] = data[j * dim + i];
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `M + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.data[i * self.dim + i] += shift;
        }
        out
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, x.len())?;
        Ok(self.data.chunks_exact(self.dim).map(|r| dot(r, x)).collect())
    }

    /// `yᵀMy`.
    pub fn quadratic_form(&self, y: &[f64]) -> Result<f64> {
        Ok(dot(&self.mul_vec(y)?, y))
    }
}

/// Unit-row matrix `B`, the original row norms and the right-hand side.
#[derive(Clone, Debug)]
pub struct NormalizedSystem {
    unit_rows: DenseMatrix,
    row_norms: Vec<f64>,
    rhs: Vec<f64>,
}

impl NormalizedSystem {
    pub fn unit_rows(&self) -> &DenseMatrix {
        &self.unit_rows
    }

    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn rows(&self) -> usize {
        self.unit_rows.rows
    }

    pub fn cols(&self) -> usize {
        self.unit_rows.cols
    }

    /// Right-hand side entry of the unit-row equation `bᵢᵀx = bᵢ_val/‖aᵢ‖`.
    pub fn scaled_rhs(&self, i: usize) -> f64 {
        self.rhs[i] / self.row_norms[i]
    }

    /// `pᵢ = ‖aᵢ‖² / ‖A‖_F²`, the classical randomized Kaczmarz distribution.
    pub fn row_norm_distribution(&self) -> DistributionVector {
        DistributionVector::proportional_to_squares(&self.row_norms)
            .expect("row norms are strictly positive")
    }

    /// Reconstructs `A` from the unit rows and the norms.
    pub fn original_matrix(&self) -> DenseMatrix {
        self.unit_rows
            .scale_rows(&self.row_norms)
            .expect("row_norms has one entry per row")
    }

    /// Errors with `RankDeficient` unless `sigma_min(B) > RANK_TOLERANCE · sigma_max(B)`.
    pub fn check_full_column_rank(&self) -> Result<()> {
        check_full_column_rank(&self.unit_rows)
    }
}

pub fn check_full_column_rank(a: &DenseMatrix) -> Result<()> {
    if a.rows < a.cols {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let ext = eig_extremes(&a.gram(), 1e-14)?;
    let ratio = (ext.lambda_min.max(0.0) / ext.lambda_max).sqrt();
    if !(ratio > RANK_TOLERANCE) {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(())
}

/// Divides every row of `A` by its Euclidean norm.
///
/// No shape or rank requirement is enforced here; consumers that need full
/// column rank call [`NormalizedSystem::check_full_column_rank`].
pub fn row_normalize(a: &DenseMatrix, b: &[f64]) -> Result<NormalizedSystem> {
    check_len(a.rows, b.len())?;
    let mut row_norms = Vec::with_capacity(a.rows);
    let mut data = Vec::with_capacity(a.data.len());
    for (i, r) in a.row_iter().enumerate() {
        let norm = norm2(r);
        if !(norm >= ZERO_ROW_THRESHOLD) {
            return Err(Error::ZeroRow(i));
        }
        row_norms.push(norm);
        data.extend(r.iter().map(|v| v / norm));
    }
    Ok(NormalizedSystem {
        unit_rows: DenseMatrix::new(a.rows, a.cols, data)?,
        row_norms,
        rhs: b.to_vec(),
    })
}

/// `M = Σᵢ pᵢ bᵢbᵢᵀ = BᵀD(p)B`.
pub fn weighted_gram(b: &DenseMatrix, p: &DistributionVector) -> Result<SymmetricMatrix> {
    weighted_gram_raw(b, p.as_slice())
}

/// [`weighted_gram`] for arbitrary nonnegative weights (e.g. an unnormalized design).
pub fn weighted_gram_raw(b: &DenseMatrix, weights: &[f64]) -> Result<SymmetricMatrix> {
    check_len(b.rows, weights.len())?;
    let n = b.cols;
    let mut out = vec![0.0; n * n];
    for (r, &w) in b.row_iter().zip(weights) {
        if w != 0.0 {
            rank_one_update(&mut out, n, w, r);
        }
    }
    Ok(SymmetricMatrix::from_upper(n, out))
}

/// Adds `w·rrᵀ` to the upper triangle of `out`.
fn rank_one_update(out: &mut [f64], n: usize, w: f64, r: &[f64]) {
    for i in 0..n {
        let wi = w * r[i];
        if wi == 0.0 {
            continue;
        }
        let row = &mut out[i * n..(i + 1) * n];
        for j in i..n {
            row[j] += wi * r[j];
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn normalizes_axis_aligned_rows() {
        let a = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 4.0]]).unwrap();
        let sys = row_normalize(&a, &[6.0, 4.0]).unwrap();
        assert_eq!(sys.unit_rows(), &DenseMatrix::identity(2));
        assert_eq!(sys.row_norms(), &[3.0, 4.0]);
        assert_eq!(sys.rhs(), &[6.0, 4.0]);
    }

    #[test]
    fn normalizes_single_row() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let sys = row_normalize(&a, &[2.0]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert_close(sys.unit_rows().get(0, 0), h, 1e-15);
        assert_close(sys.unit_rows().get(0, 1), h, 1e-15);
        assert_close(sys.row_norms()[0], 2f64.sqrt(), 1e-15);
    }

    #[test]
    fn rejects_zero_row() {
        let a = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(row_normalize(&a, &[0.0, 1.0]), Err(Error::ZeroRow(0))));
    }

    #[test]
    fn rejects_rhs_of_wrong_length() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(
            row_normalize(&a, &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn rejects_nonfinite_entries() {
        assert!(matches!(
            DenseMatrix::from_rows(&[[1.0, f64::NAN]]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn gram_of_identity_rows() {
        let p = DistributionVector::new(vec![0.3, 0.7]).unwrap();
        let m = weighted_gram(&DenseMatrix::identity(2), &p).unwrap();
        assert_eq!(m, SymmetricMatrix::from_diagonal(&[0.3, 0.7]));
    }

    #[test]
    fn gram_sums_duplicate_rows() {
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let p = DistributionVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        let m = weighted_gram(&b, &p).unwrap();
        assert_eq!(m, SymmetricMatrix::from_diagonal(&[0.5, 0.5]));
    }

    #[test]
    fn gram_rejects_wrong_length() {
        let p = DistributionVector::uniform(3);
        assert!(weighted_gram(&DenseMatrix::identity(2), &p).is_err());
    }

    #[test]
    fn symmetric_rejects_asymmetry() {
        assert!(matches!(
            SymmetricMatrix::from_rows(&[[1.0, 2.0], [2.1, 1.0]]),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn full_rank_check() {
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            check_full_column_rank(&b),
            Err(Error::RankDeficient { .. })
        ));
        assert!(check_full_column_rank(&DenseMatrix::identity(3)).is_ok());
    }
}
