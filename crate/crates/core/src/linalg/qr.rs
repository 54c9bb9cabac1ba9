//! Householder QR for tall dense matrices, used for least-squares solves
//! whose normal equations would square the condition number.

use crate::error::{Error, Result};

/// `A = QR` for a row-major `rows × cols` matrix with `rows ≥ cols`.
#[derive(Clone, Debug)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    /// Reflector `k` occupies column `k` from row `k` down; `R` sits above
    /// the diagonal with its diagonal in `diag`.
    data: Vec<f64>,
    diag: Vec<f64>,
}

impl HouseholderQr {
    pub fn factor(rows: usize, cols: usize, mut data: Vec<f64>) -> Result<Self> {
        if rows < cols {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: rows,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let mut diag = vec![0.0; cols];
        for k in 0..cols {
            let norm = (k..rows)
                .map(|i| data[i * cols + k].powi(2))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return Err(Error::NotPositiveDefinite {
                    pivot: k,
                    value: 0.0,
                });
            }
            let alpha = if data[k * cols + k] > 0.0 { -norm } else { norm };
            data[k * cols + k] -= alpha;
            let vnorm_sq: f64 = (k..rows).map(|i| data[i * cols + k].powi(2)).sum();
            for j in k + 1..cols {
                let s: f64 = (k..rows).map(|i| data[i * cols + k] * data[i * cols + j]).sum();
                let f = 2.0 * s / vnorm_sq;
                for i in k..rows {
                    data[i * cols + j] -= f * data[i * cols + k];
                }
            }
            // store the reflector with unit 2-norm scaling folded in
            let scale = (2.0 / vnorm_sq).sqrt();
            for i in k..rows {
                data[i * cols + k] *= scale;
            }
            diag[k] = alpha;
        }
        Ok(Self {
            rows,
            cols,
            data,
            diag,
        })
    }

    /// `y ← Qᵀy`.
    fn apply_qt(&self, y: &mut [f64]) {
        let c = self.cols;
        for k in 0..c {
            let s: f64 = (k..self.rows).map(|i| self.data[i * c + k] * y[i]).sum();
            for i in k..self.rows {
                y[i] -= s * self.data[i * c + k];
            }
        }
    }

    /// Solves `Rx = y` in place on the first `cols` entries.
    pub fn solve_r(&self, y: &mut [f64]) {
        let c = self.cols;
        for k in (0..c).rev() {
            let s: f64 = (k + 1..c).map(|j| self.data[k * c + j] * y[j]).sum();
            y[k] = (y[k] - s) / self.diag[k];
        }
    }

    /// Diagonal entry `R_kk`.
    pub fn r_diag(&self, k: usize) -> f64 {
        self.diag[k]
    }

    /// `argmin ‖Ax − b‖`.
    pub fn least_squares(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: b.len(),
            });
        }
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        self.solve_r(&mut y);
        y.truncate(self.cols);
        Ok(y)
    }
}
