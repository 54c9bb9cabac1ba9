//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use super::SymmetricMatrix;
use crate::error::{Error, Result};

/// Largest dimension accepted by the eigensolver.
pub const DEFAULT_DIM_CAP: usize = 512;

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition, eigenvalues ascending. `vectors` is row-major
/// with eigenvector `k` stored in column `k`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|i| self.vectors[i * n + k]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct EigenExtremes {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Unit eigenvector for `lambda_min`.
    pub v_min: Vec<f64>,
}

/// Diagonalizes `m` by cyclic Jacobi rotations until the off-diagonal
/// Frobenius norm is at most `tol·‖M‖_F`.
pub fn symmetric_eigen(m: &SymmetricMatrix, tol: f64) -> Result<SymmetricEigen> {
    let n = m.dim();
    if n > DEFAULT_DIM_CAP {
        return Err(Error::DimensionTooLarge {
            dim: n,
            cap: DEFAULT_DIM_CAP,
        });
    }
    let mut a = m.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = tol * m.frobenius_norm();

    let mut sweeps = 0;
    loop {
        if off_diagonal_norm(&a, n) <= threshold {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                what: "Jacobi eigensolver",
                iterations: MAX_SWEEPS,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[i * n + dst] = v[i * n + src];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

pub fn eig_extremes(m: &SymmetricMatrix, tol: f64) -> Result<EigenExtremes> {
    let eig = symmetric_eigen(m, tol)?;
    let n = eig.dim();
    Ok(EigenExtremes {
        lambda_min: eig.values[0],
        lambda_max: eig.values[n - 1],
        v_min: eig.vector(0),
    })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    s.sqrt()
}

/// Annihilates `a[p][q]` with the rotation `A ← JᵀAJ`, accumulating `V ← VJ`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
