//! Convergence-rate quantities for randomized Kaczmarz under a given
//! row-selection distribution.
//!
//! With `M = BᵀD(p)B` the expected squared error contracts per step by a
//! factor between `1 − λ_max(M)` and `1 − λ_min(M)`, so after `k` steps
//!
//! ```text
//! (1 − λ_max)ᵏ e₀ ≤ E‖x_k − x‖² ≤ (1 − λ_min)ᵏ e₀.
//! ```

use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::linalg::{eig_extremes, weighted_gram, DenseMatrix, RANK_TOLERANCE};

pub const EIGEN_TOLERANCE: f64 = 1e-14;

/// Upper (`omega1`) and lower (`omega2`) per-step contraction factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePair {
    pub omega1: f64,
    pub omega2: f64,
}

impl RatePair {
    pub fn envelope(&self, initial_sq_error: f64, k: usize) -> (f64, f64) {
        envelope(initial_sq_error, *self, k)
    }
}

/// `omega1 = 1 − λ_min(BᵀD(p)B)`, `omega2 = 1 − λ_max(BᵀD(p)B)`.
pub fn rate_pair(b: &DenseMatrix, p: &DistributionVector) -> Result<RatePair> {
    let ext = eig_extremes(&weighted_gram(b, p)?, EIGEN_TOLERANCE)?;
    Ok(RatePair {
        omega1: (1.0 - ext.lambda_min).clamp(0.0, 1.0),
        omega2: (1.0 - ext.lambda_max).clamp(0.0, 1.0),
    })
}

/// Smallest singular value of `A` as `√λ_min(AᵀA)`, with the rank check.
pub fn smallest_singular_value(a: &DenseMatrix) -> Result<f64> {
    if a.rows() < a.cols() {
        return Err(Error::RankDeficient { ratio: 0.0 });
    }
    let ext = eig_extremes(&a.gram(), EIGEN_TOLERANCE)?;
    let sigma_min = ext.lambda_min.max(0.0).sqrt();
    let ratio = sigma_min / ext.lambda_max.sqrt();
    if !(ratio > RANK_TOLERANCE) {
        return Err(Error::RankDeficient { ratio });
    }
    Ok(sigma_min)
}

/// Scaled condition number `‖A‖_F · ‖A†‖₂ = ‖A‖_F / σ_min(A)`.
pub fn kappa(a: &DenseMatrix) -> Result<f64> {
    Ok(a.frobenius_norm() / smallest_singular_value(a)?)
}

/// `(omega2ᵏ·e₀, omega1ᵏ·e₀)`.
pub fn envelope(initial_sq_error: f64, rates: RatePair, k: usize) -> (f64, f64) {
    let k = k as i32;
    (
        rates.omega2.powi(k) * initial_sq_error,
        rates.omega1.powi(k) * initial_sq_error,
    )
}

/// `1 − κ(A)⁻²`, the classical rate of row-norm randomized Kaczmarz.
pub fn classical_rate(a: &DenseMatrix) -> Result<f64> {
    let sigma = smallest_singular_value(a)?;
    let fro = a.frobenius_norm();
    Ok(1.0 - (sigma * sigma) / (fro * fro))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_uniform_rates() {
        let r = rate_pair(&DenseMatrix::identity(2), &DistributionVector::uniform(2)).unwrap();
        assert_eq!(r, RatePair { omega1: 0.5, omega2: 0.5 });
    }

    #[test]
    fn diagonal_rates() {
        let p = DistributionVector::new(vec![0.3, 0.7]).unwrap();
        let r = rate_pair(&DenseMatrix::identity(2), &p).unwrap();
        assert!((r.omega1 - 0.7).abs() < 1e-15);
        assert!((r.omega2 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn kappa_closed_forms() {
        assert!((kappa(&DenseMatrix::identity(4)).unwrap() - 2.0).abs() < 1e-15);
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((kappa(&a).unwrap() - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn kappa_rejects_rank_deficiency() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!(matches!(kappa(&a), Err(Error::RankDeficient { .. })));
        let wide = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(classical_rate(&wide), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn envelope_cases() {
        let r = RatePair { omega1: 0.5, omega2: 0.5 };
        assert_eq!(envelope(3.0, r, 0), (3.0, 3.0));
        assert_eq!(envelope(8.0, r, 3), (1.0, 1.0));
        let (lo, hi) = envelope(1.0, RatePair { omega1: 0.9, omega2: 0.4 }, 2);
        assert!((lo - 0.16).abs() < 1e-15);
        assert!((hi - 0.81).abs() < 1e-15);
    }

    #[test]
    fn classical_rate_closed_forms() {
        assert!((classical_rate(&DenseMatrix::identity(2)).unwrap() - 0.5).abs() < 1e-15);
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((classical_rate(&a).unwrap() - 0.8).abs() < 1e-15);
    }
}
