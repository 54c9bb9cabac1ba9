//! Multiplicative iteration for the D-optimal design `max log det BᵀD(p)B`.
//!
//! Each update is `pᵢ ← pᵢ · bᵢᵀM⁻¹bᵢ / n` with `M = BᵀD(p)B`. The factors
//! average to one under `p` because `Σᵢ pᵢ bᵢᵀM⁻¹bᵢ = tr(M⁻¹M) = n`, so the
//! iterate stays on the simplex, and `log det M` never decreases.

use super::{check_unit_rows, MethodTag, OptimizerResult};
use crate::bounds::EIGEN_TOLERANCE;
use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::linalg::{check_len, dot, eig_extremes, weighted_gram, Cholesky, DenseMatrix};

pub const DEFAULT_DOPT_ITERS: usize = 10;

/// A pivot is at least `λ_min/λ_max` of its diagonal entry, so this rejects
/// `M` with condition number above about `1e12`.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// Variances `dᵢ = bᵢᵀM⁻¹bᵢ` and `log det M` at `p`.
///
/// Fails with `NotPositiveDefinite` when `M` is singular, which a zero
/// pattern in `p` can cause even for full-rank `B`. Rounding can leave a
/// tiny positive pivot on an exactly singular `M`, so pivots below
/// [`PIVOT_TOLERANCE`] times their diagonal entry also count.
fn variances(b: &DenseMatrix, p: &DistributionVector) -> Result<(Vec<f64>, f64)> {
    let n = b.cols();
    // factor nM so that the update factor bᵢᵀ(nM)⁻¹bᵢ needs no division
    let scaled = weighted_gram(b, p)?.scaled(n as f64);
    let chol = Cholesky::factor(&scaled)?;
    for (j, (d, a)) in chol.pivots().into_iter().zip(scaled.diagonal()).enumerate() {
        if d <= PIVOT_TOLERANCE * a {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
    }
    let logdet = chol.logdet() - n as f64 * (n as f64).ln();
    let factors = b
        .row_iter()
        .map(|r| {
            let mut y = r.to_vec();
            chol.forward_in_place(&mut y);
            dot(&y, &y)
        })
        .collect();
    Ok((factors, logdet))
}

/// One multiplicative update. Returns the new distribution and
/// `log det BᵀD(p)B` at the input `p`.
pub fn dopt_update(b: &DenseMatrix, p: &DistributionVector) -> Result<(DistributionVector, f64)> {
    check_unit_rows(b)?;
    check_len(b.rows(), p.len())?;
    step(b, p)
}

fn step(b: &DenseMatrix, p: &DistributionVector) -> Result<(DistributionVector, f64)> {
    let (factors, logdet) = variances(b, p)?;
    let next = p
        .as_slice()
        .iter()
        .zip(&factors)
        .map(|(pi, f)| pi * f)
        .collect();
    Ok((DistributionVector::new(next)?, logdet))
}

/// Runs `iters` multiplicative updates from `row_norm_init`.
///
/// The initial distribution must be strictly positive: a zero weight stays
/// zero under the update. `t_hat` is `λ_min` at the final distribution,
/// `history` holds `log det` before the first update and after each one,
/// and the certificate gap is `maxᵢ bᵢᵀM⁻¹bᵢ − n`, which bounds the
/// remaining `log det` improvement.
pub fn optimize_dopt(
    row_norm_init: &DistributionVector,
    b: &DenseMatrix,
    iters: usize,
) -> Result<OptimizerResult> {
    check_unit_rows(b)?;
    check_len(b.rows(), row_norm_init.len())?;
    if !row_norm_init.is_strictly_positive() {
        return Err(Error::InvalidDistribution(
            "D-optimal iteration needs a strictly positive starting distribution".into(),
        ));
    }
    let n = b.cols() as f64;
    let mut p = row_norm_init.clone();
    let mut history = Vec::with_capacity(iters + 1);
    for _ in 0..iters {
        let (next, logdet) = step(b, &p)?;
        history.push(logdet);
        p = next;
    }
    let (factors, logdet) = variances(b, &p)?;
    history.push(logdet);
    // factors are bᵢᵀ(nM)⁻¹bᵢ
    let max_variance = factors.iter().fold(f64::NEG_INFINITY, |a, &f| a.max(f * n));
    let lambda_min = eig_extremes(&weighted_gram(b, &p)?, EIGEN_TOLERANCE)?.lambda_min;
    Ok(OptimizerResult {
        p_hat: p,
        t_hat: lambda_min,
        certificate_gap: (max_variance - n).max(0.0),
        iterations: iters,
        method: MethodTag::DOptimal,
        lambda_min,
        history,
    })
}
