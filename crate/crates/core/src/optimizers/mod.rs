//! Row-selection distributions that improve the Kaczmarz contraction rate.
//!
//! The exact design maximizes `λ_min(BᵀD(p)B)` over the simplex. Two cheaper
//! surrogates are provided: the linear relaxation that only constrains the
//! diagonal of `BᵀD(p)B`, and the D-optimal multiplicative iteration that
//! maximizes `log det BᵀD(p)B`.

mod dopt;
mod lp;
mod maximin;

pub use dopt::{dopt_update, optimize_dopt, DEFAULT_DOPT_ITERS};
pub use lp::{optimize_lp, LP_TOLERANCE};
pub use maximin::{maximin_upper_bound, optimize_maximin, MAXIMIN_MAX_ITERS, MAXIMIN_TOLERANCE};

use std::fmt;

use crate::distribution::{DistributionVector, SPARSITY_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Rows must have Euclidean norm one within this tolerance.
pub const UNIT_ROW_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MethodTag {
    Maximin,
    LpRelax,
    DOptimal,
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodTag::Maximin => "maximin",
            MethodTag::LpRelax => "lp",
            MethodTag::DOptimal => "dopt",
        })
    }
}

#[derive(Clone, Debug)]
pub struct OptimizerResult {
    pub p_hat: DistributionVector,
    /// Optimized `λ_min` for `Maximin` and `DOptimal`; the LP value for `LpRelax`.
    pub t_hat: f64,
    /// Provable upper bound on the method's optimum minus the achieved
    /// objective. For `DOptimal` the objective is `log det`.
    pub certificate_gap: f64,
    pub iterations: usize,
    pub method: MethodTag,
    /// `λ_min(BᵀD(p_hat)B)`, whatever the method optimized.
    pub lambda_min: f64,
    /// Objective after each outer iteration (`log det` for `DOptimal`).
    pub history: Vec<f64>,
}

impl OptimizerResult {
    /// Entries of `p_hat` below [`SPARSITY_THRESHOLD`].
    pub fn sparsity(&self) -> usize {
        self.p_hat.count_below(SPARSITY_THRESHOLD)
    }
}

/// Nonnegative weights `q` of the ℓ₁ form: minimize `1ᵀq` subject to
/// `BᵀD(q)B ⪰ I`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnnormalizedDesign {
    q: Vec<f64>,
}

impl UnnormalizedDesign {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() || q.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDistribution(
                "design weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { q })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn total(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// `p = q/1ᵀq`, `t = 1/1ᵀq`.
pub fn p_from_q(q: &UnnormalizedDesign) -> Result<(DistributionVector, f64)> {
    let total = q.total();
    if !(total > 0.0) {
        return Err(Error::ZeroDesign);
    }
    let p = DistributionVector::new(q.q.iter().map(|v| v / total).collect())?;
    Ok((p, 1.0 / total))
}

/// `q = p/t`.
pub fn q_from_p(p: &DistributionVector, t: f64) -> Result<UnnormalizedDesign> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::NonPositiveT(t));
    }
    UnnormalizedDesign::new(p.as_slice().iter().map(|v| v / t).collect())
}

/// Rescales row `i` of `B` to `√p̂ᵢ·bᵢ`.
///
/// For the maximin distribution the result has `‖A′‖_F = 1` and
/// `κ(A′)² = 1/t̂`, the smallest scaled condition number over all row
/// rescalings of `B`.
pub fn kappa_optimal_rescaling(b: &DenseMatrix, result: &OptimizerResult) -> DenseMatrix {
    let scales: Vec<f64> = result.p_hat.as_slice().iter().map(|p| p.sqrt()).collect();
    b.scale_rows(&scales)
        .expect("optimizer result has one weight per row")
}

pub(crate) fn check_unit_rows(b: &DenseMatrix) -> Result<()> {
    for (i, r) in b.row_iter().enumerate() {
        let norm = crate::linalg::norm2(r);
        if norm == 0.0 {
            return Err(Error::ZeroRow(i));
        }
        if (norm - 1.0).abs() > UNIT_ROW_TOLERANCE {
            return Err(Error::InvalidConfig(format!(
                "row {i} has norm {norm}, expected a unit-row matrix"
            )));
        }
    }
    Ok(())
}

pub(crate) fn check_design_input(b: &DenseMatrix) -> Result<()> {
    check_unit_rows(b)?;
    crate::linalg::check_full_column_rank(b)
}
