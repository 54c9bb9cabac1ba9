//! Kaczmarz projections: single steps, cyclic and randomized sweeps, and
//! error trajectories.

use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::linalg::{
    check_len, dot, norm2, squared_distance, weighted_gram, DenseMatrix, NormalizedSystem,
    ZERO_ROW_THRESHOLD,
};
use crate::sampler::RowSampler;

/// Largest `‖Ax − b‖ / ‖b‖` accepted for a supplied solution.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-10;

/// Projects `x` onto the hyperplane `{z : a_rowᵀz = b_val}`.
pub fn project_row(x: &[f64], a_row: &[f64], b_val: f64) -> Result<Vec<f64>> {
    check_len(a_row.len(), x.len())?;
    let norm_sq = dot(a_row, a_row);
    if !(norm_sq.sqrt() >= ZERO_ROW_THRESHOLD) {
        return Err(Error::ZeroRow(0));
    }
    let step = (b_val - dot(a_row, x)) / norm_sq;
    Ok(x.iter().zip(a_row).map(|(xi, ai)| xi + step * ai).collect())
}

/// Zero-based row visited at step `k` of a cyclic sweep over `m` rows.
pub fn cyclic_index(k: usize, m: usize) -> usize {
    k % m
}

pub enum Scheme {
    Cyclic,
    Randomized(RowSampler),
}

impl Scheme {
    pub fn randomized(p: &DistributionVector, seed: u64) -> Self {
        Scheme::Randomized(RowSampler::new(p, seed))
    }
}

/// What `squared_errors` measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    /// `‖x_j − x‖²` against a known solution.
    Solution,
    /// `‖Ax_j − b‖²`.
    Residual,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    /// Entry `j` is the error after `j` projections.
    pub squared_errors: Vec<f64>,
    pub selected_rows: Vec<usize>,
    pub kind: ErrorKind,
    pub final_iterate: Vec<f64>,
}

/// Runs `steps` projections from `x0`.
///
/// Each step moves along the unit row `bᵢ` with right-hand side
/// `bᵢ_val/‖aᵢ‖`, which is the same update as projecting with `aᵢ`.
/// When `truth` is given it must solve the system; errors are then measured
/// against it, otherwise the squared residual is recorded.
pub fn run_solver(
    system: &NormalizedSystem,
    x0: &[f64],
    mut scheme: Scheme,
    steps: usize,
    truth: Option<&[f64]>,
) -> Result<TrajectoryRecord> {
    let m = system.rows();
    check_len(system.cols(), x0.len())?;
    if let Some(t) = truth {
        check_len(system.cols(), t.len())?;
        check_consistent(system, t)?;
    }
    if let Scheme::Randomized(s) = &scheme {
        check_len(m, s.categories())?;
    }
    let b = system.unit_rows();
    let original = system.original_matrix();
    let measure = |x: &[f64]| match truth {
        Some(t) => squared_distance(x, t),
        None => squared_residual(&original, system.rhs(), x),
    };

    let mut x = x0.to_vec();
    let mut squared_errors = Vec::with_capacity(steps + 1);
    let mut selected_rows = Vec::with_capacity(steps);
    squared_errors.push(measure(&x));
    for k in 0..steps {
        let i = match &mut scheme {
            Scheme::Cyclic => cyclic_index(k, m),
            Scheme::Randomized(s) => s.sample(),
        };
        let row = b.row(i);
        let step = system.scaled_rhs(i) - dot(row, &x);
        for (xj, bj) in x.iter_mut().zip(row) {
            *xj += step * bj;
        }
        selected_rows.push(i);
        squared_errors.push(measure(&x));
    }
    Ok(TrajectoryRecord {
        squared_errors,
        selected_rows,
        kind: if truth.is_some() {
            ErrorKind::Solution
        } else {
            ErrorKind::Residual
        },
        final_iterate: x,
    })
}

fn squared_residual(a: &DenseMatrix, rhs: &[f64], x: &[f64]) -> f64 {
    a.row_iter()
        .zip(rhs)
        .map(|(r, bi)| {
            let d = dot(r, x) - bi;
            d * d
        })
        .sum()
}

fn check_consistent(system: &NormalizedSystem, truth: &[f64]) -> Result<()> {
    let a = system.original_matrix();
    let residual = squared_residual(&a, system.rhs(), truth).sqrt();
    let scale = norm2(system.rhs()).max(1.0);
    if residual > CONSISTENCY_TOLERANCE * scale {
        return Err(Error::InvalidConfig(format!(
            "supplied solution leaves residual {residual:e}; the system must be consistent"
        )));
    }
    Ok(())
}

/// `Σᵢ pᵢ sin²(αᵢ) = 1 − yᵀMy/‖y‖²` with `M = BᵀD(p)B`: the expected
/// contraction of the squared error in one randomized step from error
/// direction `y`.
pub fn one_step_expected_factor(
    b: &DenseMatrix,
    p: &DistributionVector,
    y: &[f64],
) -> Result<f64> {
    let norm_sq = dot(y, y);
    if norm_sq == 0.0 {
        return Err(Error::ZeroVector);
    }
    let m = weighted_gram(b, p)?;
    let rayleigh = m.quadratic_form(y)? / norm_sq;
    Ok((1.0 - rayleigh).clamp(0.0, 1.0))
}
