//! Linear relaxation of the maximin design.
//!
//! Replacing `BᵀD(p)B ⪰ tI` by its diagonal gives
//!
//! ```text
//! max t  s.t.  Σᵢ pᵢ B(i,j)² ≥ t  (j = 1..n),  p ≥ 0,  1ᵀp = 1,
//! ```
//!
//! the row player's side of the matrix game with payoff `Cᵢⱼ = B(i,j)²`.
//! It is solved exactly through the column player's program
//! `max 1ᵀw s.t. Cw ≤ 1, w ≥ 0` with a dense tableau simplex; the row
//! distribution is read off the slack reduced costs.
//!
//! The optimum is rarely unique. Because every row of `C` sums to one, the
//! value is `1/n` whenever some `p` equalizes the diagonal, and then every
//! such `p` is optimal. A vertex of that face puts all weight on about `n`
//! rows, which leaves `BᵀD(p)B` nearly singular. The reported distribution
//! is instead the analytic center of the optimal face, the point an
//! interior-point solver converges to; the vertex is kept only as a
//! fallback.

use super::{check_design_input, MethodTag, OptimizerResult};
use crate::bounds::EIGEN_TOLERANCE;
use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::linalg::{dot, eig_extremes, weighted_gram, Cholesky, DenseMatrix};

pub const LP_TOLERANCE: f64 = 1e-9;

const PIVOT_EPS: f64 = 1e-12;
/// Degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;
/// Dual weights and slacks at or below this count as zero when reading the
/// optimal face off the simplex solution.
const FACE_EPS: f64 = 1e-12;
const CENTER_MAX_ITERS: usize = 100;

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows` constraint rows then the objective row; last column is the rhs.
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.at(r, c);
        for j in 0..w {
            self.data[r * w + j] /= piv;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.data[i * w + j] -= f * pivot_row[j];
            }
            self.data[i * w + c] = 0.0;
        }
        self.basis[r] = c;
    }
}

/// Game value and optimal mixed strategies of the payoff matrix `c`
/// (nonnegative, every column nonzero). Returns `(row strategy, column
/// strategy, pivots)`.
fn solve_game(c: &DenseMatrix) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let m = c.rows();
    let n = c.cols();
    let vars = n + m;
    let width = vars + 1;
    let mut data = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            data[i * width + j] = c.get(i, j);
        }
        data[i * width + n + i] = 1.0;
        data[i * width + vars] = 1.0;
    }
    for j in 0..n {
        data[m * width + j] = -1.0;
    }
    let mut tab = Tableau {
        rows: m,
        width,
        data,
        basis: (n..vars).collect(),
    };

    let max_pivots = 50 * (m + n) + 100;
    let mut degenerate = 0;
    let mut pivots = 0;
    loop {
        let bland = degenerate >= DEGENERATE_STREAK;
        let mut entering = None;
        let mut best = -PIVOT_EPS;
        for j in 0..vars {
            let rc = tab.at(m, j);
            if rc < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = rc;
            }
        }
        let Some(col) = entering else { break };

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab.at(i, col);
            if a > PIVOT_EPS {
                let ratio = tab.rhs(i) / a;
                let better = match leaving {
                    None => true,
                    Some((l, best_ratio)) => {
                        ratio < best_ratio
                            || (ratio == best_ratio && tab.basis[i] < tab.basis[l])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((row, ratio)) = leaving else {
            // unbounded column player: some column of C is zero
            return Err(Error::RankDeficient { ratio: 0.0 });
        };
        if ratio <= PIVOT_EPS {
            degenerate += 1;
        } else {
            degenerate = 0;
        }
        tab.pivot(row, col);
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::ConvergenceFailure {
                what: "LP simplex",
                iterations: pivots,
            });
        }
    }

    let mut w = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            w[bv] = tab.rhs(i).max(0.0);
        }
    }
    let u: Vec<f64> = (0..m).map(|i| tab.at(m, n + i).max(0.0)).collect();
    Ok((normalize(u)?, normalize(w)?, pivots))
}

fn normalize(v: Vec<f64>) -> Result<Vec<f64>> {
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ConvergenceFailure {
            what: "LP simplex",
            iterations: 0,
        });
    }
    Ok(v.into_iter().map(|x| x / total).collect())
}

/// Solves the diagonal relaxation exactly. `t_hat` is the LP value at
/// `p_hat`; the certificate gap is the game duality gap, checked against
/// `tol`.
pub fn optimize_lp(b: &DenseMatrix, tol: f64) -> Result<OptimizerResult> {
    check_design_input(b)?;
    let m = b.rows();
    let n = b.cols();
    let squares: Vec<f64> = b.as_slice().iter().map(|v| v * v).collect();
    let payoff = DenseMatrix::new(m, n, squares)?;
    let (row_strategy, col_strategy, pivots) = solve_game(&payoff)?;

    // value guaranteed by the row strategy, and the bound from the column one
    let achieved = (0..n)
        .map(|j| (0..m).map(|i| row_strategy[i] * payoff.get(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let bound = payoff
        .row_iter()
        .map(|r| r.iter().zip(&col_strategy).map(|(a, y)| a * y).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = (bound - achieved).max(0.0);
    if gap > tol {
        return Err(Error::ConvergenceFailure {
            what: "LP simplex",
            iterations: pivots,
        });
    }

    let (p_hat, achieved) = match analytic_center(&payoff, &row_strategy, &col_strategy, achieved)
    {
        Some(center) => {
            let value = column_values(&payoff, &center)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if bound - value <= tol {
                (center, value)
            } else {
                (row_strategy, achieved)
            }
        }
        None => (row_strategy, achieved),
    };
    let gap = (bound - achieved).max(0.0);
    let p_hat = DistributionVector::normalized(p_hat)?;
    let lambda_min = eig_extremes(&weighted_gram(b, &p_hat)?, EIGEN_TOLERANCE)?.lambda_min;
    Ok(OptimizerResult {
        p_hat,
        t_hat: achieved,
        certificate_gap: gap,
        iterations: pivots,
        method: MethodTag::LpRelax,
        lambda_min,
        history: vec![achieved],
    })
}

fn column_values(c: &DenseMatrix, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.cols()];
    for (r, &pi) in c.row_iter().zip(p) {
        for (o, v) in out.iter_mut().zip(r) {
            *o += pi * v;
        }
    }
    out
}

/// Maximizes `Σ log pᵢ + Σ log sⱼ` over the optimal face, where `sⱼ` are
/// the slacks of the columns that are not forced tight.
///
/// For optimal strategies `p`, `y` of a game with value `v`, any optimal
/// `p′` has `(Cᵀp′)ⱼ = v` where `yⱼ > 0` and `p′ᵢ = 0` where `(Cy)ᵢ < v`;
/// columns with zero slack at the vertex are also held tight. The centering
/// runs Newton's method from the infeasible start halfway between the vertex
/// and the uniform distribution on the admissible rows. Returns `None` if
/// the face has no relative interior under this description.
fn analytic_center(c: &DenseMatrix, vertex: &[f64], y: &[f64], value: f64) -> Option<Vec<f64>> {
    let m = c.rows();
    let n = c.cols();
    let cy: Vec<f64> = c.row_iter().map(|r| dot(r, y)).collect();
    let best = cy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rows: Vec<usize> = (0..m).filter(|&i| cy[i] >= best - FACE_EPS).collect();
    let vertex_slack = column_values(c, vertex);
    let (tight, loose): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&j| y[j] > FACE_EPS || vertex_slack[j] - value <= FACE_EPS);
    let k = rows.len();
    let e = tight.len() + 1;
    let entry = |a: usize, j: usize| c.get(rows[a], j);

    let uniform = 1.0 / k as f64;
    let mut p: Vec<f64> = rows.iter().map(|&i| 0.5 * vertex[i] + 0.5 * uniform).collect();
    let mut nu = vec![0.0; e];
    let slacks = |p: &[f64]| -> Vec<f64> {
        loose
            .iter()
            .map(|&j| (0..k).map(|a| p[a] * entry(a, j)).sum::<f64>() - value)
            .collect()
    };
    // equality rows: tight columns, then Σp = 1
    let constraint = |r: usize, a: usize| if r < tight.len() { entry(a, tight[r]) } else { 1.0 };
    let target = |r: usize| if r < tight.len() { value } else { 1.0 };
    let residual = |p: &[f64], nu: &[f64]| -> f64 {
        let s = slacks(p);
        let mut sq = 0.0;
        for a in 0..k {
            let mut g = -1.0 / p[a];
            for (l, &j) in loose.iter().enumerate() {
                g -= entry(a, j) / s[l];
            }
            for r in 0..e {
                g += constraint(r, a) * nu[r];
            }
            sq += g * g;
        }
        for r in 0..e {
            let v: f64 = (0..k).map(|a| constraint(r, a) * p[a]).sum::<f64>() - target(r);
            sq += v * v;
        }
        sq.sqrt()
    };
    if slacks(&p).iter().any(|&s| !(s > 0.0)) {
        return None;
    }

    for _ in 0..CENTER_MAX_ITERS {
        let s = slacks(&p);
        // scaled Hessian I + P C_L D_s⁻² C_Lᵀ P and gradient -P∇φ
        let mut h = vec![0.0; k * k];
        let mut g = vec![0.0; k];
        for a in 0..k {
            let mut ga = 1.0;
            for (l, &j) in loose.iter().enumerate() {
                ga += p[a] * entry(a, j) / s[l];
            }
            g[a] = ga;
            for b in 0..=a {
                let mut v: f64 = loose
                    .iter()
                    .enumerate()
                    .map(|(l, &j)| entry(a, j) * entry(b, j) / (s[l] * s[l]))
                    .sum();
                v *= p[a] * p[b];
                h[a * k + b] = v;
                h[b * k + a] = v;
            }
            h[a * k + a] += 1.0;
        }
        let hc = Cholesky::factor_slice(k, &h).ok()?;
        let at: Vec<Vec<f64>> = (0..e)
            .map(|r| (0..k).map(|a| constraint(r, a) * p[a]).collect())
            .collect();
        let h_inv_at: Vec<Vec<f64>> = at.iter().map(|row| hc.solve(row)).collect::<Result<_>>().ok()?;
        let h_inv_g = hc.solve(&g).ok()?;
        let mut schur = vec![0.0; e * e];
        for r in 0..e {
            for q in 0..e {
                schur[r * e + q] = dot(&at[r], &h_inv_at[q]);
            }
        }
        let ridge = 1e-13 * (0..e).map(|r| schur[r * e + r]).fold(0.0, f64::max);
        for r in 0..e {
            schur[r * e + r] += ridge;
        }
        let primal_res: Vec<f64> = (0..e)
            .map(|r| (0..k).map(|a| constraint(r, a) * p[a]).sum::<f64>() - target(r))
            .collect();
        let rhs: Vec<f64> = (0..e).map(|r| dot(&at[r], &h_inv_g) + primal_res[r]).collect();
        let nu_next = Cholesky::factor_slice(e, &schur).ok()?.solve(&rhs).ok()?;
        let dx: Vec<f64> = (0..k)
            .map(|a| h_inv_g[a] - (0..e).map(|r| h_inv_at[r][a] * nu_next[r]).sum::<f64>())
            .collect();
        let decrement_sq = dot(&dx, &g);
        let res_norm: f64 = primal_res.iter().map(|v| v * v).sum::<f64>().sqrt();
        if decrement_sq.abs() <= 1e-18 && res_norm <= 1e-14 {
            break;
        }

        let base = residual(&p, &nu);
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = (0..k).map(|a| p[a] * (1.0 + step * dx[a])).collect();
            let cand_nu: Vec<f64> = (0..e).map(|r| nu[r] + step * (nu_next[r] - nu[r])).collect();
            if cand.iter().all(|&v| v > 0.0)
                && slacks(&cand).iter().all(|&v| v > 0.0)
                && residual(&cand, &cand_nu) <= (1.0 - 0.01 * step) * base
            {
                p = cand;
                nu = cand_nu;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }

    let mut out = vec![0.0; m];
    for (a, &i) in rows.iter().enumerate() {
        out[i] = p[a];
    }
    Some(out)
}
