//! Maximization of `λ_min(BᵀD(p)B)` over the probability simplex.
//!
//! The program `max t s.t. BᵀD(p)B ⪰ tI, p ≥ 0, 1ᵀp = 1` is followed along
//! its central path: for decreasing `μ`, Newton's method maximizes
//!
//! ```text
//! F_μ(p, t) = t/μ + log det(BᵀD(p)B − tI) + Σᵢ log pᵢ   subject to 1ᵀp = 1.
//! ```
//!
//! Termination is decided by an explicit certificate rather than by `μ`:
//! for any `Z ⪰ 0` with `tr Z = 1`, `λ_min(BᵀD(p′)B) ≤ tr(Z·BᵀD(p′)B) ≤
//! maxᵢ bᵢᵀZbᵢ` for every feasible `p′`, so `maxᵢ bᵢᵀZbᵢ` bounds the optimum
//! from above. Candidates for `Z` are `uuᵀ` for the minimal eigenvector `u`,
//! the normalized inverse slack `S⁻¹/tr S⁻¹` of the barrier, its Richardson
//! extrapolation across two values of `μ`, and refits of these onto the low
//! eigenspace of `BᵀD(p̂)B`. The smallest resulting bound is kept, as is
//! the best `p̂` from the centered and extrapolated iterates.

use super::{check_design_input, MethodTag, OptimizerResult};
use crate::bounds::EIGEN_TOLERANCE;
use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::linalg::{
    dot, eig_extremes, symmetric_eigen, weighted_gram_raw, Cholesky, DenseMatrix, HouseholderQr,
    SymmetricEigen, SymmetricMatrix,
};

pub const MAXIMIN_TOLERANCE: f64 = 1e-6;
pub const MAXIMIN_MAX_ITERS: usize = 500;

/// Newton decrement² / 2 below which a barrier subproblem counts as solved.
const CENTERING_TOLERANCE: f64 = 1e-9;
const MU_REDUCTION: f64 = 10.0;
const MIN_MU: f64 = 1e-18;
const MAX_CENTERING_STEPS: usize = 50;

/// `maxᵢ bᵢᵀZbᵢ / tr Z`, an upper bound on `max_p λ_min(BᵀD(p)B)` for any
/// nonzero positive semidefinite `z`.
pub fn maximin_upper_bound(b: &DenseMatrix, z: &SymmetricMatrix) -> Result<f64> {
    let trace = z.trace();
    let mut best = f64::NEG_INFINITY;
    for r in b.row_iter() {
        best = best.max(z.quadratic_form(r)? / trace);
    }
    Ok(best)
}

struct Barrier<'a> {
    b: &'a DenseMatrix,
    p: Vec<f64>,
    t: f64,
    slack: Cholesky,
}

impl<'a> Barrier<'a> {
    fn at(b: &'a DenseMatrix, p: Vec<f64>, t: f64) -> Option<Self> {
        if p.iter().any(|&v| !(v > 0.0)) {
            return None;
        }
        let s = weighted_gram_raw(b, &p).ok()?.shifted(-t);
        let slack = Cholesky::factor(&s).ok()?;
        Some(Self { b, p, t, slack })
    }

    /// Equality-constrained Newton direction for `F_μ` and the squared
    /// Newton decrement.
    ///
    /// Work in the scaled variables `p̃ᵢ = pᵢ/pᵢ⁰` and `t̃ = t‖S⁻¹‖_F`. The
    /// negated Hessian is then `AᵀA` with `A = [J; E]`, where `J` maps a
    /// step to the whitened slack change `L⁻¹ΔS L⁻ᵀ` (`S = LLᵀ`) and `E`
    /// picks the `p̃` block. Near a degenerate optimum `AᵀA` has condition
    /// number of order `μ⁻²`, so the step is found from a QR factorization
    /// of `A` rather than from the normal equations.
    fn newton_direction(&self, mu: f64) -> Result<(Vec<f64>, f64, f64)> {
        let m = self.b.rows();
        let n = self.b.cols();
        let p = &self.p;

        let mut c = vec![0.0; m * n];
        for (i, r) in self.b.row_iter().enumerate() {
            let ci = &mut c[i * n..(i + 1) * n];
            ci.copy_from_slice(r);
            self.slack.forward_in_place(ci);
        }
        // T = L⁻¹L⁻ᵀ shares trace and Frobenius norm with S⁻¹
        let mut l_inv = vec![0.0; n * n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            self.slack.forward_in_place(&mut e);
            for i in 0..n {
                l_inv[i * n + j] = e[i];
            }
        }
        let t_mat = |i: usize, j: usize| dot(&l_inv[i * n..(i + 1) * n], &l_inv[j * n..(j + 1) * n]);
        let mut fro_sq = 0.0;
        for i in 0..n {
            for j in 0..n {
                fro_sq += t_mat(i, j).powi(2);
            }
        }
        let t_scale = 1.0 / fro_sq.sqrt();

        let sym = n * (n + 1) / 2;
        let rows = sym + m;
        let cols = m + 1;
        let mut a = vec![0.0; rows * cols];
        let mut r = 0;
        for j in 0..n {
            for k in j..n {
                let w = if j == k { 1.0 } else { std::f64::consts::SQRT_2 };
                for i in 0..m {
                    a[r * cols + i] = w * p[i] * c[i * n + j] * c[i * n + k];
                }
                a[r * cols + m] = -w * t_scale * t_mat(j, k);
                r += 1;
            }
        }
        for i in 0..m {
            a[(sym + i) * cols + i] = 1.0;
        }
        let qr = HouseholderQr::factor(rows, cols, a.clone())?;

        // gradient = Aᵀ[vec(I); 1] + (t_scale/μ)·e_t
        let mut rhs = vec![0.0; rows];
        let mut r = 0;
        for j in 0..n {
            rhs[r] = 1.0;
            r += n - j;
        }
        rhs[sym..].fill(1.0);
        let mut u1 = qr.least_squares(&rhs)?;
        let mut ut = vec![0.0; cols];
        ut[m] = 1.0 / qr.r_diag(m);
        qr.solve_r(&mut ut);
        let gamma = t_scale / mu;
        for (x, y) in u1.iter_mut().zip(&ut) {
            *x += gamma * y;
        }
        // constraint Σ p̃ᵢpᵢ = const has normal (p, 0) = Eᵀp
        let mut rhs = vec![0.0; rows];
        rhs[sym..].copy_from_slice(p);
        let u2 = qr.least_squares(&rhs)?;
        let w = -dot(&p[..], &u1[..m]) / dot(&p[..], &u2[..m]);
        let dx: Vec<f64> = u1.iter().zip(&u2).map(|(x, y)| x + w * y).collect();

        let decrement_sq: f64 = (0..rows)
            .map(|i| dot(&a[i * cols..(i + 1) * cols], &dx).powi(2))
            .sum();
        let dp = (0..m).map(|i| p[i] * dx[i]).collect();
        Ok((dp, dx[m] * t_scale, decrement_sq))
    }
}

/// Best primal point and best upper bound seen so far. Both are valid
/// globally, so they may come from different barrier iterates.
struct Certificate {
    p_hat: DistributionVector,
    t_hat: f64,
    upper: f64,
}

impl Certificate {
    fn gap(&self) -> f64 {
        (self.upper - self.t_hat).max(0.0)
    }

    fn absorb(&mut self, other: Certificate) {
        if other.t_hat > self.t_hat {
            self.p_hat = other.p_hat;
            self.t_hat = other.t_hat;
        }
        self.upper = self.upper.min(other.upper);
    }

    fn into_result(self, iterations: usize, history: Vec<f64>) -> OptimizerResult {
        OptimizerResult {
            certificate_gap: self.gap(),
            p_hat: self.p_hat,
            t_hat: self.t_hat,
            iterations,
            method: MethodTag::Maximin,
            lambda_min: self.t_hat,
            history,
        }
    }
}

/// Normalized primal and dual iterates at the end of one centering.
struct Snapshot {
    p: Vec<f64>,
    z: Vec<f64>,
}

impl Snapshot {
    fn of(barrier: &Barrier<'_>) -> Result<Self> {
        let p = DistributionVector::normalized(barrier.p.clone())?.into_vec();
        let s_inv = barrier.slack.inverse();
        let z = s_inv.scaled(1.0 / s_inv.trace()).as_slice().to_vec();
        Ok(Self { p, z })
    }

    /// Richardson step `(R·x(μ) − x(Rμ))/(R − 1)`, which cancels the term
    /// linear in `μ` along the central path.
    fn extrapolated(&self, prev: &Snapshot) -> Snapshot {
        let r = MU_REDUCTION;
        let step = |cur: &[f64], old: &[f64]| -> Vec<f64> {
            cur.iter().zip(old).map(|(c, o)| (r * c - o) / (r - 1.0)).collect()
        };
        Snapshot {
            p: step(&self.p, &prev.p).into_iter().map(|v| v.max(0.0)).collect(),
            z: step(&self.z, &prev.z),
        }
    }
}

/// Certifies the current centered point and, when the previous one is
/// available, its extrapolation. Every candidate is evaluated directly, so
/// the result is valid even when extrapolation does not help.
fn certify(b: &DenseMatrix, current: &Snapshot, prev: Option<&Snapshot>) -> Result<Certificate> {
    let n = b.cols();
    let extrapolated = prev.map(|prev| current.extrapolated(prev));
    let snapshots = std::iter::once(current).chain(extrapolated.as_ref());

    let mut best: Option<Certificate> = None;
    let mut duals = Vec::new();
    for snap in snapshots {
        duals.push(SymmetricMatrix::from_upper(n, snap.z.clone()));
        let Ok(p_hat) = DistributionVector::normalized(snap.p.clone()) else {
            continue;
        };
        let gram = weighted_gram_raw(b, p_hat.as_slice())?;
        let ext = eig_extremes(&gram, EIGEN_TOLERANCE)?;
        let eigvec_bound = b
            .row_iter()
            .map(|r| dot(r, &ext.v_min).powi(2))
            .fold(f64::NEG_INFINITY, f64::max);
        let cert = Certificate {
            p_hat,
            t_hat: ext.lambda_min,
            upper: eigvec_bound,
        };
        match best.as_mut() {
            Some(best) => best.absorb(cert),
            None => best = Some(cert),
        }
    }
    let mut best = best.ok_or(Error::ZeroDesign)?;

    let p = best.p_hat.as_slice();
    let p_max = p.iter().copied().fold(0.0, f64::max);
    let actives: Vec<Vec<usize>> = [1e-3, 1e-6]
        .iter()
        .map(|cutoff| (0..b.rows()).filter(|&i| p[i] >= cutoff * p_max).collect())
        .collect();
    let eig = symmetric_eigen(&weighted_gram_raw(b, p)?, EIGEN_TOLERANCE)?;
    for z in &duals {
        if let Ok(bound) = psd_part(z).and_then(|z| maximin_upper_bound(b, &z)) {
            best.upper = best.upper.min(bound);
        }
        for active in &actives {
            for r in 1..=n {
                if let Ok(bound) = polished_bound(b, z, &eig, r, active, best.t_hat) {
                    best.upper = best.upper.min(bound);
                }
            }
        }
    }
    Ok(best)
}

/// Projection onto the positive semidefinite cone.
fn psd_part(z: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let n = z.dim();
    let eig = symmetric_eigen(z, EIGEN_TOLERANCE)?;
    let mut out = vec![0.0; n * n];
    for (idx, &lambda) in eig.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let v = eig.vector(idx);
        for p in 0..n {
            for q in 0..n {
                out[p * n + q] += lambda * v[p] * v[q];
            }
        }
    }
    let out = SymmetricMatrix::from_upper(n, out);
    if !(out.trace() > 0.0) {
        return Err(Error::ZeroDesign);
    }
    Ok(out)
}

/// Upper bound from a dual matrix fitted to the optimality conditions.
///
/// At an optimum the dual `Z` lives on the eigenspace of the smallest
/// eigenvalue of `BᵀD(p)B` and satisfies `bᵢᵀZbᵢ = t` on the support of
/// `p`. With `V` the `r` lowest eigenvectors at `p̂`, `Z = VYVᵀ` is taken
/// with `Y` the nearest matrix to `VᵀZ₀V` (Frobenius) satisfying
/// `bᵢᵀZbᵢ = t` on `active` for a common free `t` and `tr Y = 1`. Errors in
/// `V` then enter the bound only quadratically. The result is projected
/// onto the semidefinite cone before evaluation, so the bound is valid
/// whatever `r` and `active` are.
fn polished_bound(
    b: &DenseMatrix,
    z0: &SymmetricMatrix,
    eig: &SymmetricEigen,
    r: usize,
    active: &[usize],
    t_hat: f64,
) -> Result<f64> {
    let n = b.cols();
    let basis: Vec<Vec<f64>> = (0..r).map(|k| eig.vector(k)).collect();
    let project = |x: &[f64]| -> Vec<f64> { basis.iter().map(|v| dot(v, x)).collect() };

    // Y₀ = VᵀZ₀V / tr
    let mut y0 = vec![0.0; r * r];
    let z0_basis: Vec<Vec<f64>> = basis.iter().map(|v| z0.mul_vec(v)).collect::<Result<_>>()?;
    for a in 0..r {
        for c in 0..r {
            y0[a * r + c] = dot(&basis[a], &z0_basis[c]);
        }
    }
    let tr0: f64 = (0..r).map(|a| y0[a * r + a]).sum();
    if !(tr0 > 0.0) {
        return Err(Error::ZeroDesign);
    }
    y0.iter_mut().for_each(|v| *v /= tr0);
    let y0 = SymmetricMatrix::from_upper(r, y0);

    // ΔY = Σ yᵢ vᵢvᵢᵀ + y₀I and τ = t − t_hat, minimizing ‖ΔY‖² + τ²
    let v: Vec<Vec<f64>> = active.iter().map(|&i| project(b.row(i))).collect();
    let k = active.len() + 1;
    let mut g = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for a in 0..active.len() {
        for c in 0..=a {
            let val = dot(&v[a], &v[c]).powi(2) + 1.0;
            g[a * k + c] = val;
            g[c * k + a] = val;
        }
        let tr = dot(&v[a], &v[a]);
        g[a * k + k - 1] = tr;
        g[(k - 1) * k + a] = tr;
        rhs[a] = t_hat - y0.quadratic_form(&v[a])?;
    }
    g[k * k - 1] = r as f64;
    let ridge = 1e-12 * (0..k).map(|i| g[i * k + i]).fold(0.0, f64::max);
    for i in 0..k {
        g[i * k + i] += ridge;
    }
    let y = Cholesky::factor_slice(k, &g)?.solve(&rhs)?;

    let mut ymat = y0.as_slice().to_vec();
    for (a, va) in v.iter().enumerate() {
        for p in 0..r {
            for q in 0..r {
                ymat[p * r + q] += y[a] * va[p] * va[q];
            }
        }
    }
    for p in 0..r {
        ymat[p * r + p] += y[k - 1];
    }
    let ymat = psd_part(&SymmetricMatrix::from_upper(r, ymat))?;

    let mut z = vec![0.0; n * n];
    for a in 0..r {
        for c in 0..r {
            let w = ymat.get(a, c);
            if w == 0.0 {
                continue;
            }
            for p in 0..n {
                for q in 0..n {
                    z[p * n + q] += w * basis[a][p] * basis[c][q];
                }
            }
        }
    }
    maximin_upper_bound(b, &SymmetricMatrix::from_upper(n, z))
}

/// Finds `p̂` maximizing `λ_min(BᵀD(p)B)` to within a certified gap of `tol`.
///
/// `b` must have unit rows and full column rank. `max_iters` bounds the
/// total number of Newton steps; exceeding it yields
/// [`Error::MaximinNotConverged`] carrying the best point found.
pub fn optimize_maximin(b: &DenseMatrix, tol: f64, max_iters: usize) -> Result<OptimizerResult> {
    check_design_input(b)?;
    let m = b.rows();
    let n = b.cols();

    let p0 = vec![1.0 / m as f64; m];
    let lambda0 = eig_extremes(&weighted_gram_raw(b, &p0)?, EIGEN_TOLERANCE)?.lambda_min;
    let mut barrier = Barrier::at(b, p0, lambda0 - 1.0 / n as f64)
        .ok_or(Error::NotPositiveDefinite { pivot: 0, value: lambda0 })?;
    let mut mu = 1.0 / barrier.slack.inverse().trace();

    let mut iterations = 0;
    let mut history = Vec::new();
    let mut best: Option<Certificate> = None;
    let mut previous: Option<Snapshot> = None;
    loop {
        // center; rounding puts a floor under the decrement once the slack
        // is tiny, hence the per-centering cap
        for _ in 0..MAX_CENTERING_STEPS {
            let (dp, dt, decrement_sq) = barrier.newton_direction(mu)?;
            if decrement_sq / 2.0 <= CENTERING_TOLERANCE || !(decrement_sq > 0.0) {
                break;
            }
            if iterations >= max_iters {
                return Err(not_converged(&barrier, best, iterations, history));
            }
            iterations += 1;
            let lambda = decrement_sq.sqrt();
            let mut step = if lambda < 0.25 { 1.0 } else { 1.0 / (1.0 + lambda) };
            let mut next = None;
            for _ in 0..60 {
                let p: Vec<f64> = barrier.p.iter().zip(&dp).map(|(p, d)| p + step * d).collect();
                if let Some(candidate) = Barrier::at(b, p, barrier.t + step * dt) {
                    next = Some(candidate);
                    break;
                }
                step *= 0.5;
            }
            match next {
                Some(candidate) => barrier = candidate,
                None => break,
            }
        }

        let snapshot = Snapshot::of(&barrier)?;
        let cert = certify(b, &snapshot, previous.as_ref())?;
        previous = Some(snapshot);
        history.push(cert.t_hat);
        let merged = match best.take() {
            Some(mut best) => {
                best.absorb(cert);
                best
            }
            None => cert,
        };
        if merged.gap() <= tol {
            return Ok(merged.into_result(iterations, history));
        }
        mu /= MU_REDUCTION;
        if mu < MIN_MU {
            return Err(not_converged(&barrier, Some(merged), iterations, history));
        }
        best = Some(merged);
    }
}

fn not_converged(
    barrier: &Barrier<'_>,
    best: Option<Certificate>,
    iterations: usize,
    history: Vec<f64>,
) -> Error {
    let current = match Snapshot::of(barrier).and_then(|s| certify(barrier.b, &s, None)) {
        Ok(cert) => cert,
        Err(e) => return e,
    };
    let best = match best {
        Some(mut best) => {
            best.absorb(current);
            best
        }
        None => current,
    };
    Error::MaximinNotConverged(Box::new(best.into_result(iterations, history)))
}
