#![allow(dead_code)]

use kaczmarz_opt::linalg::row_normalize;
use kaczmarz_opt::{DenseMatrix, DistributionVector, SymmetricMatrix};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian entries with each row scaled by a draw from `[0.1, 2)`.
pub fn random_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DenseMatrix {
    let scale = Uniform::new(0.1, 2.0).unwrap();
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let s: f64 = scale.sample(rng);
        for _ in 0..n {
            let v: f64 = StandardNormal.sample(rng);
            data.push(s * v);
        }
    }
    DenseMatrix::new(m, n, data).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_distribution<R: Rng>(rng: &mut R, m: usize) -> DistributionVector {
    let u = Uniform::new(0.05, 1.0).unwrap();
    DistributionVector::normalized((0..m).map(|_| u.sample(rng)).collect()).unwrap()
}

pub fn unit_rows(a: &DenseMatrix) -> DenseMatrix {
    row_normalize(a, &vec![0.0; a.rows()])
        .unwrap()
        .unit_rows()
        .clone()
}

pub fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn sym_to_na(m: &SymmetricMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.dim(), m.dim(), m.as_slice())
}

/// `Σᵢ wᵢ bᵢbᵢᵀ` in nalgebra, built without the library's Gram routine.
pub fn na_weighted_gram(b: &DenseMatrix, w: &[f64]) -> DMatrix<f64> {
    let n = b.cols();
    let mut m = DMatrix::zeros(n, n);
    for (i, wi) in w.iter().enumerate() {
        let r = nalgebra::DVector::from_row_slice(b.row(i));
        m += &r * r.transpose() * *wi;
    }
    m
}

pub fn na_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn na_lambda_min(b: &DenseMatrix, w: &[f64]) -> f64 {
    na_eigenvalues(na_weighted_gram(b, w))[0]
}

/// Smallest eigenvalue of a symmetric 3×3 matrix from the trigonometric
/// solution of its characteristic cubic.
pub fn lambda_min_3x3(a: [[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let r = (det3(b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// Cofactor expansion along the first row.
pub fn det3(a: [[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// `Σᵢ wᵢ bᵢbᵢᵀ` for three-column `b` as a fixed array.
pub fn gram3(b: &DenseMatrix, w: &[f64]) -> [[f64; 3]; 3] {
    let mut g = [[0.0; 3]; 3];
    for (i, wi) in w.iter().enumerate() {
        let r = b.row(i);
        for j in 0..3 {
            for k in 0..3 {
                g[j][k] += wi * r[j] * r[k];
            }
        }
    }
    g
}

/// Maximizes `λ_min(Σ pᵢbᵢbᵢᵀ)` over the simplex for a three-column `b` by
/// exhaustive search on the grid of step `1/res`, then pairwise mass
/// transfers from the best few grid points with steps shrinking to `1e-3`.
/// Assumes `res ≥ 50` so the step sequence is decreasing.
pub fn grid_oracle(b: &DenseMatrix, res: usize) -> f64 {
    assert_eq!(b.cols(), 3);
    let m = b.rows();
    let outer: Vec<[f64; 9]> = (0..m)
        .map(|i| {
            let r = b.row(i);
            let mut o = [0.0; 9];
            for j in 0..3 {
                for k in 0..3 {
                    o[3 * j + k] = r[j] * r[k];
                }
            }
            o
        })
        .collect();
    let eval = |w: &[f64]| {
        let mut g = [[0.0; 3]; 3];
        for (wi, o) in w.iter().zip(&outer) {
            for j in 0..3 {
                for k in 0..3 {
                    g[j][k] += wi * o[3 * j + k];
                }
            }
        }
        lambda_min_3x3(g)
    };

    const KEEP: usize = 8;
    let mut best: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut counts = vec![0usize; m];
    enumerate_compositions(res, 0, &mut counts, &mut |c| {
        let w: Vec<f64> = c.iter().map(|&k| k as f64 / res as f64).collect();
        let v = eval(&w);
        if best.len() < KEEP || v > best[best.len() - 1].0 {
            best.push((v, c.to_vec()));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(KEEP);
        }
    });

    let mut overall = f64::NEG_INFINITY;
    for (_, c) in best {
        let mut w: Vec<f64> = c.iter().map(|&k| k as f64 / res as f64).collect();
        let mut value = eval(&w);
        let grid_step = 1.0 / res as f64;
        for h in [grid_step, grid_step / 2.0, grid_step / 4.0, 2e-3, 1e-3] {
            loop {
                let mut improved = false;
                for from in 0..m {
                    for to in 0..m {
                        if from == to || w[from] < h {
                            continue;
                        }
                        w[from] -= h;
                        w[to] += h;
                        let v = eval(&w);
                        if v > value {
                            value = v;
                            improved = true;
                        } else {
                            w[from] += h;
                            w[to] -= h;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        overall = overall.max(value);
    }
    overall
}

fn enumerate_compositions(
    remaining: usize,
    idx: usize,
    counts: &mut [usize],
    f: &mut impl FnMut(&[usize]),
) {
    if idx == counts.len() - 1 {
        counts[idx] = remaining;
        f(counts);
        return;
    }
    for k in 0..=remaining {
        counts[idx] = k;
        enumerate_compositions(remaining - k, idx + 1, counts, f);
    }
}
