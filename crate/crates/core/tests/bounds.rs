mod common;

use kaczmarz_opt::bounds::{classical_rate, envelope, kappa, rate_pair, smallest_singular_value};
use kaczmarz_opt::kaczmarz::{run_solver, Scheme};
use kaczmarz_opt::linalg::{row_normalize, squared_distance};
use kaczmarz_opt::{DenseMatrix, RowSampler};
use proptest::prelude::*;

use common::{na_eigenvalues, na_weighted_gram, random_distribution, random_matrix, random_vector, rng, to_na, unit_rows};

proptest! {
    #[test]
    fn rates_match_rayleigh_extremes(seed in 0u64..300, n in 1usize..7) {
        let mut r = rng(seed);
        let m = n + 3;
        let b = unit_rows(&random_matrix(&mut r, m, n));
        let p = random_distribution(&mut r, m);
        let rates = rate_pair(&b, &p).unwrap();
        let eig = na_eigenvalues(na_weighted_gram(&b, p.as_slice()));
        prop_assert!((rates.omega1 - (1.0 - eig[0])).abs() <= 1e-12);
        prop_assert!((rates.omega2 - (1.0 - eig[n - 1])).abs() <= 1e-12);
        prop_assert!(rates.omega2 <= rates.omega1);
    }

    #[test]
    fn kappa_matches_svd(seed in 0u64..300, n in 1usize..7, extra in 0usize..10) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, n + extra, n);
        let sv = to_na(&a).singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let fro = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        prop_assert!((smallest_singular_value(&a).unwrap() - smin).abs() <= 1e-10 * fro);
        let k = kappa(&a).unwrap();
        prop_assert!((k - fro / smin).abs() <= 1e-8 * k);
        prop_assert!(k >= (n as f64).sqrt() - 1e-12);
    }

    #[test]
    fn row_norm_rate_is_classical(seed in 0u64..300, n in 1usize..7) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, 2 * n + 1, n);
        let sys = row_normalize(&a, &vec![0.0; a.rows()]).unwrap();
        let rates = rate_pair(sys.unit_rows(), &sys.row_norm_distribution()).unwrap();
        prop_assert!((rates.omega1 - classical_rate(&a).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn envelope_is_geometric() {
    let rates = kaczmarz_opt::bounds::RatePair { omega1: 0.9, omega2: 0.5 };
    assert_eq!(envelope(2.0, rates, 0), (2.0, 2.0));
    let (lo, hi) = envelope(2.0, rates, 3);
    assert!((lo - 0.25).abs() < 1e-15 && (hi - 1.458).abs() < 1e-15);
}

#[test]
fn rank_deficient_matrix_has_no_kappa() {
    let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [-1.0, -2.0]]).unwrap();
    assert!(kappa(&a).is_err());
    assert!(kappa(&DenseMatrix::from_rows(&[[1.0, 0.0]]).unwrap()).is_err());
}

#[test]
fn simulated_mean_stays_inside_envelope() {
    let mut r = rng(31);
    let a = random_matrix(&mut r, 20, 4);
    let x = random_vector(&mut r, 4);
    let sys = row_normalize(&a, &a.mul_vec(&x).unwrap()).unwrap();
    let p = random_distribution(&mut r, 20);
    let rates = rate_pair(sys.unit_rows(), &p).unwrap();
    let x0 = [0.0; 4];
    let e0 = squared_distance(&x0, &x);
    let trials = 1000;
    let steps = 30;
    let mut samples = vec![Vec::with_capacity(trials); steps + 1];
    for t in 0..trials {
        let sampler = RowSampler::with_stream(&p, 2, t as u64);
        let rec = run_solver(&sys, &x0, Scheme::Randomized(sampler), steps, Some(&x)).unwrap();
        for (k, e) in rec.squared_errors.into_iter().enumerate() {
            samples[k].push(e);
        }
    }
    for (k, s) in samples.iter().enumerate().skip(1) {
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let band = 3.0 * (var / n).sqrt();
        let (lo, hi) = rates.envelope(e0, k);
        assert!(mean >= lo - band && mean <= hi + band, "step {k}: {lo} <= {mean} <= {hi}");
    }
}
