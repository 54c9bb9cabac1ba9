//! Monte-Carlo comparison of row-selection schemes on random consistent
//! systems.
//!
//! Random streams: the shared system comes from stream 0 of the ChaCha8 key
//! `seed`; trial `t` under method `k` samples rows from stream
//! `1 + 8t + k`, and a regenerated per-trial system from stream `1 + 8t + 7`.
//! Curves are summed in trial order, so results do not depend on how trials
//! are scheduled across threads.

mod config;
mod output;

pub use config::{parse_methods, ConfigOverrides, ExperimentConfig, Method};
pub use output::{emit_csv, format_summary, DISTRIBUTIONS_FILE, MSE_FILE, MSE_STDERR_FILE, SUMMARY_FILE};

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use crate::bounds::{rate_pair, RatePair};
use crate::distribution::DistributionVector;
use crate::error::{Error, Result};
use crate::kaczmarz::{run_solver, Scheme};
use crate::linalg::{norm2, row_normalize, DenseMatrix, NormalizedSystem};
use crate::optimizers::{
    optimize_dopt, optimize_lp, optimize_maximin, OptimizerResult, LP_TOLERANCE,
    MAXIMIN_MAX_ITERS,
};
use crate::sampler::{seeded_rng, RowSampler};

/// Row scales below this are redrawn.
pub const MIN_ROW_SCALE: f64 = 1e-6;

const STREAMS_PER_TRIAL: u64 = 8;
const SYSTEM_STREAM_OFFSET: u64 = 7;

/// A random consistent system `Ax = b`.
#[derive(Clone, Debug)]
pub struct GeneratedSystem {
    pub a: DenseMatrix,
    pub x: Vec<f64>,
    pub b: Vec<f64>,
}

/// Rows are Gaussian directions normalized to unit length and scaled by
/// independent `U[0,1)` draws (redrawn below [`MIN_ROW_SCALE`]); `x` is
/// standard normal and `b = Ax`.
pub fn generate_system<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<GeneratedSystem> {
    if n == 0 || m < n {
        return Err(Error::InvalidConfig(format!(
            "need m >= n >= 1, got m = {m}, n = {n}"
        )));
    }
    let unit = Uniform::new(0.0, 1.0).expect("valid range");
    let mut data = Vec::with_capacity(m * n);
    let mut row = vec![0.0; n];
    for _ in 0..m {
        let norm = loop {
            row.iter_mut()
                .for_each(|v| *v = StandardNormal.sample(rng));
            let norm = norm2(&row);
            if norm > 0.0 {
                break norm;
            }
        };
        let scale = loop {
            let s: f64 = unit.sample(rng);
            if s >= MIN_ROW_SCALE {
                break s;
            }
        };
        data.extend(row.iter().map(|v| v / norm * scale));
    }
    let a = DenseMatrix::new(m, n, data)?;
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let b = a.mul_vec(&x)?;
    Ok(GeneratedSystem { a, x, b })
}

/// Per-step mean squared error over trials.
#[derive(Clone, Debug)]
pub struct MseCurve {
    pub method: Method,
    pub mean: Vec<f64>,
    /// Standard error of `mean` at each step.
    pub std_err: Vec<f64>,
    pub trials: usize,
}

#[derive(Clone, Debug)]
pub struct MethodData {
    pub distribution: DistributionVector,
    /// Absent for RKA, which needs no optimization.
    pub optimizer: Option<OptimizerResult>,
    pub rates: RatePair,
    pub curve: MseCurve,
    pub setup_time: Duration,
}

#[derive(Clone, Debug)]
pub struct MethodOutcome {
    pub method: Method,
    pub result: std::result::Result<MethodData, String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub system: GeneratedSystem,
    pub row_norm_p: DistributionVector,
    pub outcomes: Vec<MethodOutcome>,
    pub trial_time: Duration,
}

impl ExperimentResults {
    pub fn outcome(&self, method: Method) -> Option<&MethodData> {
        self.outcomes
            .iter()
            .find(|o| o.method == method)
            .and_then(|o| o.result.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (Method, &str)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.method, e.as_str())))
    }
}

/// Computes the row-selection distribution of `method` for `system`.
pub fn method_distribution(
    method: Method,
    system: &NormalizedSystem,
    config: &ExperimentConfig,
) -> Result<(DistributionVector, Option<OptimizerResult>)> {
    let b = system.unit_rows();
    let row_norm = system.row_norm_distribution();
    let result = match method {
        Method::Rka => return Ok((row_norm, None)),
        Method::Orka => optimize_maximin(b, config.maximin_tol, MAXIMIN_MAX_ITERS)?,
        Method::Lporka => optimize_lp(b, LP_TOLERANCE)?,
        Method::Iteorka => optimize_dopt(&row_norm, b, config.dopt_iters)?,
    };
    Ok((result.p_hat.clone(), Some(result)))
}

fn trial_stream(trial: usize, slot: u64) -> u64 {
    1 + trial as u64 * STREAMS_PER_TRIAL + slot
}

fn trajectory(
    system: &NormalizedSystem,
    truth: &[f64],
    sampler: RowSampler,
    steps: usize,
) -> Result<Vec<f64>> {
    let x0 = vec![0.0; system.cols()];
    Ok(run_solver(system, &x0, Scheme::Randomized(sampler), steps, Some(truth))?.squared_errors)
}

type TrialCurves = Vec<std::result::Result<Vec<f64>, String>>;

/// Generates the system, computes each method's distribution once, and
/// averages squared-error trajectories from `x₀ = 0` over the trials.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResults> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed, 0);
    let system = generate_system(config.m, config.n, &mut rng)?;
    let normalized = row_normalize(&system.a, &system.b)?;
    let row_norm_p = normalized.row_norm_distribution();

    struct Prepared {
        method: Method,
        distribution: DistributionVector,
        optimizer: Option<OptimizerResult>,
        rates: RatePair,
        sampler: RowSampler,
        setup_time: Duration,
    }
    let mut prepared = Vec::new();
    let mut failed = Vec::new();
    for &method in &config.methods {
        let start = Instant::now();
        let outcome = method_distribution(method, &normalized, config).and_then(|(p, opt)| {
            let rates = rate_pair(normalized.unit_rows(), &p)?;
            Ok((p, opt, rates))
        });
        match outcome {
            Ok((distribution, optimizer, rates)) => prepared.push(Prepared {
                method,
                sampler: RowSampler::with_stream(&distribution, config.seed, 0),
                distribution,
                optimizer,
                rates,
                setup_time: start.elapsed(),
            }),
            Err(e) => failed.push((method, e.to_string())),
        }
    }

    let start = Instant::now();
    let per_trial: Vec<TrialCurves> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let regenerated = if config.regenerate_per_trial {
                let mut rng = seeded_rng(config.seed, trial_stream(trial, SYSTEM_STREAM_OFFSET));
                Some(
                    generate_system(config.m, config.n, &mut rng).and_then(|s| {
                        let norm = row_normalize(&s.a, &s.b)?;
                        Ok((s, norm))
                    }),
                )
            } else {
                None
            };
            prepared
                .iter()
                .map(|prep| {
                    let stream = trial_stream(trial, prep.method.index() as u64);
                    let run = match &regenerated {
                        None => trajectory(
                            &normalized,
                            &system.x,
                            prep.sampler.reseeded(config.seed, stream),
                            config.steps,
                        ),
                        Some(Err(e)) => Err(Error::InvalidConfig(e.to_string())),
                        Some(Ok((sys, norm))) => method_distribution(prep.method, norm, config)
                            .and_then(|(p, _)| {
                                let sampler = RowSampler::with_stream(&p, config.seed, stream);
                                trajectory(norm, &sys.x, sampler, config.steps)
                            }),
                    };
                    run.map_err(|e| format!("trial {trial}: {e}"))
                })
                .collect()
        })
        .collect();
    let trial_time = start.elapsed();

    let mut outcomes: Vec<MethodOutcome> = failed
        .into_iter()
        .map(|(method, e)| MethodOutcome {
            method,
            result: Err(e),
        })
        .collect();
    for (k, prep) in prepared.into_iter().enumerate() {
        let curves: std::result::Result<Vec<&Vec<f64>>, String> = per_trial
            .iter()
            .map(|t| t[k].as_ref().map_err(Clone::clone))
            .collect();
        let result = curves.map(|curves| MethodData {
            curve: aggregate(prep.method, &curves),
            distribution: prep.distribution,
            optimizer: prep.optimizer,
            rates: prep.rates,
            setup_time: prep.setup_time,
        });
        outcomes.push(MethodOutcome {
            method: prep.method,
            result,
        });
    }
    outcomes.sort_by_key(|o| o.method);

    Ok(ExperimentResults {
        config: config.clone(),
        system,
        row_norm_p,
        outcomes,
        trial_time,
    })
}

/// Mean and standard error per step, summing in trial order.
fn aggregate(method: Method, curves: &[&Vec<f64>]) -> MseCurve {
    let trials = curves.len();
    let len = curves.first().map_or(0, |c| c.len());
    let mut mean = vec![0.0; len];
    for c in curves {
        for (acc, v) in mean.iter_mut().zip(c.iter()) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= trials as f64);
    let mut var = vec![0.0; len];
    for c in curves {
        for ((acc, v), mu) in var.iter_mut().zip(c.iter()).zip(&mean) {
            *acc += (v - mu) * (v - mu);
        }
    }
    let std_err = var
        .iter()
        .map(|s| {
            if trials > 1 {
                (s / (trials - 1) as f64 / trials as f64).sqrt()
            } else {
                0.0
            }
        })
        .collect();
    MseCurve {
        method,
        mean,
        std_err,
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_rows_are_scaled_directions() {
        let mut rng = seeded_rng(3, 0);
        let s = generate_system(50, 4, &mut rng).unwrap();
        for r in s.a.row_iter() {
            let norm = norm2(r);
            assert!(norm > 0.0 && norm <= 1.0 + 1e-15);
        }
        let ax = s.a.mul_vec(&s.x).unwrap();
        for (u, v) in ax.iter().zip(&s.b) {
            assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_system(20, 3, &mut seeded_rng(9, 0)).unwrap();
        let b = generate_system(20, 3, &mut seeded_rng(9, 0)).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.x, b.x);
        assert_eq!(a.b, b.b);
    }

    #[test]
    fn rejects_wide_systems() {
        assert!(generate_system(2, 3, &mut seeded_rng(0, 0)).is_err());
    }

    #[test]
    fn aggregate_mean_and_error() {
        let a = vec![1.0, 2.0];
        let b = vec![3.0, 2.0];
        let c = aggregate(Method::Rka, &[&a, &b]);
        assert_eq!(c.mean, vec![2.0, 2.0]);
        assert_eq!(c.std_err, vec![1.0, 0.0]);
    }

    #[test]
    fn single_trial_zero_steps() {
        let config = ExperimentConfig {
            m: 12,
            n: 3,
            trials: 1,
            steps: 0,
            ..Default::default()
        };
        let r = run_experiment(&config).unwrap();
        let expected: f64 = r.system.x.iter().map(|v| v * v).sum();
        for o in &r.outcomes {
            let d = o.result.as_ref().unwrap();
            assert_eq!(d.curve.mean, vec![expected]);
        }
    }

    #[test]
    fn regenerated_systems_run() {
        let config = ExperimentConfig {
            m: 10,
            n: 3,
            trials: 3,
            steps: 5,
            regenerate_per_trial: true,
            ..Default::default()
        };
        let r = run_experiment(&config).unwrap();
        let failures: Vec<_> = r.failures().collect();
        assert!(failures.is_empty(), "{failures:?}");
        // initial error differs from the shared system's ‖x‖² in general
        let d = r.outcome(Method::Rka).unwrap();
        assert_eq!(d.curve.mean.len(), 6);
    }
}
