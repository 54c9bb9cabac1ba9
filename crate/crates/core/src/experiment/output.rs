use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::ExperimentResults;
use crate::error::{Error, Result};

pub const MSE_FILE: &str = "mse.csv";
pub const MSE_STDERR_FILE: &str = "mse_stderr.csv";
pub const DISTRIBUTIONS_FILE: &str = "distributions.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Writes `mse.csv`, `mse_stderr.csv`, `distributions.csv` and `summary.txt`
/// into `output_dir`, creating it if needed. Numbers use the shortest
/// decimal form that round-trips. Failed methods get no CSV column.
pub fn emit_csv(results: &ExperimentResults, output_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let ok: Vec<_> = results
        .outcomes
        .iter()
        .filter_map(|o| o.result.as_ref().ok().map(|d| (o.method, d)))
        .collect();

    let mut mse = String::from("step");
    let mut stderr = String::from("step");
    for (m, _) in &ok {
        write!(mse, ",{m}").unwrap();
        write!(stderr, ",{m}").unwrap();
    }
    mse.push('\n');
    stderr.push('\n');
    for step in 0..=results.config.steps {
        write!(mse, "{step}").unwrap();
        write!(stderr, "{step}").unwrap();
        for (_, d) in &ok {
            write!(mse, ",{}", d.curve.mean[step]).unwrap();
            write!(stderr, ",{}", d.curve.std_err[step]).unwrap();
        }
        mse.push('\n');
        stderr.push('\n');
    }

    let mut dist = String::from("row_index,row_norm_p");
    for (m, _) in &ok {
        write!(dist, ",{m}").unwrap();
    }
    dist.push('\n');
    for (i, p) in results.row_norm_p.as_slice().iter().enumerate() {
        write!(dist, "{i},{p}").unwrap();
        for (_, d) in &ok {
            write!(dist, ",{}", d.distribution.as_slice()[i]).unwrap();
        }
        dist.push('\n');
    }

    let files = [
        (MSE_FILE, mse),
        (MSE_STDERR_FILE, stderr),
        (DISTRIBUTIONS_FILE, dist),
        (SUMMARY_FILE, format_summary(results)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = output_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Human-readable report: rates, optimizer values, sparsity and timings.
pub fn format_summary(results: &ExperimentResults) -> String {
    let c = &results.config;
    let mut s = String::new();
    writeln!(
        s,
        "m = {}, n = {}, trials = {}, steps = {}, seed = {}, dopt_iters = {}{}",
        c.m,
        c.n,
        c.trials,
        c.steps,
        c.seed,
        c.dopt_iters,
        if c.regenerate_per_trial {
            ", regenerated per trial"
        } else {
            ""
        }
    )
    .unwrap();
    writeln!(s).unwrap();
    writeln!(
        s,
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>10} {:>8} {:>14} {:>12}",
        "method", "omega1", "omega2", "t_hat", "gap", "zeros", "iters", "final_mse", "setup_s"
    )
    .unwrap();
    for o in &results.outcomes {
        match &o.result {
            Ok(d) => {
                let (t_hat, gap, iters) = match &d.optimizer {
                    Some(r) => (
                        format!("{:.6e}", r.t_hat),
                        format!("{:.3e}", r.certificate_gap),
                        r.iterations.to_string(),
                    ),
                    None => ("-".into(), "-".into(), "-".into()),
                };
                let zeros = d.distribution.count_below(crate::distribution::SPARSITY_THRESHOLD);
                writeln!(
                    s,
                    "{:<8} {:>12.8} {:>12.8} {:>12} {:>12} {:>10} {:>8} {:>14.6e} {:>12.4}",
                    o.method.name(),
                    d.rates.omega1,
                    d.rates.omega2,
                    t_hat,
                    gap,
                    zeros,
                    iters,
                    d.curve.mean.last().copied().unwrap_or(f64::NAN),
                    d.setup_time.as_secs_f64()
                )
                .unwrap();
            }
            Err(e) => {
                writeln!(s, "{:<8} FAILED: {e}", o.method.name()).unwrap();
            }
        }
    }
    writeln!(s).unwrap();
    writeln!(s, "trial phase: {:.3} s", results.trial_time.as_secs_f64()).unwrap();
    s
}
