use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kaczmarz_opt::error::{Error, Result};
use kaczmarz_opt::experiment::{
    emit_csv, format_summary, parse_methods, run_experiment, ConfigOverrides, ExperimentConfig,
};
use kaczmarz_opt::io::{read_matrix, read_vector};
use kaczmarz_opt::kaczmarz::{run_solver, Scheme};
use kaczmarz_opt::linalg::row_normalize;
use kaczmarz_opt::optimizers::{
    optimize_dopt, optimize_lp, optimize_maximin, DEFAULT_DOPT_ITERS, MAXIMIN_MAX_ITERS,
    MAXIMIN_TOLERANCE,
};
use kaczmarz_opt::DistributionVector;

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "kaczmarz-opt", version, about = "Randomized Kaczmarz with optimized row selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo comparison of row-selection distributions.
    Run(RunArgs),
    /// Print an optimized distribution for a matrix, one probability per line.
    Optimize {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        method: OptMethod,
        #[arg(long, default_value_t = MAXIMIN_TOLERANCE)]
        tol: f64,
        /// Iteration count for `dopt`, iteration cap for `maximin`.
        #[arg(long)]
        iters: Option<usize>,
    },
    /// Run randomized Kaczmarz and print the squared residual after each step.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// Selection probabilities; defaults to squared row norms.
        #[arg(long)]
        p: Option<PathBuf>,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OptMethod {
    Maximin,
    Lp,
    Dopt,
}

#[derive(clap::Args)]
struct RunArgs {
    /// key=value file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of rka,orka,lporka,iteorka.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    dopt_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certified gap for the maximin optimizer.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    regenerate_per_trial: bool,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            m: self.m,
            n: self.n,
            trials: self.trials,
            steps: self.steps,
            seed: self.seed,
            methods: self.methods.as_deref().map(parse_methods).transpose()?,
            dopt_iters: self.dopt_iters,
            output_dir: self.out.clone(),
            maximin_tol: self.tol,
            regenerate_per_trial: self.regenerate_per_trial.then_some(true),
        };
        let config = ExperimentConfig::default().merged(&file).merged(&flags);
        config.validate()?;
        Ok(config)
    }
}

/// A failure together with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn numerical(method: &str, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: format!("{method}: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_INVALID
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn run(args: &RunArgs) -> std::result::Result<(), Failure> {
    let config = args.config()?;
    let results = run_experiment(&config)?;
    emit_csv(&results, &config.output_dir)?;
    print!("{}", format_summary(&results));
    let failures: Vec<_> = results.failures().collect();
    if let Some((method, e)) = failures.first() {
        for (m, e) in &failures[1..] {
            eprintln!("{m}: {e}");
        }
        return Err(Failure::numerical(method.name(), e));
    }
    Ok(())
}

fn optimize(
    matrix: &Path,
    method: OptMethod,
    tol: f64,
    iters: Option<usize>,
) -> std::result::Result<(), Failure> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tol must be positive".into()).into());
    }
    let a = read_matrix(matrix)?;
    let system = row_normalize(&a, &vec![0.0; a.rows()])?;
    let b = system.unit_rows();
    let (name, result) = match method {
        OptMethod::Maximin => (
            "maximin",
            optimize_maximin(b, tol, iters.unwrap_or(MAXIMIN_MAX_ITERS)),
        ),
        OptMethod::Lp => ("lp", optimize_lp(b, tol)),
        OptMethod::Dopt => (
            "dopt",
            optimize_dopt(
                &system.row_norm_distribution(),
                b,
                iters.unwrap_or(DEFAULT_DOPT_ITERS),
            ),
        ),
    };
    let result = result.map_err(|e| match e.is_numerical() {
        true => Failure::numerical(name, e),
        false => e.into(),
    })?;
    for p in result.p_hat.as_slice() {
        println!("{p}");
    }
    Ok(())
}

fn solve(
    matrix: &Path,
    rhs: &Path,
    p: Option<&Path>,
    steps: usize,
    seed: u64,
) -> std::result::Result<(), Failure> {
    let a = read_matrix(matrix)?;
    let b = read_vector(rhs)?;
    let system = row_normalize(&a, &b)?;
    let p = match p {
        Some(path) => DistributionVector::new(read_vector(path)?)?,
        None => system.row_norm_distribution(),
    };
    let x0 = vec![0.0; system.cols()];
    let record = run_solver(&system, &x0, Scheme::randomized(&p, seed), steps, None)?;
    for e in &record.squared_errors {
        println!("{e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.use_stderr() {
                true => ExitCode::from(EXIT_INVALID),
                false => ExitCode::SUCCESS,
            };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Optimize {
            matrix,
            method,
            tol,
            iters,
        } => optimize(matrix, *method, *tol, *iters),
        Command::Solve {
            matrix,
            rhs,
            p,
            steps,
            seed,
        } => solve(matrix, rhs, p.as_deref(), *steps, *seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
