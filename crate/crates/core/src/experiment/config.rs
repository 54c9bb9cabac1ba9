use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optimizers::{DEFAULT_DOPT_ITERS, MAXIMIN_TOLERANCE};

/// Row-selection scheme compared by the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Probabilities proportional to squared row norms.
    Rka,
    /// Maximin-`λ_min` distribution.
    Orka,
    /// Diagonal (LP) relaxation of the maximin design.
    Lporka,
    /// D-optimal multiplicative iteration started from the row-norm distribution.
    Iteorka,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rka, Method::Orka, Method::Lporka, Method::Iteorka];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rka => "rka",
            Method::Orka => "orka",
            Method::Lporka => "lporka",
            Method::Iteorka => "iteorka",
        }
    }

    /// Position in [`Method::ALL`]; fixes the random stream of the method.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

/// Parses a comma-separated method list, dropping duplicates and sorting
/// into canonical order.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut methods = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(Method::from_str)
        .collect::<Result<Vec<_>>>()?;
    methods.sort();
    methods.dedup();
    Ok(methods)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub dopt_iters: usize,
    pub output_dir: PathBuf,
    /// Certified gap requested from the maximin optimizer.
    pub maximin_tol: f64,
    /// Draw a fresh system for every trial instead of one shared system.
    pub regenerate_per_trial: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 200,
            n: 20,
            trials: 2000,
            steps: 500,
            seed: 1,
            methods: Method::ALL.to_vec(),
            dopt_iters: DEFAULT_DOPT_ITERS,
            output_dir: PathBuf::from("results"),
            maximin_tol: MAXIMIN_TOLERANCE,
            regenerate_per_trial: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.m < self.n {
            return Err(Error::InvalidConfig(format!(
                "m = {} must be at least n = {}",
                self.m, self.n
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        if !(self.maximin_tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }

    /// Applies `overrides` on top of `self`.
    pub fn merged(mut self, overrides: &ConfigOverrides) -> Self {
        let o = overrides;
        if let Some(v) = o.m {
            self.m = v;
        }
        if let Some(v) = o.n {
            self.n = v;
        }
        if let Some(v) = o.trials {
            self.trials = v;
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = &o.methods {
            self.methods = v.clone();
        }
        if let Some(v) = o.dopt_iters {
            self.dopt_iters = v;
        }
        if let Some(v) = &o.output_dir {
            self.output_dir = v.clone();
        }
        if let Some(v) = o.maximin_tol {
            self.maximin_tol = v;
        }
        if let Some(v) = o.regenerate_per_trial {
            self.regenerate_per_trial = v;
        }
        self
    }
}

/// Optional settings, from flags or from a `key=value` config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub methods: Option<Vec<Method>>,
    pub dopt_iters: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub maximin_tol: Option<f64>,
    pub regenerate_per_trial: Option<bool>,
}

impl ConfigOverrides {
    /// Parses `key=value` lines. Keys mirror the CLI flags (`dopt-iters`,
    /// `out`, ...); underscores are accepted in place of dashes. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            let key = key.trim().replace('_', "-");
            let value = value.trim();
            let bad = |what: &str| {
                Error::InvalidConfig(format!("line {}: invalid {what} '{value}'", lineno + 1))
            };
            match key.as_str() {
                "m" => out.m = Some(value.parse().map_err(|_| bad("m"))?),
                "n" => out.n = Some(value.parse().map_err(|_| bad("n"))?),
                "trials" => out.trials = Some(value.parse().map_err(|_| bad("trials"))?),
                "steps" => out.steps = Some(value.parse().map_err(|_| bad("steps"))?),
                "seed" => out.seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "methods" => out.methods = Some(parse_methods(value)?),
                "dopt-iters" => {
                    out.dopt_iters = Some(value.parse().map_err(|_| bad("dopt-iters"))?)
                }
                "out" | "output-dir" => out.output_dir = Some(PathBuf::from(value)),
                "tol" => out.maximin_tol = Some(value.parse().map_err(|_| bad("tol"))?),
                "regenerate-per-trial" => {
                    out.regenerate_per_trial = Some(value.parse().map_err(|_| bad("flag"))?)
                }
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}
