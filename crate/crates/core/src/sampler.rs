//! Seeded categorical sampling of row indices.
//!
//! Random streams come from ChaCha8: `seed` selects the key and `stream`
//! the independent 64-bit stream within it, so per-trial generators are
//! obtained by changing only the stream id.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distribution::DistributionVector;

/// Below this many categories draws use a cumulative table with binary
/// search; at or above it, an alias table.
pub const ALIAS_CUTOFF: usize = 64;

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
enum Table {
    Cumulative {
        cdf: Vec<f64>,
        last_positive: usize,
    },
    Alias {
        threshold: Vec<f64>,
        alias: Vec<usize>,
    },
}

impl Table {
    fn build(p: &[f64]) -> Self {
        if p.len() < ALIAS_CUTOFF {
            let mut acc = 0.0;
            let cdf = p
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect();
            let last_positive = p.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            Table::Cumulative { cdf, last_positive }
        } else {
            build_alias(p)
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        match self {
            Table::Cumulative { cdf, last_positive } => {
                let total = cdf[cdf.len() - 1];
                let u = rng.random::<f64>() * total;
                cdf.partition_point(|&c| c <= u).min(*last_positive)
            }
            Table::Alias { threshold, alias } => {
                let i = rng.random_range(0..threshold.len());
                if rng.random::<f64>() < threshold[i] {
                    i
                } else {
                    alias[i]
                }
            }
        }
    }
}

/// Vose's alias method. Zero-weight categories get threshold 0 and therefore
/// are never returned.
fn build_alias(p: &[f64]) -> Table {
    let m = p.len();
    let total: f64 = p.iter().sum();
    let mut scaled: Vec<f64> = p.iter().map(|w| w * m as f64 / total).collect();
    let mut threshold = vec![0.0; m];
    let mut alias: Vec<usize> = (0..m).collect();
    let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..m).partition(|&i| scaled[i] < 1.0);
    // process in index order
    small.reverse();
    large.reverse();
    while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
        small.pop();
        threshold[s] = scaled[s];
        alias[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    let fallback = (0..m)
        .max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    for i in large.into_iter().chain(small) {
        // leftovers are 1 up to round-off
        if p[i] > 0.0 {
            threshold[i] = 1.0;
        } else {
            threshold[i] = 0.0;
            alias[i] = fallback;
        }
    }
    Table::Alias { threshold, alias }
}

/// Draws row indices with probabilities given by a [`DistributionVector`].
#[derive(Clone, Debug)]
pub struct RowSampler {
    table: Table,
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RowSampler {
    pub fn new(p: &DistributionVector, seed: u64) -> Self {
        Self::with_stream(p, seed, 0)
    }

    pub fn with_stream(p: &DistributionVector, seed: u64, stream: u64) -> Self {
        Self {
            table: Table::build(p.as_slice()),
            seed,
            stream,
            rng: seeded_rng(seed, stream),
        }
    }

    /// Same table, fresh generator.
    pub fn reseeded(&self, seed: u64, stream: u64) -> Self {
        Self {
            table: self.table.clone(),
            seed,
            stream,
            rng: seeded_rng(seed, stream),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn categories(&self) -> usize {
        match &self.table {
            Table::Cumulative { cdf, .. } => cdf.len(),
            Table::Alias { threshold, .. } => threshold.len(),
        }
    }

    pub fn uses_alias_table(&self) -> bool {
        matches!(self.table, Table::Alias { .. })
    }

    pub fn sample(&mut self) -> usize {
        self.table.draw(&mut self.rng)
    }
}
