//! Randomized Kaczmarz iteration with optimized row-selection distributions.
//!
//! - [`linalg`]: dense matrices, row normalization, weighted Gram matrices,
//!   Jacobi eigensolver, Cholesky.
//! - [`kaczmarz`]: hyperplane projections, cyclic and randomized sweeps.
//! - [`bounds`]: per-step contraction factors, `κ(A)`, error envelopes.
//! - [`optimizers`]: maximin-eigenvalue design, its LP relaxation, and the
//!   D-optimal multiplicative iteration.
//! - [`experiment`]: seeded Monte-Carlo comparison with CSV output.

pub mod bounds;
pub mod distribution;
pub mod error;
pub mod experiment;
pub mod io;
pub mod kaczmarz;
pub mod linalg;
pub mod optimizers;
pub mod sampler;

pub use distribution::DistributionVector;
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, NormalizedSystem, SymmetricMatrix};
pub use optimizers::{MethodTag, OptimizerResult};
pub use sampler::RowSampler;
