//! Stochastic acceleration analysis for linear inverse problems.
//!
//! The crate predicts how much a minibatch stochastic gradient method can
//! gain over its full-gradient counterpart on `min (1/2n)‖Ax − b‖² + …` for a
//! given operator `A` and row partition, and provides the deterministic and
//! stochastic proximal solvers used to check those predictions.

pub mod error;
pub mod linalg;
pub mod operators;
pub mod partition;
pub mod prox;
pub mod rng;
pub mod safactor;
pub mod solvers;

#[cfg(feature = "oracle")]
pub mod oracle;

pub use error::{Error, Result};
pub use linalg::{Matrix, Spectrum};
pub use operators::ForwardOperator;
pub use partition::{make_partition, Partition, Scheme};
pub use prox::{LinearMap, RegularizerSpec, Term};
pub use safactor::{ExpectedSAReport, SAReport, SaAnalyzer};
pub use solvers::{run, run_experiment, Algorithm, Problem, RunOutput, Sampling, SolverConfig, Trace};
