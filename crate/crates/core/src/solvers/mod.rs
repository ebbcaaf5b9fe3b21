//! Deterministic and stochastic proximal solvers with a shared trace
//! harness. Every solver records the objective and, when the ground truth
//! is known, `‖x − x†‖²` against the datapass count.

mod config;
mod methods;
mod problem;
pub mod synth;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Algorithm, Init, Sampling, SolverConfig, StepSeq};
pub use methods::{acc_pd_sgd, fista, minibatch_sgd, pdhg, pgd, prox_svrg};
pub use problem::Problem;

use crate::error::{Error, Result};

/// Objective above which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Datapasses spent so far.
    pub epoch: f64,
    pub objective: f64,
    /// `‖x − x†‖²`.
    pub est_error: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub label: String,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn epochs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.epoch).collect()
    }

    pub fn est_errors(&self) -> Option<Vec<f64>> {
        self.records.iter().map(|r| r.est_error).collect()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub solution: Vec<f64>,
    /// Final dual iterate of the primal-dual solvers, when `g` is active.
    pub dual: Option<Vec<f64>>,
    pub trace: Trace,
}

pub(crate) struct Recorder<'p> {
    problem: &'p Problem,
    start: Instant,
    trace: Trace,
}

impl<'p> Recorder<'p> {
    pub(crate) fn new(problem: &'p Problem, label: String) -> Self {
        Recorder {
            problem,
            start: Instant::now(),
            trace: Trace {
                label,
                records: Vec::new(),
            },
        }
    }

    pub(crate) fn log(&mut self, epoch: f64, x: &[f64]) -> Result<()> {
        let objective = self.problem.objective(x);
        if !objective.is_finite() || objective > DIVERGENCE_LIMIT {
            return Err(Error::Diverged { epoch, objective });
        }
        self.trace.records.push(TraceRecord {
            epoch,
            objective,
            est_error: self.problem.est_error(x),
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        Ok(())
    }

    pub(crate) fn finish(self, solution: Vec<f64>) -> RunOutput {
        self.finish_with_dual(solution, None)
    }

    pub(crate) fn finish_with_dual(self, solution: Vec<f64>, dual: Option<Vec<f64>>) -> RunOutput {
        RunOutput {
            solution,
            dual,
            trace: self.trace,
        }
    }
}

pub(crate) fn initial_point(problem: &Problem, init: Init) -> Vec<f64> {
    match init {
        Init::Backprojection => problem.backprojection(),
        Init::Zero => vec![0.0; problem.d()],
    }
}

/// Runs one configuration.
pub fn run(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    match config.algorithm {
        Algorithm::Pgd => pgd(problem, config),
        Algorithm::Fista => fista(problem, config),
        Algorithm::MinibatchSgd => minibatch_sgd(problem, config),
        Algorithm::ProxSvrg => prox_svrg(problem, config),
        Algorithm::Pdhg => pdhg(problem, config),
        Algorithm::AccPdSgd => acc_pd_sgd(problem, config),
    }
}

/// Runs every configuration on the shared problem, in parallel. Each run is
/// single-threaded and draws only from its own seed, so results do not
/// depend on scheduling. A failing configuration does not stop the others.
pub fn run_experiment(problem: &Problem, configs: &[SolverConfig]) -> Vec<Result<RunOutput>> {
    // Warm the shared caches once instead of racing to fill them.
    let _ = problem.lipschitz();
    let _ = problem.dual_norm_sq();
    configs.par_iter().map(|c| run(problem, c)).collect()
}
