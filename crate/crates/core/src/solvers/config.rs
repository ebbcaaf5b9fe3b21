use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{make_partition, Partition, Scheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pgd,
    Fista,
    MinibatchSgd,
    ProxSvrg,
    Pdhg,
    AccPdSgd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pgd => "pgd",
            Algorithm::Fista => "fista",
            Algorithm::MinibatchSgd => "minibatch_sgd",
            Algorithm::ProxSvrg => "prox_svrg",
            Algorithm::Pdhg => "pdhg",
            Algorithm::AccPdSgd => "acc_pd_sgd",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Algorithm::MinibatchSgd | Algorithm::ProxSvrg | Algorithm::AccPdSgd)
    }
}

/// A step size, either constant or indexed by iteration (1-based; the last
/// entry repeats).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSeq {
    Const(f64),
    Schedule(Vec<f64>),
}

impl StepSeq {
    pub fn at(&self, l: usize) -> f64 {
        match self {
            StepSeq::Const(v) => *v,
            StepSeq::Schedule(v) => v[l.saturating_sub(1).min(v.len() - 1)],
        }
    }

    fn validate(&self, what: &str, allow_zero: bool) -> Result<()> {
        let vals: &[f64] = match self {
            StepSeq::Const(v) => std::slice::from_ref(v),
            StepSeq::Schedule(v) if v.is_empty() => {
                return Err(Error::invalid(format!("{what} schedule is empty")))
            }
            StepSeq::Schedule(v) => v,
        };
        let ok = |v: f64| v.is_finite() && (v > 0.0 || (allow_zero && v == 0.0));
        if let Some(bad) = vals.iter().find(|v| !ok(**v)) {
            return Err(Error::invalid(format!("{what} must be positive, got {bad}")));
        }
        Ok(())
    }
}

impl From<f64> for StepSeq {
    fn from(v: f64) -> Self {
        StepSeq::Const(v)
    }
}

/// How stochastic solvers draw their minibatches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// Uniform choice among the `k` blocks of a fixed partition. A random
    /// scheme without its own seed uses the solver seed.
    Partition {
        scheme: String,
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    /// A fresh uniform `m`-subset of the rows at every iteration.
    WithReplacement { m: usize },
}

impl Sampling {
    pub fn partition(scheme: Scheme, k: usize) -> Self {
        Sampling::Partition {
            scheme: scheme.name().into(),
            k,
            seed: scheme.seed(),
        }
    }

    pub(crate) fn resolve(&self, n: usize, solver_seed: u64) -> Result<Partition> {
        match self {
            Sampling::Partition { scheme, k, seed } => {
                if *k > n {
                    return Err(Error::invalid(format!("K = {k} exceeds n = {n}")));
                }
                make_partition(Scheme::parse(scheme, seed.unwrap_or(solver_seed))?, n, *k)
            }
            Sampling::WithReplacement { .. } => {
                Err(Error::Unsupported("this solver needs partition sampling".into()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// `x⁰ = Aᵀb/n`.
    #[default]
    Backprojection,
    Zero,
}

/// One solver run. `epochs` is the budget in datapasses, where one datapass
/// is `n` row-gradient evaluations.
///
/// Step names: `step` is the primal step (`η`, or `τ` for PDHG),
/// `dual_step` the dual one (`α`, or `σ` for PDHG), `theta` the inner
/// extrapolation of Acc-PD-SGD. Unset values take the documented defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepSeq>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_step: Option<StepSeq>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<StepSeq>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
    /// `N₁`, inner steps per outer loop of Acc-PD-SGD (default `5K`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_loops: Option<usize>,
    /// `N₀`, outer loops of Acc-PD-SGD (default: enough for `epochs`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_loops: Option<usize>,
    /// Outer momentum of Acc-PD-SGD; off gives a plain restarted
    /// stochastic primal-dual method.
    #[serde(default = "default_true")]
    pub outer_momentum: bool,
    /// FGP budget of the TV prox inside FISTA.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tv_inner_iters: Option<usize>,
    #[serde(default)]
    pub init: Init,
}

fn default_true() -> bool {
    true
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, epochs: usize) -> Self {
        SolverConfig {
            algorithm,
            name: None,
            epochs,
            seed: 0,
            step: None,
            dual_step: None,
            theta: None,
            sampling: None,
            inner_loops: None,
            outer_loops: None,
            outer_momentum: true,
            tv_inner_iters: None,
            init: Init::Backprojection,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn step(mut self, step: impl Into<StepSeq>) -> Self {
        self.step = Some(step.into());
        self
    }

    pub fn dual_step(mut self, step: impl Into<StepSeq>) -> Self {
        self.dual_step = Some(step.into());
        self
    }

    pub fn theta(mut self, theta: impl Into<StepSeq>) -> Self {
        self.theta = Some(theta.into());
        self
    }

    pub fn sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = Some(sampling);
        self
    }

    pub fn partition(self, scheme: Scheme, k: usize) -> Self {
        self.sampling(Sampling::partition(scheme, k))
    }

    pub fn loops(mut self, outer: usize, inner: usize) -> Self {
        self.outer_loops = Some(outer);
        self.inner_loops = Some(inner);
        self
    }

    pub fn outer_momentum(mut self, on: bool) -> Self {
        self.outer_momentum = on;
        self
    }

    pub fn tv_inner_iters(mut self, iters: usize) -> Self {
        self.tv_inner_iters = Some(iters);
        self
    }

    pub fn init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.algorithm.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if let Some(s) = &self.step {
            s.validate("step", false)?;
        }
        if let Some(s) = &self.dual_step {
            s.validate("dual step", false)?;
        }
        if let Some(s) = &self.theta {
            s.validate("theta", true)?;
        }
        if self.inner_loops == Some(0) || self.outer_loops == Some(0) {
            return Err(Error::invalid("loop counts must be at least 1"));
        }
        if self.tv_inner_iters == Some(0) {
            return Err(Error::invalid("tv_inner_iters must be at least 1"));
        }
        match (&self.sampling, self.algorithm) {
            (Some(Sampling::Partition { k: 0, .. }), _) => {
                Err(Error::invalid("partition needs K ≥ 1"))
            }
            (Some(Sampling::WithReplacement { m: 0 }), _) => {
                Err(Error::invalid("minibatch size must be at least 1"))
            }
            (None, a) if a.is_stochastic() => Err(Error::invalid(format!(
                "{} needs a sampling spec",
                a.name()
            ))),
            (Some(Sampling::WithReplacement { .. }), Algorithm::AccPdSgd) => Err(
                Error::Unsupported("acc_pd_sgd draws blocks of a partition".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms() {
        let c: SolverConfig = serde_json::from_str(
            r#"{"algorithm":"acc_pd_sgd","epochs":20,"seed":3,"step":[0.5,0.25],
                "sampling":{"kind":"partition","scheme":"interleaved","k":10}}"#,
        )
        .unwrap();
        assert_eq!(c.step.as_ref().unwrap().at(1), 0.5);
        assert_eq!(c.step.as_ref().unwrap().at(9), 0.25);
        assert!(c.outer_momentum);
        c.validate().unwrap();
        let back: SolverConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"algorithm":"pgd","epochs":1,"x":1}"#)
            .is_err());
    }

    #[test]
    fn validation() {
        assert!(SolverConfig::new(Algorithm::Pgd, 0).validate().is_err());
        assert!(SolverConfig::new(Algorithm::Pgd, 1).step(-1.0).validate().is_err());
        assert!(SolverConfig::new(Algorithm::MinibatchSgd, 1).validate().is_err());
        assert!(SolverConfig::new(Algorithm::AccPdSgd, 1)
            .sampling(Sampling::WithReplacement { m: 2 })
            .validate()
            .is_err());
        assert!(SolverConfig::new(Algorithm::AccPdSgd, 1).theta(0.0).partition(Scheme::Consecutive, 2)
            .validate()
            .is_ok());
    }
}
