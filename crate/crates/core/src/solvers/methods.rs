use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{initial_point, Recorder, RunOutput, Sampling, SolverConfig, StepSeq};
use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};
use crate::partition::Partition;
use crate::prox::{clamp_in_place, Term, TvProx, DEFAULT_TV_INNER_ITERS};
use crate::rng::{stream, Stream};
use crate::safactor::{batch_lipschitz, expected_sa_with_replacement};
use crate::solvers::Problem;

fn step_or(seq: &Option<StepSeq>, default: f64) -> StepSeq {
    seq.clone().unwrap_or(StepSeq::Const(default))
}

/// Proximal gradient descent, one datapass per iteration. Default step `1/L_f`.
pub fn pgd(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    if problem.needs_tv() {
        return Err(Error::Unsupported("pgd needs a closed-form prox; use fista or pdhg".into()));
    }
    let eta = step_or(&config.step, 1.0 / problem.lipschitz()?);
    let mut rec = Recorder::new(problem, config.label());
    let mut x = initial_point(problem, config.init);
    let mut g = vec![0.0; problem.d()];
    rec.log(0.0, &x)?;
    for i in 1..=config.epochs {
        let e = eta.at(i);
        problem.gradient_into(&x, &mut g);
        axpy(-e, &g, &mut x);
        problem.separable_prox(e, &mut x)?;
        rec.log(i as f64, &x)?;
    }
    Ok(rec.finish(x))
}

/// FISTA. With a non-identity `D` the prox is computed by warm-started FGP
/// (`tv_inner_iters` steps per call, default 50).
pub fn fista(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    let eta = step_or(&config.step, 1.0 / problem.lipschitz()?);
    let tv = if problem.needs_tv() {
        if problem.reg().h == Term::L1 && problem.reg().gamma > 0.0 {
            return Err(Error::Unsupported("fista with TV supports only indicator h".into()));
        }
        let d = problem.dual_operator().expect("g is active").into_owned();
        Some(TvProx::new(d)?)
    } else {
        None
    };
    let inner = config.tv_inner_iters.unwrap_or(DEFAULT_TV_INNER_ITERS);
    let constraint = if problem.reg().gamma > 0.0 { problem.reg().h.clone() } else { Term::None };
    let mut dual = Vec::new();

    let mut rec = Recorder::new(problem, config.label());
    let mut x = initial_point(problem, config.init);
    let mut y = x.clone();
    let mut g = vec![0.0; problem.d()];
    let mut t = 1.0f64;
    rec.log(0.0, &x)?;
    for i in 1..=config.epochs {
        let e = eta.at(i);
        problem.gradient_into(&y, &mut g);
        axpy(-e, &g, &mut y);
        let x_next = match &tv {
            Some(p) => {
                p.solve_warm(&y, problem.reg().lambda * e, inner, &constraint, &mut dual, None)
            }
            None => {
                problem.separable_prox(e, &mut y)?;
                y.clone()
            }
        };
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let c = (t - 1.0) / t_next;
        for ((yi, xn), xo) in y.iter_mut().zip(&x_next).zip(&x) {
            *yi = xn + c * (xn - xo);
        }
        x = x_next;
        t = t_next;
        rec.log(i as f64, &x)?;
    }
    Ok(rec.finish(x))
}

/// Minibatch draws shared by the stochastic solvers.
enum Sampler {
    Blocks(Partition),
    Subsets { n: usize, m: usize },
}

impl Sampler {
    fn new(problem: &Problem, config: &SolverConfig) -> Result<Self> {
        let n = problem.n();
        match config.sampling.as_ref().expect("validated") {
            s @ Sampling::Partition { .. } => Ok(Sampler::Blocks(s.resolve(n, config.seed)?)),
            Sampling::WithReplacement { m } if *m > n => {
                Err(Error::invalid(format!("minibatch size {m} exceeds n = {n}")))
            }
            Sampling::WithReplacement { m } => Ok(Sampler::Subsets { n, m: *m }),
        }
    }

    /// Smoothness constant governing the default step: `L_b` for a
    /// partition, the expected-smoothness bound for random subsets.
    fn lipschitz(&self, a: &Matrix) -> Result<f64> {
        match self {
            Sampler::Blocks(p) => batch_lipschitz(a, p),
            Sampler::Subsets { m, .. } => Ok(expected_sa_with_replacement(a, *m)?.l_e_step_bound),
        }
    }

    fn steps_per_epoch(&self) -> usize {
        match self {
            Sampler::Blocks(p) => p.k(),
            Sampler::Subsets { n, m } => ((*n as f64 / *m as f64).round() as usize).max(1),
        }
    }

    /// Expected datapasses per step.
    fn passes_per_step(&self) -> f64 {
        match self {
            Sampler::Blocks(p) => 1.0 / p.k() as f64,
            Sampler::Subsets { n, m } => *m as f64 / *n as f64,
        }
    }

    /// Rows of the next minibatch and the weight making its gradient
    /// unbiased: `K/n` for blocks, `1/m` for subsets.
    fn draw(&self, rng: &mut ChaCha8Rng, buf: &mut Vec<usize>) -> f64 {
        buf.clear();
        match self {
            Sampler::Blocks(p) => {
                buf.extend_from_slice(p.block(rng.gen_range(0..p.k())));
                p.k() as f64 / p.n() as f64
            }
            Sampler::Subsets { n, m } => {
                buf.extend(index::sample(rng, *n, *m).iter());
                buf.sort_unstable();
                1.0 / *m as f64
            }
        }
    }
}

/// Projected minibatch SGD. Default step `1/L_b` for a partition, `1/L_e`
/// for random subsets. One epoch is `K` (or `n/m`) steps.
pub fn minibatch_sgd(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    if problem.needs_tv() {
        return Err(Error::Unsupported("minibatch_sgd needs a closed-form prox".into()));
    }
    let sampler = Sampler::new(problem, config)?;
    let eta = step_or(&config.step, 1.0 / sampler.lipschitz(problem.matrix())?);
    let per_epoch = sampler.steps_per_epoch();
    let mut rng = stream(config.seed, Stream::Solver);
    let mut rows = Vec::new();

    let mut rec = Recorder::new(problem, config.label());
    let mut x = initial_point(problem, config.init);
    let mut g = vec![0.0; problem.d()];
    rec.log(0.0, &x)?;
    let mut step = 0;
    for _ in 0..config.epochs {
        for _ in 0..per_epoch {
            step += 1;
            let e = eta.at(step);
            let w = sampler.draw(&mut rng, &mut rows);
            problem.block_gradient(&rows, w, &x, &mut g);
            axpy(-e, &g, &mut x);
            problem.separable_prox(e, &mut x)?;
        }
        rec.log(step as f64 * sampler.passes_per_step(), &x)?;
    }
    Ok(rec.finish(x))
}

/// Proximal SVRG. Each outer loop takes a full-gradient snapshot (one
/// datapass) and then `K` (or `n/m`) variance-reduced steps (one more), so
/// it costs two datapasses. Default step `1/(4L_b)`.
pub fn prox_svrg(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    if problem.needs_tv() {
        return Err(Error::Unsupported("prox_svrg needs a closed-form prox".into()));
    }
    let sampler = Sampler::new(problem, config)?;
    let eta = step_or(&config.step, 0.25 / sampler.lipschitz(problem.matrix())?);
    let per_epoch = sampler.steps_per_epoch();
    let outer = config.epochs.div_ceil(2);
    let mut rng = stream(config.seed, Stream::Solver);
    let mut rows = Vec::new();
    let d = problem.d();

    let mut rec = Recorder::new(problem, config.label());
    let mut x = initial_point(problem, config.init);
    let (mut mu, mut g, mut g_snap) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    rec.log(0.0, &x)?;
    let mut step = 0;
    for s in 1..=outer {
        let snapshot = x.clone();
        problem.gradient_into(&snapshot, &mut mu);
        for _ in 0..per_epoch {
            step += 1;
            let e = eta.at(step);
            let w = sampler.draw(&mut rng, &mut rows);
            problem.block_gradient(&rows, w, &x, &mut g);
            problem.block_gradient(&rows, w, &snapshot, &mut g_snap);
            for ((xi, gi), (gs, m)) in x.iter_mut().zip(&g).zip(g_snap.iter().zip(&mu)) {
                *xi -= e * (gi - gs + m);
            }
            problem.separable_prox(e, &mut x)?;
        }
        rec.log(2.0 * s as f64, &x)?;
    }
    Ok(rec.finish(x))
}

/// Checks `1/τ − σ‖D‖² ≥ L_f/2`, the step condition for primal-dual
/// splitting with a smooth term handled by its gradient.
fn check_primal_dual_steps(tau: f64, sigma: f64, d_norm_sq: f64, l: f64) -> Result<()> {
    let lhs = tau * (sigma * d_norm_sq + l / 2.0);
    if lhs > 1.0 + 1e-12 {
        return Err(Error::invalid(format!(
            "primal-dual steps violate τ(σ‖D‖² + L/2) ≤ 1: τ = {tau:e}, σ = {sigma:e}, \
             ‖D‖² = {d_norm_sq:e}, L = {l:e} gives {lhs}"
        )));
    }
    Ok(())
}

/// PDHG for `min_x f(x) + γh(x) + max_y yᵀDx − λg*(y)`:
///
/// ```text
/// y ← clamp_λ(y + σ D x̄)
/// x' ← prox_{τγh}(x − τ(Dᵀy + ∇f(x)))
/// x̄ ← 2x' − x
/// ```
///
/// Defaults `σ = L_f/‖D‖²` and `τ = 1/(L_f + σ‖D‖²)`. Without an active `g`
/// the dual stays zero and this is gradient descent on `f + γh`.
pub fn pdhg(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    let l = problem.lipschitz()?;
    let dn = problem.dual_norm_sq()?;
    let dop = problem.dual_operator();
    let sigma = step_or(&config.dual_step, if dn > 0.0 { l / dn } else { 1.0 });
    let tau = step_or(&config.step, 1.0 / (l + sigma.at(1) * dn));
    let scheduled = [&config.step, &config.dual_step]
        .iter()
        .any(|s| matches!(s, Some(StepSeq::Schedule(_))));
    for i in 1..=if scheduled { config.epochs } else { 1 } {
        check_primal_dual_steps(tau.at(i), sigma.at(i), dn, l)?;
    }
    let lambda = problem.reg().lambda;
    let d = problem.d();

    let mut rec = Recorder::new(problem, config.label());
    let mut x = initial_point(problem, config.init);
    let mut x_bar = x.clone();
    let mut y = vec![0.0; dop.as_ref().map_or(0, |m| m.nrows())];
    let (mut g, mut dty, mut dx) = (vec![0.0; d], vec![0.0; d], vec![0.0; y.len()]);
    rec.log(0.0, &x)?;
    for i in 1..=config.epochs {
        let (t, s) = (tau.at(i), sigma.at(i));
        if let Some(m) = &dop {
            m.matvec(&x_bar, &mut dx);
            axpy(s, &dx, &mut y);
            clamp_in_place(&mut y, lambda);
            m.matvec_t(&y, &mut dty);
        }
        problem.gradient_into(&x, &mut g);
        let x_old = x.clone();
        for ((xi, gi), di) in x.iter_mut().zip(&g).zip(&dty) {
            *xi -= t * (gi + di);
        }
        problem.h_prox(t, &mut x);
        for ((xb, xn), xo) in x_bar.iter_mut().zip(&x).zip(&x_old) {
            *xb = 2.0 * xn - xo;
        }
        rec.log(i as f64, &x)?;
    }
    Ok(rec.finish_with_dual(x, dop.is_some().then_some(y)))
}

/// Accelerated primal-dual SGD.
///
/// Outer loop `t = 1..N₀` forms the momentum point
/// `x^t = ((3t−2)v^{t−1} + t x^{t−1} − (2t−4)v^{t−2})/(2t+2)` and restarts
/// the inner loop from it with `y₀ = Dx₀`. The inner loop runs `N₁` steps of
///
/// ```text
/// y ← clamp_λ(y + α D z)
/// x' ← prox_{ηγh}(x − η(Dᵀy + ∇f_{S_i}(x)))     i uniform over the blocks
/// z ← x' + θ(x' − x)
/// ```
///
/// and its last iterate becomes `v^t`, which is also what is returned.
/// The current iterate is logged after every full datapass.
/// Defaults: `N₁ = 5K`, `N₀` enough to spend `epochs` datapasses,
/// `α = L_b/‖D‖²`, `η = 1/(L_b + α‖D‖²)`, `θ = K/(K+1)`.
pub fn acc_pd_sgd(problem: &Problem, config: &SolverConfig) -> Result<RunOutput> {
    config.validate()?;
    let sampler = Sampler::new(problem, config)?;
    let k = match &sampler {
        Sampler::Blocks(p) => p.k(),
        Sampler::Subsets { .. } => unreachable!("rejected by validate"),
    };
    let lb = sampler.lipschitz(problem.matrix())?;
    let dn = problem.dual_norm_sq()?;
    let dop = problem.dual_operator();
    let alpha = step_or(&config.dual_step, if dn > 0.0 { lb / dn } else { 1.0 });
    let eta = step_or(&config.step, 1.0 / (lb + alpha.at(1) * dn));
    let theta = step_or(&config.theta, k as f64 / (k as f64 + 1.0));
    let n1 = config.inner_loops.unwrap_or(5 * k);
    let n0 = config.outer_loops.unwrap_or_else(|| (config.epochs * k).div_ceil(n1));
    let lambda = problem.reg().lambda;
    let d = problem.d();
    let mut rng = stream(config.seed, Stream::Solver);
    let mut rows = Vec::new();

    let mut rec = Recorder::new(problem, config.label());
    let x0 = initial_point(problem, config.init);
    let (mut x_prev_outer, mut v1, mut v2) = (x0.clone(), x0.clone(), x0.clone());
    let m_dual = dop.as_ref().map_or(0, |m| m.nrows());
    let (mut y, mut dz) = (vec![0.0; m_dual], vec![0.0; m_dual]);
    let (mut g, mut dty) = (vec![0.0; d], vec![0.0; d]);
    let mut x_old = vec![0.0; d];
    rec.log(0.0, &x0)?;
    let mut l = 0usize;
    for t in 1..=n0 {
        let x_t: Vec<f64> = if config.outer_momentum {
            let tf = t as f64;
            let (c1, c2, c3) = (3.0 * tf - 2.0, tf, 2.0 * tf - 4.0);
            v1.iter()
                .zip(&x_prev_outer)
                .zip(&v2)
                .map(|((a, b), c)| (c1 * a + c2 * b - c3 * c) / (2.0 * tf + 2.0))
                .collect()
        } else {
            v1.clone()
        };
        let mut x = x_t.clone();
        let mut z = x_t.clone();
        if let Some(m) = &dop {
            m.matvec(&x, &mut y);
        }
        for _ in 0..n1 {
            l += 1;
            if let Some(m) = &dop {
                m.matvec(&z, &mut dz);
                axpy(alpha.at(l), &dz, &mut y);
                clamp_in_place(&mut y, lambda);
                m.matvec_t(&y, &mut dty);
            }
            let w = sampler.draw(&mut rng, &mut rows);
            problem.block_gradient(&rows, w, &x, &mut g);
            let e = eta.at(l);
            x_old.copy_from_slice(&x);
            for ((xi, gi), di) in x.iter_mut().zip(&g).zip(&dty) {
                *xi -= e * (gi + di);
            }
            problem.h_prox(e, &mut x);
            let th = theta.at(l);
            for ((zi, xn), xo) in z.iter_mut().zip(&x).zip(&x_old) {
                *zi = xn + th * (xn - xo);
            }
            if l % k == 0 {
                rec.log((l / k) as f64, &x)?;
            }
        }
        v2 = std::mem::replace(&mut v1, x);
        x_prev_outer = x_t;
        if l % k != 0 {
            rec.log(l as f64 * sampler.passes_per_step(), &v1)?;
        }
    }
    Ok(rec.finish_with_dual(v1, dop.is_some().then_some(y)))
}
