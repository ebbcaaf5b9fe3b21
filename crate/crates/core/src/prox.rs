//! Proximal maps and projections.
//!
//! All regularizers are of the form `λ g(Dx) + γ h(x)` with `g ∈ {ℓ1, none}`
//! and `h` one of the closed-form terms in [`Term`]. TV is anisotropic:
//! `g = ℓ1` composed with the finite difference operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm_sq, Matrix};
use crate::operators::diff_operator;

/// Default inner budget of [`tv_prox_fgp`] inside FISTA.
pub const DEFAULT_TV_INNER_ITERS: usize = 50;

/// A term with a closed-form prox.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    #[default]
    None,
    L1,
    Nonneg,
    Box {
        lo: f64,
        hi: f64,
    },
    /// Indicator of `{x : x_i = 0 where mask_i is false}`.
    Support {
        mask: Vec<bool>,
    },
}

impl Term {
    pub fn is_indicator(&self) -> bool {
        matches!(self, Term::Nonneg | Term::Box { .. } | Term::Support { .. })
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            Term::Box { lo, hi } if !(lo <= hi) => {
                Err(Error::invalid(format!("box needs lo ≤ hi, got [{lo}, {hi}]")))
            }
            Term::Support { mask } if mask.len() != d => Err(Error::dims(format!(
                "support mask has {} entries, expected {d}",
                mask.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Value of `weight · term(x)`; indicators evaluate to zero since the
    /// solvers only report feasible iterates.
    pub fn value(&self, weight: f64, x: &[f64]) -> f64 {
        match self {
            Term::L1 if weight > 0.0 => weight * x.iter().map(|v| v.abs()).sum::<f64>(),
            _ => 0.0,
        }
    }
}

/// Linear map inside `g`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearMap {
    #[default]
    Identity,
    /// Horizontal then vertical forward differences of a `d1 × d2` image.
    FiniteDiff { d1: usize, d2: usize },
    #[serde(skip)]
    Explicit(Matrix),
}

impl LinearMap {
    /// `None` for the identity.
    pub fn materialize(&self, d: usize) -> Result<Option<Matrix>> {
        let m = match self {
            LinearMap::Identity => return Ok(None),
            LinearMap::FiniteDiff { d1, d2 } => diff_operator(*d1, *d2)?,
            LinearMap::Explicit(m) => m.clone(),
        };
        if m.ncols() != d {
            return Err(Error::dims(format!(
                "linear map has {} columns, expected {d}",
                m.ncols()
            )));
        }
        Ok(Some(m))
    }
}

/// `λ g(Dx) + γ h(x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    #[serde(default)]
    pub g: Term,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub d: LinearMap,
    #[serde(default)]
    pub h: Term,
    #[serde(default)]
    pub gamma: f64,
}

impl RegularizerSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// Anisotropic TV on a `d1 × d2` image.
    pub fn tv(d1: usize, d2: usize, lambda: f64) -> Self {
        RegularizerSpec {
            g: Term::L1,
            lambda,
            d: LinearMap::FiniteDiff { d1, d2 },
            ..Self::default()
        }
    }

    pub fn l1(lambda: f64) -> Self {
        RegularizerSpec {
            g: Term::L1,
            lambda,
            ..Self::default()
        }
    }

    pub fn with_h(mut self, h: Term, gamma: f64) -> Self {
        self.h = h;
        self.gamma = gamma;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.gamma >= 0.0) {
            return Err(Error::invalid("regularizer weights must be nonnegative"));
        }
        if !matches!(self.g, Term::None | Term::L1) {
            return Err(Error::Unsupported("g must be l1 or none".into()));
        }
        self.h.validate(d)?;
        if let LinearMap::FiniteDiff { d1, d2 } = self.d {
            if d1 * d2 != d {
                return Err(Error::dims(format!("TV image {d1}×{d2} does not match d = {d}")));
            }
        }
        if let LinearMap::Explicit(m) = &self.d {
            if m.ncols() != d {
                return Err(Error::dims(format!("D has {} columns, expected {d}", m.ncols())));
            }
        }
        Ok(())
    }

    /// True when `λ g(D·)` is active.
    pub fn has_g(&self) -> bool {
        self.g == Term::L1 && self.lambda > 0.0
    }
}

/// `prox_{weight·term}^{step}(v)`.
pub fn prox_scaled(term: &Term, weight: f64, v: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("prox step must be positive, got {step}")));
    }
    if !(weight >= 0.0) {
        return Err(Error::invalid(format!("prox weight must be nonnegative, got {weight}")));
    }
    term.validate(v.len())?;
    let mut out = v.to_vec();
    apply_prox(term, weight * step, &mut out);
    Ok(out)
}

/// In place; `thresh` is `weight · step` and only matters for ℓ1. A zero
/// weight switches every term off.
pub(crate) fn apply_prox(term: &Term, thresh: f64, x: &mut [f64]) {
    if thresh == 0.0 {
        return;
    }
    match term {
        Term::None => {}
        Term::L1 => x.iter_mut().for_each(|v| *v = soft(*v, thresh)),
        Term::Nonneg => x.iter_mut().for_each(|v| *v = v.max(0.0)),
        Term::Box { lo, hi } => x.iter_mut().for_each(|v| *v = v.clamp(*lo, *hi)),
        Term::Support { mask } => x
            .iter_mut()
            .zip(mask)
            .filter(|(_, &keep)| !keep)
            .for_each(|(v, _)| *v = 0.0),
    }
}

fn soft(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

/// Prox of `λ‖·‖₁ + γ h` with step `η`, valid because both terms are
/// separable: soft-threshold, then project.
pub(crate) fn apply_separable(reg: &RegularizerSpec, step: f64, x: &mut [f64]) {
    let l1 = if reg.g == Term::L1 { reg.lambda } else { 0.0 };
    apply_composite(l1, &reg.h, reg.gamma, step, x);
}

/// Prox of `l1‖·‖₁ + γ h` with step `η`.
pub(crate) fn apply_composite(l1: f64, h: &Term, gamma: f64, step: f64, x: &mut [f64]) {
    let l1 = if *h == Term::L1 { l1 + gamma } else { l1 };
    apply_prox(&Term::L1, l1 * step, x);
    if h.is_indicator() && gamma > 0.0 {
        apply_prox(h, 1.0, x);
    }
}

/// `prox_{λg*}^α(y)` for `g = ‖·‖₁`: projection onto the `λ`-scaled ℓ∞ ball.
pub fn prox_conjugate_l1(y: &[f64], alpha: f64, lambda: f64) -> Vec<f64> {
    debug_assert!(alpha > 0.0 && lambda >= 0.0);
    y.iter().map(|v| v.clamp(-lambda, lambda)).collect()
}

pub(crate) fn clamp_in_place(y: &mut [f64], lambda: f64) {
    y.iter_mut().for_each(|v| *v = v.clamp(-lambda, lambda));
}

/// Fast gradient projection on the dual of
/// `min_x ½‖x − v‖² + λ‖Dx‖₁ + ι_C(x)`,
/// with `C` given by an indicator term (or the whole space).
#[derive(Clone, Debug)]
pub struct TvProx {
    d: Matrix,
    lipschitz: f64,
}

impl TvProx {
    pub fn new(d: Matrix) -> Result<Self> {
        let lipschitz = operator_norm_sq(&d)?;
        Ok(TvProx { d, lipschitz })
    }

    pub fn operator(&self) -> &Matrix {
        &self.d
    }

    /// `‖D‖²`, the dual step is its reciprocal.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn solve(&self, v: &[f64], lambda: f64, iters: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.d.nrows()];
        self.solve_warm(v, lambda, iters, &Term::None, &mut p, None)
    }

    /// Runs `iters` FGP steps from the dual point `p`, leaving the last dual
    /// iterate in `p`. When `history` is given, the primal objective of each
    /// iterate is appended to it.
    pub fn solve_warm(
        &self,
        v: &[f64],
        lambda: f64,
        iters: usize,
        constraint: &Term,
        p: &mut Vec<f64>,
        mut history: Option<&mut Vec<f64>>,
    ) -> Vec<f64> {
        let project = |x: &mut [f64]| {
            if constraint.is_indicator() {
                apply_prox(constraint, 1.0, x);
            }
        };
        if lambda == 0.0 || self.lipschitz == 0.0 {
            let mut x = v.to_vec();
            project(&mut x);
            return x;
        }
        let (m, d) = (self.d.nrows(), self.d.ncols());
        p.resize(m, 0.0);
        clamp_in_place(p, lambda);
        let step = 1.0 / self.lipschitz;
        let mut r = p.clone();
        let mut p_old = vec![0.0; m];
        let mut x = vec![0.0; d];
        let mut dx = vec![0.0; m];
        let mut t = 1.0f64;
        let primal = |r: &[f64], x: &mut Vec<f64>| {
            self.d.matvec_t(r, x);
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi = vi - *xi);
            project(x);
        };
        for _ in 0..iters {
            primal(&r, &mut x);
            self.d.matvec(&x, &mut dx);
            p_old.copy_from_slice(p);
            for ((pi, ri), gi) in p.iter_mut().zip(&r).zip(&dx) {
                *pi = (ri + step * gi).clamp(-lambda, lambda);
            }
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let c = (t - 1.0) / t_next;
            for ((ri, pi), po) in r.iter_mut().zip(p.iter()).zip(&p_old) {
                *ri = pi + c * (pi - po);
            }
            t = t_next;
            if let Some(h) = history.as_deref_mut() {
                primal(p, &mut x);
                h.push(self.objective(v, lambda, &x));
            }
        }
        primal(p, &mut x);
        x
    }

    /// `½‖x − v‖² + λ‖Dx‖₁`.
    pub fn objective(&self, v: &[f64], lambda: f64, x: &[f64]) -> f64 {
        let fit: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / 2.0;
        fit + lambda * self.d.mul_vec(x).iter().map(|u| u.abs()).sum::<f64>()
    }
}

/// `argmin_x ½‖x − v‖² + λ‖Dx‖₁`, approximately, after `inner_iters` FGP steps.
pub fn tv_prox_fgp(v: &[f64], lambda: f64, inner_iters: usize, d: &Matrix) -> Result<Vec<f64>> {
    if inner_iters == 0 {
        return Err(Error::invalid("tv prox needs at least one inner iteration"));
    }
    if d.ncols() != v.len() {
        return Err(Error::dims(format!(
            "D has {} columns, input has {} entries",
            d.ncols(),
            v.len()
        )));
    }
    Ok(TvProx::new(d.clone())?.solve(v, lambda, inner_iters))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(prox_scaled(&Term::L1, 1.0, &[3.0, -0.5], 1.0).unwrap(), vec![2.0, 0.0]);
        assert_eq!(prox_scaled(&Term::Nonneg, 1.0, &[-2.0, 5.0], 1.0).unwrap(), vec![0.0, 5.0]);
        assert_eq!(prox_scaled(&Term::L1, 0.0, &[3.0, -0.5], 2.0).unwrap(), vec![3.0, -0.5]);
        let b = Term::Box { lo: -1.0, hi: 2.0 };
        assert_eq!(prox_scaled(&b, 1.0, &[-3.0, 0.5, 9.0], 0.1).unwrap(), vec![-1.0, 0.5, 2.0]);
        let s = Term::Support { mask: vec![true, false] };
        assert_eq!(prox_scaled(&s, 1.0, &[4.0, 4.0], 1.0).unwrap(), vec![4.0, 0.0]);
        assert_eq!(prox_scaled(&Term::None, 1.0, &[4.0], 1.0).unwrap(), vec![4.0]);
        assert!(prox_scaled(&Term::L1, 1.0, &[1.0], 0.0).is_err());
        assert!(prox_scaled(&s, 1.0, &[1.0], 1.0).is_err());
    }

    #[test]
    fn conjugate_clamp() {
        assert_eq!(prox_conjugate_l1(&[2.0, -0.3], 0.5, 1.0), vec![1.0, -0.3]);
        assert_eq!(prox_conjugate_l1(&[2.0, -0.3], 0.5, 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn tv_prox_trivial_cases() {
        let d = diff_operator(3, 3).unwrap();
        let v: Vec<f64> = (0..9).map(|i| (i * i) as f64 * 0.1).collect();
        assert_eq!(tv_prox_fgp(&v, 0.0, 10, &d).unwrap(), v);
        let c = vec![0.7; 9];
        let out = tv_prox_fgp(&c, 5.0, 10, &d).unwrap();
        assert!(out.iter().all(|x| (x - 0.7).abs() < 1e-15));
        assert!(tv_prox_fgp(&v, 1.0, 0, &d).is_err());
    }

    #[test]
    fn separable_prox_projects_after_shrinking() {
        let reg = RegularizerSpec::l1(1.0).with_h(Term::Nonneg, 1.0);
        let mut x = vec![3.0, -3.0, 0.5];
        apply_separable(&reg, 1.0, &mut x);
        assert_eq!(x, vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let reg = RegularizerSpec::tv(4, 4, 0.1).with_h(Term::Box { lo: 0.0, hi: 1.0 }, 1.0);
        let s = serde_json::to_string(&reg).unwrap();
        assert_eq!(serde_json::from_str::<RegularizerSpec>(&s).unwrap(), reg);
    }
}
