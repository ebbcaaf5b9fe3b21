use std::borrow::Cow;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, norm, operator_norm_sq, Matrix};
use crate::operators::ForwardOperator;
use crate::prox::RegularizerSpec;
use crate::safactor::full_lipschitz;

/// `min_x (1/2n)‖Ax − b‖² + λ g(Dx) + γ h(x)`.
#[derive(Debug)]
pub struct Problem {
    a: ForwardOperator,
    b: Vec<f64>,
    x_true: Option<Vec<f64>>,
    reg: RegularizerSpec,
    d_op: Option<Matrix>,
    noise_norm: Option<f64>,
    l_f: OnceLock<f64>,
    d_norm_sq: OnceLock<f64>,
}

impl Problem {
    pub fn new(
        a: ForwardOperator,
        b: Vec<f64>,
        x_true: Option<Vec<f64>>,
        reg: RegularizerSpec,
    ) -> Result<Self> {
        let (n, d) = (a.nrows(), a.ncols());
        if b.len() != n {
            return Err(Error::dims(format!("b has {} entries, A has {n} rows", b.len())));
        }
        if let Some(x) = &x_true {
            if x.len() != d {
                return Err(Error::dims(format!("x_true has {} entries, A has {d} columns", x.len())));
            }
        }
        reg.validate(d)?;
        let d_op = reg.d.materialize(d)?;
        let noise_norm = x_true.as_ref().map(|x| {
            let ax = a.matrix().mul_vec(x);
            norm(&ax.iter().zip(&b).map(|(u, v)| v - u).collect::<Vec<_>>())
        });
        Ok(Problem {
            a,
            b,
            x_true,
            reg,
            d_op,
            noise_norm,
            l_f: OnceLock::new(),
            d_norm_sq: OnceLock::new(),
        })
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.a
    }

    pub fn matrix(&self) -> &Matrix {
        self.a.matrix()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn x_true(&self) -> Option<&[f64]> {
        self.x_true.as_deref()
    }

    pub fn reg(&self) -> &RegularizerSpec {
        &self.reg
    }

    /// `‖b − A x_true‖`, known only when `x_true` is.
    pub fn noise_norm(&self) -> Option<f64> {
        self.noise_norm
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.a.ncols()
    }

    /// `L_f = ‖A‖²/n`, computed once.
    pub fn lipschitz(&self) -> Result<f64> {
        if let Some(l) = self.l_f.get() {
            return Ok(*l);
        }
        let l = full_lipschitz(self.matrix())?;
        Ok(*self.l_f.get_or_init(|| l))
    }

    /// True when `g` acts through a non-identity `D`.
    pub fn needs_tv(&self) -> bool {
        self.reg.has_g() && self.d_op.is_some()
    }

    /// `D`, with the identity made explicit. `None` when `g` is inactive.
    pub fn dual_operator(&self) -> Option<Cow<'_, Matrix>> {
        if !self.reg.has_g() {
            return None;
        }
        Some(match &self.d_op {
            Some(m) => Cow::Borrowed(m),
            None => Cow::Owned(Matrix::identity(self.d())),
        })
    }

    pub fn dual_norm_sq(&self) -> Result<f64> {
        if let Some(v) = self.d_norm_sq.get() {
            return Ok(*v);
        }
        let v = match (&self.d_op, self.reg.has_g()) {
            (_, false) => 0.0,
            (None, true) => 1.0,
            (Some(m), true) => operator_norm_sq(m)?,
        };
        Ok(*self.d_norm_sq.get_or_init(|| v))
    }

    /// `F(x)`; indicator terms count as zero.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let ax = self.matrix().mul_vec(x);
        let fit = ax.iter().zip(&self.b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()
            / (2.0 * self.n() as f64);
        let g = if self.reg.has_g() {
            let dx: Cow<'_, [f64]> = match &self.d_op {
                Some(m) => Cow::Owned(m.mul_vec(x)),
                None => Cow::Borrowed(x),
            };
            self.reg.lambda * dx.iter().map(|v| v.abs()).sum::<f64>()
        } else {
            0.0
        };
        fit + g + self.reg.h.value(self.reg.gamma, x)
    }

    /// `‖x − x_true‖²`.
    pub fn est_error(&self, x: &[f64]) -> Option<f64> {
        self.x_true.as_ref().map(|t| dist_sq(x, t))
    }

    /// `out = weight · Σ_{i∈rows} a_i (a_iᵀx − b_i)`.
    pub fn block_gradient(&self, rows: &[usize], weight: f64, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let a = self.matrix();
        for &i in rows {
            let row = a.row(i);
            let r = row.dot(x) - self.b[i];
            row.axpy_into(r, out);
        }
        out.iter_mut().for_each(|v| *v *= weight);
    }

    /// `∇f(x) = (1/n)Aᵀ(Ax − b)`.
    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let all: Vec<usize> = (0..self.n()).collect();
        self.block_gradient(&all, 1.0 / self.n() as f64, x, out);
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.d()];
        self.gradient_into(x, &mut g);
        g
    }

    /// `Aᵀb/n`.
    pub fn backprojection(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.matrix().tmul_vec(&self.b).into_iter().map(|v| v / n).collect()
    }

    /// Prox of the whole regularizer when it is separable (identity `D`).
    pub(crate) fn separable_prox(&self, step: f64, x: &mut [f64]) -> Result<()> {
        if self.needs_tv() {
            return Err(Error::Unsupported(
                "this solver needs a closed-form prox; g acts through a non-identity D".into(),
            ));
        }
        crate::prox::apply_separable(&self.reg, step, x);
        Ok(())
    }

    /// Prox of `γh` alone.
    pub(crate) fn h_prox(&self, step: f64, x: &mut [f64]) {
        crate::prox::apply_composite(0.0, &self.reg.h, self.reg.gamma, step, x);
    }
}
