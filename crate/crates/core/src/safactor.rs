//! Stochastic acceleration factor `Υ = K L_f / L_b` of a least-squares loss
//! `f(x) = (1/2n)‖Ax − b‖²` under a row partition, and its bounds.
//!
//! For every partition into `K` equal blocks
//!
//! ```text
//! α_s ≤ α_u ≤ α_ℓ ≤ Υ ≤ β
//!
//! α_ℓ = ‖A‖² / μ_ℓ
//! α_u = K‖A‖² / (n ‖Aᵀ‖²_{1→2})
//! α_s = K σ₁ / (ρ Σᵢ σᵢ)
//! β   = σ₁ / σ_{⌊n − n/K + 1⌋}
//! ```
//!
//! where `σᵢ` are the eigenvalues of `AᵀA` (zero past `d`). For a uniformly
//! random partition, `Υ ≥ α_r ≥ α_σ` holds with probability at least
//! `1 − d²(e/δ)^δ`.

use std::borrow::Cow;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigenspectrum, l1to2_norm_sq, operator_norm_sq, row_energy_ratio, Matrix, Spectrum,
};
use crate::partition::{block_coherence, make_partition, Partition, Scheme};

/// Confidence parameter of the certified random-partition bound.
pub const CERTIFIED_DELTA: f64 = 15.0;
/// Reduced parameter that tracks measured factors more closely without a
/// probability guarantee.
pub const HEURISTIC_DELTA: f64 = 2.0;
pub const DEFAULT_DELTAS: [f64; 2] = [CERTIFIED_DELTA, HEURISTIC_DELTA];

/// Eigenvalues at or below this fraction of `σ₁` count as zero in `β`.
const NULL_EIGEN_TOL: f64 = 1e-12;

/// Lower bounds for a uniformly random partition at one `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPartitionBound {
    pub delta: f64,
    pub alpha_r: f64,
    pub alpha_sigma: f64,
    /// `max(0, 1 − d²(e/δ)^δ)`.
    pub probability: f64,
    /// `K ∈ [‖A‖²/‖Aᵀ‖²_{1→2}, min(n, d)]`.
    pub in_window: bool,
    /// `δ ≤ e`: the probability statement does not apply.
    pub heuristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SAReport {
    pub k: usize,
    pub scheme: String,
    pub l_f: f64,
    pub l_b: f64,
    pub upsilon: f64,
    pub mu_ell: f64,
    pub alpha_ell: f64,
    pub alpha_u: f64,
    pub alpha_s: f64,
    /// `None` when the denominator eigenvalue vanishes (`β = +∞`).
    pub beta: Option<f64>,
    pub beta_finite: bool,
    pub rho: f64,
    pub random_partition: Vec<RandomPartitionBound>,
}

impl SAReport {
    pub fn beta_value(&self) -> f64 {
        self.beta.unwrap_or(f64::INFINITY)
    }

    pub fn random_bound(&self, delta: f64) -> Option<&RandomPartitionBound> {
        self.random_partition.iter().find(|b| b.delta == delta)
    }
}

/// Expected acceleration for uniform sampling of `m`-row minibatches.
///
/// `l_e_bound` and `upsilon_e_lower` follow the published expressions
/// verbatim. The `n/(2m)` factor makes `upsilon_e_lower = 2` at `m = n`, so the
/// value is a rate comparison rather than a sharp speedup. The verbatim
/// `l_e_bound` also drops a factor `n` on its `L_f` term, so it is not a safe
/// step size for large `m`; `l_e_step_bound` restores that factor and is what
/// the minibatch solver uses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedSAReport {
    pub m: usize,
    pub l_f: f64,
    pub l_e_bound: f64,
    pub upsilon_e_lower: f64,
    pub l_e_step_bound: f64,
    pub delta_free: bool,
}

/// Partition-independent quantities of one operator, computed once.
#[derive(Debug)]
pub struct OperatorStats {
    pub n: usize,
    pub d: usize,
    pub norm_sq: f64,
    pub frobenius_sq: f64,
    pub l1to2_sq: f64,
    pub rho: f64,
    spectrum: OnceLock<Spectrum>,
}

impl OperatorStats {
    pub fn compute(a: &Matrix) -> Result<Self> {
        let rho = row_energy_ratio(a)?;
        Ok(OperatorStats {
            n: a.nrows(),
            d: a.ncols(),
            norm_sq: operator_norm_sq(a)?,
            frobenius_sq: a.frobenius_sq(),
            l1to2_sq: l1to2_norm_sq(a),
            rho,
            spectrum: OnceLock::new(),
        })
    }

    pub fn l_f(&self) -> f64 {
        self.norm_sq / self.n as f64
    }

    /// Eigenvalues of `AᵀA` deep enough to read index `upto` (1-based).
    fn spectrum(&self, a: &Matrix, upto: usize) -> Result<Cow<'_, Spectrum>> {
        if let Some(s) = self.spectrum.get() {
            if s.values.len() >= upto || s.exact {
                return Ok(Cow::Borrowed(s));
            }
        }
        let k = if self.d <= crate::linalg::DENSE_SPECTRUM_THRESHOLD {
            self.d
        } else {
            upto.min(self.d)
        };
        let s = eigenspectrum(a, k)?;
        match self.spectrum.set(s) {
            Ok(()) => Ok(Cow::Borrowed(self.spectrum.get().expect("just set"))),
            // Already holds a shallower Lanczos spectrum.
            Err(s) => Ok(Cow::Owned(s)),
        }
    }

    pub fn alpha_u(&self, k: usize) -> f64 {
        k as f64 * self.norm_sq / (self.n as f64 * self.l1to2_sq)
    }

    /// `Σσ` is evaluated as `‖A‖_F²`.
    pub fn alpha_s(&self, k: usize) -> f64 {
        k as f64 * self.norm_sq / (self.rho * self.frobenius_sq)
    }

    pub fn random_bound(&self, k: usize, delta: f64) -> Result<RandomPartitionBound> {
        if !(delta > 0.0) {
            return Err(Error::invalid(format!("δ must be positive, got {delta}")));
        }
        let kf = k as f64;
        let alpha_r = 1.0 / (1.0 / kf + delta * self.l1to2_sq / self.norm_sq);
        let alpha_sigma = 1.0
            / (1.0 / kf + delta * (self.rho / self.n as f64) * self.frobenius_sq / self.norm_sq);
        let lo = self.norm_sq / self.l1to2_sq;
        let hi = self.n.min(self.d) as f64;
        Ok(RandomPartitionBound {
            delta,
            alpha_r,
            alpha_sigma,
            probability: (1.0 - (self.d as f64).powi(2) * failure_rate(delta)).max(0.0),
            in_window: kf >= lo * (1.0 - 1e-12) && kf <= hi,
            heuristic: delta <= std::f64::consts::E,
        })
    }

    pub fn beta(&self, a: &Matrix, k: usize) -> Result<f64> {
        let index = beta_index(self.n, k);
        if index > self.d {
            return Ok(f64::INFINITY);
        }
        let spectrum = self.spectrum(a, index)?;
        let top = spectrum.values.first().copied().unwrap_or(0.0);
        match spectrum.value(index) {
            Some(v) if v > NULL_EIGEN_TOL * top => Ok(top / v),
            Some(_) => Ok(f64::INFINITY),
            None => Err(Error::invalid(format!(
                "spectrum of {} values cannot supply σ_{index}",
                spectrum.values.len()
            ))),
        }
    }
}

/// `(e/δ)^δ`.
fn failure_rate(delta: f64) -> f64 {
    (delta * (1.0 - delta.ln())).exp()
}

/// 1-based eigenvalue index `⌊n − n/K + 1⌋`.
pub fn beta_index(n: usize, k: usize) -> usize {
    (n * k - n + k) / k
}

fn check_partition(a: &Matrix, p: &Partition) -> Result<()> {
    if p.n() != a.nrows() {
        return Err(Error::dims(format!(
            "partition covers {} rows, operator has {}",
            p.n(),
            a.nrows()
        )));
    }
    Ok(())
}

/// `‖S^k A‖²` for every block.
pub fn block_norms_sq(a: &Matrix, p: &Partition) -> Result<Vec<f64>> {
    check_partition(a, p)?;
    p.blocks()
        .par_iter()
        .map(|b| operator_norm_sq(&a.select_rows(b)?))
        .collect()
}

/// `L_f = ‖A‖²/n`.
pub fn full_lipschitz(a: &Matrix) -> Result<f64> {
    Ok(operator_norm_sq(a)? / a.nrows() as f64)
}

/// `L_b = (K/n) max_k ‖S^k A‖²`.
pub fn batch_lipschitz(a: &Matrix, p: &Partition) -> Result<f64> {
    let norms = block_norms_sq(a, p)?;
    Ok(p.k() as f64 / a.nrows() as f64 * norms.into_iter().fold(0.0, f64::max))
}

/// Analysis context for one operator: caches `‖A‖²`, row norms and the
/// spectrum across partitions and `K` values.
pub struct SaAnalyzer<'a> {
    a: &'a Matrix,
    stats: OperatorStats,
    deltas: Vec<f64>,
}

impl<'a> SaAnalyzer<'a> {
    pub fn new(a: &'a Matrix) -> Result<Self> {
        Ok(SaAnalyzer {
            a,
            stats: OperatorStats::compute(a)?,
            deltas: DEFAULT_DELTAS.to_vec(),
        })
    }

    /// Report random-partition bounds at these `δ` values.
    pub fn with_deltas(mut self, deltas: &[f64]) -> Result<Self> {
        if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::invalid(format!("δ must be positive, got {bad}")));
        }
        self.deltas = deltas.to_vec();
        Ok(self)
    }

    pub fn stats(&self) -> &OperatorStats {
        &self.stats
    }

    pub fn report(&self, p: &Partition) -> Result<SAReport> {
        check_partition(self.a, p)?;
        let k = p.k();
        let n = self.stats.n as f64;
        let per_block: Vec<(f64, f64)> = p
            .blocks()
            .par_iter()
            .map(|b| {
                let norm = operator_norm_sq(&self.a.select_rows(b)?)?;
                Ok((norm, block_coherence(self.a, b)))
            })
            .collect::<Result<_>>()?;
        let max_block = per_block.iter().map(|x| x.0).fold(0.0, f64::max);
        let mu_ell = per_block.iter().map(|x| x.1).fold(0.0, f64::max);
        if mu_ell == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        let l_f = self.stats.l_f();
        let l_b = k as f64 / n * max_block;
        let beta = self.stats.beta(self.a, k)?;
        Ok(SAReport {
            k,
            scheme: p.scheme().to_string(),
            l_f,
            l_b,
            upsilon: k as f64 * l_f / l_b,
            mu_ell,
            alpha_ell: self.stats.norm_sq / mu_ell,
            alpha_u: self.stats.alpha_u(k),
            alpha_s: self.stats.alpha_s(k),
            beta: beta.is_finite().then_some(beta),
            beta_finite: beta.is_finite(),
            rho: self.stats.rho,
            random_partition: self
                .deltas
                .iter()
                .map(|&d| self.stats.random_bound(k, d))
                .collect::<Result<_>>()?,
        })
    }

    pub fn curve(&self, scheme: Scheme, ks: &[usize]) -> Result<Vec<SAReport>> {
        ks.iter()
            .map(|&k| self.report(&make_partition(scheme, self.stats.n, k)?))
            .collect()
    }
}

/// `Υ` and every partition-dependent bound for `(A, P)`.
pub fn sa_factor(a: &Matrix, p: &Partition) -> Result<SAReport> {
    SaAnalyzer::new(a)?.report(p)
}

/// One report per `K`, all built with the same scheme (and seed).
pub fn sa_curve(a: &Matrix, scheme: Scheme, ks: &[usize]) -> Result<Vec<SAReport>> {
    SaAnalyzer::new(a)?.curve(scheme, ks)
}

pub fn bound_alpha_ell(a: &Matrix, p: &Partition) -> Result<f64> {
    let mu = crate::partition::local_accumulated_coherence(a, p)?;
    if mu == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(operator_norm_sq(a)? / mu)
}

pub fn bound_alpha_u(a: &Matrix, k: usize) -> Result<f64> {
    Ok(OperatorStats::compute(a)?.alpha_u(k))
}

pub fn bound_alpha_s(a: &Matrix, k: usize) -> Result<f64> {
    Ok(OperatorStats::compute(a)?.alpha_s(k))
}

/// `β(A, K)`, `+∞` when the denominator eigenvalue is zero.
pub fn bound_beta(a: &Matrix, k: usize) -> Result<f64> {
    if k == 0 || k > a.nrows() {
        return Err(Error::invalid(format!("need 1 ≤ K ≤ n, got {k}")));
    }
    OperatorStats::compute(a)?.beta(a, k)
}

pub fn bound_alpha_r(a: &Matrix, k: usize, delta: f64) -> Result<RandomPartitionBound> {
    OperatorStats::compute(a)?.random_bound(k, delta)
}

pub fn bound_alpha_sigma(a: &Matrix, k: usize, delta: f64) -> Result<f64> {
    Ok(bound_alpha_r(a, k, delta)?.alpha_sigma)
}

/// Largest `d` with `1 − d²(e/δ)^δ ≥ min_prob`, i.e.
/// `sqrt((1 − min_prob) / (e/δ)^δ)`.
pub fn max_dim_for_delta(delta: f64, min_prob: f64) -> Result<f64> {
    if !(delta > std::f64::consts::E) {
        return Err(Error::invalid(format!("δ must exceed e, got {delta}")));
    }
    if !(min_prob > 0.0 && min_prob < 1.0) {
        return Err(Error::invalid(format!("probability must be in (0, 1), got {min_prob}")));
    }
    Ok(((1.0 - min_prob) / failure_rate(delta)).sqrt())
}

pub fn expected_sa_with_replacement(a: &Matrix, m: usize) -> Result<ExpectedSAReport> {
    let n = a.nrows();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 ≤ m ≤ n, got m = {m}, n = {n}")));
    }
    let stats = OperatorStats::compute(a)?;
    let l_f = stats.l_f();
    let (mf, nf) = (m as f64, n as f64);
    let (l_e_bound, upsilon_e_lower, l_e_step_bound) = if n == 1 {
        // Single measurement: the only minibatch is the full batch.
        (l_f, nf / (2.0 * mf), l_f)
    } else {
        let ratio = stats.l1to2_sq / stats.norm_sq;
        let l_e = (mf - 1.0) / (mf * (nf - 1.0)) * l_f
            + (nf - mf) / (mf * (nf - 1.0)) * stats.l1to2_sq;
        let ups = 1.0 / ((mf - 1.0) / (2.0 * (nf - 1.0)) + (nf - mf) / (2.0 * (nf - 1.0)) * ratio);
        let step = nf * (mf - 1.0) / (mf * (nf - 1.0)) * l_f
            + (nf - mf) / (mf * (nf - 1.0)) * stats.l1to2_sq;
        (l_e, ups, step)
    };
    Ok(ExpectedSAReport {
        m,
        l_f,
        l_e_bound,
        upsilon_e_lower,
        l_e_step_bound,
        delta_free: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::make_partition;

    fn identical_rows(n: usize) -> Matrix {
        Matrix::from_rows(&vec![vec![1.0, -2.0, 0.5]; n]).unwrap()
    }

    #[test]
    fn identity_lipschitz_constants() {
        let a = Matrix::identity(6);
        assert!((full_lipschitz(&a).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let p = make_partition(Scheme::Interleaved, 6, 3).unwrap();
        assert!((batch_lipschitz(&a, &p).unwrap() - 0.5).abs() < 1e-15);
        let r = sa_factor(&a, &p).unwrap();
        assert!((r.upsilon - 1.0).abs() < 1e-12);
        assert!((r.alpha_u - 0.5).abs() < 1e-12);
        assert_eq!(r.beta, Some(1.0));
    }

    #[test]
    fn identical_rows_are_tight() {
        let a = identical_rows(12);
        for k in [1, 2, 3, 4, 6, 12] {
            let p = make_partition(Scheme::Consecutive, 12, k).unwrap();
            let r = sa_factor(&a, &p).unwrap();
            let kf = k as f64;
            assert!((r.upsilon - kf).abs() < 1e-12 * kf, "{r:?}");
            assert!((r.alpha_u - kf).abs() < 1e-12 * kf);
            assert!((r.alpha_ell - kf).abs() < 1e-12 * kf);
            assert!((r.l_b - 5.25).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_is_infinite_past_the_column_count() {
        let a = identical_rows(6);
        assert_eq!(beta_index(6, 2), 4);
        assert_eq!(bound_beta(&a, 2).unwrap(), f64::INFINITY);
        assert_eq!(bound_beta(&a, 1).unwrap(), 1.0);
        let r = sa_factor(&a, &make_partition(Scheme::Interleaved, 6, 2).unwrap()).unwrap();
        assert_eq!(r.beta, None);
        assert!(!r.beta_finite);
    }

    #[test]
    fn beta_index_matches_floor() {
        for n in 1..40 {
            for k in 1..=n {
                let expect = (n as f64 - n as f64 / k as f64 + 1.0 + 1e-9).floor() as usize;
                assert_eq!(beta_index(n, k), expect, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn table_of_maximum_dimensions() {
        let d15 = max_dim_for_delta(15.0, 0.9).unwrap();
        assert!((d15 / 1.16e5 - 1.0).abs() < 0.01, "{d15}");
        let d17 = max_dim_for_delta(17.0, 0.9).unwrap();
        assert!((d17 / 1.85e6 - 1.0).abs() < 0.01, "{d17}");
        assert!(max_dim_for_delta(2.0, 0.9).is_err());
        assert!(max_dim_for_delta(15.0, 1.0).is_err());
        let mut prev = 0.0;
        for step in 0..60 {
            let v = max_dim_for_delta(3.0 + 0.5 * step as f64, 0.9).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_r_limit_in_k() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 1.0], vec![0.0, 2.0]]).unwrap();
        let stats = OperatorStats::compute(&a).unwrap();
        let limit = stats.norm_sq / (15.0 * stats.l1to2_sq);
        let far = stats.random_bound(1_000_000_000, 15.0).unwrap();
        assert!((far.alpha_r - limit).abs() < 1e-8 * limit);
        let heuristic = stats.random_bound(2, 2.0).unwrap();
        assert!(heuristic.heuristic);
        assert_eq!(heuristic.probability, 0.0);
    }

    #[test]
    fn expected_factor_by_substitution() {
        let n = 9;
        let i = Matrix::identity(n);
        let full = expected_sa_with_replacement(&i, n).unwrap();
        assert!((full.upsilon_e_lower - 2.0).abs() < 1e-12);
        // L_e bound at m = n: L_f (n−1)/(n(n−1)) = L_f/n.
        assert!((full.l_e_bound - full.l_f / n as f64).abs() < 1e-15);
        assert!((full.l_e_step_bound - full.l_f).abs() < 1e-15);
        let single = expected_sa_with_replacement(&i, 1).unwrap();
        assert!((single.upsilon_e_lower - 2.0).abs() < 1e-12);
        assert!((single.l_e_bound - 1.0).abs() < 1e-12);

        let rows = identical_rows(n);
        let r = expected_sa_with_replacement(&rows, 1).unwrap();
        // ‖Aᵀ‖²_{1→2}/‖A‖² = 1/n ⇒ bound = 1/((n−1)/(2(n−1)n)) = 2n.
        assert!((r.upsilon_e_lower - 2.0 * n as f64).abs() < 1e-9);
        assert!(expected_sa_with_replacement(&rows, 0).is_err());
        assert!(expected_sa_with_replacement(&rows, n + 1).is_err());
    }

    #[test]
    fn curve_for_identity_is_flat() {
        let a = Matrix::identity(12);
        let curve = sa_curve(&a, Scheme::Random { seed: 1 }, &[1, 2, 3, 4, 6, 12]).unwrap();
        assert_eq!(curve.len(), 6);
        for r in curve {
            assert!((r.upsilon - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_is_rejected() {
        let z = Matrix::from_triplets(3, 2, vec![]).unwrap();
        assert!(bound_alpha_u(&z, 1).is_err());
        let p = make_partition(Scheme::Interleaved, 3, 1).unwrap();
        assert!(bound_alpha_ell(&z, &p).is_err());
    }
}
