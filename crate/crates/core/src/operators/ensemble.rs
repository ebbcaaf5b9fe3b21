use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::ForwardOperator;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream, Stream};

/// Entry distribution of a dense random operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    Gaussian { mean: f64, var: f64 },
    Uniform01,
    /// `n` distinct rows of `GᵀG/√d`, `G` a `d × d` standard Gaussian.
    SubsampledWishart,
}

impl EnsembleKind {
    pub fn label(&self) -> String {
        match self {
            EnsembleKind::Gaussian { mean, var } => format!("gaussian({mean},{var})"),
            EnsembleKind::Uniform01 => "uniform01".into(),
            EnsembleKind::SubsampledWishart => "subsampled-wishart".into(),
        }
    }
}

pub fn build_random_ensemble(
    kind: EnsembleKind,
    n: usize,
    d: usize,
    seed: u64,
) -> Result<ForwardOperator> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("ensemble dimensions must be positive"));
    }
    let mut rng = stream(seed, Stream::Ensemble);
    let data = match kind {
        EnsembleKind::Gaussian { mean, var } => {
            if !(var >= 0.0) {
                return Err(Error::invalid("gaussian variance must be nonnegative"));
            }
            let dist = Normal::new(mean, var.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
            sample(&mut rng, &dist, n * d)
        }
        EnsembleKind::Uniform01 => sample(&mut rng, &Uniform::new_inclusive(0.0, 1.0), n * d),
        EnsembleKind::SubsampledWishart => {
            if n > d {
                return Err(Error::invalid(format!(
                    "subsampled Wishart draws distinct rows: need n ≤ d, got {n} > {d}"
                )));
            }
            let g = sample(&mut rng, &Normal::new(0.0, 1.0).expect("unit normal"), d * d);
            let mut rows = index::sample(&mut stream(seed, Stream::Subsample), d, n).into_vec();
            rows.sort_unstable();
            let scale = 1.0 / (d as f64).sqrt();
            let mut data = vec![0.0; n * d];
            // Row r of GᵀG is Σ_k G[k, r] G[k, ·].
            for (out, &r) in data.chunks_mut(d).zip(&rows) {
                for k in 0..d {
                    let gkr = g[k * d + r] * scale;
                    for (o, &gkc) in out.iter_mut().zip(&g[k * d..(k + 1) * d]) {
                        *o += gkr * gkc;
                    }
                }
            }
            data
        }
    };
    ForwardOperator::new(Matrix::dense(n, d, data)?, kind.label(), None)
}

fn sample<R: Rng, D: Distribution<f64>>(rng: &mut R, dist: &D, len: usize) -> Vec<f64> {
    dist.sample_iter(rng).take(len).collect()
}
