//! Ground-truth signals and noisy measurements for synthetic problems.

use rand::seq::index;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sq, Matrix};
use crate::rng::{stream, Stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalKind {
    /// Piecewise-constant `d1 × d2` image with values in `[0, 1]`,
    /// column-major.
    Phantom { d1: usize, d2: usize },
    Gaussian,
    /// Entries uniform on `[0, 1]`.
    Uniform01,
    /// `k` standard Gaussian entries at random positions.
    Sparse { k: usize },
}

pub fn make_signal(kind: SignalKind, d: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed, Stream::Signal);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok(match kind {
        SignalKind::Phantom { d1, d2 } => {
            if d1 * d2 != d {
                return Err(Error::dims(format!("phantom {d1}×{d2} does not match d = {d}")));
            }
            phantom(d1, d2)
        }
        SignalKind::Gaussian => normal.sample_iter(&mut rng).take(d).collect(),
        SignalKind::Uniform01 => Uniform::new_inclusive(0.0, 1.0)
            .sample_iter(&mut rng)
            .take(d)
            .collect(),
        SignalKind::Sparse { k } => {
            if k > d {
                return Err(Error::invalid(format!("sparsity {k} exceeds d = {d}")));
            }
            let mut x = vec![0.0; d];
            let mut pos = index::sample(&mut rng, d, k).into_vec();
            pos.sort_unstable();
            for p in pos {
                x[p] = normal.sample(&mut rng);
            }
            x
        }
    })
}

/// A background disk with two inner blocks and a small bright square.
fn phantom(d1: usize, d2: usize) -> Vec<f64> {
    let mut x = vec![0.0; d1 * d2];
    let (h, w) = (d1 as f64, d2 as f64);
    for j in 0..d2 {
        for i in 0..d1 {
            let (u, v) = ((i as f64 + 0.5) / h, (j as f64 + 0.5) / w);
            let mut val = 0.0;
            if (u - 0.5).powi(2) + (v - 0.5).powi(2) <= 0.16 {
                val = 0.4;
            }
            if (0.25..0.55).contains(&u) && (0.25..0.45).contains(&v) {
                val = 0.8;
            }
            if (0.6..0.8).contains(&u) && (0.5..0.75).contains(&v) {
                val = 0.2;
            }
            if (0.15..0.25).contains(&u) && (0.6..0.7).contains(&v) {
                val = 1.0;
            }
            x[j * d1 + i] = val;
        }
    }
    x
}

/// `b = Ax + w` with Gaussian `w` scaled so that
/// `log10(‖Ax‖²/‖w‖²) = snr` exactly. Returns `b` and `‖w‖`.
pub fn measure(a: &Matrix, x: &[f64], snr: Option<f64>, seed: u64) -> Result<(Vec<f64>, f64)> {
    if x.len() != a.ncols() {
        return Err(Error::dims(format!("signal has {} entries, A has {} columns", x.len(), a.ncols())));
    }
    let mut b = a.mul_vec(x);
    let Some(snr) = snr else {
        return Ok((b, 0.0));
    };
    if !snr.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr}")));
    }
    let signal = norm_sq(&b);
    if signal == 0.0 {
        return Err(Error::invalid("Ax is zero, SNR is undefined"));
    }
    let mut rng = stream(seed, Stream::Noise);
    let mut w: Vec<f64> = Normal::new(0.0, 1.0)
        .expect("unit normal")
        .sample_iter(&mut rng)
        .take(b.len())
        .collect();
    let target = (signal / 10f64.powf(snr)).sqrt();
    let scale = target / norm_sq(&w).sqrt();
    w.iter_mut().for_each(|v| *v *= scale);
    b.iter_mut().zip(&w).for_each(|(bi, wi)| *bi += wi);
    Ok((b, target))
}

/// `log10(‖Ax‖²/‖w‖²)`.
pub fn snr_db10(ax_norm_sq: f64, noise_norm: f64) -> f64 {
    (ax_norm_sq / (noise_norm * noise_norm)).log10()
}
