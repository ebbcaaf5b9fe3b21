use serde::{Deserialize, Serialize};

use super::ForwardOperator;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Space-varying out-of-focus blur on a `d1 × d2` image.
///
/// Pixel `p` is blurred by a uniform disk whose radius grows linearly with
/// the Euclidean distance of `p` from the image center, from `r_min` at the
/// center to `r_max` at the corners. A pixel `q` lies in the disk iff
/// `‖q − p‖ ≤ r`. Pixels outside the image are dropped (zero padding) and the
/// truncated kernel renormalized, so every row sums to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlurSpec {
    pub d1: usize,
    pub d2: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl BlurSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(Error::invalid("blur image dimensions must be positive"));
        }
        if !(0.0 <= self.r_min && self.r_min <= self.r_max) {
            return Err(Error::invalid(format!(
                "blur radii must satisfy 0 ≤ r_min ≤ r_max, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        let limit = self.d1.min(self.d2) as f64 / 2.0;
        if self.r_max >= limit {
            return Err(Error::invalid(format!(
                "r_max = {} must be below min(d1, d2)/2 = {limit}",
                self.r_max
            )));
        }
        Ok(())
    }

    /// Kernel radius for pixel `(i, j)`.
    pub fn radius(&self, i: usize, j: usize) -> f64 {
        let ci = (self.d1 as f64 - 1.0) / 2.0;
        let cj = (self.d2 as f64 - 1.0) / 2.0;
        let corner = (ci * ci + cj * cj).sqrt();
        if corner == 0.0 {
            return self.r_min;
        }
        let dist = ((i as f64 - ci).powi(2) + (j as f64 - cj).powi(2)).sqrt();
        self.r_min + (self.r_max - self.r_min) * dist / corner
    }
}

pub fn build_space_varying_blur(spec: &BlurSpec) -> Result<ForwardOperator> {
    spec.validate()?;
    let (d1, d2) = (spec.d1, spec.d2);
    let d = d1 * d2;
    let mut indptr = Vec::with_capacity(d + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);

    // Row order follows the column-major pixel index j·d1 + i.
    for j in 0..d2 {
        for i in 0..d1 {
            let r = spec.radius(i, j);
            // Ties at exactly distance r are inside; the slack absorbs rounding
            // in the interpolated radius.
            let r2 = r * r * (1.0 + 1e-12) + 1e-12;
            let reach = r.floor() as isize;
            let mut cols = Vec::new();
            for dj in -reach..=reach {
                let jj = j as isize + dj;
                if jj < 0 || jj >= d2 as isize {
                    continue;
                }
                for di in -reach..=reach {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= d1 as isize {
                        continue;
                    }
                    if (di * di + dj * dj) as f64 <= r2 {
                        cols.push(jj as usize * d1 + ii as usize);
                    }
                }
            }
            cols.sort_unstable();
            let w = 1.0 / cols.len() as f64;
            values.extend(std::iter::repeat(w).take(cols.len()));
            indices.extend(cols);
            indptr.push(indices.len());
        }
    }
    let matrix = Matrix::csr(d, d, indptr, indices, values)?;
    ForwardOperator::new(
        matrix,
        format!("blur-{d1}x{d2}-r{}-{}", spec.r_min, spec.r_max),
        Some((d1, d2)),
    )
}
