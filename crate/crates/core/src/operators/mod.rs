//! Forward operators: space-varying blur, random ensembles, the finite
//! difference operator, and Matrix Market ingest.

mod blur;
mod ensemble;
pub mod mtx;

pub use blur::{build_space_varying_blur, BlurSpec};
pub use ensemble::{build_random_ensemble, EnsembleKind};
pub use mtx::{load_matrix_market, read_matrix_market, write_matrix_market};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A measurement operator `A` with a label and, when its columns index the
/// pixels of an image, the image shape `(d1, d2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOperator {
    matrix: Matrix,
    label: String,
    image_shape: Option<(usize, usize)>,
}

impl ForwardOperator {
    pub fn new(
        matrix: Matrix,
        label: impl Into<String>,
        image_shape: Option<(usize, usize)>,
    ) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::invalid("operator label must be nonempty"));
        }
        if let Some((d1, d2)) = image_shape {
            if d1 * d2 != matrix.ncols() {
                return Err(Error::dims(format!(
                    "image shape {d1}×{d2} does not match {} columns",
                    matrix.ncols()
                )));
            }
        }
        Ok(ForwardOperator {
            matrix,
            label,
            image_shape,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn image_shape(&self) -> Option<(usize, usize)> {
        self.image_shape
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }
}

impl From<Matrix> for ForwardOperator {
    fn from(matrix: Matrix) -> Self {
        ForwardOperator {
            matrix,
            label: "matrix".into(),
            image_shape: None,
        }
    }
}

/// Image-grid descriptor used by generator specs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageShape {
    pub d1: usize,
    pub d2: usize,
}

/// Anisotropic forward differences on a `d1 × d2` image stored column by
/// column (`x = [x₁; x₂; …; x_{d2}]`).
///
/// The first `d1(d2−1)` rows are horizontal differences
/// `x[i, j+1] − x[i, j]`, the remaining `(d1−1)d2` rows vertical differences
/// `x[i+1, j] − x[i, j]`.
pub fn diff_operator(d1: usize, d2: usize) -> Result<Matrix> {
    if d1 < 2 || d2 < 2 {
        return Err(Error::invalid(format!(
            "difference operator needs d1, d2 ≥ 2, got {d1}×{d2}"
        )));
    }
    let idx = |i: usize, j: usize| j * d1 + i;
    let rows = d1 * (d2 - 1) + (d1 - 1) * d2;
    let mut indptr = Vec::with_capacity(rows + 1);
    let mut indices = Vec::with_capacity(2 * rows);
    let mut values = Vec::with_capacity(2 * rows);
    indptr.push(0);
    for j in 0..d2 - 1 {
        for i in 0..d1 {
            indices.extend([idx(i, j), idx(i, j + 1)]);
            values.extend([-1.0, 1.0]);
            indptr.push(indices.len());
        }
    }
    for j in 0..d2 {
        for i in 0..d1 - 1 {
            indices.extend([idx(i, j), idx(i + 1, j)]);
            values.extend([-1.0, 1.0]);
            indptr.push(indices.len());
        }
    }
    Matrix::csr(rows, d1 * d2, indptr, indices, values)
}

pub fn identity_operator(n: usize) -> ForwardOperator {
    ForwardOperator::new(Matrix::identity(n), "identity", None).expect("valid label")
}

/// `n` copies of `row`.
pub fn identical_rows_operator(row: &[f64], n: usize) -> Result<ForwardOperator> {
    let rows = vec![row.to_vec(); n];
    ForwardOperator::new(Matrix::from_rows(&rows)?, "identical-rows", None)
}
