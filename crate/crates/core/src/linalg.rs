//! Dense and compressed-sparse-row matrices plus the spectral quantities
//! consumed by the acceleration bounds: `‖A‖²`, the eigenvalues of `AᵀA`,
//! the `ℓ1→2` norm and the row energy ratio.
//!
//! Matrices are immutable once built. All routines here are pure and
//! deterministic: iterative methods start from the normalized all-ones vector.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `min(n, d)` at or below which `‖A‖²` is taken from a full decomposition.
pub const DENSE_NORM_THRESHOLD: usize = 64;
/// Column count at or below which a full spectrum uses a dense decomposition.
pub const DENSE_SPECTRUM_THRESHOLD: usize = 2048;
/// `min(n, d)` up to which [`operator_norm_sq`] decomposes the compact Gram matrix.
pub const DENSE_LIPSCHITZ_THRESHOLD: usize = 256;
/// Relative tolerance under which negative eigenvalue estimates clamp to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    /// Row-major.
    Dense(Vec<f64>),
    Csr {
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

/// An `n × d` real matrix, dense or CSR.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    storage: Storage,
}

/// Borrowed view of one matrix row.
#[derive(Clone, Copy, Debug)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse { cols: &'a [usize], vals: &'a [f64] },
}

impl<'a> Row<'a> {
    pub fn dot(&self, x: &[f64]) -> f64 {
        match *self {
            Row::Dense(r) => dot(r, x),
            Row::Sparse { cols, vals } => cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match *self {
            Row::Dense(r) => dot(r, r),
            Row::Sparse { vals, .. } => dot(vals, vals),
        }
    }

    /// `out += alpha * row`.
    pub fn axpy_into(&self, alpha: f64, out: &mut [f64]) {
        match *self {
            Row::Dense(r) => axpy(alpha, r, out),
            Row::Sparse { cols, vals } => {
                for (&c, &v) in cols.iter().zip(vals) {
                    out[c] += alpha * v;
                }
            }
        }
    }

    /// Inner product of two rows of the same width.
    pub fn dot_row(&self, other: &Row<'_>) -> f64 {
        match (*self, *other) {
            (Row::Dense(a), Row::Dense(b)) => dot(a, b),
            (Row::Dense(a), s @ Row::Sparse { .. }) | (s @ Row::Sparse { .. }, Row::Dense(a)) => {
                s.dot(a)
            }
            (
                Row::Sparse { cols: ca, vals: va },
                Row::Sparse { cols: cb, vals: vb },
            ) => {
                let (mut i, mut j, mut acc) = (0, 0, 0.0);
                while i < ca.len() && j < cb.len() {
                    match ca[i].cmp(&cb[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += va[i] * vb[j];
                            i += 1;
                            j += 1;
                        }
                    }
                }
                acc
            }
        }
    }

    /// Nonzero `(column, value)` pairs; dense rows skip exact zeros.
    pub fn entries(&self) -> Box<dyn Iterator<Item = (usize, f64)> + 'a> {
        match *self {
            Row::Dense(r) => Box::new(r.iter().copied().enumerate().filter(|&(_, v)| v != 0.0)),
            Row::Sparse { cols, vals } => Box::new(cols.iter().copied().zip(vals.iter().copied())),
        }
    }
}

impl Matrix {
    /// Dense matrix from row-major data.
    pub fn dense(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(nrows, ncols)?;
        if data.len() != nrows * ncols {
            return Err(Error::dims(format!(
                "dense data has {} entries, expected {}×{}",
                data.len(),
                nrows,
                ncols
            )));
        }
        Ok(Matrix {
            nrows,
            ncols,
            storage: Storage::Dense(data),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::dims("ragged rows"));
        }
        Matrix::dense(nrows, ncols, rows.concat())
    }

    /// CSR matrix; column indices must be strictly increasing per row and
    /// values nonzero.
    pub fn csr(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_shape(nrows, ncols)?;
        if indptr.len() != nrows + 1 || indptr[0] != 0 || indptr[nrows] != indices.len() {
            return Err(Error::dims("malformed CSR row pointer"));
        }
        if indices.len() != values.len() {
            return Err(Error::dims("CSR indices and values differ in length"));
        }
        for i in 0..nrows {
            if indptr[i] > indptr[i + 1] {
                return Err(Error::dims("CSR row pointer decreases"));
            }
            let cols = &indices[indptr[i]..indptr[i + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::dims(format!("row {i}: column index out of range")));
            }
        }
        if values.iter().any(|&v| v == 0.0) {
            return Err(Error::invalid("explicitly stored zero in CSR values"));
        }
        Ok(Matrix {
            nrows,
            ncols,
            storage: Storage::Csr {
                indptr,
                indices,
                values,
            },
        })
    }

    /// CSR matrix from `(row, col, value)` triplets. Duplicates are an error,
    /// zeros are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        check_shape(nrows, ncols)?;
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= nrows || c >= ncols) {
            return Err(Error::dims(format!("entry ({r}, {c}) outside {nrows}×{ncols}")));
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = triplets.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::invalid(format!("duplicate entry ({}, {})", w[0].0, w[0].1)));
        }
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if v != 0.0 {
                indptr[r + 1] += 1;
                indices.push(c);
                values.push(v);
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Matrix::csr(nrows, ncols, indptr, indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Matrix::csr(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
            .expect("identity is well formed")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Csr { .. })
    }

    /// Stored entries (all `n·d` for dense storage).
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.len(),
            Storage::Csr { values, .. } => values.len(),
        }
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Dense(v) => Row::Dense(&v[i * self.ncols..(i + 1) * self.ncols]),
            Storage::Csr {
                indptr,
                indices,
                values,
            } => {
                let (s, e) = (indptr[i], indptr[i + 1]);
                Row::Sparse {
                    cols: &indices[s..e],
                    vals: &values[s..e],
                }
            }
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.row(i) {
            Row::Dense(r) => r[j],
            Row::Sparse { cols, vals } => cols.binary_search(&j).map_or(0.0, |p| vals[p]),
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).dot(x);
        }
    }

    /// `x = Aᵀ y`.
    pub fn matvec_t(&self, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows);
        debug_assert_eq!(x.len(), self.ncols);
        x.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                self.row(i).axpy_into(yi, x);
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    pub fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.ncols];
        self.matvec_t(y, &mut x);
        x
    }

    pub fn row_dot(&self, i: usize, j: usize) -> f64 {
        self.row(i).dot_row(&self.row(j))
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        self.rows().map(|r| r.norm_sq()).collect()
    }

    pub fn frobenius_sq(&self) -> f64 {
        match &self.storage {
            Storage::Dense(v) => dot(v, v),
            Storage::Csr { values, .. } => dot(values, values),
        }
    }

    /// The rows listed in `rows`, in that order, with the same storage kind.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Matrix> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.nrows) {
            return Err(Error::invalid(format!(
                "row index {bad} out of range for {} rows",
                self.nrows
            )));
        }
        check_shape(rows.len(), self.ncols)?;
        match &self.storage {
            Storage::Dense(_) => {
                let mut data = Vec::with_capacity(rows.len() * self.ncols);
                for &r in rows {
                    if let Row::Dense(v) = self.row(r) {
                        data.extend_from_slice(v);
                    }
                }
                Matrix::dense(rows.len(), self.ncols, data)
            }
            Storage::Csr { .. } => {
                let mut indptr = Vec::with_capacity(rows.len() + 1);
                indptr.push(0);
                let (mut indices, mut values) = (Vec::new(), Vec::new());
                for &r in rows {
                    if let Row::Sparse { cols, vals } = self.row(r) {
                        indices.extend_from_slice(cols);
                        values.extend_from_slice(vals);
                    }
                    indptr.push(indices.len());
                }
                Ok(Matrix {
                    nrows: rows.len(),
                    ncols: self.ncols,
                    storage: Storage::Csr {
                        indptr,
                        indices,
                        values,
                    },
                })
            }
        }
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(v) => v.iter_mut().for_each(|x| *x *= c),
            Storage::Csr { values, .. } => values.iter_mut().for_each(|x| *x *= c),
        }
        if c == 0.0 {
            out = Matrix::from_triplets(self.nrows, self.ncols, Vec::new())
                .expect("empty sparse matrix is well formed");
        }
        out
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows)
            .map(|i| {
                let mut r = vec![0.0; self.ncols];
                self.row(i).axpy_into(1.0, &mut r);
                r
            })
            .collect()
    }

    /// Dense copy of the matrix.
    pub fn to_dense(&self) -> Matrix {
        Matrix::dense(self.nrows, self.ncols, self.to_dense_rows().concat())
            .expect("shape preserved")
    }

    /// Gram matrix `B Bᵀ` of the listed rows (row-major `m × m`).
    pub fn row_gram(&self, rows: &[usize]) -> Vec<f64> {
        let m = rows.len();
        let mut g = vec![0.0; m * m];
        for a in 0..m {
            let ra = self.row(rows[a]);
            g[a * m + a] = ra.norm_sq();
            for b in (a + 1)..m {
                let v = ra.dot_row(&self.row(rows[b]));
                g[a * m + b] = v;
                g[b * m + a] = v;
            }
        }
        g
    }

    /// The smaller of `AᵀA` and `AAᵀ`; both share their nonzero eigenvalues.
    fn compact_gram(&self) -> DMatrix<f64> {
        if self.nrows <= self.ncols {
            let rows: Vec<usize> = (0..self.nrows).collect();
            DMatrix::from_row_slice(self.nrows, self.nrows, &self.row_gram(&rows))
        } else {
            let d = self.ncols;
            let mut g = DMatrix::<f64>::zeros(d, d);
            for row in self.rows() {
                let entries: Vec<(usize, f64)> = row.entries().collect();
                for &(i, vi) in &entries {
                    for &(j, vj) in &entries {
                        g[(i, j)] += vi * vj;
                    }
                }
            }
            g
        }
    }
}

fn check_shape(nrows: usize, ncols: usize) -> Result<()> {
    if nrows == 0 || ncols == 0 {
        return Err(Error::invalid(format!(
            "matrix dimensions must be positive, got {nrows}×{ncols}"
        )));
    }
    Ok(())
}

/// Eigenvalue estimates of `AᵀA`, largest first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Computed by a full decomposition.
    pub exact: bool,
    /// Lanczos broke down before the requested values were certified.
    pub degraded: bool,
    /// `Σ values − ‖A‖_F²`; zero (up to rounding) for a complete spectrum.
    pub trace_shortfall: f64,
}

impl Spectrum {
    /// `σ(AᵀA, index)` with a 1-based index; zero past the computed tail,
    /// following the convention `σ(H, k) = 0` for `k > d`.
    pub fn value(&self, index: usize) -> Option<f64> {
        if index == 0 {
            return None;
        }
        self.values.get(index - 1).copied()
    }
}

/// `‖A‖²` to relative tolerance `tol`.
///
/// Uses a full symmetric decomposition of the compact Gram matrix when
/// `min(n, d) ≤ 64`, power iteration on `AᵀA` otherwise.
pub fn spectral_norm_sq(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::invalid("tol must be positive and max_iter at least 1"));
    }
    if a.nrows.min(a.ncols) <= DENSE_NORM_THRESHOLD {
        let vals = clamp_psd(sorted_eigenvalues(a.compact_gram()))?;
        return Ok(vals[0]);
    }
    power_iteration(a, tol, max_iter)
}

/// `‖A‖²` to working precision, for the Lipschitz constants the solvers and
/// bounds rely on.
///
/// Power iteration stalls when the top eigenvalues of `AᵀA` cluster, as they
/// do for blur operators. This uses a dense decomposition of the compact
/// Gram matrix up to `min(n, d) = 256`, and Lanczos started from `Aᵀ1`
/// beyond that, falling back to the dense path if Lanczos breaks down.
pub fn operator_norm_sq(a: &Matrix) -> Result<f64> {
    let small = a.nrows.min(a.ncols);
    if small <= DENSE_LIPSCHITZ_THRESHOLD {
        return Ok(clamp_psd(sorted_eigenvalues(a.compact_gram()))?.first().copied().unwrap_or(0.0));
    }
    let mut start = a.tmul_vec(&vec![1.0; a.nrows]);
    if norm_sq(&start) == 0.0 {
        let norms = a.row_norms_sq();
        let best = (0..a.nrows).max_by(|&i, &j| norms[i].total_cmp(&norms[j])).expect("rows");
        if norms[best] == 0.0 {
            return Ok(0.0);
        }
        start.fill(0.0);
        a.row(best).axpy_into(1.0, &mut start);
    }
    let sn = norm(&start);
    start.iter_mut().for_each(|v| *v /= sn);
    let spec = lanczos_from(a, 1, start)?;
    match spec.values.first() {
        Some(&v) if !spec.degraded => Ok(v),
        _ if small <= DENSE_SPECTRUM_THRESHOLD => {
            Ok(clamp_psd(sorted_eigenvalues(a.compact_gram()))?[0])
        }
        _ => power_iteration(a, DEFAULT_TOL, DEFAULT_MAX_ITER),
    }
}

/// Power iteration on `AᵀA` from the normalized all-ones vector.
///
/// Stops when the Rayleigh quotient changes by at most `tol` relative. If the
/// start vector lies in the null space the iteration restarts from the row of
/// largest norm, which `A` cannot annihilate.
pub fn power_iteration(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    let d = a.ncols;
    let mut v = vec![1.0 / (d as f64).sqrt(); d];
    let mut av = vec![0.0; a.nrows];
    let mut w = vec![0.0; d];

    a.matvec(&v, &mut av);
    if norm_sq(&av) == 0.0 {
        let norms = a.row_norms_sq();
        let (best, &best_norm) = norms
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("at least one row");
        if best_norm == 0.0 {
            return Ok(0.0);
        }
        v.fill(0.0);
        a.row(best).axpy_into(1.0 / best_norm.sqrt(), &mut v);
        a.matvec(&v, &mut av);
    }

    let mut lambda = norm_sq(&av);
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        a.matvec_t(&av, &mut w);
        let wn = norm(&w);
        if wn == 0.0 {
            return Ok(0.0);
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        a.matvec(&v, &mut av);
        let next = norm_sq(&av);
        change = (next - lambda).abs() / next.max(f64::MIN_POSITIVE);
        lambda = next;
        if change <= tol {
            return Ok(lambda);
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        estimate: lambda,
        residual: change,
        iterate: v,
    })
}

/// The `k` largest eigenvalues of `AᵀA`.
///
/// A full spectrum of a matrix with at most 2048 columns comes from a dense
/// decomposition; everything else uses Lanczos with full reorthogonalization.
pub fn eigenspectrum(a: &Matrix, k: usize) -> Result<Spectrum> {
    let d = a.ncols;
    if k == 0 || k > d {
        return Err(Error::invalid(format!("k must be in 1..={d}, got {k}")));
    }
    if k == d && d <= DENSE_SPECTRUM_THRESHOLD {
        return full_spectrum(a);
    }
    lanczos(a, k)
}

/// All `d` eigenvalues of `AᵀA` from a dense decomposition of the compact Gram
/// matrix, zero-padded when `n < d`.
pub fn full_spectrum(a: &Matrix) -> Result<Spectrum> {
    let mut values = clamp_psd(sorted_eigenvalues(a.compact_gram()))?;
    values.resize(a.ncols, 0.0);
    let trace_shortfall = values.iter().sum::<f64>() - a.frobenius_sq();
    Ok(Spectrum {
        values,
        exact: true,
        degraded: false,
        trace_shortfall,
    })
}

/// Top-`k` eigenvalues of `AᵀA` by Lanczos with full reorthogonalization.
///
/// The Krylov basis grows until the Ritz residual bound `β_j |s_j|` of every
/// wanted value is below `1e-12 θ₁`, or the basis spans the whole space.
pub fn lanczos(a: &Matrix, k: usize) -> Result<Spectrum> {
    let d = a.ncols;
    lanczos_from(a, k, vec![1.0 / (d as f64).sqrt(); d])
}

fn lanczos_from(a: &Matrix, k: usize, start: Vec<f64>) -> Result<Spectrum> {
    let d = a.ncols;
    let k = k.min(d);
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut av = vec![0.0; a.nrows];
    let mut w = vec![0.0; d];
    let scale = a.frobenius_sq().max(f64::MIN_POSITIVE);
    let mut degraded = false;
    let mut ritz: Vec<f64>;

    loop {
        let j = alphas.len();
        let q = &basis[j];
        a.matvec(q, &mut av);
        a.matvec_t(&av, &mut w);
        let alpha = dot(q, &w);
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let beta = norm(&w);
        let m = alphas.len();
        let done_space = m == d;
        let breakdown = !done_space && beta <= 1e-13 * scale;

        let check = done_space || breakdown || (m >= k && (m - k) % 8 == 0);
        if check {
            let (vals, last_row) = tridiag_eigen(&alphas, &betas);
            let converged = vals
                .iter()
                .zip(&last_row)
                .take(k)
                .all(|(_, s)| (beta * s).abs() <= 1e-12 * vals[0].abs().max(f64::MIN_POSITIVE));
            ritz = vals;
            if breakdown {
                degraded = true;
                break;
            }
            if done_space || (m >= k && converged) {
                break;
            }
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }

    ritz.truncate(k);
    let values = clamp_psd(ritz)?;
    let trace_shortfall = values.iter().sum::<f64>() - a.frobenius_sq();
    Ok(Spectrum {
        degraded: degraded || values.len() < k,
        exact: false,
        values,
        trace_shortfall,
    })
}

/// Eigenvalues (descending) of the symmetric tridiagonal matrix and the last
/// component of each corresponding unit eigenvector.
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|c| (eig.eigenvalues[c], eig.eigenvectors[(m - 1, c)]))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    pairs.into_iter().unzip()
}

fn sorted_eigenvalues(g: DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Clamp negatives within `−1e-10 σ₁` to zero; anything lower is an error.
fn clamp_psd(mut vals: Vec<f64>) -> Result<Vec<f64>> {
    let top = vals.first().copied().unwrap_or(0.0).max(0.0);
    for v in vals.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_CLAMP_TOL * top {
                return Err(Error::NotPsd { value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(vals)
}

/// `‖Aᵀ‖²_{1→2} = maxᵢ ‖aᵢ‖²`.
pub fn l1to2_norm_sq(a: &Matrix) -> f64 {
    a.rows().map(|r| r.norm_sq()).fold(0.0, f64::max)
}

/// `maxᵢ ‖aᵢ‖² / ((1/n) Σⱼ ‖aⱼ‖²)`, the tightest admissible `ρ`.
pub fn row_energy_ratio(a: &Matrix) -> Result<f64> {
    let norms = a.row_norms_sq();
    let total: f64 = norms.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let max = norms.iter().copied().fold(0.0, f64::max);
    Ok(max * norms.len() as f64 / total)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
