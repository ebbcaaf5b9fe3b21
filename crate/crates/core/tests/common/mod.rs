#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochascope_core::operators::{build_random_ensemble, EnsembleKind};
use stochascope_core::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// Seeded test operator: cycles through dense ensembles, a sparse random
/// pattern and a near-identical-rows operator.
pub fn mixed_instance(seed: u64, n: usize, d: usize) -> Matrix {
    match seed % 5 {
        0 => build_random_ensemble(EnsembleKind::Gaussian { mean: 0.0, var: 1.0 }, n, d, seed),
        1 => build_random_ensemble(EnsembleKind::Uniform01, n, d, seed),
        2 => build_random_ensemble(EnsembleKind::Gaussian { mean: 0.25, var: 1.0 }, n, d, seed),
        3 => return sparse_instance(seed, n, d),
        _ => return near_identical_rows(seed, n, d),
    }
    .unwrap()
    .into_matrix()
}

pub fn sparse_instance(seed: u64, n: usize, d: usize) -> Matrix {
    let mut r = rng(seed);
    let mut trip = Vec::new();
    for i in 0..n {
        // Every row keeps at least one entry.
        trip.push((i, r.gen_range(0..d), r.gen_range(0.5..2.0)));
        for j in 0..d {
            if r.gen_bool(0.2) && !trip.iter().any(|&(a, b, _)| a == i && b == j) {
                trip.push((i, j, r.gen_range(-1.0..1.0)));
            }
        }
    }
    Matrix::from_triplets(n, d, trip).unwrap()
}

pub fn near_identical_rows(seed: u64, n: usize, d: usize) -> Matrix {
    let mut r = rng(seed);
    let base = random_vec(&mut r, d);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| base.iter().map(|v| v + 0.05 * r.gen_range(-1.0..1.0)).collect())
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn permute_rows(a: &Matrix, perm: &[usize]) -> Matrix {
    // perm[i] is the new position of old row i.
    let rows = a.to_dense_rows();
    let mut out = vec![Vec::new(); rows.len()];
    for (i, r) in rows.into_iter().enumerate() {
        out[perm[i]] = r;
    }
    Matrix::from_rows(&out).unwrap()
}
