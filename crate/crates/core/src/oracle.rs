//! Reference routines for tests, kept independent of the production code
//! paths: a cyclic Jacobi eigensolver on explicitly formed Gram matrices,
//! and brute-force helpers.

use crate::linalg::Matrix;

/// Eigenvalues of a symmetric `n × n` row-major matrix, descending, by
/// cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut h: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(h.len(), n * n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[i * n + j] * h[i * n + j])
            .sum();
        let scale: f64 = (0..n).map(|i| h[i * n + i] * h[i * n + i]).sum::<f64>();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = h[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (h[q * n + q] - h[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let hkp = h[k * n + p];
                    let hkq = h[k * n + q];
                    h[k * n + p] = c * hkp - s * hkq;
                    h[k * n + q] = s * hkp + c * hkq;
                }
                for k in 0..n {
                    let hpk = h[p * n + k];
                    let hqk = h[q * n + k];
                    h[p * n + k] = c * hpk - s * hqk;
                    h[q * n + k] = s * hpk + c * hqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| h[i * n + i]).collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    vals
}

/// `AᵀA` formed entry by entry from dense rows.
pub fn normal_matrix(a: &Matrix) -> Vec<f64> {
    let rows = a.to_dense_rows();
    let d = a.ncols();
    let mut g = vec![0.0; d * d];
    for r in &rows {
        for i in 0..d {
            for j in 0..d {
                g[i * d + j] += r[i] * r[j];
            }
        }
    }
    g
}

/// All `d` eigenvalues of `AᵀA`, descending.
pub fn eigenvalues_of_normal(a: &Matrix) -> Vec<f64> {
    jacobi_eigenvalues(normal_matrix(a), a.ncols())
}

pub fn norm_sq(a: &Matrix) -> f64 {
    eigenvalues_of_normal(a)[0]
}

/// Smallest eigenvalue of `AᵀA`.
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    *eigenvalues_of_normal(a).last().expect("nonempty")
}

/// `(1/n) Aᵀ(Ax − b)` with explicit loops.
pub fn full_gradient(a: &Matrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let rows = a.to_dense_rows();
    let n = rows.len() as f64;
    let mut g = vec![0.0; a.ncols()];
    for (r, bi) in rows.iter().zip(b) {
        let res: f64 = r.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - bi;
        for (gj, rj) in g.iter_mut().zip(r) {
            *gj += rj * res / n;
        }
    }
    g
}

/// Every way to split `0..n` into two blocks of `n/2`, each listed once
/// (the block containing row 0 first).
pub fn equal_bipartitions(n: usize) -> Vec<[Vec<usize>; 2]> {
    assert!(n % 2 == 0 && n <= 20);
    let half = n / 2;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask & 1 == 0 || mask.count_ones() as usize != half {
            continue;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask >> i & 1 == 1);
        out.push([a, b]);
    }
    out
}

/// All `m`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, m, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_on_known_matrix() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let v = jacobi_eigenvalues(vec![2.0, 1.0, 1.0, 2.0], 2);
        assert!((v[0] - 3.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(equal_bipartitions(8).len(), 35);
        assert_eq!(subsets(6, 2).len(), 15);
    }
}
