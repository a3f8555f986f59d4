//! Reference implementations independent of the crate's nalgebra-backed paths.

use ebcert_core::{ComplexMatrix, C64};

/// Eigenvalues of a complex Hermitian matrix, descending.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled, and diagonalized by
/// cyclic Jacobi rotations.
pub fn jacobi_hermitian_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.rows();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            a[r][c] = z.re;
            a[r + n][c + n] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|p| (0..m).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (head, tail) = a.split_at_mut(q);
                for (apk, aqk) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (x, y) = (*apk, *aqk);
                    *apk = c * x - s * y;
                    *aqk = s * x + c * y;
                }
            }
        }
    }
    let mut doubled: Vec<f64> = (0..m).map(|k| a[k][k]).collect();
    doubled.sort_by(|x, y| y.total_cmp(x));
    doubled.into_iter().step_by(2).collect()
}

/// Rank of a Hermitian matrix by the Jacobi oracle with relative cutoff `tol · λ_max · n`.
pub fn jacobi_rank(h: &ComplexMatrix, tol: f64) -> usize {
    let values = jacobi_hermitian_eigenvalues(h);
    let top = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return 0;
    }
    values.iter().filter(|v| v.abs() > tol * top * h.rows() as f64).count()
}

/// Schmidt coefficients (squared) of `ψ ∈ C^2 ⊗ C^n` from the closed-form
/// eigenvalues of the 2x2 reduced matrix `M M†`, `M[a][b] = ψ[a·n + b]`.
pub fn schmidt_weights_qubit(psi: &[C64], n: usize) -> [f64; 2] {
    let entry = |a: usize, ap: usize| -> C64 { (0..n).map(|b| psi[a * n + b] * psi[ap * n + b].conj()).sum() };
    let (p, q, off) = (entry(0, 0).re, entry(1, 1).re, entry(0, 1));
    let mean = 0.5 * (p + q);
    let radius = (0.25 * (p - q) * (p - q) + off.norm_sqr()).sqrt();
    [mean + radius, (mean - radius).max(0.0)]
}

pub fn schmidt_rank_qubit(psi: &[C64], n: usize, tol: f64) -> usize {
    let [w0, w1] = schmidt_weights_qubit(psi, n);
    if w0 == 0.0 {
        0
    } else if w1 > tol * w0 {
        2
    } else {
        1
    }
}
