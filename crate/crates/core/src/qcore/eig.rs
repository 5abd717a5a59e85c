//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
//! simultaneous diagonalization needed to extract unitary spectra.
//!
//! Jacobi is chosen over Householder tridiagonalization because the matrices
//! here are small (N ≤ a few hundred, usually ≤ 8), rotations give eigenvalues
//! and an eigenbasis with near machine-precision orthogonality, and the
//! implementation has no external linkage.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::{dagger, matmul, CMat, CVec};
use crate::tol;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching unitary
/// eigenvector matrix (columns), so that `m = V diag(λ) V†`.
pub fn eigh(m: &CMat) -> (Array1<f64>, CMat) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    // working copy, forced exactly Hermitian
    let mut a: Vec<C64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = (m[[i, j]] + m[[j, i]].conj()) * 0.5;
            a.push(if i == j { C64::new(v.re, 0.0) } else { v });
        }
    }
    let mut v: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        v[i * n + i] = C64::new(1.0, 0.0);
    }

    let fro: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let stop = tol::JACOBI_OFF * fro.max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].norm());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let beta = apq.norm();
                if beta <= stop * 1e-2 {
                    continue;
                }
                let w = apq / beta; // phase of the pivot
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // real 2x2 rotation after phase alignment
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s·w], [−s·w̄, c]] on the (p,q) plane annihilates
                // the pivot: J†AJ has zero (p,q) entry.
                let cp = C64::new(c, 0.0);
                let sw = w * s;
                let swc = sw.conj();
                // rows p,q of A: A <- J† A
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = cp * apj - sw * aqj;
                    a[q * n + j] = swc * apj + cp * aqj;
                }
                // columns p,q of A: A <- A J
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = cp * aip - swc * aiq;
                    a[i * n + q] = sw * aip + cp * aiq;
                }
                // keep the diagonal exactly real and the pivot exactly zero
                a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = C64::new(a[q * n + q].re, 0.0);
                a[p * n + q] = C64::new(0.0, 0.0);
                a[q * n + p] = C64::new(0.0, 0.0);
                // accumulate V <- V J
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = cp * vip - swc * viq;
                    v[i * n + q] = sw * vip + cp * viq;
                }
            }
        }
    }

    // sort ascending
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).unwrap());
    let vals = Array1::from_iter(order.iter().map(|&i| a[i * n + i].re));
    let mut vecs = CMat::zeros((n, n));
    for (newc, &oldc) in order.iter().enumerate() {
        for i in 0..n {
            vecs[[i, newc]] = v[i * n + oldc];
        }
    }
    (vals, vecs)
}

/// Eigenvalues of a real symmetric matrix, ascending, by cyclic Jacobi.
/// Input is symmetrized; intended for Hessians and discretized kernels.
pub fn eigvalsh_real(m: &ndarray::Array2<f64>) -> Array1<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a: Vec<f64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            a.push(0.5 * (m[[i, j]] + m[[j, i]]));
        }
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = tol::JACOBI_OFF * fro.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= stop * 1e-2 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Array1::from_vec(vals)
}

/// Eigenvalues and eigenvectors of a unitary (normal) matrix via simultaneous
/// diagonalization of its commuting Hermitian and anti-Hermitian parts.
///
/// Returns unimodular eigenvalues and a unitary eigenbasis. Degeneracies in
/// the Hermitian part (e.g. the pair e^{±iθ} sharing a real part) are resolved
/// by re-diagonalizing the skew part within each cluster.
pub fn eigvals_unitary(u: &CMat) -> (CVec, CMat) {
    let n = u.nrows();
    let ud = dagger(u);
    let h = CMat::from_shape_fn((n, n), |(i, j)| (u[[i, j]] + ud[[i, j]]) * 0.5);
    let k = CMat::from_shape_fn((n, n), |(i, j)| {
        (u[[i, j]] - ud[[i, j]]) * C64::new(0.0, -0.5)
    });
    let (hvals, mut basis) = eigh(&h);
    // cluster H-eigenvalues, then diagonalize K inside each cluster
    let scale = hvals.iter().fold(1.0_f64, |m, &x| m.max(x.abs()));
    let gap = 1e-8 * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (hvals[end] - hvals[end - 1]).abs() <= gap {
            end += 1;
        }
        if end - start > 1 {
            let cols: Vec<usize> = (start..end).collect();
            let sub = CMat::from_shape_fn((n, cols.len()), |(i, j)| basis[[i, cols[j]]]);
            let kblock = matmul(&matmul(&dagger(&sub), &k), &sub);
            let (_, w) = eigh(&kblock);
            let rotated = matmul(&sub, &w);
            for (j, &c) in cols.iter().enumerate() {
                for i in 0..n {
                    basis[[i, c]] = rotated[[i, j]];
                }
            }
        }
        start = end;
    }
    let vals = CVec::from_shape_fn(n, |j| {
        let col = basis.column(j);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for l in 0..n {
                row += u[[i, l]] * col[l];
            }
            acc += col[i].conj() * row;
        }
        acc
    });
    (vals, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{self, identity, max_abs, random, unitary_deviation};
    use approx::assert_abs_diff_eq;

    fn reconstruct(vals: &Array1<f64>, vecs: &CMat) -> CMat {
        let n = vals.len();
        let lam = CMat::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                C64::new(vals[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        matmul(&matmul(vecs, &lam), &dagger(vecs))
    }

    #[test]
    fn eigh_diagonal_matrix() {
        let m = qcore::HermitianOperator::diagonal(&[4.0, 1.0, 2.0]);
        let (vals, vecs) = eigh(m.mat());
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[2], 4.0, epsilon = 1e-14);
        assert!(unitary_deviation(&vecs) < 1e-13);
    }

    #[test]
    fn eigh_pauli_x() {
        let (vals, _) = eigh(&qcore::pauli_x());
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_random_reconstruction() {
        let mut rng = random::rng(11);
        for n in [2usize, 3, 5, 8, 17] {
            let m = random::hermitian(n, &mut rng);
            let (vals, vecs) = eigh(&m);
            assert!(unitary_deviation(&vecs) < 1e-12, "n={n}");
            let r = reconstruct(&vals, &vecs);
            assert!(max_abs(&(r - m)) < 1e-11, "n={n}");
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn eigh_degenerate_spectrum() {
        // projector with a two-dimensional kernel
        let mut m = identity(4);
        m[[2, 2]] = C64::new(0.0, 0.0);
        m[[3, 3]] = C64::new(0.0, 0.0);
        let (vals, vecs) = eigh(&m);
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[3], 1.0, epsilon = 1e-14);
        assert!(unitary_deviation(&vecs) < 1e-13);
    }

    #[test]
    fn unitary_spectrum_of_phase_pair() {
        // eigenvalues i e^{±iθ} share no real part collision for θ=0.3 but do
        // for the conjugate pair e^{±iφ}; test the clustered path with a
        // matrix having exactly that degeneracy in the Hermitian part.
        let phi = 0.7_f64;
        let d = ndarray::array![
            [C64::from_polar(1.0, phi), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::from_polar(1.0, -phi)]
        ];
        let h = random::haar_unitary(2, &mut random::rng(5));
        let u = matmul(&matmul(&h, &d), &dagger(&h));
        let (vals, basis) = eigvals_unitary(&u);
        assert!(unitary_deviation(&basis) < 1e-12);
        let mut phases: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
        phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(phases[0], -phi, epsilon = 1e-10);
        assert_abs_diff_eq!(phases[1], phi, epsilon = 1e-10);
        for z in vals.iter() {
            assert_abs_diff_eq!(z.norm(), 1.0, epsilon = 1e-10);
        }
    }
}
