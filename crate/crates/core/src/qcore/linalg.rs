//! Complex LU factorization (determinant, inverse) and polar re-projection
//! onto the unitary group.

use num_complex::Complex64 as C64;

use super::{dagger, max_abs, CMat};

struct Lu {
    lu: Vec<C64>,
    perm: Vec<usize>,
    sign: f64,
    n: usize,
    singular: bool,
}

fn lu_decompose(m: &CMat) -> Lu {
    let n = m.nrows();
    let mut lu: Vec<C64> = m.iter().copied().collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].norm();
        for i in (k + 1)..n {
            let mag = lu[i * n + k].norm();
            if mag > best {
                best = mag;
                piv = i;
            }
        }
        if best == 0.0 {
            singular = true;
            continue;
        }
        if piv != k {
            for j in 0..n {
                lu.swap(k * n + j, piv * n + j);
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let pivot = lu[k * n + k];
        for i in (k + 1)..n {
            let f = lu[i * n + k] / pivot;
            lu[i * n + k] = f;
            for j in (k + 1)..n {
                let sub = f * lu[k * n + j];
                lu[i * n + j] -= sub;
            }
        }
    }
    Lu { lu, perm, sign, n, singular }
}

pub fn determinant(m: &CMat) -> C64 {
    let f = lu_decompose(m);
    if f.singular {
        return C64::new(0.0, 0.0);
    }
    let mut det = C64::new(f.sign, 0.0);
    for i in 0..f.n {
        det *= f.lu[i * f.n + i];
    }
    det
}

/// Inverse via LU with partial pivoting. Panics on singular input; callers in
/// this crate only invert near-unitary matrices.
pub fn inverse(m: &CMat) -> CMat {
    let f = lu_decompose(m);
    assert!(!f.singular, "inverse of singular matrix");
    let n = f.n;
    let mut inv = CMat::zeros((n, n));
    for col in 0..n {
        // solve LU x = P e_col
        let mut x = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            x[i] = if f.perm[i] == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
        }
        for i in 1..n {
            for j in 0..i {
                let sub = f.lu[i * n + j] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let sub = f.lu[i * n + j] * x[j];
                x[i] -= sub;
            }
            x[i] /= f.lu[i * n + i];
        }
        for i in 0..n {
            inv[[i, col]] = x[i];
        }
    }
    inv
}

/// Nearest unitary in Frobenius norm, by the Newton polar iteration
/// X ← (X + X⁻†)/2. Quadratically convergent for near-unitary input, which is
/// the only regime the integrators feed it.
pub fn polar_unitary(m: &CMat) -> CMat {
    let mut x = m.clone();
    for _ in 0..8 {
        let corr = dagger(&inverse(&x));
        let next = CMat::from_shape_fn(x.dim(), |(i, j)| (x[[i, j]] + corr[[i, j]]) * 0.5);
        let delta = max_abs(&(&next - &x));
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    x
}
