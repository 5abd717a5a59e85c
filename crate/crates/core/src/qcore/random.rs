//! Seeded random matrices and states for experiments and tests.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{matmul, CMat, CVec, StateVector};

/// The crate-wide deterministic generator.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// GUE-style Hermitian matrix with O(1) entries.
pub fn hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[[i, i]] = C64::new(d, 0.0);
        for j in (i + 1)..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = C64::new(re * 0.5_f64.sqrt(), im * 0.5_f64.sqrt());
            m[[i, j]] = z;
            m[[j, i]] = z.conj();
        }
    }
    m
}

/// Haar-distributed unitary via Gram–Schmidt on a Ginibre matrix.
pub fn haar_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut cols: Vec<CVec> = (0..n)
        .map(|_| {
            CVec::from_shape_fn(n, |_| {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj = super::inner(&cols[k], &cols[j]);
            let prev = cols[k].clone();
            cols[j] = &cols[j] - &prev.mapv(|x| x * proj);
        }
        let nrm = super::vec_norm(&cols[j]);
        cols[j] = cols[j].mapv(|x| x / nrm);
    }
    let mut u = CMat::zeros((n, n));
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            u[[i, j]] = col[i];
        }
    }
    u
}

/// Uniformly random unit state.
pub fn state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let v = CVec::from_shape_fn(n, |_| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    StateVector::normalized(v).expect("gaussian vector is nonzero")
}

/// Conjugates a matrix by a random unitary: U M U†.
pub fn conjugate<R: Rng>(m: &CMat, rng: &mut R) -> CMat {
    let u = haar_unitary(m.nrows(), rng);
    matmul(&matmul(&u, m), &super::dagger(&u))
}
