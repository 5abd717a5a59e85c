//! Matrix exponential exp(−i·dt·H) of Hermitian generators and its exact
//! first and second directional derivatives, via eigendecomposition and
//! divided differences of φ(λ) = e^{−i·dt·λ}.
//!
//! First divided differences use the exact product form
//! φ[a,b] = −i·dt·e^{−i·dt·(a+b)/2}·sinc(dt(a−b)/2), which has no cancellation
//! for any gap including zero. Second divided differences fall back to a
//! midpoint Taylor form once the dt-scaled eigenvalue spread drops below
//! [`crate::tol::DIVIDED_DIFF_CONFLUENT`].

use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::{dagger, matmul, CMat, HermitianOperator, UnitaryMatrix};
use crate::error::Result;
use crate::tol;

/// Cached eigendecomposition of a Hermitian generator.
#[derive(Debug, Clone)]
pub struct EigH {
    pub vals: Array1<f64>,
    pub vecs: CMat,
}

impl EigH {
    pub fn new(h: &CMat) -> Self {
        let (vals, vecs) = super::eigh(h);
        Self { vals, vecs }
    }

    /// exp(−i·dt·H) = V e^{−iλdt} V†.
    pub fn propagator(&self, dt: f64) -> CMat {
        let n = self.vals.len();
        let mut scaled = CMat::zeros((n, n));
        for j in 0..n {
            let phase = C64::from_polar(1.0, -self.vals[j] * dt);
            for i in 0..n {
                scaled[[i, j]] = self.vecs[[i, j]] * phase;
            }
        }
        matmul(&scaled, &dagger(&self.vecs))
    }

    /// Matrix of first divided differences φ[λᵢ, λⱼ] for φ(λ) = e^{−iλdt}.
    pub fn dd1_matrix(&self, dt: f64) -> CMat {
        let n = self.vals.len();
        CMat::from_shape_fn((n, n), |(i, j)| dd1(self.vals[i], self.vals[j], dt))
    }

    /// First directional derivative of the propagator along `dir`.
    pub fn directional(&self, dir: &CMat, dt: f64) -> CMat {
        let v = &self.vecs;
        let vd = dagger(v);
        let dtil = matmul(&matmul(&vd, dir), v);
        let n = self.vals.len();
        let mut core = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                core[[i, j]] = dtil[[i, j]] * dd1(self.vals[i], self.vals[j], dt);
            }
        }
        matmul(&matmul(v, &core), &vd)
    }

    /// Second directional derivative of the propagator along `d1`, `d2`
    /// (symmetric bilinear form).
    pub fn directional2(&self, d1: &CMat, d2: &CMat, dt: f64) -> CMat {
        let v = &self.vecs;
        let vd = dagger(v);
        let e1 = matmul(&matmul(&vd, d1), v);
        let e2 = matmul(&matmul(&vd, d2), v);
        let n = self.vals.len();
        let mut core = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    acc += (e1[[i, k]] * e2[[k, j]] + e2[[i, k]] * e1[[k, j]])
                        * dd2(self.vals[i], self.vals[k], self.vals[j], dt);
                }
                core[[i, j]] = acc;
            }
        }
        matmul(&matmul(v, &core), &vd)
    }
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0 + x.powi(4) / 120.0
    } else {
        x.sin() / x
    }
}

/// φ[a,b] for φ(λ) = e^{−i·dt·λ}; exact for every gap.
#[inline]
fn dd1(a: f64, b: f64, dt: f64) -> C64 {
    let mid = C64::from_polar(dt, -0.5 * dt * (a + b) - std::f64::consts::FRAC_PI_2);
    mid * sinc(0.5 * dt * (a - b))
}

/// φ[a,b,c]; arguments are permuted so the outer difference is the spread,
/// with a confluent Taylor form below the threshold.
fn dd2(a: f64, b: f64, c: f64, dt: f64) -> C64 {
    let mut lo = a.min(b).min(c);
    let mut hi = a.max(b).max(c);
    let mid = a + b + c - lo - hi;
    let spread = hi - lo;
    if dt.abs() * spread < tol::DIVIDED_DIFF_CONFLUENT {
        // φ''(m)/2 − φ''''(m)·e2/24 around the mean m
        let m = (a + b + c) / 3.0;
        let (x, y, z) = (a - m, b - m, c - m);
        let e2 = x * y + y * z + z * x;
        let base = C64::from_polar(1.0, -dt * m);
        let dt2 = dt * dt;
        return base * (-0.5 * dt2 - dt2 * dt2 * e2 / 24.0);
    }
    // keep symmetry: φ[lo,mid,hi] with the largest gap outside
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    (dd1(lo, mid, dt) - dd1(mid, hi, dt)) / (lo - hi)
}

/// exp(−i·dt·H) for a validated Hermitian generator.
pub fn expm_step(h: &HermitianOperator, dt: f64) -> Result<UnitaryMatrix> {
    let eig = EigH::new(h.mat());
    UnitaryMatrix::new(eig.propagator(dt))
}

/// d/dε exp(−i·dt·(H+εD)) at ε = 0.
pub fn dexpm_step(h: &HermitianOperator, d: &HermitianOperator, dt: f64) -> CMat {
    EigH::new(h.mat()).directional(d.mat(), dt)
}

/// d²/dε₁dε₂ exp(−i·dt·(H+ε₁D₁+ε₂D₂)) at ε = 0.
pub fn d2expm_step(
    h: &HermitianOperator,
    d1: &HermitianOperator,
    d2: &HermitianOperator,
    dt: f64,
) -> CMat {
    EigH::new(h.mat()).directional2(d1.mat(), d2.mat(), dt)
}
