//! Dense complex linear algebra specialized for Hermitian generators and
//! unitary propagators.

pub mod eig;
pub mod expm;
pub mod linalg;
pub mod random;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tol;

/// Dense square complex matrix, row major.
pub type CMat = Array2<C64>;
/// Dense complex vector.
pub type CVec = Array1<C64>;

pub use eig::{eigh, eigvals_unitary};
pub use expm::{d2expm_step, dexpm_step, expm_step, EigH};
pub use linalg::{determinant, inverse, polar_unitary};

/// Hermitian operator: validated wrapper around a square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMat);

impl HermitianOperator {
    /// Validates Hermiticity within [`tol::HERMITIAN`] relative to the
    /// largest entry magnitude.
    pub fn new(m: CMat) -> Result<Self> {
        let asym = max_asymmetry(&m);
        let scale = max_abs(&m).max(1.0);
        if asym > tol::HERMITIAN * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: asym,
                tol: tol::HERMITIAN * scale,
            });
        }
        Ok(Self(symmetrize(&m)))
    }

    /// Builds from real entries (always Hermitian if symmetric is not
    /// required — entries are placed as-is and validated).
    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMat::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[[i, j]] = C64::new(v, 0.0);
            }
        }
        Self::new(m)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = CMat::zeros((n, n));
        for (i, &v) in d.iter().enumerate() {
            m[[i, i]] = C64::new(v, 0.0);
        }
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMat::zeros((n, n)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }
}

/// Unitary matrix: validated wrapper, U†U = I within [`tol::UNITARY`].
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(CMat);

impl UnitaryMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        let dev = unitary_deviation(&m);
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary { max_deviation: dev });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }
}

/// Unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVec);

impl StateVector {
    pub fn new(v: CVec) -> Result<Self> {
        let n = vec_norm(&v);
        if (n - 1.0).abs() > tol::STATE_NORM {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self(v))
    }

    /// Normalizes the input (errors on the zero vector).
    pub fn normalized(v: CVec) -> Result<Self> {
        let n = vec_norm(&v);
        if n < 1e-300 {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self(v.mapv(|x| x / n)))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vec(&self) -> &CVec {
        &self.0
    }
}

pub fn identity(n: usize) -> CMat {
    let mut m = CMat::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = C64::new(1.0, 0.0);
    }
    m
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    let (r, c) = m.dim();
    CMat::from_shape_fn((c, r), |(i, j)| m[[j, i]].conj())
}

/// Row-major matrix product; tight ikj kernel since this sits in every hot
/// loop of the crate.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (m, k) = a.dim();
    let (k2, n) = b.dim();
    assert_eq!(k, k2, "matmul dimension mismatch");
    let mut out = CMat::zeros((m, n));
    let (a, b) = (
        a.as_slice().expect("standard layout"),
        b.as_slice().expect("standard layout"),
    );
    let o = out.as_slice_mut().unwrap();
    for i in 0..m {
        for p in 0..k {
            let aip = a[i * k + p];
            if aip.re == 0.0 && aip.im == 0.0 {
                continue;
            }
            let (brow, orow) = (&b[p * n..(p + 1) * n], &mut o[i * n..(i + 1) * n]);
            for j in 0..n {
                orow[j] += aip * brow[j];
            }
        }
    }
    out
}

pub fn matvec(a: &CMat, v: &CVec) -> CVec {
    let (m, k) = a.dim();
    assert_eq!(k, v.len());
    let a = a.as_slice().unwrap();
    let v = v.as_slice().unwrap();
    CVec::from_shape_fn(m, |i| {
        let mut acc = C64::new(0.0, 0.0);
        for p in 0..k {
            acc += a[i * k + p] * v[p];
        }
        acc
    })
}

/// ⟨u|v⟩ with conjugation on the left argument.
pub fn inner(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// |u⟩⟨v|.
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    CMat::from_shape_fn((u.len(), v.len()), |(i, j)| u[i] * v[j].conj())
}

pub fn vec_norm(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMat) -> C64 {
    m.diag().iter().copied().sum()
}

/// Re tr(A† B), the real inner product used throughout.
pub fn re_inner_mat(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// tr(A·B) without forming the product.
pub fn trace_prod(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let (a, b) = (a.as_slice().unwrap(), b.as_slice().unwrap());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[i * n + j] * b[j * n + i];
        }
    }
    acc
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Largest entry of |M − M†|.
pub fn max_asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Largest entry of |U†U − I|.
pub fn unitary_deviation(m: &CMat) -> f64 {
    let p = matmul(&dagger(m), m);
    let n = p.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((p[[i, j]] - target).norm());
        }
    }
    worst
}

/// (M + M†)/2.
pub fn symmetrize(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_shape_fn((n, n), |(i, j)| (m[[i, j]] + m[[j, i]].conj()) * 0.5)
}

/// AB − BA.
pub fn commutator(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(matmul(a, b) - matmul(b, a))
}

pub fn scale(m: &CMat, c: C64) -> CMat {
    m.mapv(|x| x * c)
}

/// Kronecker product, used to assemble multi-qubit operators.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    CMat::from_shape_fn((ra * rb, ca * cb), |(i, j)| {
        a[[i / rb, j / cb]] * b[[i % rb, j % cb]]
    })
}

/// Unnormalized Pauli matrices.
pub fn pauli_x() -> CMat {
    ndarray::array![
        [C64::new(0., 0.), C64::new(1., 0.)],
        [C64::new(1., 0.), C64::new(0., 0.)]
    ]
}

pub fn pauli_y() -> CMat {
    ndarray::array![
        [C64::new(0., 0.), C64::new(0., -1.)],
        [C64::new(0., 1.), C64::new(0., 0.)]
    ]
}

pub fn pauli_z() -> CMat {
    ndarray::array![
        [C64::new(1., 0.), C64::new(0., 0.)],
        [C64::new(0., 0.), C64::new(-1., 0.)]
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn commutator_of_same_matrix_vanishes() {
        let a = random::hermitian(5, &mut random::rng(7));
        let c = commutator(&a, &a).unwrap();
        assert!(max_abs(&c) < 1e-12);
    }

    #[test]
    fn pauli_commutator_is_2i_z() {
        // direct 2x2 multiplication oracle
        let oracle = matmul(&pauli_x(), &pauli_y()) - matmul(&pauli_y(), &pauli_x());
        let c = commutator(&pauli_x(), &pauli_y()).unwrap();
        let expect = scale(&pauli_z(), C64::new(0.0, 2.0));
        assert!(max_abs(&(c.clone() - oracle)) < 1e-15);
        assert!(max_abs(&(c - expect)) < 1e-15);
    }

    #[test]
    fn commutator_of_hermitians_is_anti_hermitian() {
        let mut rng = random::rng(3);
        let a = random::hermitian(6, &mut rng);
        let b = random::hermitian(6, &mut rng);
        let c = commutator(&a, &b).unwrap();
        // anti-Hermitian: C† = -C
        let sum = &dagger(&c) + &c;
        assert!(max_abs(&sum) < 1e-12);
    }

    #[test]
    fn commutator_example_one_matrix() {
        // [diag(1,2,4), H1] has (1,2) entry -sqrt(2/3)
        let h0 = HermitianOperator::diagonal(&[1.0, 2.0, 4.0]);
        let s23 = (2.0_f64 / 3.0).sqrt();
        let s13 = (1.0_f64 / 3.0).sqrt();
        let h1 = HermitianOperator::from_real(&[
            &[1.0, s23, 0.0],
            &[s23, 2.0, s13],
            &[0.0, s13, 4.0],
        ])
        .unwrap();
        let c = commutator(h0.mat(), h1.mat()).unwrap();
        assert_abs_diff_eq!(c[[0, 1]].re, -s23, epsilon = 1e-14);
        assert_abs_diff_eq!(c[[0, 1]].im, 0.0, epsilon = 1e-14);
        for i in 0..3 {
            assert!(c[[i, i]].norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = identity(2);
        let b = identity(3);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hermitian_rejects_asymmetric() {
        let mut m = identity(2);
        m[[0, 1]] = C64::new(1e-3, 0.0);
        let err = HermitianOperator::new(m).unwrap_err();
        match err {
            Error::NotHermitian { max_asymmetry, .. } => {
                assert_abs_diff_eq!(max_asymmetry, 1e-3, epsilon = 1e-12)
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let x = pauli_x();
        let id = identity(2);
        let x1 = kron(&x, &kron(&id, &id));
        assert_eq!(x1.dim(), (8, 8));
        assert_abs_diff_eq!(x1[[0, 4]].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x1[[4, 0]].re, 1.0, epsilon = 1e-15);
    }
}
