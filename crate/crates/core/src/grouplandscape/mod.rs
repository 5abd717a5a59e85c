//! Fidelity functionals on the unitary group and closed-form kinematic
//! critical-point classification over U(N), SU(N) and PU(N).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    self, dagger, eigh, eigvals_unitary, inner, matmul, matvec, max_abs, trace, trace_prod,
    CMat, HermitianOperator, StateVector, UnitaryMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateGroup {
    U,
    SU,
    PU,
}

/// Optimization target: pure-state transfer, observable expectation, or gate
/// synthesis with a group variant.
#[derive(Debug, Clone)]
pub enum Objective {
    PureState {
        psi0: StateVector,
        psig: StateVector,
    },
    Observable {
        rho0: CMat,
        a: HermitianOperator,
    },
    Gate {
        v: UnitaryMatrix,
        group: GateGroup,
    },
}

impl Objective {
    pub fn pure_state(psi0: StateVector, psig: StateVector) -> Result<Self> {
        if psi0.dim() != psig.dim() {
            return Err(Error::DimensionMismatch {
                left: psi0.dim(),
                right: psig.dim(),
            });
        }
        Ok(Self::PureState { psi0, psig })
    }

    /// Validates ρ0 (Hermitian, positive semi-definite, unit trace).
    pub fn observable(rho0: CMat, a: HermitianOperator) -> Result<Self> {
        let rho = HermitianOperator::new(rho0)?.into_mat();
        let tr = trace(&rho);
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {tr} is not 1"
            )));
        }
        let (vals, _) = eigh(&rho);
        if vals.iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidArgument(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        if a.dim() != rho.nrows() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: rho.nrows(),
            });
        }
        Ok(Self::Observable { rho0: rho, a })
    }

    pub fn gate(v: UnitaryMatrix, group: GateGroup) -> Result<Self> {
        if group == GateGroup::SU {
            let det = qcore::determinant(v.mat());
            if (det - C64::new(1.0, 0.0)).norm() > 1e-8 {
                return Err(Error::InvalidArgument(format!(
                    "SU target requires det(V) = 1, got {det}"
                )));
            }
        }
        Ok(Self::Gate { v, group })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::PureState { psi0, .. } => psi0.dim(),
            Self::Observable { rho0, .. } => rho0.nrows(),
            Self::Gate { v, .. } => v.dim(),
        }
    }

    /// Fidelity of an endpoint propagator.
    pub fn value(&self, u: &CMat) -> f64 {
        match self {
            Self::PureState { psi0, psig } => {
                let z = inner(psig.vec(), &matvec(u, psi0.vec()));
                z.norm_sqr()
            }
            Self::Observable { rho0, a } => {
                let ur = matmul(u, rho0);
                trace_prod(a.mat(), &matmul(&ur, &dagger(u))).re
            }
            Self::Gate { v, group } => {
                let n = u.nrows() as f64;
                let z = trace_prod(&dagger(v.mat()), u);
                match group {
                    GateGroup::U | GateGroup::SU => z.re / n,
                    GateGroup::PU => z.norm_sqr() / (n * n),
                }
            }
        }
    }

    /// Cotangent matrix Λ of the fidelity at `u`: dG[X] = Re tr(Λ† X).
    pub fn cotangent(&self, u: &CMat) -> CMat {
        match self {
            Self::PureState { psi0, psig } => {
                let z = inner(psig.vec(), &matvec(u, psi0.vec()));
                qcore::outer(psig.vec(), psi0.vec()).mapv(|x| x * (2.0 * z))
            }
            Self::Observable { rho0, a } => {
                matmul(&matmul(a.mat(), u), rho0).mapv(|x| x * 2.0)
            }
            Self::Gate { v, group } => {
                let n = u.nrows() as f64;
                match group {
                    GateGroup::U | GateGroup::SU => v.mat().mapv(|x| x / n),
                    GateGroup::PU => {
                        let z = trace_prod(&dagger(v.mat()), u);
                        v.mat().mapv(|x| x * (2.0 * z / (n * n)))
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KinematicClass {
    GlobalMax,
    GlobalMin,
    Saddle,
    AttractiveSuboptimal,
    NonCritical,
}

/// Classification of an endpoint as a critical point of the fidelity on the
/// group (kinematic analysis: how the endpoint was reached is ignored).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KinematicReport {
    pub is_critical: bool,
    pub critical_value: f64,
    /// For Gate(U): dimension d of the (−1)-eigenspace of W = V†U, so the
    /// critical value is 1 − 2d/N. For Gate(SU): multiplicity of the
    /// lower-real-part eigenvalue cluster.
    pub manifold_index: Option<usize>,
    pub classification: KinematicClass,
}

fn non_critical(value: f64) -> KinematicReport {
    KinematicReport {
        is_critical: false,
        critical_value: value,
        manifold_index: None,
        classification: KinematicClass::NonCritical,
    }
}

/// Classifies `u` as a kinematic critical point of the objective.
///
/// Pure-state and observable objectives are critical iff the evolved state
/// commutes with the observable; gate objectives follow the spectral
/// criteria of the respective group. Local minima that are not global are
/// labelled `Saddle` (the taxonomy is oriented to maximization; such points
/// repel ascent).
pub fn kinematic_classify(obj: &Objective, u: &CMat, tol_in: f64) -> Result<KinematicReport> {
    if tol_in <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let n = obj.dim();
    if u.nrows() != n {
        return Err(Error::DimensionMismatch {
            left: u.nrows(),
            right: n,
        });
    }
    let value = obj.value(u);
    let nn = n as f64;
    match obj {
        Objective::PureState { .. } | Objective::Observable { .. } => {
            let (rho0, a): (CMat, CMat) = match obj {
                Objective::PureState { psi0, psig } => (
                    qcore::outer(psi0.vec(), psi0.vec()),
                    qcore::outer(psig.vec(), psig.vec()),
                ),
                Objective::Observable { rho0, a } => (rho0.clone(), a.mat().clone()),
                _ => unreachable!(),
            };
            let evolved = matmul(&matmul(u, &rho0), &dagger(u));
            let comm = qcore::commutator(&a, &evolved)?;
            let scale = max_abs(&a).max(1.0) * max_abs(&evolved).max(1.0);
            if max_abs(&comm) > tol_in * nn * scale {
                return Ok(non_critical(value));
            }
            // commuting case: classify by the attainable extremes of
            // tr[A U rho U†] over unitaries (sorted-eigenvalue pairings)
            let (mut la, _) = eigh(&a);
            let (mut lr, _) = eigh(&rho0);
            let la_s = la.as_slice_mut().unwrap();
            la_s.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let lr_s = lr.as_slice_mut().unwrap();
            lr_s.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let maxv: f64 = la_s.iter().zip(lr_s.iter()).map(|(x, y)| x * y).sum();
            let minv: f64 = la_s
                .iter()
                .zip(lr_s.iter().rev())
                .map(|(x, y)| x * y)
                .sum();
            let band = tol_in * nn * scale.max(1.0);
            let classification = if (value - maxv).abs() <= band {
                KinematicClass::GlobalMax
            } else if (value - minv).abs() <= band {
                KinematicClass::GlobalMin
            } else {
                KinematicClass::Saddle
            };
            Ok(KinematicReport {
                is_critical: true,
                critical_value: value,
                manifold_index: None,
                classification,
            })
        }
        Objective::Gate { v, group } => {
            let w = matmul(&dagger(v.mat()), u);
            match group {
                GateGroup::U => {
                    if qcore::max_asymmetry(&w) > tol_in * nn {
                        return Ok(non_critical(value));
                    }
                    let (vals, _) = eigh(&qcore::symmetrize(&w));
                    let d = vals.iter().filter(|&&l| l < 0.0).count();
                    let classification = if d == 0 {
                        KinematicClass::GlobalMax
                    } else if d == n {
                        KinematicClass::GlobalMin
                    } else {
                        KinematicClass::Saddle
                    };
                    Ok(KinematicReport {
                        is_critical: true,
                        critical_value: value,
                        manifold_index: Some(d),
                        classification,
                    })
                }
                GateGroup::SU => {
                    let det = qcore::determinant(&w);
                    if (det - C64::new(1.0, 0.0)).norm() > tol_in * nn {
                        return Ok(non_critical(value));
                    }
                    let (vals, _) = eigvals_unitary(&w);
                    // cluster the unimodular spectrum into at most two values
                    let mut reps: Vec<(C64, usize)> = Vec::new();
                    for z in vals.iter() {
                        match reps.iter_mut().find(|(r, _)| (*r - z).norm() < 50.0 * tol_in) {
                            Some((_, c)) => *c += 1,
                            None => reps.push((*z, 1)),
                        }
                    }
                    let critical = match reps.len() {
                        1 => true,
                        2 => (reps[0].0 * reps[1].0 + C64::new(1.0, 0.0)).norm() < 50.0 * tol_in * nn,
                        _ => false,
                    };
                    if !critical {
                        return Ok(non_critical(value));
                    }
                    let (classification, d) = if reps.len() == 1 {
                        let z = reps[0].0;
                        let cls = if (z - C64::new(1.0, 0.0)).norm() < 50.0 * tol_in {
                            KinematicClass::GlobalMax
                        } else if (z + C64::new(1.0, 0.0)).norm() < 50.0 * tol_in {
                            KinematicClass::GlobalMin
                        } else if z.re > 50.0 * tol_in {
                            KinematicClass::AttractiveSuboptimal
                        } else {
                            // non-positive real part: repulsive minimum or a
                            // genuine third-order saddle (Re z = 0)
                            KinematicClass::Saddle
                        };
                        (cls, 0)
                    } else {
                        let d = if reps[0].0.re <= reps[1].0.re {
                            reps[0].1
                        } else {
                            reps[1].1
                        };
                        (KinematicClass::Saddle, d)
                    };
                    Ok(KinematicReport {
                        is_critical: true,
                        critical_value: value,
                        manifold_index: Some(d),
                        classification,
                    })
                }
                GateGroup::PU => {
                    let gamma = trace(&w);
                    let y = w.mapv(|x| x * gamma.conj());
                    // anti-Hermitian part must be a multiple of iI
                    let skew = CMat::from_shape_fn((n, n), |(i, j)| {
                        (y[[i, j]] - y[[j, i]].conj()) * 0.5
                    });
                    let alpha = trace(&skew) / nn;
                    let mut dev = 0.0_f64;
                    for i in 0..n {
                        for j in 0..n {
                            let target = if i == j { alpha } else { C64::new(0.0, 0.0) };
                            dev = dev.max((skew[[i, j]] - target).norm());
                        }
                    }
                    let scale = (gamma.norm() * nn).max(1.0);
                    if dev > tol_in * nn * scale {
                        return Ok(non_critical(value));
                    }
                    let band = 1000.0 * tol_in;
                    let classification = if (value - 1.0).abs() < band {
                        KinematicClass::GlobalMax
                    } else if value < band {
                        KinematicClass::GlobalMin
                    } else {
                        KinematicClass::Saddle
                    };
                    Ok(KinematicReport {
                        is_critical: true,
                        critical_value: value,
                        manifold_index: None,
                        classification,
                    })
                }
            }
        }
    }
}

/// Suboptimal attractor fidelity ceilings on SU(N): cos(2πk/N) for
/// k = 1..⌈N/4⌉−1 (empty for N ≤ 4 ... ⌈N/4⌉ ≤ 1).
pub fn sun_trap_ceiling(n: usize) -> Vec<f64> {
    assert!(n >= 2, "need N >= 2");
    let kmax = n.div_ceil(4).saturating_sub(1);
    (1..=kmax)
        .map(|k| (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect()
}

/// Second directional derivative of the gate fidelity at `u` along the
/// anti-Hermitian direction `a` (traceless for SU/PU).
pub fn group_second_derivative(obj: &Objective, u: &CMat, a: &CMat) -> Result<f64> {
    let Objective::Gate { v, group } = obj else {
        return Err(Error::InvalidArgument(
            "second derivative is defined for gate objectives".into(),
        ));
    };
    let n = u.nrows();
    let scale = max_abs(a).max(1e-300);
    let mut herm = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((a[[i, j]] + a[[j, i]].conj()).norm());
        }
    }
    if herm > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "direction is not anti-Hermitian (deviation {herm:.3e})"
        )));
    }
    if *group != GateGroup::U {
        let tr = trace(a);
        if tr.norm() > 1e-10 * (n as f64) * scale {
            return Err(Error::InvalidArgument(
                "direction must be traceless for SU/PU".into(),
            ));
        }
    }
    let w = matmul(&dagger(v.mat()), u);
    let a2 = matmul(a, a);
    let nn = n as f64;
    Ok(match group {
        GateGroup::U | GateGroup::SU => trace_prod(&w, &a2).re / nn,
        GateGroup::PU => {
            let gamma = trace(&w);
            let t2 = trace_prod(&w, &a2);
            let t1 = trace_prod(&w, a);
            (2.0 / (nn * nn)) * ((gamma.conj() * t2).re + t1.norm_sqr())
        }
    })
}
