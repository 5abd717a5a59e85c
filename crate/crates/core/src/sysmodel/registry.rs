//! Registry of closed-form example problems: systems, objectives, critical
//! controls and their expected fidelities.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use super::ControlSystem;
use crate::error::{Error, Result};
use crate::grouplandscape::{GateGroup, Objective};
use crate::propagate::PiecewiseControl;
use crate::qcore::{
    self, dagger, identity, kron, matmul, pauli_x, pauli_y, pauli_z, CMat, CVec,
    HermitianOperator, StateVector, UnitaryMatrix,
};

/// Which sign the third diagonal phase of the three-level trap target takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryTrapCase {
    PlusI,
    MinusI,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegistryId {
    Eigenstate3 { t: f64 },
    Saddle4 { theta: f64, phi: f64 },
    Trap4 { theta: f64, b: f64, epsilon: f64 },
    UnitaryTrap3 { case: UnitaryTrapCase, epsilon: f64 },
    Vartime4 { epsilon: f64, gamma: f64 },
    Qft3,
}

impl RegistryId {
    /// Parses an id string with default parameters.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "eigenstate3" => Self::Eigenstate3 { t: PI },
            "saddle4" => Self::Saddle4 {
                theta: PI / 6.0,
                phi: PI / 3.0,
            },
            "trap4" => Self::Trap4 {
                theta: PI / 3.0,
                b: 3.0,
                epsilon: 0.2,
            },
            "unitary_trap3" | "unitary_trap3_minus" => Self::UnitaryTrap3 {
                case: UnitaryTrapCase::MinusI,
                epsilon: 0.2,
            },
            "unitary_trap3_plus" => Self::UnitaryTrap3 {
                case: UnitaryTrapCase::PlusI,
                epsilon: 0.2,
            },
            "vartime4" => Self::Vartime4 {
                epsilon: 0.2,
                gamma: 0.0,
            },
            "qft3" => Self::Qft3,
            other => return Err(Error::UnknownRegistryId(other.into())),
        })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Eigenstate3 { .. } => "eigenstate3".into(),
            Self::Saddle4 { .. } => "saddle4".into(),
            Self::Trap4 { .. } => "trap4".into(),
            Self::UnitaryTrap3 { case, .. } => match case {
                UnitaryTrapCase::MinusI => "unitary_trap3_minus".into(),
                UnitaryTrapCase::PlusI => "unitary_trap3_plus".into(),
            },
            Self::Vartime4 { .. } => "vartime4".into(),
            Self::Qft3 => "qft3".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectedClass {
    Saddle,
    Trap,
    AnyValueFamily,
    /// No closed-form critical control; the global maximum is reachable.
    GlobalMaxReachable,
}

/// A fully populated example problem.
#[derive(Debug, Clone)]
pub struct ExampleProblem {
    pub id: String,
    pub system: ControlSystem,
    pub objective: Objective,
    pub critical_control: Option<PiecewiseControl>,
    pub expected_fidelity: Option<f64>,
    pub expected_class: ExpectedClass,
    pub target_time: f64,
}

/// Default slice count for registry critical controls.
const REGISTRY_SLICES: usize = 200;

fn cvec(entries: &[C64]) -> CVec {
    CVec::from_vec(entries.to_vec())
}

fn phase(arg: f64) -> C64 {
    C64::from_polar(1.0, arg)
}

fn eigenstate3(t: f64) -> Result<ExampleProblem> {
    if !(t > 0.0) {
        return Err(Error::InadmissibleParameter("t > 0".into()));
    }
    let h0 = HermitianOperator::diagonal(&[1.0, 2.0, 4.0]);
    let s23 = (2.0_f64 / 3.0).sqrt();
    let s13 = (1.0_f64 / 3.0).sqrt();
    let h1 = HermitianOperator::from_real(&[
        &[1.0, s23, 0.0],
        &[s23, 2.0, s13],
        &[0.0, s13, 4.0],
    ])?;
    let system = ControlSystem::new(h0, vec![h1])?;
    let objective = Objective::pure_state(StateVector::basis(3, 0), StateVector::basis(3, 2))?;
    let critical = PiecewiseControl::constant(1, REGISTRY_SLICES, t, -1.0);
    Ok(ExampleProblem {
        id: format!("eigenstate3(t={t})"),
        system,
        objective,
        critical_control: Some(critical),
        expected_fidelity: Some((8.0 / 9.0) * (t / 2.0).sin().powi(4)),
        expected_class: ExpectedClass::AnyValueFamily,
        target_time: t,
    })
}

fn saddle4(theta: f64, phi: f64) -> Result<ExampleProblem> {
    // negative semi-definiteness of the second variation needs both products
    // positive (same open quadrant)
    if theta.cos() * phi.cos() <= 0.0 || theta.sin() * phi.sin() <= 0.0 {
        return Err(Error::InadmissibleParameter(
            "cos(theta)cos(phi) > 0 and sin(theta)sin(phi) > 0".into(),
        ));
    }
    let t = PI;
    let h0 = HermitianOperator::diagonal(&[2.0, 4.0, 5.0, 9.0]);
    let h1 = HermitianOperator::from_real(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])?;
    let system = ControlSystem::new(h0, vec![h1])?;
    let psi0 = StateVector::new(cvec(&[
        C64::new(phi.cos(), 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(phi.sin(), 0.0),
    ]))?;
    // target carries the free-evolution phases so that the overlap at the
    // critical control is cos(theta - phi)
    let psig = StateVector::new(cvec(&[
        phase(-2.0 * t) * theta.cos(),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        phase(-9.0 * t) * theta.sin(),
    ]))?;
    let objective = Objective::pure_state(psi0, psig)?;
    Ok(ExampleProblem {
        id: format!("saddle4(theta={theta:.6}, phi={phi:.6})"),
        system,
        objective,
        critical_control: Some(PiecewiseControl::zeros(1, REGISTRY_SLICES, t)),
        expected_fidelity: Some((theta - phi).cos().powi(2)),
        expected_class: ExpectedClass::Saddle,
        target_time: t,
    })
}

fn trap4(theta: f64, b: f64, epsilon: f64) -> Result<ExampleProblem> {
    let lhs = b * b * theta.cos().powi(2);
    let mid = (2.0 / PI) * (2.0 * theta).sin();
    if !(mid > 0.0) {
        return Err(Error::InadmissibleParameter("(2/pi)·sin(2θ) > 0".into()));
    }
    if !(lhs > mid) {
        return Err(Error::InadmissibleParameter(
            "b²cos²θ > (2/pi)·sin(2θ)".into(),
        ));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InadmissibleParameter("epsilon > 0".into()));
    }
    let t = PI / epsilon;
    let h0 = HermitianOperator::diagonal(&[1.0 + epsilon, 1.0, 2.0, 2.0]);
    let h1 = HermitianOperator::from_real(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, b],
        &[0.0, 0.0, b, 0.0],
    ])?;
    let system = ControlSystem::new(h0, vec![h1])?;
    let inv_sqrt2 = 0.5_f64.sqrt();
    let psi0 = StateVector::new(cvec(&[
        phase(theta) * inv_sqrt2,
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        phase(-theta) * inv_sqrt2,
    ]))?;
    let psig = StateVector::new(cvec(&[
        phase(-t * (1.0 + epsilon)) * inv_sqrt2,
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        phase(-2.0 * t) * inv_sqrt2,
    ]))?;
    let objective = Objective::pure_state(psi0, psig)?;
    Ok(ExampleProblem {
        id: format!("trap4(theta={theta:.6}, b={b}, eps={epsilon})"),
        system,
        objective,
        critical_control: Some(PiecewiseControl::zeros(1, REGISTRY_SLICES, t)),
        expected_fidelity: Some(theta.cos().powi(2)),
        expected_class: ExpectedClass::Trap,
        target_time: t,
    })
}

/// Parameters of the three-level gate trap for one case.
pub struct UnitaryTrapParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub phi: f64,
    pub gamma: f64,
    pub sign: f64,
}

pub(crate) fn unitary_trap_params(case: UnitaryTrapCase) -> UnitaryTrapParams {
    match case {
        UnitaryTrapCase::MinusI => UnitaryTrapParams {
            a: 5.0 * (2.0_f64 / 3.0).sqrt(),
            b: 4.0,
            c: 1.0,
            phi: 2.0 * PI / 3.0,
            gamma: -3.0 * PI / 4.0,
            sign: -1.0,
        },
        UnitaryTrapCase::PlusI => UnitaryTrapParams {
            a: (2.0_f64 / 3.0).sqrt(),
            b: -1.0,
            c: 0.0,
            phi: PI / 3.0,
            gamma: -PI / 4.0,
            sign: 1.0,
        },
    }
}

/// The four definiteness constants of the three-level trap operator.
/// The constant-mode coefficient uses the corrected series constant 2/π.
pub(crate) struct UnitaryTrapConstants {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub kconst: f64,
}

pub(crate) fn unitary_trap_constants(p: &UnitaryTrapParams) -> UnitaryTrapConstants {
    let x = p.gamma.cos() - p.phi.sin();
    let y = p.gamma.sin() + p.sign * p.gamma.sin();
    let z = p.phi.cos() - p.gamma.sin();
    let kconst = p.a * p.a * p.phi.cos() - (p.b * p.b + p.sign * p.c * p.c) * p.gamma.sin();
    let w = (2.0 / PI) * x + kconst;
    UnitaryTrapConstants { w, x, y, z, kconst }
}

fn unitary_trap3(case: UnitaryTrapCase, epsilon: f64) -> Result<ExampleProblem> {
    if !(epsilon > 0.0) {
        return Err(Error::InadmissibleParameter("epsilon > 0".into()));
    }
    let p = unitary_trap_params(case);
    // critical-point constraint and definiteness inequalities
    let crit = p.a * p.phi.sin() + (p.b + p.c) * p.gamma.cos();
    if crit.abs() > 1e-12 {
        return Err(Error::InadmissibleParameter(format!(
            "a·sinφ + (b+c)·cosγ = 0 (got {crit:.3e})"
        )));
    }
    let k = unitary_trap_constants(&p);
    if !(k.w > 0.0) {
        return Err(Error::InadmissibleParameter("w > 0".into()));
    }
    if !(k.x < 0.0) {
        return Err(Error::InadmissibleParameter("x = cosγ − sinφ < 0".into()));
    }
    if !(k.y <= 0.0) {
        return Err(Error::InadmissibleParameter("y = sinγ ± sinγ ≤ 0".into()));
    }
    if !(k.z >= 0.0) {
        return Err(Error::InadmissibleParameter("z = cosφ − sinγ ≥ 0".into()));
    }
    let t = PI / epsilon;
    let h0 = HermitianOperator::diagonal(&[1.0 + epsilon, 1.0, 2.0]);
    let h1 = HermitianOperator::from_real(&[
        &[p.a, 1.0, 0.0],
        &[1.0, p.b, 1.0],
        &[0.0, 1.0, p.c],
    ])?;
    let system = ControlSystem::new(h0, vec![h1])?;
    // V† = D e^{iTH0}
    let mut d = CMat::zeros((3, 3));
    d[[0, 0]] = phase(p.phi);
    d[[1, 1]] = C64::new(0.0, 1.0) * phase(p.gamma);
    d[[2, 2]] = C64::new(0.0, 1.0) * phase(p.sign * p.gamma);
    let free = crate::qcore::expm_step(system.h0(), -t)?; // e^{iTH0}
    let vdag = matmul(&d, free.mat());
    let v = UnitaryMatrix::new(dagger(&vdag))?;
    let objective = Objective::gate(v, GateGroup::U)?;
    // fidelity at f≡0: (1/3)·Re[e^{iφ} + i e^{iγ} + i e^{±iγ}]
    let fid = (p.phi.cos() - p.gamma.sin() - (p.sign * p.gamma).sin()) / 3.0;
    Ok(ExampleProblem {
        id: format!("unitary_trap3({case:?}, eps={epsilon})"),
        system,
        objective,
        critical_control: Some(PiecewiseControl::zeros(1, REGISTRY_SLICES, t)),
        expected_fidelity: Some(fid),
        expected_class: ExpectedClass::Trap,
        target_time: t,
    })
}

/// Fixed constants of the four-level variable-time trap example.
pub(crate) struct VartimeParams {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub g: f64,
    pub r: f64,
    pub s: f64,
    pub phi: f64,
    pub theta: f64,
}

pub(crate) fn vartime_params() -> VartimeParams {
    let sqrt3 = 3.0_f64.sqrt();
    let r = (2.0 / 9.0) * (3.0 - sqrt3);
    VartimeParams {
        b: 2.5 * (1.0 - sqrt3),
        c: sqrt3 - 3.0,
        d: 3.0,
        g: ((3.0 / 71.0) * (19.0 + 12.0 * sqrt3)).sqrt(),
        r,
        s: (1.0 - r * r).sqrt(),
        phi: PI / 3.0,
        theta: -PI / 3.0,
    }
}

fn vartime4(epsilon: f64, gamma: f64) -> Result<ExampleProblem> {
    if !(epsilon > 0.0) {
        return Err(Error::InadmissibleParameter("epsilon > 0".into()));
    }
    let p = vartime_params();
    let t = PI / epsilon;
    let h0 = HermitianOperator::diagonal(&[1.0 + epsilon, 1.0, 2.0, 3.0]);
    let h1 = HermitianOperator::from_real(&[
        &[0.0, 1.0, 0.0, 0.0],
        &[1.0, p.b, 1.0, 0.0],
        &[0.0, 1.0, p.c, p.g],
        &[0.0, 0.0, p.g, p.d],
    ])?;
    let system = ControlSystem::new(h0, vec![h1])?;
    let mut block = CMat::zeros((4, 4));
    block[[0, 0]] = C64::new(p.r, 0.0);
    block[[0, 3]] = phase(p.theta - gamma) * p.s;
    block[[1, 1]] = C64::new(0.0, -1.0);
    block[[2, 2]] = phase(p.phi);
    block[[3, 0]] = phase(gamma) * (-p.s);
    block[[3, 3]] = phase(p.theta) * p.r;
    let free = crate::qcore::expm_step(system.h0(), -t)?; // e^{iTH0}
    let vdag = matmul(&block, free.mat());
    let v = UnitaryMatrix::new(dagger(&vdag))?;
    let objective = Objective::gate(v, GateGroup::U)?;
    // raw trace fidelity at f≡0, ℓ=1: (3r/2 + 1/2)/4 = (9 − 2√3)/24
    let fid = (9.0 - 2.0 * 3.0_f64.sqrt()) / 24.0;
    Ok(ExampleProblem {
        id: format!("vartime4(eps={epsilon}, gamma={gamma})"),
        system,
        objective,
        critical_control: Some(PiecewiseControl::zeros(1, REGISTRY_SLICES, t).with_ell(1.0)),
        expected_fidelity: Some(fid),
        expected_class: ExpectedClass::Trap,
        target_time: t,
    })
}

/// Three-qubit Ising chain with full local control and the Fourier-transform
/// target gate in SU(8).
fn qft3() -> Result<ExampleProblem> {
    let n = 8usize;
    let id2 = identity(2);
    let op1 = |m: &CMat| kron(m, &kron(&id2, &id2));
    let op2 = |m: &CMat| kron(&id2, &kron(m, &id2));
    let op3 = |m: &CMat| kron(&id2, &kron(&id2, m));
    let z1z2 = matmul(&op1(&pauli_z()), &op2(&pauli_z()));
    let z2z3 = matmul(&op2(&pauli_z()), &op3(&pauli_z()));
    // the Hamiltonian carries an overall factor 1/2
    let h0 = HermitianOperator::new((z1z2 + z2z3).mapv(|x| x * 0.5))?;
    let half = |m: CMat| HermitianOperator::new(m.mapv(|x| x * 0.5)).unwrap();
    let controls = vec![
        half(op1(&pauli_x())),
        half(op1(&pauli_y())),
        half(op2(&pauli_x())),
        half(op2(&pauli_y())),
        half(op3(&pauli_x())),
        half(op3(&pauli_y())),
    ];
    let system = ControlSystem::new(h0, controls)?;
    // V_{jk} = prefactor · ω^{jk} / √8, ω = e^{−2πi/8}; the prefactor
    // e^{2πi(m+1/4)/8} with m = 5 puts V in SU(8)
    let pref = phase(2.0 * PI * (5.0 + 0.25) / 8.0);
    let norm = 1.0 / (n as f64).sqrt();
    let vmat = Array2::from_shape_fn((n, n), |(j, k)| {
        pref * phase(-2.0 * PI * (j * k) as f64 / 8.0) * norm
    });
    let det = qcore::determinant(&vmat);
    debug_assert!((det - C64::new(1.0, 0.0)).norm() < 1e-10);
    let v = UnitaryMatrix::new(vmat)?;
    let objective = Objective::gate(v, GateGroup::SU)?;
    Ok(ExampleProblem {
        id: "qft3".into(),
        system,
        objective,
        critical_control: None,
        expected_fidelity: None,
        expected_class: ExpectedClass::GlobalMaxReachable,
        target_time: 8.0,
    })
}

/// Builds the example problem for a registry id, validating parameters.
pub fn registry(id: RegistryId) -> Result<ExampleProblem> {
    match id {
        RegistryId::Eigenstate3 { t } => eigenstate3(t),
        RegistryId::Saddle4 { theta, phi } => saddle4(theta, phi),
        RegistryId::Trap4 { theta, b, epsilon } => trap4(theta, b, epsilon),
        RegistryId::UnitaryTrap3 { case, epsilon } => unitary_trap3(case, epsilon),
        RegistryId::Vartime4 { epsilon, gamma } => vartime4(epsilon, gamma),
        RegistryId::Qft3 => qft3(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagate::{objective_value, propagate};
    use approx::assert_abs_diff_eq;

    #[test]
    fn every_entry_reproduces_expected_fidelity() {
        let ids = [
            RegistryId::Eigenstate3 { t: PI },
            RegistryId::Saddle4 {
                theta: PI / 6.0,
                phi: PI / 3.0,
            },
            RegistryId::Trap4 {
                theta: PI / 3.0,
                b: 3.0,
                epsilon: 0.2,
            },
            RegistryId::UnitaryTrap3 {
                case: UnitaryTrapCase::MinusI,
                epsilon: 0.2,
            },
            RegistryId::UnitaryTrap3 {
                case: UnitaryTrapCase::PlusI,
                epsilon: 0.2,
            },
            RegistryId::Vartime4 {
                epsilon: 0.2,
                gamma: 0.4,
            },
        ];
        for id in ids {
            let p = registry(id).unwrap();
            let traj = propagate(&p.system, p.critical_control.as_ref().unwrap()).unwrap();
            let value = objective_value(&p.objective, &traj);
            assert_abs_diff_eq!(
                value,
                p.expected_fidelity.unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn expected_values_match_closed_forms() {
        let p = registry(RegistryId::Saddle4 {
            theta: PI / 6.0,
            phi: PI / 3.0,
        })
        .unwrap();
        assert_abs_diff_eq!(p.expected_fidelity.unwrap(), 0.75, epsilon = 1e-15);
        let p = registry(RegistryId::Trap4 {
            theta: PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        assert_abs_diff_eq!(p.expected_fidelity.unwrap(), 0.25, epsilon = 1e-15);
        let p = registry(RegistryId::UnitaryTrap3 {
            case: UnitaryTrapCase::MinusI,
            epsilon: 0.2,
        })
        .unwrap();
        assert_abs_diff_eq!(p.expected_fidelity.unwrap(), -1.0 / 6.0, epsilon = 1e-15);
        let p = registry(RegistryId::UnitaryTrap3 {
            case: UnitaryTrapCase::PlusI,
            epsilon: 0.2,
        })
        .unwrap();
        assert_abs_diff_eq!(
            p.expected_fidelity.unwrap(),
            1.0 / 6.0 + 2.0_f64.sqrt() / 3.0,
            epsilon = 1e-15
        );
        let p = registry(RegistryId::Vartime4 {
            epsilon: 0.2,
            gamma: 0.0,
        })
        .unwrap();
        // normalized Frobenius index of the same value is (33-2√3)/48
        let raw = p.expected_fidelity.unwrap();
        assert_abs_diff_eq!(
            (1.0 + raw) / 2.0,
            (33.0 - 2.0 * 3.0_f64.sqrt()) / 48.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn inadmissible_parameters_name_the_inequality() {
        let err = registry(RegistryId::Trap4 {
            theta: 1.4,
            b: 0.3,
            epsilon: 0.2,
        })
        .unwrap_err();
        match err {
            Error::InadmissibleParameter(msg) => assert!(msg.contains("b²cos²θ")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(
            RegistryId::parse("nonsense"),
            Err(Error::UnknownRegistryId(_))
        ));
    }

    #[test]
    fn qft_target_is_special_unitary() {
        let p = registry(RegistryId::Qft3).unwrap();
        let Objective::Gate { v, .. } = &p.objective else {
            panic!("gate objective expected")
        };
        let det = qcore::determinant(v.mat());
        assert!((det - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(p.system.channels(), 6);
        assert!(p.system.traceless_controls());
    }
}
