//! Verification and classification of control-space critical points,
//! third-order directional probing, and the differential-algebraic generator
//! of non-constant critical controls.

mod dae;

pub use dae::{dae_seed, dae_solve, DaeSolution};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouplandscape::{kinematic_classify, KinematicReport, Objective};
use crate::propagate::{
    objective_gradient, objective_hessian, propagate, PiecewiseControl,
};
use crate::sysmodel::ControlSystem;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalClass {
    /// Strictly negative-definite discretized Hessian at a vanishing
    /// gradient: attractive local maximum on every finite grid tested. No
    /// claim is made about the full function space.
    TrapCandidate,
    Saddle,
    /// Semi-definite (or positive-signature) spectrum: second order cannot
    /// settle the type.
    SecondOrderInconclusive,
    NotCritical,
}

/// Signature summary of the discretized second variation, in kernel units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HessianSpectrum {
    pub min: f64,
    pub max: f64,
    pub negative: usize,
    pub positive: usize,
    pub null: usize,
    /// Half-width of the zero band used to count null directions.
    pub band: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPointReport {
    pub gradient_norm: f64,
    pub hessian_spectrum: HessianSpectrum,
    pub classification: CriticalClass,
    pub fidelity: f64,
    pub kinematic_report: KinematicReport,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOpts {
    pub gradient_tol: f64,
    pub kinematic_tol: f64,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        Self {
            gradient_tol: tol::CRITICAL_GRADIENT,
            kinematic_tol: tol::KINEMATIC,
        }
    }
}

/// Gradient/Hessian verification of a control as a critical point, with a
/// kinematic co-report for the endpoint.
pub fn verify_critical(
    sys: &ControlSystem,
    obj: &Objective,
    f: &PiecewiseControl,
    opts: VerifyOpts,
) -> Result<CriticalPointReport> {
    let traj = propagate(sys, f)?;
    let fidelity = obj.value(traj.endpoint());
    let kinematic_report = kinematic_classify(obj, traj.endpoint(), opts.kinematic_tol)?;
    let gradient_norm = objective_gradient(sys, f, obj)?.norm();
    let hess = objective_hessian(sys, f, obj)?;
    let eigs = hess.eigenvalues_kernel_units();
    let scale = eigs.iter().fold(0.0_f64, |a, &x| a.max(x.abs()));
    let band = tol::HESSIAN_NULL_BAND * scale.max(1e-300);
    let negative = eigs.iter().filter(|&&l| l < -band).count();
    let positive = eigs.iter().filter(|&&l| l > band).count();
    let null = eigs.len() - negative - positive;
    let hessian_spectrum = HessianSpectrum {
        min: eigs[0],
        max: eigs[eigs.len() - 1],
        negative,
        positive,
        null,
        band,
    };
    let classification = if gradient_norm > opts.gradient_tol {
        CriticalClass::NotCritical
    } else if negative > 0 && positive == 0 && null == 0 {
        CriticalClass::TrapCandidate
    } else if negative > 0 && positive > 0 {
        CriticalClass::Saddle
    } else {
        CriticalClass::SecondOrderInconclusive
    };
    Ok(CriticalPointReport {
        gradient_norm,
        hessian_spectrum,
        classification,
        fidelity,
        kinematic_report,
    })
}

fn add_scaled(f: &PiecewiseControl, dir: &PiecewiseControl, eps: f64) -> PiecewiseControl {
    let mut out = f.clone();
    for (v, d) in out.values_mut().iter_mut().zip(dir.values().iter()) {
        *v += eps * d;
    }
    if let (Some(l), Some(dl)) = (f.ell(), dir.ell()) {
        out.set_ell(Some(l + eps * dl));
    }
    out
}

/// Third directional derivative d³/dε³ F(f + ε·direction) at ε = 0, by a
/// five-point stencil Richardson-extrapolated over h and h/2.
pub fn third_order_probe(
    sys: &ControlSystem,
    obj: &Objective,
    f: &PiecewiseControl,
    direction: &PiecewiseControl,
    h: f64,
) -> Result<f64> {
    if !(1e-3..=1e-1).contains(&h) {
        return Err(Error::InvalidArgument(format!(
            "stencil step h = {h} outside [1e-3, 1e-1]"
        )));
    }
    if direction.values().dim() != f.values().dim() {
        return Err(Error::DimensionMismatch {
            left: direction.values().len(),
            right: f.values().len(),
        });
    }
    let eval = |eps: f64| -> Result<f64> {
        let g = add_scaled(f, direction, eps);
        Ok(obj.value(propagate(sys, &g)?.endpoint()))
    };
    let stencil = |hh: f64| -> Result<f64> {
        Ok((eval(2.0 * hh)? - 2.0 * eval(hh)? + 2.0 * eval(-hh)? - eval(-2.0 * hh)?)
            / (2.0 * hh * hh * hh))
    };
    let d_h = stencil(h)?;
    let d_h2 = stencil(h / 2.0)?;
    Ok((4.0 * d_h2 - d_h) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random;
    use crate::sysmodel::{registry, RegistryId};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn trap_example_is_trap_candidate() {
        let p = registry(RegistryId::Trap4 {
            theta: PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        let rep = verify_critical(
            &p.system,
            &p.objective,
            p.critical_control.as_ref().unwrap(),
            VerifyOpts::default(),
        )
        .unwrap();
        assert_eq!(rep.classification, CriticalClass::TrapCandidate);
        assert_abs_diff_eq!(rep.fidelity, 0.25, epsilon = 1e-10);
        assert!(rep.gradient_norm < 1e-10);
    }

    #[test]
    fn saddle_example_is_second_order_inconclusive() {
        let p = registry(RegistryId::Saddle4 {
            theta: PI / 6.0,
            phi: PI / 3.0,
        })
        .unwrap();
        let rep = verify_critical(
            &p.system,
            &p.objective,
            p.critical_control.as_ref().unwrap(),
            VerifyOpts::default(),
        )
        .unwrap();
        assert_eq!(rep.classification, CriticalClass::SecondOrderInconclusive);
        assert_abs_diff_eq!(rep.fidelity, 0.75, epsilon = 1e-10);
        assert_eq!(rep.hessian_spectrum.positive, 0);
        assert!(rep.hessian_spectrum.negative >= 4);
    }

    #[test]
    fn random_control_is_not_critical() {
        let p = registry(RegistryId::Qft3).unwrap();
        let mut f = PiecewiseControl::zeros(6, 12, 8.0);
        let mut rng = random::rng(3);
        use rand::Rng;
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let rep = verify_critical(&p.system, &p.objective, &f, VerifyOpts::default()).unwrap();
        assert_eq!(rep.classification, CriticalClass::NotCritical);
        assert!(rep.gradient_norm > 1e-3);
    }

    #[test]
    fn classification_invariant_under_channel_relabeling() {
        use crate::qcore::HermitianOperator;
        let mut rng = random::rng(17);
        let h0 = HermitianOperator::new(random::hermitian(3, &mut rng)).unwrap();
        let h1 = HermitianOperator::new(random::hermitian(3, &mut rng)).unwrap();
        let h2 = HermitianOperator::new(random::hermitian(3, &mut rng)).unwrap();
        let sys_a =
            ControlSystem::new(h0.clone(), vec![h1.clone(), h2.clone()]).unwrap();
        let sys_b = ControlSystem::new(h0, vec![h2, h1]).unwrap();
        let psi0 = random::state(3, &mut rng);
        let psig = random::state(3, &mut rng);
        let obj = Objective::pure_state(psi0, psig).unwrap();
        let mut f = PiecewiseControl::zeros(2, 10, 1.0);
        use rand::Rng;
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let mut swapped = f.clone();
        for s in 0..10 {
            let a = f.values()[[0, s]];
            let b = f.values()[[1, s]];
            swapped.values_mut()[[0, s]] = b;
            swapped.values_mut()[[1, s]] = a;
        }
        let ra = verify_critical(&sys_a, &obj, &f, VerifyOpts::default()).unwrap();
        let rb = verify_critical(&sys_b, &obj, &swapped, VerifyOpts::default()).unwrap();
        assert_eq!(ra.classification, rb.classification);
        assert_abs_diff_eq!(ra.fidelity, rb.fidelity, epsilon = 1e-12);
        assert_abs_diff_eq!(
            ra.hessian_spectrum.min,
            rb.hessian_spectrum.min,
            epsilon = 1e-9
        );
    }

    #[test]
    fn saddle_probe_matches_closed_form() {
        // the [0, T] indicator direction at T = π; the closed-form third
        // derivative is −(32/35)·sin(2(θ−φ))
        let (theta, phi) = (PI / 6.0, PI / 3.0);
        let p = registry(RegistryId::Saddle4 { theta, phi }).unwrap();
        let f = p.critical_control.as_ref().unwrap();
        let dir = PiecewiseControl::constant(1, f.slices(), f.horizon(), 1.0);
        let d3 = third_order_probe(&p.system, &p.objective, f, &dir, 0.02).unwrap();
        let expect = -(32.0 / 35.0) * (2.0 * (theta - phi)).sin();
        assert!(
            (d3 - expect).abs() / expect.abs() < 0.02,
            "probe {d3:.6} vs closed form {expect:.6}"
        );
    }

    #[test]
    fn probe_vanishes_on_unit_fidelity_family() {
        let p = registry(RegistryId::Saddle4 {
            theta: PI / 5.0,
            phi: PI / 5.0,
        })
        .unwrap();
        let f = p.critical_control.as_ref().unwrap();
        let dir = PiecewiseControl::constant(1, f.slices(), f.horizon(), 1.0);
        let d3 = third_order_probe(&p.system, &p.objective, f, &dir, 0.02).unwrap();
        assert!(d3.abs() < 1e-6, "d3 = {d3:.3e}");
    }

    #[test]
    fn trap_probe_stays_bounded_on_random_directions() {
        let p = registry(RegistryId::Trap4 {
            theta: PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        let base = p.critical_control.as_ref().unwrap();
        let coarse = PiecewiseControl::zeros(1, 40, base.horizon());
        let mut rng = random::rng(8);
        use rand::Rng;
        for k in 0..20 {
            let mut dir = PiecewiseControl::zeros(1, 40, base.horizon());
            let mut norm = 0.0;
            for v in dir.values_mut().iter_mut() {
                *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
                norm += *v * *v;
            }
            let norm = norm.sqrt();
            for v in dir.values_mut().iter_mut() {
                *v /= norm;
            }
            let d3 = third_order_probe(&p.system, &p.objective, &coarse, &dir, 0.05).unwrap();
            assert!(d3.is_finite() && d3.abs() < 5.0, "dir {k}: d3 = {d3:.3e}");
        }
    }

    #[test]
    fn probe_rejects_out_of_range_step() {
        let p = registry(RegistryId::Saddle4 {
            theta: PI / 6.0,
            phi: PI / 3.0,
        })
        .unwrap();
        let f = p.critical_control.as_ref().unwrap();
        let dir = PiecewiseControl::constant(1, f.slices(), f.horizon(), 1.0);
        assert!(third_order_probe(&p.system, &p.objective, f, &dir, 0.5).is_err());
        assert!(third_order_probe(&p.system, &p.objective, f, &dir, 1e-5).is_err());
    }
}
#[test]
fn probe_dae_controls() {
    use crate::critical::dae::*;
    use crate::qcore::{random, HermitianOperator};
    use crate::sysmodel::ControlSystem;
    use crate::grouplandscape::Objective;
    use crate::propagate::objective_gradient;
    let mut rng = random::rng(31);
    let h0 = HermitianOperator::new(random::hermitian(4, &mut rng).mapv(|x| x * 0.5)).unwrap();
    let h1 = HermitianOperator::new(random::hermitian(4, &mut rng).mapv(|x| x * 0.5)).unwrap();
    let sys = ControlSystem::new(h0, vec![h1]).unwrap();
    let psi0 = random::state(4, &mut random::rng(32));
    let seeds = dae_seed(&sys, &psi0, 50, 33).unwrap();
    for (k, s) in seeds.iter().enumerate().take(12) {
        if let Ok(sol) = dae_solve(&sys, &psi0, s, 2.0, 5e-4) {
            if sol.halted_early(2.0) { println!("seed {k}: halted at {:.3}", sol.validity_horizon); continue; }
            let fmin = sol.controls.iter().cloned().fold(f64::INFINITY, f64::min);
            let fmax = sol.controls.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut dmax: f64 = 0.0;
            for w in sol.controls.windows(2) { dmax = dmax.max((w[1]-w[0]).abs()); }
            let f = sol.to_piecewise(400);
            let obj = Objective::pure_state(psi0.clone(), sol.psi_g.clone()).unwrap();
            let g = objective_gradient(&sys, &f, &obj).unwrap();
            println!("seed {k}: f range [{fmin:.2},{fmax:.2}] max df {dmax:.3} res {:.2e} grad {:.3e}", sol.max_residual, g.norm());
        } else { println!("seed {k}: error"); }
    }
}
