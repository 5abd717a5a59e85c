//! Trap forensics: fidelity sampling in a neighborhood, perturbed-restart
//! probing, and mesh refinement around a suspected trap.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouplandscape::Objective;
use crate::optimize::{bfgs_run, OptimizeOpts, RunRecord};
use crate::propagate::{propagate, PiecewiseControl};
use crate::qcore::random;
use crate::sysmodel::ControlSystem;

/// Neighborhood-sampling evidence around a center control.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrapDossier {
    pub center_fidelity: f64,
    pub samples: usize,
    /// Fraction of samples with fidelity strictly below the center.
    pub fraction_below: f64,
    pub max_sampled_fidelity: f64,
    /// (‖δ‖₂·√Δt, F − F*) pairs; distances approximate the L² norm so plots
    /// stay comparable across slice counts.
    pub scatter: Vec<(f64, f64)>,
}

/// Samples the fidelity at `n` Gaussian field perturbations of the center.
pub fn perturb_sample(
    sys: &ControlSystem,
    obj: &Objective,
    center: &PiecewiseControl,
    n: usize,
    scale: f64,
    seed: u64,
) -> Result<TrapDossier> {
    if n < 100 {
        return Err(Error::InvalidArgument("need at least 100 samples".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    let center_fidelity = obj.value(propagate(sys, center)?.endpoint());
    let sqrt_dt = center.dt().sqrt();
    let points: Vec<Result<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let mut rng = random::rng(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut f = center.clone();
            let mut norm_sq = 0.0;
            for v in f.values_mut().iter_mut() {
                let d = scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
                *v += d;
                norm_sq += d * d;
            }
            let value = obj.value(propagate(sys, &f)?.endpoint());
            Ok((norm_sq.sqrt() * sqrt_dt, value - center_fidelity))
        })
        .collect();
    let mut scatter = Vec::with_capacity(n);
    for p in points {
        scatter.push(p?);
    }
    let below = scatter.iter().filter(|(_, gap)| *gap < 0.0).count();
    let max_sampled_fidelity = scatter
        .iter()
        .fold(f64::NEG_INFINITY, |a, (_, gap)| a.max(gap + center_fidelity));
    Ok(TrapDossier {
        center_fidelity,
        samples: n,
        fraction_below: below as f64 / n as f64,
        max_sampled_fidelity,
        scatter,
    })
}

/// Perturbed-restart evidence: optimizer runs started near the center.
#[derive(Debug, Clone)]
pub struct EscapeStats {
    pub center_fidelity: f64,
    pub center_error: f64,
    pub runs: usize,
    /// Runs whose terminal error dropped below a tenth of the center error.
    /// Degenerates when the center is already at the global optimum
    /// (center_error ≈ 0 makes the criterion unsatisfiable); callers should
    /// treat center_error below their success threshold as converged.
    pub escapes: usize,
    pub records: Vec<RunRecord>,
}

/// Restarts the quasi-Newton optimizer from Gaussian perturbations of the
/// center and counts escapes.
pub fn restart_probe(
    sys: &ControlSystem,
    obj: &Objective,
    center: &PiecewiseControl,
    delta_scale: f64,
    runs: usize,
    opts: &OptimizeOpts,
    seed: u64,
) -> Result<EscapeStats> {
    if runs < 5 {
        return Err(Error::InvalidArgument("need at least 5 restarts".into()));
    }
    let center_fidelity = obj.value(propagate(sys, center)?.endpoint());
    let center_error = 1.0 - center_fidelity;
    let records: Vec<Result<RunRecord>> = (0..runs)
        .into_par_iter()
        .map(|idx| {
            let mut rng = random::rng(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut init = center.clone();
            for v in init.values_mut().iter_mut() {
                *v += delta_scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let mut rec = bfgs_run(sys, obj, &init, opts)?;
            rec.seed = seed.wrapping_add(idx as u64);
            Ok(rec)
        })
        .collect();
    let records: Result<Vec<RunRecord>> = records.into_iter().collect();
    let records = records?;
    let escapes = records
        .iter()
        .filter(|r| r.terminal_error < 0.1 * center_error)
        .count();
    Ok(EscapeStats {
        center_fidelity,
        center_error,
        runs,
        escapes,
        records,
    })
}

#[derive(Debug, Clone)]
pub struct RefinementStats {
    pub factor: usize,
    /// |F(resampled) − F(center)|: nested step functions must agree.
    pub resample_drift: f64,
    pub error_before: f64,
    pub error_after: f64,
    /// (err_before − err_after)/err_before.
    pub relative_reduction: f64,
    pub record: RunRecord,
}

/// Re-samples the center onto a `factor`× finer grid (the identical step
/// function) and restarts the optimizer there.
pub fn refine_mesh(
    sys: &ControlSystem,
    obj: &Objective,
    center: &PiecewiseControl,
    factor: usize,
    opts: &OptimizeOpts,
) -> Result<RefinementStats> {
    if factor < 2 {
        return Err(Error::InvalidArgument("factor must be at least 2".into()));
    }
    let f_center = obj.value(propagate(sys, center)?.endpoint());
    let fine = center.resample(factor);
    let f_fine = obj.value(propagate(sys, &fine)?.endpoint());
    let resample_drift = (f_fine - f_center).abs();
    let record = bfgs_run(sys, obj, &fine, opts)?;
    let error_before = 1.0 - f_fine;
    let error_after = record.terminal_error;
    let relative_reduction = (error_before - error_after) / error_before.abs().max(1e-300);
    Ok(RefinementStats {
        factor,
        resample_drift,
        error_before,
        error_after,
        relative_reduction,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::{registry, RegistryId};
    use std::f64::consts::PI;

    fn trap_problem() -> (ControlSystem, Objective, PiecewiseControl) {
        let p = registry(RegistryId::Trap4 {
            theta: PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        let c = p.critical_control.clone().unwrap();
        (p.system, p.objective, c)
    }

    #[test]
    fn all_samples_below_center_at_a_trap() {
        let (sys, obj, center) = trap_problem();
        let d = perturb_sample(&sys, &obj, &center, 500, 0.01, 7).unwrap();
        assert_eq!(d.fraction_below, 1.0, "max gap {:.3e}", d.max_sampled_fidelity - d.center_fidelity);
        assert!((d.center_fidelity - 0.25).abs() < 1e-10);
    }

    #[test]
    fn vanishing_scale_recovers_center() {
        let (sys, obj, center) = trap_problem();
        let d = perturb_sample(&sys, &obj, &center, 100, 1e-9, 3).unwrap();
        for (_, gap) in &d.scatter {
            assert!(gap.abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_dominates_at_random_points() {
        // at a non-critical point the first-order term makes the sampled
        // fidelity rise and fall roughly evenly
        let (sys, obj, mut center) = trap_problem();
        use rand::Rng;
        let mut rng = random::rng(10);
        for v in center.values_mut().iter_mut() {
            *v = 0.5 * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let d = perturb_sample(&sys, &obj, &center, 2000, 0.005, 11).unwrap();
        assert!(
            (d.fraction_below - 0.5).abs() < 0.1,
            "fraction below {:.3}",
            d.fraction_below
        );
    }

    #[test]
    fn no_escapes_from_the_trap() {
        let (sys, obj, center) = trap_problem();
        let opts = OptimizeOpts {
            max_iters: 150,
            ..Default::default()
        };
        let stats = restart_probe(&sys, &obj, &center, 0.1, 5, &opts, 21).unwrap();
        assert_eq!(stats.escapes, 0, "errors: {:?}",
            stats.records.iter().map(|r| r.terminal_error).collect::<Vec<_>>());
    }

    #[test]
    fn huge_perturbations_do_escape() {
        let (sys, obj, center) = trap_problem();
        let opts = OptimizeOpts {
            max_iters: 400,
            threshold: 1e-3,
            ..Default::default()
        };
        let stats = restart_probe(&sys, &obj, &center, 10.0, 5, &opts, 22).unwrap();
        assert!(stats.escapes > 0);
    }

    #[test]
    fn refinement_is_exact_before_optimization() {
        let (sys, obj, center) = trap_problem();
        let opts = OptimizeOpts {
            max_iters: 30,
            ..Default::default()
        };
        let stats = refine_mesh(&sys, &obj, &center, 3, &opts).unwrap();
        assert!(stats.resample_drift < 1e-12);
        // starting exactly at the trap: nothing to gain
        assert!(stats.relative_reduction.abs() < 1e-6);
    }

    #[test]
    fn rejects_tiny_parameters() {
        let (sys, obj, center) = trap_problem();
        assert!(perturb_sample(&sys, &obj, &center, 10, 0.01, 0).is_err());
        assert!(restart_probe(&sys, &obj, &center, 0.1, 2, &OptimizeOpts::default(), 0).is_err());
        assert!(refine_mesh(&sys, &obj, &center, 1, &OptimizeOpts::default()).is_err());
    }
}
