//! Inverse-Hessian BFGS with a strong Wolfe line search, minimizing the
//! error 1 − F with the exact analytic gradient.

use std::time::Instant;

use super::{stalled, OptimizeOpts, RunRecord, TerminationReason};
use crate::error::Result;
use crate::grouplandscape::Objective;
use crate::propagate::{objective_value_and_gradient, PiecewiseControl};
use crate::sysmodel::ControlSystem;

struct Eval {
    error: f64,
    grad: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense inverse-Hessian estimate with the standard two-sided update.
struct InverseHessian {
    h: Vec<f64>,
    p: usize,
    fresh: bool,
}

impl InverseHessian {
    fn identity(p: usize) -> Self {
        let mut h = vec![0.0; p * p];
        for i in 0..p {
            h[i * p + i] = 1.0;
        }
        Self { h, p, fresh: true }
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let p = self.p;
        (0..p)
            .map(|i| -dot(&self.h[i * p..(i + 1) * p], g))
            .collect()
    }

    /// BFGS update; on the first accepted step the matrix is rescaled to
    /// (sᵀy/yᵀy)·I before updating.
    fn update(&mut self, s: &[f64], y: &[f64], sy: f64) {
        let p = self.p;
        if self.fresh {
            let yy = dot(y, y);
            if yy > 0.0 {
                let gamma = (sy / yy).max(1e-12);
                for i in 0..p {
                    for j in 0..p {
                        self.h[i * p + j] = if i == j { gamma } else { 0.0 };
                    }
                }
            }
            self.fresh = false;
        }
        let rho = 1.0 / sy;
        // hy = H y
        let hy: Vec<f64> = (0..p)
            .map(|i| dot(&self.h[i * p..(i + 1) * p], y))
            .collect();
        let yhy = dot(y, &hy);
        let coef = rho * rho * yhy + rho;
        for i in 0..p {
            for j in 0..p {
                self.h[i * p + j] += coef * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
            }
        }
    }
}

/// Strong Wolfe line search (bracket + zoom with cubic interpolation).
/// Returns (α, eval-at-α) or None after the evaluation budget.
struct LineSearch<'a> {
    eval: &'a dyn Fn(&[f64]) -> Result<Eval>,
    x: &'a [f64],
    d: &'a [f64],
    phi0: f64,
    dphi0: f64,
    c1: f64,
    c2: f64,
    budget: usize,
    used: usize,
}

struct Probe {
    alpha: f64,
    eval: Eval,
    dphi: f64,
}

impl<'a> LineSearch<'a> {
    fn probe(&mut self, alpha: f64) -> Result<Option<Probe>> {
        if self.used >= self.budget {
            return Ok(None);
        }
        self.used += 1;
        let pt: Vec<f64> = self
            .x
            .iter()
            .zip(self.d)
            .map(|(xi, di)| xi + alpha * di)
            .collect();
        let e = (self.eval)(&pt)?;
        let dphi = dot(&e.grad, self.d);
        Ok(Some(Probe {
            alpha,
            eval: e,
            dphi,
        }))
    }

    fn wolfe(&self, p: &Probe) -> bool {
        p.eval.error <= self.phi0 + self.c1 * p.alpha * self.dphi0
            && p.dphi.abs() <= -self.c2 * self.dphi0
    }

    fn cubic(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
        // minimizer of the cubic through (α, φ, φ') pairs; bisection fallback
        let (a, fa, da) = lo;
        let (b, fb, db) = hi;
        let d1 = da + db - 3.0 * (fa - fb) / (a - b);
        let disc = d1 * d1 - da * db;
        if disc >= 0.0 {
            let d2 = disc.sqrt() * (b - a).signum();
            let cand = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
            let (left, right) = if a < b { (a, b) } else { (b, a) };
            let margin = 0.1 * (right - left);
            if cand.is_finite() && cand > left + margin && cand < right - margin {
                return cand;
            }
        }
        0.5 * (a + b)
    }

    fn zoom(&mut self, mut lo: Probe, mut hi: Probe) -> Result<Option<Probe>> {
        loop {
            let alpha = Self::cubic(
                (lo.alpha, lo.eval.error, lo.dphi),
                (hi.alpha, hi.eval.error, hi.dphi),
            );
            let Some(p) = self.probe(alpha)? else {
                // budget exhausted: fall back to the best sufficient-decrease
                // point seen, if any
                return Ok(if lo.eval.error < self.phi0 { Some(lo) } else { None });
            };
            if p.eval.error > self.phi0 + self.c1 * p.alpha * self.dphi0
                || p.eval.error >= lo.eval.error
            {
                hi = p;
            } else {
                if p.dphi.abs() <= -self.c2 * self.dphi0 {
                    return Ok(Some(p));
                }
                if p.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
            if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
                return Ok(if lo.eval.error < self.phi0 { Some(lo) } else { None });
            }
        }
    }

    fn run(&mut self) -> Result<Option<Probe>> {
        let mut prev: Option<Probe> = None;
        let mut alpha = 1.0;
        loop {
            let Some(p) = self.probe(alpha)? else {
                return Ok(None);
            };
            let prev_err = prev.as_ref().map(|q| q.eval.error).unwrap_or(self.phi0);
            if p.eval.error > self.phi0 + self.c1 * p.alpha * self.dphi0
                || (prev.is_some() && p.eval.error >= prev_err)
            {
                let lo = match prev {
                    Some(q) => q,
                    None => Probe {
                        alpha: 0.0,
                        eval: Eval {
                            error: self.phi0,
                            grad: Vec::new(),
                        },
                        dphi: self.dphi0,
                    },
                };
                return self.zoom(lo, p);
            }
            if self.wolfe(&p) {
                return Ok(Some(p));
            }
            if p.dphi >= 0.0 {
                let lo = p;
                let hi = match prev {
                    Some(q) => q,
                    None => Probe {
                        alpha: 0.0,
                        eval: Eval {
                            error: self.phi0,
                            grad: Vec::new(),
                        },
                        dphi: self.dphi0,
                    },
                };
                return self.zoom(lo, hi);
            }
            alpha = (2.0 * alpha).min(1e6);
            prev = Some(p);
            if alpha >= 1e6 {
                return Ok(None);
            }
        }
    }
}

/// Maximizes the objective from `init` by BFGS on the error 1 − F.
pub fn bfgs_run(
    sys: &ControlSystem,
    obj: &Objective,
    init: &PiecewiseControl,
    opts: &OptimizeOpts,
) -> Result<RunRecord> {
    let start = Instant::now();
    let template = init.clone();
    let evaluate = |params: &[f64]| -> Result<Eval> {
        let control = template.unflatten_like(params);
        let (value, grad) = objective_value_and_gradient(sys, &control, obj)?;
        Ok(Eval {
            error: 1.0 - value,
            grad: grad.flatten().iter().map(|g| -g).collect(),
        })
    };

    let mut x = init.flatten();
    let p = x.len();
    let mut cur = evaluate(&x)?;
    let mut history = vec![cur.error];
    let mut hinv = InverseHessian::identity(p);
    let mut termination = TerminationReason::MaxIters;
    let mut threshold_crossing = if cur.error < opts.threshold {
        Some(0)
    } else {
        None
    };
    let mut iterations = 0;
    let mut curvature_skips = 0;

    if threshold_crossing.is_some() && !opts.refine_after_threshold {
        termination = TerminationReason::Threshold;
    } else {
        for iter in 1..=opts.max_iters {
            iterations = iter;
            if norm(&cur.grad) < 1e-13 {
                termination = TerminationReason::Stalled;
                iterations = iter - 1;
                break;
            }
            let mut d = hinv.direction(&cur.grad);
            if dot(&d, &cur.grad) >= 0.0 {
                // lost descent property; restart from steepest descent
                hinv = InverseHessian::identity(p);
                d = cur.grad.iter().map(|g| -g).collect();
            }
            let mut ls = LineSearch {
                eval: &evaluate,
                x: &x,
                d: &d,
                phi0: cur.error,
                dphi0: dot(&d, &cur.grad),
                c1: opts.c1,
                c2: opts.c2,
                budget: opts.max_line_search,
                used: 0,
            };
            let Some(probe) = ls.run()? else {
                termination = TerminationReason::LineSearchFailure;
                iterations = iter - 1;
                break;
            };
            let alpha = probe.alpha;
            let xnew: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            let s: Vec<f64> = d.iter().map(|di| alpha * di).collect();
            let y: Vec<f64> = probe
                .eval
                .grad
                .iter()
                .zip(&cur.grad)
                .map(|(a, b)| a - b)
                .collect();
            let sy = dot(&s, &y);
            if sy > 1e-14 * norm(&s) * norm(&y) {
                hinv.update(&s, &y, sy);
            } else {
                curvature_skips += 1;
            }
            x = xnew;
            cur = probe.eval;
            history.push(cur.error);

            if threshold_crossing.is_none() && cur.error < opts.threshold {
                threshold_crossing = Some(iter);
                if !opts.refine_after_threshold {
                    termination = TerminationReason::Threshold;
                    break;
                }
            }
            if stalled(&history, opts.stall_window, opts.stall_eps) {
                termination = TerminationReason::Stalled;
                break;
            }
        }
    }

    let final_control = template.unflatten_like(&x);
    Ok(RunRecord {
        seed: 0,
        init: init.clone(),
        final_control,
        terminal_error: *history.last().unwrap(),
        error_history: history,
        iterations,
        termination,
        threshold_crossing,
        wall_time_s: start.elapsed().as_secs_f64(),
        curvature_skips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouplandscape::GateGroup;
    use crate::propagate::propagate;
    use crate::qcore::{random, HermitianOperator, UnitaryMatrix};
    use crate::sysmodel::{registry, RegistryId};
    use rand::Rng;

    /// Two-level gate problem with a known exact solution.
    fn reachable_gate_problem() -> (ControlSystem, Objective, PiecewiseControl) {
        let h0 = HermitianOperator::new(crate::qcore::pauli_z()).unwrap();
        let h1 = HermitianOperator::new(crate::qcore::pauli_x()).unwrap();
        let sys = ControlSystem::new(h0, vec![h1]).unwrap();
        let mut truth = PiecewiseControl::zeros(1, 8, 1.0);
        let mut rng = random::rng(5);
        for v in truth.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let v = propagate(&sys, &truth).unwrap().endpoint().clone();
        let obj = Objective::gate(UnitaryMatrix::new(v).unwrap(), GateGroup::U).unwrap();
        (sys, obj, truth)
    }

    #[test]
    fn converges_on_reachable_gate() {
        let (sys, obj, truth) = reachable_gate_problem();
        let mut init = PiecewiseControl::zeros(1, 8, 1.0);
        let mut rng = random::rng(77);
        for v in init.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let opts = OptimizeOpts {
            threshold: 1e-10,
            max_iters: 400,
            ..Default::default()
        };
        let rec = bfgs_run(&sys, &obj, &init, &opts).unwrap();
        assert!(
            rec.terminal_error < 1e-10,
            "terminal {:.3e} after {} iters ({:?})",
            rec.terminal_error,
            rec.iterations,
            rec.termination
        );
        let _ = truth;
    }

    #[test]
    fn history_is_monotone() {
        let (sys, obj, _) = reachable_gate_problem();
        let mut init = PiecewiseControl::zeros(1, 8, 1.0);
        let mut rng = random::rng(90);
        for v in init.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let rec = bfgs_run(&sys, &obj, &init, &OptimizeOpts::default()).unwrap();
        for w in rec.error_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "history must not increase");
        }
        assert_eq!(rec.terminal_error, *rec.error_history.last().unwrap());
        assert_eq!(rec.curvature_skips, 0);
    }

    #[test]
    fn starts_at_optimum_terminates_immediately() {
        let (sys, obj, truth) = reachable_gate_problem();
        let rec = bfgs_run(&sys, &obj, &truth, &OptimizeOpts::default()).unwrap();
        assert_eq!(rec.iterations, 0);
        assert_eq!(rec.termination, TerminationReason::Threshold);
        assert!(rec.terminal_error < 1e-12);
    }

    #[test]
    fn trap_start_stalls_at_its_fidelity() {
        let p = registry(RegistryId::Trap4 {
            theta: std::f64::consts::PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        let init = p.critical_control.clone().unwrap();
        let rec = bfgs_run(&p.system, &p.objective, &init, &OptimizeOpts::default()).unwrap();
        assert_eq!(rec.termination, TerminationReason::Stalled);
        assert!((rec.terminal_error - 0.75).abs() < 1e-9);
    }

    #[test]
    fn spin_chain_run_descends_quickly() {
        let p = registry(RegistryId::Qft3).unwrap();
        let mut init = PiecewiseControl::zeros(6, 64, 8.0);
        let mut rng = random::rng(3);
        for v in init.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let opts = OptimizeOpts {
            max_iters: 120,
            threshold: 1e-2,
            ..Default::default()
        };
        let rec = bfgs_run(&p.system, &p.objective, &init, &opts).unwrap();
        assert!(
            rec.terminal_error < 1e-2,
            "terminal {:.3e} ({:?})",
            rec.terminal_error,
            rec.termination
        );
    }
}
