//! Monotonic sequential updates: sweeps over slices maximizing one amplitude
//! at a time by golden-section search, with cached forward/backward
//! propagators.

use std::time::Instant;

use super::{stalled, OptimizeOpts, RunRecord, TerminationReason};
use crate::error::Result;
use crate::grouplandscape::Objective;
use crate::propagate::{propagate, PiecewiseControl};
use crate::qcore::{matmul, CMat, EigH};
use crate::sysmodel::ControlSystem;

const TRUST_HALF_WIDTH: f64 = 2.0;
const GOLDEN_ITERS: usize = 32;

fn golden_max(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Sequential slice-wise maximization of the objective; each sweep is
/// monotone by construction.
pub fn sequential_run(
    sys: &ControlSystem,
    obj: &Objective,
    init: &PiecewiseControl,
    opts: &OptimizeOpts,
) -> Result<RunRecord> {
    let start = Instant::now();
    let mut control = init.clone();
    let s_count = control.slices();
    let m_count = control.channels();
    let dt = control.dt();

    let value_of = |c: &PiecewiseControl| -> Result<f64> {
        Ok(obj.value(propagate(sys, c)?.endpoint()))
    };
    let mut history = vec![1.0 - value_of(&control)?];
    let mut termination = TerminationReason::MaxIters;
    let mut threshold_crossing = if history[0] < opts.threshold {
        Some(0)
    } else {
        None
    };
    let mut sweeps = 0;

    'outer: for sweep in 1..=opts.max_iters {
        sweeps = sweep;
        let traj = propagate(sys, &control)?;
        let back = traj.backward_products();
        let mut forward: CMat = crate::qcore::identity(sys.dim());
        let mut best_err = *history.last().unwrap();
        for s in 0..s_count {
            for r in 0..m_count {
                let current = control.values()[[r, s]];
                // slice generator with channel r free
                let mut base = sys.h0().mat().mapv(|x| x * control.drift_scale());
                for r2 in 0..m_count {
                    if r2 != r {
                        let a = control.values()[[r2, s]];
                        if a != 0.0 {
                            base.scaled_add(num_complex::Complex64::new(a, 0.0), sys.control(r2).mat());
                        }
                    }
                }
                let hr = sys.control(r).mat();
                let mut eval = |a: f64| -> f64 {
                    let mut h = base.clone();
                    h.scaled_add(num_complex::Complex64::new(a, 0.0), hr);
                    let u = EigH::new(&h).propagator(dt);
                    let end = matmul(&back[s + 1], &matmul(&u, &forward));
                    obj.value(&end)
                };
                let (cand, fcand) = golden_max(
                    &mut eval,
                    current - TRUST_HALF_WIDTH,
                    current + TRUST_HALF_WIDTH,
                    GOLDEN_ITERS,
                );
                // monotonicity guard: keep the old amplitude unless improved
                let fcur = eval(current);
                if fcand > fcur {
                    control.values_mut()[[r, s]] = cand;
                    best_err = 1.0 - fcand;
                } else {
                    best_err = best_err.min(1.0 - fcur);
                }
            }
            // advance the forward product with the settled slice
            let mut h = sys.h0().mat().mapv(|x| x * control.drift_scale());
            for r2 in 0..m_count {
                let a = control.values()[[r2, s]];
                if a != 0.0 {
                    h.scaled_add(num_complex::Complex64::new(a, 0.0), sys.control(r2).mat());
                }
            }
            forward = matmul(&EigH::new(&h).propagator(dt), &forward);
        }
        history.push(best_err);
        if threshold_crossing.is_none() && best_err < opts.threshold {
            threshold_crossing = Some(sweep);
            if !opts.refine_after_threshold {
                termination = TerminationReason::Threshold;
                break 'outer;
            }
        }
        if stalled(&history, opts.stall_window.min(10), opts.stall_eps) {
            termination = TerminationReason::Stalled;
            break;
        }
    }

    Ok(RunRecord {
        seed: 0,
        init: init.clone(),
        terminal_error: *history.last().unwrap(),
        final_control: control,
        error_history: history,
        iterations: sweeps,
        termination,
        threshold_crossing,
        wall_time_s: start.elapsed().as_secs_f64(),
        curvature_skips: 0,
    })
}
