//! Constructive critical pairs: for any single-control bilinear system,
//! target time and fidelity level in (0,1), builds initial and target states
//! plus a constant control that is a critical point with exactly that value.
//!
//! The constant shift μ is absorbed into an effective drift H0 + μH1. Two
//! routes: if some μ makes the effective drift degenerate, the pair lives in
//! a two-dimensional eigenspace rotated to diagonalize the control there;
//! otherwise μ is found by bisection so that the extremal eigenvectors of
//! the effective drift share the same control expectation, and the pair
//! lives in their span.

use num_complex::Complex64 as C64;

use super::ControlSystem;
use crate::error::{Error, Result};
use crate::grouplandscape::Objective;
use crate::propagate::{objective_gradient, PiecewiseControl};
use crate::qcore::{eigh, identity, inner, matvec, max_abs, CMat, CVec, StateVector};

#[derive(Debug, Clone)]
pub struct CriticalPair {
    pub psi0: StateVector,
    pub psig: StateVector,
    pub mu: f64,
    /// Residual gradient norm of the verification run.
    pub gradient_norm: f64,
}

fn effective_drift(sys: &ControlSystem, mu: f64) -> CMat {
    sys.h0().mat() + &sys.control(0).mat().mapv(|x| x * mu)
}

/// Control expectation difference between the extremal eigenvectors of the
/// effective drift.
fn extremal_gap(sys: &ControlSystem, mu: f64) -> f64 {
    let (_, vecs) = eigh(&effective_drift(sys, mu));
    let n = sys.dim();
    let h1 = sys.control(0).mat();
    let vmin = vecs.column(0).to_owned();
    let vmax = vecs.column(n - 1).to_owned();
    let emax = inner(&vmax, &matvec(h1, &vmax)).re;
    let emin = inner(&vmin, &matvec(h1, &vmin)).re;
    emax - emin
}

/// Smallest adjacent eigenvalue gap of the effective drift, relative to the
/// spectral spread.
fn min_gap(sys: &ControlSystem, mu: f64) -> (f64, usize) {
    let (vals, _) = eigh(&effective_drift(sys, mu));
    let n = vals.len();
    let spread = (vals[n - 1] - vals[0]).max(1e-300);
    let mut best = f64::INFINITY;
    let mut at = 0;
    for i in 0..n - 1 {
        let g = (vals[i + 1] - vals[i]) / spread;
        if g < best {
            best = g;
            at = i;
        }
    }
    (best, at)
}

fn embed_pair(
    basis1: &CVec,
    basis2: &CVec,
    coeffs0: (C64, C64),
    coeffsg: (C64, C64),
) -> Result<(StateVector, StateVector)> {
    let psi0 = basis1.mapv(|x| x * coeffs0.0) + basis2.mapv(|x| x * coeffs0.1);
    let psig = basis1.mapv(|x| x * coeffsg.0) + basis2.mapv(|x| x * coeffsg.1);
    Ok((StateVector::normalized(psi0)?, StateVector::normalized(psig)?))
}

/// Builds (Ψ0, Ψg, μ) so that the constant control f ≡ μ is a critical point
/// of the transfer fidelity with value `fidelity`, and verifies it.
pub fn critical_pair(sys: &ControlSystem, fidelity: f64, t: f64) -> Result<CriticalPair> {
    if sys.channels() != 1 {
        return Err(Error::InvalidArgument(
            "critical_pair needs a single-control system".into(),
        ));
    }
    if sys.dim() < 2 {
        return Err(Error::InvalidArgument("need dimension N >= 2".into()));
    }
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fidelity must lie in (0,1), got {fidelity}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("target time must be positive".into()));
    }

    let n = sys.dim();
    let h1 = sys.control(0).mat();
    let theta = fidelity.sqrt().acos();

    // control proportional to identity: every state pair below works at μ = 0
    let tr_h1 = crate::qcore::trace(h1) / n as f64;
    let h1_dev = max_abs(&(h1 - &identity(n).mapv(|x| x * tr_h1)));
    let identity_like = h1_dev < 1e-12 * max_abs(h1).max(1.0);

    // scan a grid for a degenerate effective drift
    let mut scan_trace = String::new();
    let mut degenerate_at: Option<f64> = None;
    if !identity_like {
        let mut grid = vec![0.0_f64];
        for e in -3..=3 {
            for j in [1.0, 2.0, 5.0] {
                let v = j * 10f64.powi(e);
                grid.push(v);
                grid.push(-v);
            }
        }
        for &mu in &grid {
            let (gap, _) = min_gap(sys, mu);
            if gap < 1e-8 {
                degenerate_at = Some(mu);
                break;
            }
        }
    }

    let (psi0, psig, mu) = if identity_like {
        // any μ admissible; use the extremal eigenvectors of H0 at μ = 0
        let (vals, vecs) = eigh(sys.h0().mat());
        let u = vecs.column(vals.len() - 1).to_owned();
        let w = vecs.column(0).to_owned();
        let (a, b) = (vals[vals.len() - 1], vals[0]);
        let (p0, pg) = build_span_pair(&u, &w, a, b, theta, t)?;
        (p0, pg, 0.0)
    } else if let Some(mu) = degenerate_at {
        // degenerate route: rotate a 2D eigenspace to diagonalize the control
        let (_, vecs) = eigh(&effective_drift(sys, mu));
        let (_, at) = min_gap(sys, mu);
        let u1 = vecs.column(at).to_owned();
        let u2 = vecs.column(at + 1).to_owned();
        // 2x2 projected control
        let p11 = inner(&u1, &matvec(h1, &u1));
        let p12 = inner(&u1, &matvec(h1, &u2));
        let p22 = inner(&u2, &matvec(h1, &u2));
        let mut block = CMat::zeros((2, 2));
        block[[0, 0]] = p11;
        block[[0, 1]] = p12;
        block[[1, 0]] = p12.conj();
        block[[1, 1]] = p22;
        let (_, rot) = eigh(&block);
        let b1 = u1.mapv(|x| x * rot[[0, 0]]) + u2.mapv(|x| x * rot[[1, 0]]);
        let b2 = u1.mapv(|x| x * rot[[0, 1]]) + u2.mapv(|x| x * rot[[1, 1]]);
        // states real in the rotated basis; overlap cos(θ)
        let (psi0, psig) = embed_pair(
            &b1,
            &b2,
            (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
            (C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)),
        )?;
        (psi0, psig, mu)
    } else {
        // bisection on the extremal control-expectation difference
        let mut lo = -1.0_f64;
        let mut hi = 1.0_f64;
        let mut flo = extremal_gap(sys, lo);
        let mut fhi = extremal_gap(sys, hi);
        let mut expand = 0;
        while flo.signum() == fhi.signum() {
            lo *= 4.0;
            hi *= 4.0;
            flo = extremal_gap(sys, lo);
            fhi = extremal_gap(sys, hi);
            scan_trace.push_str(&format!("mu={lo:.3e}:{flo:.3e} mu={hi:.3e}:{fhi:.3e}; "));
            expand += 1;
            if expand > 20 {
                return Err(Error::BracketFailure(scan_trace));
            }
        }
        if flo > 0.0 {
            std::mem::swap(&mut lo, &mut hi);
        }
        // bisect to machine width
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let fm = extremal_gap(sys, mid);
            if fm <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = 0.5 * (lo + hi);
        let (vals, vecs) = eigh(&effective_drift(sys, mu));
        let u = vecs.column(n - 1).to_owned();
        let w = vecs.column(0).to_owned();
        let (a, b) = (vals[n - 1], vals[0]);
        let (p0, pg) = build_span_pair(&u, &w, a, b, theta, t)?;
        (p0, pg, mu)
    };

    // verification: constant control f ≡ μ must be critical with value F
    let obj = Objective::pure_state(psi0.clone(), psig.clone())?;
    let control = PiecewiseControl::constant(1, 64, t, mu);
    let grad = objective_gradient(sys, &control, &obj)?;
    let gradient_norm = grad.norm();
    let traj = crate::propagate::propagate(sys, &control)?;
    let achieved = obj.value(traj.endpoint());
    if (achieved - fidelity).abs() > 1e-9 {
        return Err(Error::Numeric(format!(
            "constructed pair misses the target fidelity: {achieved} vs {fidelity}"
        )));
    }
    Ok(CriticalPair {
        psi0,
        psig,
        mu,
        gradient_norm,
    })
}

/// Two-level family on span{u, w} with drift eigenvalues (a, b): the pair has
/// overlap cos θ after free evolution; flips the sign of θ when the
/// degenerate coincidence Ψg ∝ Ψ0 would occur.
fn build_span_pair(
    u: &CVec,
    w: &CVec,
    a: f64,
    b: f64,
    theta_in: f64,
    t: f64,
) -> Result<(StateVector, StateVector)> {
    let mut theta = theta_in;
    // coincidence when 2θ ≡ (b−a)T (mod 2π)
    let coincide = |th: f64| {
        let d = 2.0 * th - (b - a) * t;
        (C64::from_polar(1.0, d) - C64::new(1.0, 0.0)).norm() < 1e-6
    };
    if coincide(theta) {
        theta = -theta;
    }
    let inv_sqrt2 = C64::new(0.5_f64.sqrt(), 0.0);
    let psi0 = u.mapv(|x| x * (C64::from_polar(1.0, theta) * inv_sqrt2))
        + w.mapv(|x| x * (C64::from_polar(1.0, -theta) * inv_sqrt2));
    let psig = u.mapv(|x| x * (C64::from_polar(1.0, -a * t) * inv_sqrt2))
        + w.mapv(|x| x * (C64::from_polar(1.0, -b * t) * inv_sqrt2));
    Ok((
        StateVector::normalized(psi0)?,
        StateVector::normalized(psig)?,
    ))
}
