//! Differential-algebraic generator of non-constant critical controls for
//! pure-state transfer: the control is slaved to the trajectory so that the
//! first-variation integrand vanishes identically, and the target state is
//! read off a posteriori from the endpoint.

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::propagate::PiecewiseControl;
use crate::qcore::{
    commutator, identity, inner, matmul, matvec, max_abs, polar_unitary, random, CMat, CVec,
    StateVector,
};
use crate::sysmodel::ControlSystem;
use crate::tol;

/// Solution of the slaved-control system.
#[derive(Debug, Clone)]
pub struct DaeSolution {
    /// Sample times 0 = t₀ < … ≤ validity horizon.
    pub times: Vec<f64>,
    /// Control samples f(tₖ).
    pub controls: Vec<f64>,
    /// Horizon actually integrated (shorter than requested if the
    /// denominator degenerated).
    pub validity_horizon: f64,
    /// Endpoint image of the co-state: the induced transfer target.
    pub psi_g: StateVector,
    /// Largest constraint residual |Im⟨ΨB|U†H1U|Ψ0⟩| seen.
    pub max_residual: f64,
    /// |df/dt| at t = 0 (nonzero certifies a non-constant critical control).
    pub df_dt0: f64,
    /// Fidelity of the induced problem, |⟨ψb|Ψ0⟩|² with ψb normalized.
    pub fidelity: f64,
}

impl DaeSolution {
    pub fn halted_early(&self, requested: f64) -> bool {
        self.validity_horizon < requested * (1.0 - 1e-12)
    }

    /// Non-constant certificate per the df/dt ≠ 0 criterion.
    pub fn non_constant(&self) -> bool {
        self.df_dt0 > 1e-6
    }

    /// Best piecewise-constant representation on `slices` uniform slices of
    /// the validity horizon (slice means of the linear interpolant).
    pub fn to_piecewise(&self, slices: usize) -> PiecewiseControl {
        let t_end = self.validity_horizon;
        let dt = t_end / slices as f64;
        let mut vals = ndarray::Array2::zeros((1, slices));
        // trapezoid integration of the sampled control over each slice
        let mut k = 0usize;
        for s in 0..slices {
            let (lo, hi) = (s as f64 * dt, (s + 1) as f64 * dt);
            while k + 1 < self.times.len() && self.times[k + 1] <= lo {
                k += 1;
            }
            let mut acc = 0.0;
            let mut j = k;
            let mut a = lo;
            while a < hi - 1e-15 {
                let seg_end = if j + 1 < self.times.len() {
                    self.times[j + 1].min(hi)
                } else {
                    hi
                };
                let fa = self.value_at(a, j);
                let fb = self.value_at(seg_end, j);
                acc += 0.5 * (fa + fb) * (seg_end - a);
                a = seg_end;
                if j + 1 < self.times.len() && self.times[j + 1] <= a {
                    j += 1;
                }
            }
            vals[[0, s]] = acc / dt;
        }
        PiecewiseControl::new(t_end, vals).expect("valid grid")
    }

    fn value_at(&self, t: f64, hint: usize) -> f64 {
        let mut j = hint.min(self.times.len() - 1);
        while j + 1 < self.times.len() && self.times[j + 1] < t {
            j += 1;
        }
        if j + 1 >= self.times.len() {
            return self.controls[self.times.len() - 1];
        }
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        self.controls[j] * (1.0 - w) + self.controls[j + 1] * w
    }
}

/// The seed constraints as real-linear functionals on (Re ΨB, Im ΨB):
/// Im⟨ΨB|H1|Ψ0⟩ = 0, Re⟨ΨB|[H0,H1]|Ψ0⟩ = 0, and Im⟨ΨB|Ψ0⟩ = 0. The last
/// fixes the co-state phase so that the slaved invariant is exactly the
/// first-variation integrand of the induced transfer problem.
fn constraint_rows(sys: &ControlSystem, psi0: &StateVector) -> Result<Vec<Vec<f64>>> {
    let h0 = sys.h0().mat();
    let h1 = sys.control(0).mat();
    let v1 = matvec(h1, psi0.vec());
    let v2 = matvec(&commutator(h0, h1)?, psi0.vec());
    let n = psi0.dim();
    // Im⟨ΨB|v⟩ = Σ xᵢ Im vᵢ − yᵢ Re vᵢ;  Re⟨ΨB|v⟩ = Σ xᵢ Re vᵢ + yᵢ Im vᵢ
    let mut w1 = vec![0.0; 2 * n];
    let mut w2 = vec![0.0; 2 * n];
    let mut w3 = vec![0.0; 2 * n];
    for i in 0..n {
        w1[i] = v1[i].im;
        w1[n + i] = -v1[i].re;
        w2[i] = v2[i].re;
        w2[n + i] = v2[i].im;
        w3[i] = psi0.vec()[i].im;
        w3[n + i] = -psi0.vec()[i].re;
    }
    Ok(vec![w1, w2, w3])
}

fn reassemble(x: &[f64], n: usize) -> CVec {
    CVec::from_shape_fn(n, |i| C64::new(x[i], x[n + i]))
}

/// Draws admissible co-states: unit vectors satisfying both seed constraints
/// with a non-vanishing slaving denominator at t = 0.
pub fn dae_seed(
    sys: &ControlSystem,
    psi0: &StateVector,
    draws: usize,
    seed: u64,
) -> Result<Vec<StateVector>> {
    if sys.dim() < 2 {
        return Err(Error::InvalidArgument("need N >= 2".into()));
    }
    if sys.channels() != 1 {
        return Err(Error::InvalidArgument(
            "the slaved-control construction uses a single control".into(),
        ));
    }
    let n = sys.dim();
    let raw_rows = constraint_rows(sys, psi0)?;
    // orthonormalize the constraint rows
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for w in raw_rows {
        let mut v = w.clone();
        for r in &rows {
            let c = dot(r, &v);
            for (vi, ri) in v.iter_mut().zip(r.iter()) {
                *vi -= c * ri;
            }
        }
        let nn = dot(&v, &v).sqrt();
        if nn > 1e-12 {
            for vi in v.iter_mut() {
                *vi /= nn;
            }
            rows.push(v);
        }
    }
    if rows.len() >= 2 * n {
        return Err(Error::EmptyNullSpace);
    }
    let h0 = sys.h0().mat();
    let h1 = sys.control(0).mat();
    let c01 = commutator(h0, h1)?;
    let b_op = commutator(h1, &c01)?;
    let b_scale = max_abs(&b_op).max(1e-300);
    let mut rng = random::rng(seed);
    let mut out = Vec::new();
    for _ in 0..draws {
        let mut g: Vec<f64> = (0..2 * n)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        for r in &rows {
            let c = dot(r, &g);
            for (gi, ri) in g.iter_mut().zip(r.iter()) {
                *gi -= c * ri;
            }
        }
        let nrm = dot(&g, &g).sqrt();
        if nrm < 1e-9 {
            continue;
        }
        for gi in g.iter_mut() {
            *gi /= nrm;
        }
        let mut psi_b = reassemble(&g, n);
        // the co-state convention keeps ⟨ΨB|Ψ0⟩ real and nonnegative
        if inner(&psi_b, psi0.vec()).re < 0.0 {
            psi_b.mapv_inplace(|x| -x);
        }
        // slaving denominator at t = 0
        let den = inner(&psi_b, &matvec(&b_op, psi0.vec())).im;
        if den.abs() < tol::DAE_DENOMINATOR * b_scale {
            continue;
        }
        out.push(StateVector::normalized(psi_b)?);
    }
    Ok(out)
}

/// Integrates the slaved-control system with classical fourth-order steps and
/// per-step polar re-projection of the propagator.
pub fn dae_solve(
    sys: &ControlSystem,
    psi0: &StateVector,
    psi_b: &StateVector,
    horizon: f64,
    step: f64,
) -> Result<DaeSolution> {
    if sys.channels() != 1 {
        return Err(Error::InvalidArgument(
            "the slaved-control construction uses a single control".into(),
        ));
    }
    if !(step > 0.0) || step > horizon / 100.0 {
        return Err(Error::InvalidArgument(format!(
            "step must satisfy 0 < step <= horizon/100, got {step}"
        )));
    }
    let n = sys.dim();
    let h0 = sys.h0().mat().clone();
    let h1 = sys.control(0).mat().clone();
    let c01 = commutator(&h0, &h1)?;
    let a_op = commutator(&h0, &c01)?; // [H0,[H0,H1]]
    let b_op = commutator(&h1, &c01)?; // [H1,[H0,H1]]

    let control_of = |u: &CMat| -> (f64, f64, f64) {
        let ua = matvec(u, psi0.vec());
        let ub = matvec(u, psi_b.vec());
        let num = inner(&ub, &matvec(&a_op, &ua)).im;
        let den = inner(&ub, &matvec(&b_op, &ua)).im;
        (-num / den, num, den)
    };
    let rhs = |u: &CMat| -> CMat {
        let (f, _, _) = control_of(u);
        let h = &h0 + &h1.mapv(|x| x * f);
        let hu = matmul(&h, u);
        hu.mapv(|x| x * C64::new(0.0, -1.0))
    };

    let mut u = identity(n);
    let mut t = 0.0;
    let mut times = vec![0.0];
    let (f0, num0, den0) = control_of(&u);
    if !f0.is_finite() {
        return Err(Error::Numeric("seed denominator vanishes at t = 0".into()));
    }
    let mut controls = vec![f0];
    let mut num_scale = num0.abs().max(den0.abs()).max(1e-300);
    let mut max_residual = 0.0_f64;
    let steps = (horizon / step).round() as usize;
    let residual_of = |u: &CMat| -> f64 {
        inner(
            &matvec(u, psi_b.vec()),
            &matvec(&h1, &matvec(u, psi0.vec())),
        )
        .im
        .abs()
    };
    for _ in 0..steps {
        // halt before stepping into a degenerate region
        let (_, num, den) = control_of(&u);
        num_scale = num_scale.max(num.abs());
        if den.abs() < tol::DAE_DENOMINATOR * num_scale {
            break;
        }
        let k1 = rhs(&u);
        let u2 = &u + &k1.mapv(|x| x * (0.5 * step));
        let k2 = rhs(&u2);
        let u3 = &u + &k2.mapv(|x| x * (0.5 * step));
        let k3 = rhs(&u3);
        let u4 = &u + &k3.mapv(|x| x * step);
        let k4 = rhs(&u4);
        let mut unew = u.clone();
        for ((((w, a), b), c), d) in unew
            .iter_mut()
            .zip(k1.iter())
            .zip(k2.iter())
            .zip(k3.iter())
            .zip(k4.iter())
        {
            *w += (step / 6.0) * (a + 2.0 * b + 2.0 * c + d);
        }
        // the algebraic constraint is evaluated through U; keep it unitary
        let unew = polar_unitary(&unew);
        // a residual jump means the step crossed a slaving pole: discard the
        // step and end the validity horizon there
        let residual = residual_of(&unew);
        if residual > (50.0 * max_residual).max(1e-9) {
            let (_, _, den_now) = control_of(&u);
            if den_now.abs() > 1e-3 * num_scale {
                return Err(Error::Numeric(format!(
                    "constraint residual {residual:.3e} grew beyond stability; reduce the step"
                )));
            }
            break;
        }
        u = unew;
        t += step;
        let (f, _, _) = control_of(&u);
        times.push(t);
        controls.push(f);
        max_residual = max_residual.max(residual);
    }
    let validity_horizon = t;
    if validity_horizon <= 0.0 {
        return Err(Error::Numeric(
            "integration halted immediately; inadmissible seed".into(),
        ));
    }
    let psi_g = StateVector::normalized(matvec(&u, psi_b.vec()))?;
    let df_dt0 = ((controls[1] - controls[0]) / step).abs();
    let fidelity = inner(psi_b.vec(), psi0.vec()).norm_sqr();
    Ok(DaeSolution {
        times,
        controls,
        validity_horizon,
        psi_g,
        max_residual,
        df_dt0,
        fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouplandscape::Objective;
    use crate::propagate::objective_gradient;
    use crate::qcore::HermitianOperator;
    use approx::assert_abs_diff_eq;

    fn four_level_system(seed: u64) -> ControlSystem {
        let mut rng = random::rng(seed);
        let h0 =
            HermitianOperator::new(random::hermitian(4, &mut rng).mapv(|x| x * 0.5)).unwrap();
        let h1 =
            HermitianOperator::new(random::hermitian(4, &mut rng).mapv(|x| x * 0.5)).unwrap();
        ControlSystem::new(h0, vec![h1]).unwrap()
    }

    /// First seed whose solve covers the whole horizon.
    fn solve_full_horizon(
        sys: &ControlSystem,
        psi0: &StateVector,
        seeds: &[StateVector],
        horizon: f64,
        step: f64,
    ) -> DaeSolution {
        for s in seeds {
            if let Ok(sol) = dae_solve(sys, psi0, s, horizon, step) {
                if !sol.halted_early(horizon) {
                    return sol;
                }
            }
        }
        panic!("no seed integrated over the full horizon");
    }

    #[test]
    fn seeds_satisfy_both_constraints() {
        let sys = four_level_system(5);
        let psi0 = random::state(4, &mut random::rng(6));
        let seeds = dae_seed(&sys, &psi0, 100, 7).unwrap();
        assert!(!seeds.is_empty());
        let h0 = sys.h0().mat();
        let h1 = sys.control(0).mat();
        let c = commutator(h0, h1).unwrap();
        for s in &seeds {
            let r1 = inner(s.vec(), &matvec(h1, psi0.vec())).im;
            let r2 = inner(s.vec(), &matvec(&c, psi0.vec())).re;
            assert!(r1.abs() < 1e-12, "constraint 1 residual {r1:.3e}");
            assert!(r2.abs() < 1e-12, "constraint 2 residual {r2:.3e}");
        }
    }

    #[test]
    fn residual_stays_small_over_horizon() {
        let sys = four_level_system(11);
        let psi0 = random::state(4, &mut random::rng(12));
        let seeds = dae_seed(&sys, &psi0, 50, 13).unwrap();
        let sol = solve_full_horizon(&sys, &psi0, &seeds, 2.0, 1e-3);
        assert!(
            sol.max_residual < tol::DAE_RESIDUAL,
            "residual {:.3e}",
            sol.max_residual
        );
        assert!(sol.non_constant());
    }

    #[test]
    fn fidelity_equals_seed_overlap() {
        let sys = four_level_system(21);
        let psi0 = random::state(4, &mut random::rng(22));
        let seeds = dae_seed(&sys, &psi0, 50, 23).unwrap();
        let sol = solve_full_horizon(&sys, &psi0, &seeds, 1.5, 1e-3);
        let overlap = sol.fidelity;
        assert_abs_diff_eq!(sol.fidelity, overlap, epsilon = 1e-14);
        // and the induced problem evaluates to the same number
        let obj = Objective::pure_state(psi0.clone(), sol.psi_g.clone()).unwrap();
        let f = sol.to_piecewise(400);
        let traj = crate::propagate::propagate(&sys, &f).unwrap();
        let value = obj.value(traj.endpoint());
        assert!(
            (value - sol.fidelity).abs() < 1e-5,
            "value {value:.8} vs {:.8}",
            sol.fidelity
        );
    }

    #[test]
    fn discretized_control_is_nearly_critical() {
        let sys = four_level_system(31);
        let psi0 = random::state(4, &mut random::rng(32));
        let seeds = dae_seed(&sys, &psi0, 50, 33).unwrap();
        let sol = solve_full_horizon(&sys, &psi0, &seeds, 2.0, 5e-4);
        let f = sol.to_piecewise(400);
        let obj = Objective::pure_state(psi0, sol.psi_g.clone()).unwrap();
        let g = objective_gradient(&sys, &f, &obj).unwrap();
        assert!(g.norm() < 1e-4, "gradient norm {:.3e}", g.norm());
    }

    #[test]
    fn residual_scales_as_fourth_order() {
        let sys = four_level_system(41);
        let psi0 = random::state(4, &mut random::rng(42));
        let seeds = dae_seed(&sys, &psi0, 50, 43).unwrap();
        let pick = seeds
            .iter()
            .find(|s| {
                dae_solve(&sys, &psi0, s, 1.2, 5e-3)
                    .map(|sol| !sol.halted_early(1.2))
                    .unwrap_or(false)
            })
            .expect("healthy seed");
        let coarse = dae_solve(&sys, &psi0, pick, 1.2, 1e-2).unwrap();
        let fine = dae_solve(&sys, &psi0, pick, 1.2, 5e-3).unwrap();
        // halving the step should cut the residual by roughly 2^4; allow slack
        let ratio = coarse.max_residual / fine.max_residual.max(1e-300);
        assert!(ratio > 6.0, "ratio {ratio:.2}");
    }

    #[test]
    fn step_too_large_rejected() {
        let sys = four_level_system(51);
        let psi0 = random::state(4, &mut random::rng(52));
        let seeds = dae_seed(&sys, &psi0, 20, 53).unwrap();
        assert!(dae_solve(&sys, &psi0, &seeds[0], 1.0, 0.5).is_err());
    }
}
