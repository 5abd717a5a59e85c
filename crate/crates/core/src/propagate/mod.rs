//! Piecewise-constant time evolution and exact first/second derivatives of
//! fidelity objectives with respect to the control amplitudes (and the
//! optional drift scale for variable-time problems).

mod derivatives;

pub use derivatives::{objective_gradient, objective_hessian, objective_value_and_gradient};

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grouplandscape::Objective;
use crate::qcore::{matmul, CMat, EigH};
use crate::sysmodel::ControlSystem;

/// Piecewise-constant control: M channels × S uniform slices on [0, T],
/// optionally extended by a drift scale ℓ (variable-time mode).
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseControl {
    horizon: f64,
    values: Array2<f64>,
    ell: Option<f64>,
}

impl PiecewiseControl {
    pub fn new(horizon: f64, values: Array2<f64>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if values.ncols() == 0 || values.nrows() == 0 {
            return Err(Error::InvalidArgument(
                "need at least one channel and one slice".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("control values must be finite".into()));
        }
        Ok(Self {
            horizon,
            values,
            ell: None,
        })
    }

    pub fn constant(channels: usize, slices: usize, horizon: f64, value: f64) -> Self {
        Self::new(horizon, Array2::from_elem((channels, slices), value))
            .expect("constant grid is valid")
    }

    pub fn zeros(channels: usize, slices: usize, horizon: f64) -> Self {
        Self::constant(channels, slices, horizon, 0.0)
    }

    /// Enables variable-time mode with the given drift scale.
    pub fn with_ell(mut self, ell: f64) -> Self {
        self.ell = Some(ell);
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn slices(&self) -> usize {
        self.values.ncols()
    }

    pub fn channels(&self) -> usize {
        self.values.nrows()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.slices() as f64
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    pub fn ell(&self) -> Option<f64> {
        self.ell
    }

    pub fn set_ell(&mut self, ell: Option<f64>) {
        self.ell = ell;
    }

    /// Drift scale used in propagation (1 outside variable-time mode).
    pub fn drift_scale(&self) -> f64 {
        self.ell.unwrap_or(1.0)
    }

    /// Number of optimization parameters (M·S, +1 in variable-time mode).
    pub fn param_count(&self) -> usize {
        self.values.len() + usize::from(self.ell.is_some())
    }

    /// Re-samples onto `factor`× finer slices; represents the identical step
    /// function.
    pub fn resample(&self, factor: usize) -> Self {
        assert!(factor >= 1);
        let (m, s) = self.values.dim();
        let fine = Array2::from_shape_fn((m, s * factor), |(r, j)| self.values[[r, j / factor]]);
        Self {
            horizon: self.horizon,
            values: fine,
            ell: self.ell,
        }
    }

    /// Flattens to the optimizer parameter vector: channel-major slices,
    /// then ℓ if present.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values.iter().copied().collect();
        if let Some(l) = self.ell {
            v.push(l);
        }
        v
    }

    /// Inverse of [`Self::flatten`] on the same grid shape.
    pub fn unflatten_like(&self, params: &[f64]) -> Self {
        let (m, s) = self.values.dim();
        assert_eq!(params.len(), self.param_count());
        let values =
            Array2::from_shape_fn((m, s), |(r, j)| params[r * s + j]);
        Self {
            horizon: self.horizon,
            values,
            ell: self.ell.map(|_| params[m * s]),
        }
    }
}

/// Cached propagation of a control: per-slice eigensystems and propagators
/// plus cumulative products C_s = U_s···U_1 (C_0 = I).
pub struct Trajectory {
    pub slice_eigs: Vec<EigH>,
    pub slice_unitaries: Vec<CMat>,
    pub cumulative: Vec<CMat>,
    pub dt: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &CMat {
        self.cumulative.last().expect("at least one slice")
    }

    /// Backward partial products B_s = U_S···U_{s+1} (B_S = I), so that
    /// endpoint = B_s · C_s for every s.
    pub fn backward_products(&self) -> Vec<CMat> {
        let s = self.slice_unitaries.len();
        let n = self.slice_unitaries[0].nrows();
        let mut b = vec![CMat::zeros((n, n)); s + 1];
        b[s] = crate::qcore::identity(n);
        for k in (0..s).rev() {
            b[k] = matmul(&b[k + 1], &self.slice_unitaries[k]);
        }
        b
    }
}

/// Builds the slice generator ℓ·H0 + Σ_r a[r][s]·H_r.
pub(crate) fn slice_hamiltonian(sys: &ControlSystem, f: &PiecewiseControl, s: usize) -> CMat {
    let ell = f.drift_scale();
    let mut h = sys.h0().mat().mapv(|x| x * ell);
    for r in 0..f.channels() {
        let a = f.values()[[r, s]];
        if a != 0.0 {
            h.scaled_add(C64::new(a, 0.0), sys.control(r).mat());
        }
    }
    h
}

/// Solves the evolution for a piecewise-constant control.
pub fn propagate(sys: &ControlSystem, f: &PiecewiseControl) -> Result<Trajectory> {
    if f.channels() != sys.channels() {
        return Err(Error::DimensionMismatch {
            left: f.channels(),
            right: sys.channels(),
        });
    }
    let s_count = f.slices();
    let dt = f.dt();
    let mut slice_eigs = Vec::with_capacity(s_count);
    let mut slice_unitaries = Vec::with_capacity(s_count);
    let mut cumulative = Vec::with_capacity(s_count + 1);
    cumulative.push(crate::qcore::identity(sys.dim()));
    for s in 0..s_count {
        let h = slice_hamiltonian(sys, f, s);
        let eig = EigH::new(&h);
        let u = eig.propagator(dt);
        cumulative.push(matmul(&u, &cumulative[s]));
        slice_eigs.push(eig);
        slice_unitaries.push(u);
    }
    Ok(Trajectory {
        slice_eigs,
        slice_unitaries,
        cumulative,
        dt,
    })
}

/// Fidelity of the endpoint under the objective.
pub fn objective_value(obj: &Objective, traj: &Trajectory) -> f64 {
    obj.value(traj.endpoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{self, expm_step, max_abs, random, HermitianOperator};
    use crate::sysmodel::{registry, RegistryId};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use std::f64::consts::PI;

    fn random_system(n: usize, m: usize, seed: u64) -> ControlSystem {
        let mut rng = random::rng(seed);
        let h0 = HermitianOperator::new(random::hermitian(n, &mut rng)).unwrap();
        let hs = (0..m)
            .map(|_| HermitianOperator::new(random::hermitian(n, &mut rng)).unwrap())
            .collect();
        ControlSystem::new(h0, hs).unwrap()
    }

    #[test]
    fn free_evolution_endpoint() {
        let sys = random_system(4, 1, 1);
        let f = PiecewiseControl::zeros(1, 16, 2.0);
        let traj = propagate(&sys, &f).unwrap();
        let expect = expm_step(sys.h0(), 2.0).unwrap();
        assert!(max_abs(&(traj.endpoint() - expect.mat())) < 1e-12);
    }

    #[test]
    fn eigenstate_example_fidelity_at_critical_control() {
        for t in [PI / 2.0, PI, 2.0 * PI] {
            let p = registry(RegistryId::Eigenstate3 { t }).unwrap();
            let traj = propagate(&p.system, p.critical_control.as_ref().unwrap()).unwrap();
            let f = objective_value(&p.objective, &traj);
            let expect = (8.0 / 9.0) * (t / 2.0).sin().powi(4);
            assert_abs_diff_eq!(f, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn refinement_leaves_endpoint_unchanged() {
        let p = registry(RegistryId::Qft3).unwrap();
        let mut rng = random::rng(9);
        let mut f = PiecewiseControl::zeros(6, 140, 8.0);
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let fine = f.resample(10);
        let e1 = propagate(&p.system, &f).unwrap();
        let e2 = propagate(&p.system, &fine).unwrap();
        assert!(max_abs(&(e1.endpoint() - e2.endpoint())) < 1e-12);
    }

    #[test]
    fn endpoint_stays_unitary_for_many_slices() {
        let sys = random_system(2, 1, 3);
        let mut f = PiecewiseControl::zeros(1, 10_000, 50.0);
        let mut rng = random::rng(4);
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let traj = propagate(&sys, &f).unwrap();
        assert!(qcore::unitary_deviation(traj.endpoint()) < 1e-9);
    }

    #[test]
    fn endpoint_determinant_fixed_by_drift_trace() {
        // traceless controls: det(endpoint) = e^{-i l T tr H0}
        let p = registry(RegistryId::Qft3).unwrap();
        assert!(p.system.traceless_controls());
        let mut f = PiecewiseControl::zeros(6, 20, 8.0);
        let mut rng = random::rng(12);
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let traj = propagate(&p.system, &f).unwrap();
        let det = qcore::determinant(traj.endpoint());
        // tr H0 = 0 for the spin chain: det = 1
        assert!((det - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn gauge_equivalence_of_constant_shift() {
        // propagating H0 + (f+mu)H1 equals propagating (H0+mu*H1) + f*H1
        let sys = random_system(3, 1, 7);
        let mu = 0.37;
        let shifted_h0 = HermitianOperator::new(
            sys.h0().mat() + &sys.control(0).mat().mapv(|x| x * mu),
        )
        .unwrap();
        let sys2 = ControlSystem::new(shifted_h0, vec![sys.control(0).clone()]).unwrap();
        let mut rng = random::rng(8);
        let mut f = PiecewiseControl::zeros(1, 32, 1.5);
        for v in f.values_mut().iter_mut() {
            *v = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let mut f_shift = f.clone();
        for v in f_shift.values_mut().iter_mut() {
            *v += mu;
        }
        let e1 = propagate(&sys, &f_shift).unwrap();
        let e2 = propagate(&sys2, &f).unwrap();
        assert!(max_abs(&(e1.endpoint() - e2.endpoint())) < 1e-10);
    }

    #[test]
    fn variable_time_scales_drift() {
        let sys = random_system(3, 1, 20);
        let f = PiecewiseControl::zeros(1, 8, 1.0).with_ell(2.5);
        let traj = propagate(&sys, &f).unwrap();
        let expect = expm_step(
            &HermitianOperator::new(sys.h0().mat().mapv(|x| x * 2.5)).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(max_abs(&(traj.endpoint() - expect.mat())) < 1e-11);
    }
}
