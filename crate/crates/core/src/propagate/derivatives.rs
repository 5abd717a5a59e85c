//! Exact gradient and Hessian of fidelity objectives over piecewise-constant
//! controls, assembled from per-slice Fréchet derivatives of the slice
//! propagators and the cached cumulative products.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::{propagate, PiecewiseControl, Trajectory};
use crate::error::Result;
use crate::grouplandscape::{GateGroup, Objective};
use crate::qcore::{dagger, inner, matmul, matvec, trace_prod, CMat};
use crate::sysmodel::ControlSystem;

/// Per-channel, per-slice derivative of the objective (plus the ℓ component
/// in variable-time mode).
#[derive(Debug, Clone)]
pub struct GradientVector {
    pub per_slice: Array2<f64>,
    pub ell: Option<f64>,
}

impl GradientVector {
    pub fn norm(&self) -> f64 {
        let mut acc: f64 = self.per_slice.iter().map(|g| g * g).sum();
        if let Some(l) = self.ell {
            acc += l * l;
        }
        acc.sqrt()
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.per_slice.iter().copied().collect();
        if let Some(l) = self.ell {
            v.push(l);
        }
        v
    }
}

/// Symmetric Hessian over the flattened parameters (channel-major slices,
/// ℓ last when present).
#[derive(Debug, Clone)]
pub struct HessianMatrix {
    pub mat: Array2<f64>,
    /// Number of (channel, slice) parameters; equals mat dim minus one in
    /// variable-time mode.
    pub control_params: usize,
    pub dt: f64,
}

impl HessianMatrix {
    /// Rescales to second-variation kernel units: control/control entries by
    /// 1/Δt², mixed ℓ rows by 1/Δt. A positive congruence, so signature and
    /// classifications are unchanged; eigenvalue thresholds in the reports
    /// refer to these units.
    pub fn kernel_units(&self) -> Array2<f64> {
        let p = self.mat.nrows();
        let mut out = self.mat.clone();
        for i in 0..p {
            for j in 0..p {
                let mut scale = 1.0;
                if i < self.control_params {
                    scale /= self.dt;
                }
                if j < self.control_params {
                    scale /= self.dt;
                }
                out[[i, j]] *= scale;
            }
        }
        out
    }

    pub fn eigenvalues_kernel_units(&self) -> ndarray::Array1<f64> {
        crate::qcore::eig::eigvalsh_real(&self.kernel_units())
    }
}

/// Per-slice gradient core: G_s = V (W̃ᵀ ∘ L)ᵀ V† so that the derivative
/// along any generator direction D is Re tr(G_s · D).
fn slice_gradient_core(traj: &Trajectory, w_s: &CMat, s: usize) -> CMat {
    let eig = &traj.slice_eigs[s];
    let v = &eig.vecs;
    let vd = dagger(v);
    let wt = matmul(&matmul(&vd, w_s), v);
    let l = eig.dd1_matrix(traj.dt);
    let n = wt.nrows();
    let p_t = CMat::from_shape_fn((n, n), |(i, j)| wt[[i, j]] * l[[j, i]]); // Pᵀ
    matmul(&matmul(v, &p_t), &vd)
}

/// Objective value and exact gradient from one propagation.
pub fn objective_value_and_gradient(
    sys: &ControlSystem,
    f: &PiecewiseControl,
    obj: &Objective,
) -> Result<(f64, GradientVector)> {
    let traj = propagate(sys, f)?;
    let value = obj.value(traj.endpoint());
    let grad = gradient_from_trajectory(sys, f, obj, &traj);
    Ok((value, grad))
}

/// Exact derivative of the objective with respect to every control amplitude
/// (and ℓ when variable-time).
pub fn objective_gradient(
    sys: &ControlSystem,
    f: &PiecewiseControl,
    obj: &Objective,
) -> Result<GradientVector> {
    Ok(objective_value_and_gradient(sys, f, obj)?.1)
}

fn gradient_from_trajectory(
    sys: &ControlSystem,
    f: &PiecewiseControl,
    obj: &Objective,
    traj: &Trajectory,
) -> GradientVector {
    let s_count = f.slices();
    let m_count = f.channels();
    let back = traj.backward_products();
    let lam_dag = dagger(&obj.cotangent(traj.endpoint()));
    let mut per_slice = Array2::zeros((m_count, s_count));
    let mut g_ell = 0.0;
    for s in 0..s_count {
        let w_s = matmul(&matmul(&traj.cumulative[s], &lam_dag), &back[s + 1]);
        let core = slice_gradient_core(traj, &w_s, s);
        for r in 0..m_count {
            per_slice[[r, s]] = trace_prod(&core, sys.control(r).mat()).re;
        }
        if f.ell().is_some() {
            g_ell += trace_prod(&core, sys.h0().mat()).re;
        }
    }
    GradientVector {
        per_slice,
        ell: f.ell().map(|_| g_ell),
    }
}

/// Second-derivative pairing data of the objective at the endpoint.
enum SecondFactor {
    None,
    /// Pure-state ⟨ψg|E|ψ0⟩ or PU trace Tr(V†E), with the pairing weight.
    Scalar(C64),
    /// Observable A·E·ρ0.
    Mat(CMat),
}

fn second_factor(obj: &Objective, e: &CMat) -> SecondFactor {
    match obj {
        Objective::PureState { psi0, psig } => {
            SecondFactor::Scalar(inner(psig.vec(), &matvec(e, psi0.vec())))
        }
        Objective::Observable { rho0, a } => {
            SecondFactor::Mat(matmul(&matmul(a.mat(), e), rho0))
        }
        Objective::Gate { v, group } => match group {
            GateGroup::U | GateGroup::SU => SecondFactor::None,
            GateGroup::PU => SecondFactor::Scalar(trace_prod(&dagger(v.mat()), e)),
        },
    }
}

fn second_form(obj: &Objective, fi: &SecondFactor, fj: &SecondFactor, ej: &CMat) -> f64 {
    match (fi, fj) {
        (SecondFactor::None, _) | (_, SecondFactor::None) => 0.0,
        (SecondFactor::Scalar(si), SecondFactor::Scalar(sj)) => {
            let weight = match obj {
                Objective::PureState { .. } => 2.0,
                Objective::Gate { v, .. } => {
                    let n = v.dim() as f64;
                    2.0 / (n * n)
                }
                _ => unreachable!("scalar factors arise for pure/PU only"),
            };
            weight * (si * sj.conj()).re
        }
        (SecondFactor::Mat(mi), _) => 2.0 * trace_prod(mi, &dagger(ej)).re,
        (SecondFactor::Scalar(_), SecondFactor::Mat(_)) => unreachable!("mixed factor kinds"),
    }
}

/// Exact symmetric Hessian of the objective over the flattened parameters.
///
/// Cross-slice terms use the identity ∂²U(T)/∂θᵢ∂θⱼ = Eᵢ U† Eⱼ (later slice
/// on the left), where Eᵢ is the endpoint derivative for parameter θᵢ;
/// same-slice blocks use the exact second Fréchet derivative of the slice
/// propagator.
pub fn objective_hessian(
    sys: &ControlSystem,
    f: &PiecewiseControl,
    obj: &Objective,
) -> Result<HessianMatrix> {
    let traj = propagate(sys, f)?;
    let s_count = f.slices();
    let m_count = f.channels();
    let n = sys.dim();
    let dt = traj.dt;
    let var_time = f.ell().is_some();
    let p_control = m_count * s_count;
    let p_total = p_control + usize::from(var_time);

    let back = traj.backward_products();
    let u_end = traj.endpoint().clone();
    let u_end_dag = dagger(&u_end);
    let lam_dag = dagger(&obj.cotangent(&u_end));

    // gradient cores W_s (reused for same-slice second-derivative pairing)
    let w_slice: Vec<CMat> = (0..s_count)
        .map(|s| matmul(&matmul(&traj.cumulative[s], &lam_dag), &back[s + 1]))
        .collect();

    // endpoint-derivative matrices per control parameter, and per slice for ℓ
    let idx = |r: usize, s: usize| r * s_count + s;
    let mut e_param: Vec<CMat> = Vec::with_capacity(p_total);
    e_param.resize(p_total, CMat::zeros((n, n)));
    let mut e_ell_slices: Vec<CMat> = Vec::new();
    for s in 0..s_count {
        let eig = &traj.slice_eigs[s];
        let v = &eig.vecs;
        let vd = dagger(v);
        let l = eig.dd1_matrix(dt);
        let dir_matrix = |h: &CMat| -> CMat {
            let ht = matmul(&matmul(&vd, h), v);
            let core = CMat::from_shape_fn((n, n), |(i, j)| ht[[i, j]] * l[[i, j]]);
            let d = matmul(&matmul(v, &core), &vd);
            matmul(&matmul(&back[s + 1], &d), &traj.cumulative[s])
        };
        for r in 0..m_count {
            e_param[idx(r, s)] = dir_matrix(sys.control(r).mat());
        }
        if var_time {
            e_ell_slices.push(dir_matrix(sys.h0().mat()));
        }
    }
    if var_time {
        let mut acc = CMat::zeros((n, n));
        for e in &e_ell_slices {
            acc = acc + e;
        }
        e_param[p_control] = acc;
    }

    // pairing precomputes
    let left: Vec<CMat> = e_param.iter().map(|e| matmul(&lam_dag, e)).collect();
    let right: Vec<CMat> = e_param.iter().map(|e| matmul(&u_end_dag, e)).collect();
    let factors: Vec<SecondFactor> = e_param.iter().map(|e| second_factor(obj, e)).collect();

    let mut h = Array2::<f64>::zeros((p_total, p_total));

    // control-control entries
    for s in 0..s_count {
        let eig = &traj.slice_eigs[s];
        for r in 0..m_count {
            let i = idx(r, s);
            // same slice: exact second Fréchet derivative
            for r2 in 0..=r {
                let j = idx(r2, s);
                let d2 = eig.directional2(sys.control(r).mat(), sys.control(r2).mat(), dt);
                let mut val = trace_prod(&w_slice[s], &d2).re;
                val += second_form(obj, &factors[i], &factors[j], &e_param[j]);
                h[[i, j]] = val;
                h[[j, i]] = val;
            }
            // earlier slices
            for s2 in 0..s {
                for r2 in 0..m_count {
                    let j = idx(r2, s2);
                    let mut val = trace_prod(&left[i], &right[j]).re;
                    val += second_form(obj, &factors[i], &factors[j], &e_param[j]);
                    h[[i, j]] = val;
                    h[[j, i]] = val;
                }
            }
        }
    }

    if var_time {
        let li = p_control;
        // prefix sums over ℓ slice pieces
        let left_ell: Vec<CMat> = e_ell_slices.iter().map(|e| matmul(&lam_dag, e)).collect();
        let right_ell: Vec<CMat> = e_ell_slices.iter().map(|e| matmul(&u_end_dag, e)).collect();
        let mut suffix_left = vec![CMat::zeros((n, n)); s_count + 1];
        for s in (0..s_count).rev() {
            suffix_left[s] = &suffix_left[s + 1] + &left_ell[s];
        }
        let mut prefix_right = vec![CMat::zeros((n, n)); s_count + 1];
        for s in 0..s_count {
            prefix_right[s + 1] = &prefix_right[s] + &right_ell[s];
        }

        // ℓ–control entries
        for s in 0..s_count {
            let eig = &traj.slice_eigs[s];
            for r in 0..m_count {
                let i = idx(r, s);
                let mut val = trace_prod(&suffix_left[s + 1], &right[i]).re;
                val += trace_prod(&left[i], &prefix_right[s]).re;
                let d2 = eig.directional2(sys.h0().mat(), sys.control(r).mat(), dt);
                val += trace_prod(&w_slice[s], &d2).re;
                val += second_form(obj, &factors[li], &factors[i], &e_param[i]);
                h[[li, i]] = val;
                h[[i, li]] = val;
            }
        }

        // ℓℓ entry
        let mut val = 0.0;
        for s in 0..s_count {
            val += 2.0 * trace_prod(&left_ell[s], &prefix_right[s]).re;
            let d2 = traj.slice_eigs[s].directional2(sys.h0().mat(), sys.h0().mat(), dt);
            val += trace_prod(&w_slice[s], &d2).re;
        }
        val += second_form(obj, &factors[li], &factors[li], &e_param[li]);
        h[[li, li]] = val;
    }

    // enforce exact symmetry against rounding
    for i in 0..p_total {
        for j in 0..i {
            let avg = 0.5 * (h[[i, j]] + h[[j, i]]);
            h[[i, j]] = avg;
            h[[j, i]] = avg;
        }
    }

    Ok(HessianMatrix {
        mat: h,
        control_params: p_control,
        dt,
    })
}
