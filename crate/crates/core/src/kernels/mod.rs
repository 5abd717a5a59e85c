//! Two-time integral-kernel operators on L²(0,T): trigonometric translation
//! kernels, their projector-series decompositions, quadrature realizations,
//! and the closed-form second-variation operators of the registry examples.
//!
//! Conventions. An operator here is the symmetric bilinear form
//! B[α,β] = ∫∫ k(|τ−σ|) α(τ)β(σ) dτdσ over [0,T]², assembled from three
//! translation-kernel primitives (constant, cos(ω·), sin(ω·|·|)) with
//! coefficients. Π[g] denotes the unnormalized projector onto g, with kernel
//! g(τ)g(σ). At ω = π/T the sin-kernel operator diagonalizes in the real
//! Fourier basis: −sin(ω|τ−σ|) has constant-mode coefficient −2/π and pair
//! coefficients 4/(π(4k²−1)) on {sin(2kω·), cos(2kω·)}.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qcore::eig::eigvalsh_real;
use crate::sysmodel::{
    unitary_trap_constants, unitary_trap_params, vartime_params, RegistryId,
};
use crate::tol;

/// One translation-invariant kernel term c·k(u), u = |τ−σ|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelTermKind {
    Const,
    /// cos(ω u)
    CosDiff(f64),
    /// sin(ω u); the appendix sin-operator corresponds to coefficient −1.
    SinAbs(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    pub kind: KernelTermKind,
    pub coeff: f64,
}

/// Basis functions of the projector series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisFn {
    Const,
    Cos(f64),
    Sin(f64),
}

impl BasisFn {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            BasisFn::Const => 1.0,
            BasisFn::Cos(w) => (w * t).cos(),
            BasisFn::Sin(w) => (w * t).sin(),
        }
    }

    /// Squared L² norm on [0,T]; exact for the frequencies used here
    /// (multiples of π/T) and the constant.
    pub fn norm_sq(&self, horizon: f64) -> f64 {
        match self {
            BasisFn::Const => horizon,
            BasisFn::Cos(w) | BasisFn::Sin(w) => {
                // ∫ cos²/sin² with the boundary correction
                let tw = 2.0 * w * horizon;
                match self {
                    BasisFn::Cos(_) => 0.5 * horizon + 0.25 * tw.sin() / w,
                    _ => 0.5 * horizon - 0.25 * tw.sin() / w,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub basis: BasisFn,
    pub coeff: f64,
}

/// Infinite series tail: coefficient scale/(4k²−1) on the degenerate pair
/// {sin(2kω·), cos(2kω·)} for every k ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTail {
    pub omega: f64,
    pub scale: f64,
}

impl SeriesTail {
    pub fn coeff(&self, k: usize) -> f64 {
        self.scale / ((4 * k * k) as f64 - 1.0)
    }

    /// Bound on the summed magnitude of all coefficients beyond K:
    /// Σ_{k>K} |scale|/(4k²−1) = |scale|/(2(2K+1)).
    pub fn tail_bound(&self, k_max: usize) -> f64 {
        self.scale.abs() / (2.0 * (2 * k_max + 1) as f64)
    }
}

/// Integral-kernel operator: raw translation kernel plus projector series.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub horizon: f64,
    pub terms: Vec<KernelTerm>,
    /// Explicit rank-one entries of the series.
    pub series_head: Vec<SeriesTerm>,
    pub series_tail: Option<SeriesTail>,
    /// For the variable-time example: lower bound on |Hess_ℓℓ| in raw
    /// fidelity scale (the block is −C·T²/N with C ≥ 3.5).
    pub ell_curvature_bound: Option<f64>,
}

impl KernelOperator {
    /// Raw kernel value at u = |τ−σ| ≥ 0.
    pub fn kernel_value(&self, u: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * match t.kind {
                        KernelTermKind::Const => 1.0,
                        KernelTermKind::CosDiff(w) => (w * u).cos(),
                        KernelTermKind::SinAbs(w) => (w * u.abs()).sin(),
                    }
            })
            .sum()
    }

    /// Materializes the projector series up to tail index `k_max`.
    pub fn series(&self, k_max: usize) -> Vec<SeriesTerm> {
        let mut out = self.series_head.clone();
        if let Some(tail) = &self.series_tail {
            for k in 1..=k_max {
                let c = tail.coeff(k);
                out.push(SeriesTerm {
                    basis: BasisFn::Sin(2.0 * k as f64 * tail.omega),
                    coeff: c,
                });
                out.push(SeriesTerm {
                    basis: BasisFn::Cos(2.0 * k as f64 * tail.omega),
                    coeff: c,
                });
            }
        }
        out
    }

    fn midpoints(&self, n: usize) -> Array1<f64> {
        let h = self.horizon / n as f64;
        Array1::from_shape_fn(n, |i| (i as f64 + 0.5) * h)
    }

    /// Midpoint-rule quadrature: Nyström matrix k(tᵢ,tⱼ)·Δt whose eigenvalues
    /// converge to the operator eigenvalues (series coefficient × ‖basis‖²).
    pub fn discretize(&self, n: usize) -> Array2<f64> {
        assert!(n >= 8, "grid too coarse");
        let h = self.horizon / n as f64;
        let t = self.midpoints(n);
        Array2::from_shape_fn((n, n), |(i, j)| self.kernel_value((t[i] - t[j]).abs()) * h)
    }

    /// Midpoint-rule quadrature of the truncated projector series.
    pub fn discretize_series(&self, n: usize, k_max: usize) -> Array2<f64> {
        assert!(n >= 8, "grid too coarse");
        let h = self.horizon / n as f64;
        let t = self.midpoints(n);
        let series = self.series(k_max);
        let mut m = Array2::zeros((n, n));
        for term in &series {
            let g: Vec<f64> = t.iter().map(|&x| term.basis.eval(x)).collect();
            for i in 0..n {
                for j in 0..n {
                    m[[i, j]] += term.coeff * g[i] * g[j] * h;
                }
            }
        }
        m
    }

    /// Exact piecewise-constant Galerkin matrix: cell-by-cell integrals of
    /// the kernel. Matches the second derivative of the discretized fidelity
    /// with respect to slice amplitudes on the same grid.
    pub fn galerkin(&self, n: usize) -> Array2<f64> {
        assert!(n >= 1);
        let h = self.horizon / n as f64;
        let t = self.midpoints(n);
        let sinc = |x: f64| {
            if x.abs() < 1e-8 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        };
        let mut m = Array2::zeros((n, n));
        for term in &self.terms {
            match term.kind {
                KernelTermKind::Const => {
                    let v = term.coeff * h * h;
                    m.mapv_inplace(|x| x); // no-op keeps shape explicit
                    for i in 0..n {
                        for j in 0..n {
                            m[[i, j]] += v;
                        }
                    }
                }
                KernelTermKind::CosDiff(w) => {
                    let cell = h * h * sinc(0.5 * w * h) * sinc(0.5 * w * h);
                    for i in 0..n {
                        for j in 0..n {
                            m[[i, j]] += term.coeff * cell * (w * (t[i] - t[j])).cos();
                        }
                    }
                }
                KernelTermKind::SinAbs(w) => {
                    let cell = h * h * sinc(0.5 * w * h) * sinc(0.5 * w * h);
                    let diag = 2.0 * (w * h - (w * h).sin()) / (w * w);
                    for i in 0..n {
                        for j in 0..n {
                            m[[i, j]] += term.coeff
                                * if i == j {
                                    diag
                                } else {
                                    cell * (w * (t[i] - t[j]).abs()).sin()
                                };
                        }
                    }
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefinitenessVerdict {
    NegativeDefinite,
    NegativeSemidefinite,
    Indefinite,
    PositiveDefinite,
    PositiveSemidefinite,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefinitenessReport {
    pub grid: usize,
    pub min_eig: f64,
    pub max_eig: f64,
    pub verdict: DefinitenessVerdict,
    /// Distance of the relevant extreme eigenvalue from the zero band.
    pub margin: f64,
}

/// Classifies a symmetric matrix spectrum with a relative zero band.
pub fn classify_spectrum(eigs: &Array1<f64>, grid: usize) -> DefinitenessReport {
    let min_eig = eigs[0];
    let max_eig = eigs[eigs.len() - 1];
    let scale = min_eig.abs().max(max_eig.abs()).max(1e-300);
    let band = tol::DEFINITENESS_BAND * scale;
    let (verdict, margin) = if max_eig < -band {
        (DefinitenessVerdict::NegativeDefinite, -max_eig)
    } else if min_eig > band {
        (DefinitenessVerdict::PositiveDefinite, min_eig)
    } else if max_eig <= band && min_eig < -band {
        (DefinitenessVerdict::NegativeSemidefinite, -min_eig)
    } else if min_eig >= -band && max_eig > band {
        (DefinitenessVerdict::PositiveSemidefinite, max_eig)
    } else {
        (DefinitenessVerdict::Indefinite, max_eig.min(-min_eig))
    };
    DefinitenessReport {
        grid,
        min_eig,
        max_eig,
        verdict,
        margin,
    }
}

/// Eigen-decomposes the midpoint discretization and classifies it.
pub fn definiteness(op: &KernelOperator, n: usize) -> DefinitenessReport {
    let m = op.discretize(n);
    let eigs = eigvalsh_real(&m);
    classify_spectrum(&eigs, n)
}

/// The cosine translation operator: kernel cos(ω(σ−τ)), equal to
/// Π[sin(ω·)] + Π[cos(ω·)] for any ω.
pub fn build_c(omega: f64, horizon: f64) -> KernelOperator {
    KernelOperator {
        horizon,
        terms: vec![KernelTerm {
            kind: KernelTermKind::CosDiff(omega),
            coeff: 1.0,
        }],
        series_head: vec![
            SeriesTerm {
                basis: BasisFn::Sin(omega),
                coeff: 1.0,
            },
            SeriesTerm {
                basis: BasisFn::Cos(omega),
                coeff: 1.0,
            },
        ],
        series_tail: None,
        ell_curvature_bound: None,
    }
}

/// The sine translation operator at ω = π/T: kernel sin(ω(σ−τ)) on the
/// ordered region, i.e. −sin(ω|τ−σ|) symmetrized, with Fourier series
/// −(2/π)Π[1] + Σ_k 4/(π(4k²−1)) (Π[sin(2kω·)] + Π[cos(2kω·)]).
pub fn build_s(horizon: f64) -> KernelOperator {
    let omega = PI / horizon;
    KernelOperator {
        horizon,
        terms: vec![KernelTerm {
            kind: KernelTermKind::SinAbs(omega),
            coeff: -1.0,
        }],
        series_head: vec![SeriesTerm {
            basis: BasisFn::Const,
            coeff: -2.0 / PI,
        }],
        series_tail: Some(SeriesTail {
            omega,
            scale: 4.0 / PI,
        }),
        ell_curvature_bound: None,
    }
}

/// Converts a raw term list over [0,T] into head + tail series entries.
/// Sin terms must sit at ω = π/T for the closed-form series to apply.
fn series_from_terms(terms: &[KernelTerm], horizon: f64) -> (Vec<SeriesTerm>, Option<SeriesTail>) {
    let omega0 = PI / horizon;
    let mut head: Vec<SeriesTerm> = Vec::new();
    let mut const_coeff = 0.0;
    let mut tail_scale = 0.0;
    for t in terms {
        match t.kind {
            KernelTermKind::Const => const_coeff += t.coeff,
            KernelTermKind::CosDiff(w) => {
                head.push(SeriesTerm {
                    basis: BasisFn::Sin(w),
                    coeff: t.coeff,
                });
                head.push(SeriesTerm {
                    basis: BasisFn::Cos(w),
                    coeff: t.coeff,
                });
            }
            KernelTermKind::SinAbs(w) => {
                debug_assert!(
                    (w - omega0).abs() < 1e-12 * omega0,
                    "sin series requires ω = π/T"
                );
                // sin(ω|u|) = −(appendix sin-operator): +(2/π)Π[1] − tail
                const_coeff += t.coeff * 2.0 / PI;
                tail_scale += -t.coeff * 4.0 / PI;
            }
        }
    }
    let mut out = vec![SeriesTerm {
        basis: BasisFn::Const,
        coeff: const_coeff,
    }];
    out.extend(head);
    let tail = if tail_scale != 0.0 {
        Some(SeriesTail {
            omega: omega0,
            scale: tail_scale,
        })
    } else {
        None
    };
    (out, tail)
}

/// Closed-form second-variation operator of a registry example at its
/// critical control, in the scale of the raw fidelity (matching
/// `objective_hessian` in kernel units on the same grid).
pub fn example_hessian_operator(id: RegistryId) -> Result<KernelOperator> {
    match id {
        RegistryId::Saddle4 { theta, phi } => {
            // admissibility enforced by the registry constructor
            crate::sysmodel::registry(id)?;
            let horizon = PI;
            let front = -2.0 * (theta - phi).cos();
            let terms = vec![
                KernelTerm {
                    kind: KernelTermKind::CosDiff(2.0),
                    coeff: front * theta.cos() * phi.cos(),
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(4.0),
                    coeff: front * theta.sin() * phi.sin(),
                },
            ];
            let (series_head, series_tail) = series_from_terms(&terms, horizon);
            Ok(KernelOperator {
                horizon,
                terms,
                series_head,
                series_tail,
                ell_curvature_bound: None,
            })
        }
        RegistryId::Trap4 { theta, b, epsilon } => {
            crate::sysmodel::registry(id)?;
            let horizon = PI / epsilon;
            let c2 = theta.cos().powi(2);
            let terms = vec![
                KernelTerm {
                    kind: KernelTermKind::Const,
                    coeff: -b * b * c2,
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(epsilon),
                    coeff: -c2,
                },
                KernelTerm {
                    kind: KernelTermKind::SinAbs(epsilon),
                    coeff: 0.5 * (2.0 * theta).sin(),
                },
            ];
            let (series_head, series_tail) = series_from_terms(&terms, horizon);
            Ok(KernelOperator {
                horizon,
                terms,
                series_head,
                series_tail,
                ell_curvature_bound: None,
            })
        }
        RegistryId::UnitaryTrap3 { case, epsilon } => {
            crate::sysmodel::registry(id)?;
            let horizon = PI / epsilon;
            let p = unitary_trap_params(case);
            let k = unitary_trap_constants(&p);
            let terms = vec![
                KernelTerm {
                    kind: KernelTermKind::Const,
                    coeff: -k.kconst / 3.0,
                },
                KernelTerm {
                    kind: KernelTermKind::SinAbs(epsilon),
                    coeff: -k.x / 3.0,
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(1.0),
                    coeff: k.y / 3.0,
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(epsilon),
                    coeff: -k.z / 3.0,
                },
            ];
            let (series_head, series_tail) = series_from_terms(&terms, horizon);
            Ok(KernelOperator {
                horizon,
                terms,
                series_head,
                series_tail,
                ell_curvature_bound: None,
            })
        }
        RegistryId::Vartime4 { epsilon, .. } => {
            crate::sysmodel::registry(id)?;
            let horizon = PI / epsilon;
            let p = vartime_params();
            let sqrt3 = 3.0_f64.sqrt();
            let terms = vec![
                KernelTerm {
                    kind: KernelTermKind::Const,
                    coeff: -(9.0 - 4.0 * sqrt3) / 4.0,
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(epsilon),
                    coeff: -p.r / 4.0,
                },
                KernelTerm {
                    kind: KernelTermKind::SinAbs(epsilon),
                    coeff: 0.25,
                },
                KernelTerm {
                    kind: KernelTermKind::CosDiff(1.0),
                    coeff: -(1.0 + sqrt3 / 3.0) / 4.0,
                },
            ];
            let (series_head, series_tail) = series_from_terms(&terms, horizon);
            Ok(KernelOperator {
                horizon,
                terms,
                series_head,
                series_tail,
                // ℓℓ block is −C·T²/4 with C ≥ 3.5
                ell_curvature_bound: Some(3.5 * horizon * horizon / 4.0),
            })
        }
        other => Err(Error::InvalidArgument(format!(
            "no closed-form second-variation operator for {}",
            other.label()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::UnitaryTrapCase;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_kernel_discretizes_to_zero() {
        let op = KernelOperator {
            horizon: 1.0,
            terms: vec![],
            series_head: vec![],
            series_tail: None,
            ell_curvature_bound: None,
        };
        let m = op.discretize(16);
        assert!(m.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn cosine_operator_has_rank_two() {
        let t = 2.0;
        let op = build_c(PI / t, t);
        let m = op.discretize(256);
        let eigs = eigvalsh_real(&m);
        let n = eigs.len();
        // two eigenvalues ≈ T/2, rest ≈ 0
        assert_abs_diff_eq!(eigs[n - 1], t / 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(eigs[n - 2], t / 2.0, epsilon = 1e-3);
        for k in 0..n - 2 {
            assert!(eigs[k].abs() < 1e-8, "eig {k} = {:.3e}", eigs[k]);
        }
    }

    #[test]
    fn cosine_kernel_equals_outer_product_expansion() {
        // cos(ω(σ−τ)) = cosωσcosωτ + sinωσsinωτ pointwise
        let w = 1.7;
        let op = build_c(w, 3.0);
        let mut rng = crate::qcore::random::rng(3);
        use rand::Rng;
        for _ in 0..50 {
            let s: f64 = rng.gen_range(0.0..3.0);
            let t: f64 = rng.gen_range(0.0..3.0);
            let direct = op.kernel_value((s - t).abs());
            let expanded = (w * s).cos() * (w * t).cos() + (w * s).sin() * (w * t).sin();
            assert_abs_diff_eq!(direct, expanded, epsilon = 1e-12);
        }
    }

    #[test]
    fn sine_operator_constant_mode() {
        // constant function is an eigenfunction with eigenvalue −2T/π
        let t = PI;
        let op = build_s(t);
        let m = op.discretize(512);
        let eigs = eigvalsh_real(&m);
        assert_abs_diff_eq!(eigs[0], -2.0 * t / PI, epsilon = 2e-3);
        // series head records the −2/π coefficient; times ‖1‖² = T
        assert_abs_diff_eq!(op.series_head[0].coeff * t, -2.0 * t / PI, epsilon = 1e-15);
    }

    #[test]
    fn sine_operator_first_pair_coefficient() {
        let tail = build_s(1.0).series_tail.unwrap();
        assert_abs_diff_eq!(tail.coeff(1), 4.0 / (3.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(tail.coeff(2), 4.0 / (15.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn sine_spectrum_matches_series_eigenvalues() {
        let t = 2.5;
        let op = build_s(t);
        let m = op.discretize(512);
        let eigs = eigvalsh_real(&m);
        let n = eigs.len();
        // largest positive pairs: 4/(π(4k²−1))·(T/2), k = 1,2
        let lam = |k: usize| 4.0 / (PI * ((4 * k * k) as f64 - 1.0)) * t / 2.0;
        assert_abs_diff_eq!(eigs[n - 1], lam(1), epsilon = 1e-3);
        assert_abs_diff_eq!(eigs[n - 2], lam(1), epsilon = 1e-3);
        assert_abs_diff_eq!(eigs[n - 3], lam(2), epsilon = 1e-3);
        assert_abs_diff_eq!(eigs[n - 4], lam(2), epsilon = 1e-3);
    }

    #[test]
    fn grid_refinement_converges() {
        let op = build_s(PI);
        let e1 = eigvalsh_real(&op.discretize(128));
        let e2 = eigvalsh_real(&op.discretize(256));
        let drift = (e1[0] - e2[0]).abs() / e2[0].abs();
        assert!(drift < 1e-3, "eigenvalue drift {drift:.3e}");
    }

    #[test]
    fn series_kernel_duality() {
        // midpoint matrices of raw kernel and truncated series agree to the
        // tail bound at K = 64
        let t = PI;
        let op = build_s(t);
        let raw = op.discretize(256);
        let ser = op.discretize_series(256, 64);
        let h = t / 256.0;
        let mut worst = 0.0_f64;
        for (a, b) in raw.iter().zip(ser.iter()) {
            worst = worst.max((a - b).abs());
        }
        let bound = op.series_tail.unwrap().tail_bound(64) * h;
        assert!(worst < 1e-4, "max entry diff {worst:.3e}");
        assert!(
            worst <= bound * 1.2,
            "diff {worst:.3e} exceeds tail bound {bound:.3e}"
        );
    }

    #[test]
    fn saddle_operator_uniform_coefficients() {
        let op = example_hessian_operator(RegistryId::Saddle4 {
            theta: PI / 6.0,
            phi: PI / 3.0,
        })
        .unwrap();
        for term in &op.terms {
            assert_abs_diff_eq!(term.coeff, -0.75, epsilon = 1e-14);
        }
        let rep = definiteness(&op, 200);
        assert_eq!(rep.verdict, DefinitenessVerdict::NegativeSemidefinite);
        // exactly 4 strictly negative directions
        let eigs = eigvalsh_real(&op.discretize(200));
        let neg = eigs.iter().filter(|&&l| l < -1e-3).count();
        assert_eq!(neg, 4);
    }

    #[test]
    fn trap_operator_constant_coefficient() {
        let op = example_hessian_operator(RegistryId::Trap4 {
            theta: PI / 3.0,
            b: 3.0,
            epsilon: 0.2,
        })
        .unwrap();
        // corrected constant-mode coefficient sin(2θ)/π − b²cos²θ
        let expect = (2.0 * PI / 3.0).sin() / PI - 9.0 / 4.0;
        assert_abs_diff_eq!(op.series_head[0].coeff, expect, epsilon = 1e-14);
        for n in [100usize, 200, 400] {
            let rep = definiteness(&op, n);
            assert_eq!(
                rep.verdict,
                DefinitenessVerdict::NegativeDefinite,
                "grid {n}"
            );
        }
    }

    #[test]
    fn unitary_trap_operators_negative_definite() {
        for case in [UnitaryTrapCase::MinusI, UnitaryTrapCase::PlusI] {
            let op = example_hessian_operator(RegistryId::UnitaryTrap3 {
                case,
                epsilon: 0.2,
            })
            .unwrap();
            let rep = definiteness(&op, 256);
            assert_eq!(
                rep.verdict,
                DefinitenessVerdict::NegativeDefinite,
                "{case:?}: [{:.3e}, {:.3e}]",
                rep.min_eig,
                rep.max_eig
            );
        }
    }

    #[test]
    fn unitary_trap_parameter_check_values() {
        // x = cosγ − sinφ = −√2/2 − √3/2 for the MinusI parameters
        let p = unitary_trap_params(UnitaryTrapCase::MinusI);
        let k = unitary_trap_constants(&p);
        assert_abs_diff_eq!(
            k.x,
            -(2.0_f64.sqrt() / 2.0 + 3.0_f64.sqrt() / 2.0),
            epsilon = 1e-13
        );
        assert!(k.x < 0.0);
    }

    #[test]
    fn vartime_operator_negative_definite_with_ell_bound() {
        let op = example_hessian_operator(RegistryId::Vartime4 {
            epsilon: 0.2,
            gamma: 0.0,
        })
        .unwrap();
        let rep = definiteness(&op, 256);
        assert_eq!(rep.verdict, DefinitenessVerdict::NegativeDefinite);
        let bound = op.ell_curvature_bound.unwrap();
        let t = op.horizon;
        assert_abs_diff_eq!(bound, 3.5 * t * t / 4.0, epsilon = 1e-12);
    }
}
