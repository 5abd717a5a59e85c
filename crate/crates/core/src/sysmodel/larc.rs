//! Lie-algebra rank condition: commutator closure of the generator set,
//! with real-span dimension measured by Gram–Schmidt over Re tr(A†B).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ControlSystem;
use crate::qcore::{commutator, re_inner_mat, scale, trace, CMat};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraClass {
    FullUN,
    FullSUN,
    Insufficient,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControllabilityVerdict {
    /// Real dimension of the closure of {iH0, iH1, …}.
    pub algebra_dim: usize,
    pub classification: AlgebraClass,
    /// Classification under the exact-time generating set ({iH_m, m ≥ 1}
    /// joined with all brackets), when requested.
    pub exact_time: Option<AlgebraClass>,
    /// Dimension of the exact-time algebra, when requested.
    pub exact_time_dim: Option<usize>,
    /// Set when the iteration budget was exhausted (unreachable in practice).
    pub budget_hit: bool,
}

struct Closure {
    /// Orthonormal basis of the span so far.
    basis: Vec<CMat>,
    largest_norm: f64,
}

impl Closure {
    fn new() -> Self {
        Self {
            basis: Vec::new(),
            largest_norm: 0.0,
        }
    }

    /// Gram–Schmidt admission: returns true if the candidate enlarged the span.
    fn admit(&mut self, cand: &CMat) -> bool {
        let mut v = cand.clone();
        // double projection pass for orthogonality at the admission threshold
        for _ in 0..2 {
            for b in &self.basis {
                let c = re_inner_mat(b, &v);
                v = &v - &scale(b, C64::new(c, 0.0));
            }
        }
        let norm = re_inner_mat(&v, &v).sqrt();
        let raw = re_inner_mat(cand, cand).sqrt();
        self.largest_norm = self.largest_norm.max(raw);
        if norm > tol::LARC_RESIDUAL * self.largest_norm.max(1e-300) {
            self.basis.push(v.mapv(|x| x / norm));
            true
        } else {
            false
        }
    }
}

fn close_under_brackets(
    seeds: &[CMat],
    bracket_generators: &[CMat],
    n: usize,
) -> (usize, bool, Vec<CMat>) {
    let mut cl = Closure::new();
    for s in seeds {
        cl.admit(s);
    }
    let full = n * n;
    let budget = full * full; // N^4 cap
    let mut iterations = 0usize;
    let mut frontier_start = 0usize;
    let mut budget_hit = false;
    'outer: loop {
        let frontier_end = cl.basis.len();
        if frontier_start == frontier_end || cl.basis.len() >= full {
            break;
        }
        let mut grew = false;
        for gi in 0..bracket_generators.len() {
            for bi in frontier_start..frontier_end {
                iterations += 1;
                if iterations > budget {
                    budget_hit = true;
                    break 'outer;
                }
                let cand = commutator(&bracket_generators[gi], &cl.basis[bi])
                    .expect("equal dims by construction");
                grew |= cl.admit(&cand);
                if cl.basis.len() >= full {
                    break 'outer;
                }
            }
        }
        frontier_start = frontier_end;
        if !grew {
            break;
        }
    }
    let dim = cl.basis.len();
    (dim, budget_hit, cl.basis)
}

fn classify(dim: usize, basis: &[CMat], n: usize) -> AlgebraClass {
    let full = n * n;
    if dim == full {
        return AlgebraClass::FullUN;
    }
    if dim >= full - 1 {
        // su(N) iff the traceless projection still spans full-1 dims;
        // equivalently every basis element is traceless here
        let all_traceless = basis
            .iter()
            .all(|b| trace(b).norm() < 1e-7 * (n as f64).sqrt());
        if all_traceless {
            return AlgebraClass::FullSUN;
        }
    }
    AlgebraClass::Insufficient
}

/// Closes the generator set under commutators and classifies the spanned
/// algebra. With `include_exact_time`, also classifies the exact-time set
/// (drift excluded as a zeroth-order generator but available inside brackets).
pub fn larc_classify(sys: &ControlSystem, include_exact_time: bool) -> ControllabilityVerdict {
    let n = sys.dim();
    let ih0 = scale(sys.h0().mat(), C64::new(0.0, 1.0));
    let ihm: Vec<CMat> = sys
        .controls()
        .iter()
        .map(|h| scale(h.mat(), C64::new(0.0, 1.0)))
        .collect();

    let mut gens = vec![ih0.clone()];
    gens.extend(ihm.iter().cloned());

    let (dim, budget_hit, basis) = close_under_brackets(&gens, &gens, n);
    let classification = if budget_hit {
        AlgebraClass::Insufficient
    } else {
        classify(dim, &basis, n)
    };

    let (exact_time, exact_time_dim) = if include_exact_time {
        let (dim_et, hit_et, basis_et) = close_under_brackets(&ihm, &gens, n);
        let cls = if hit_et {
            AlgebraClass::Insufficient
        } else {
            classify(dim_et, &basis_et, n)
        };
        (Some(cls), Some(dim_et))
    } else {
        (None, None)
    };

    ControllabilityVerdict {
        algebra_dim: dim,
        classification,
        exact_time,
        exact_time_dim,
        budget_hit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{random, HermitianOperator};
    use crate::sysmodel::registry::{registry, RegistryId};

    fn example_one_system() -> ControlSystem {
        let h0 = HermitianOperator::diagonal(&[1.0, 2.0, 4.0]);
        let s23 = (2.0_f64 / 3.0).sqrt();
        let s13 = (1.0_f64 / 3.0).sqrt();
        let h1 = HermitianOperator::from_real(&[
            &[1.0, s23, 0.0],
            &[s23, 2.0, s13],
            &[0.0, s13, 4.0],
        ])
        .unwrap();
        ControlSystem::new(h0, vec![h1]).unwrap()
    }

    #[test]
    fn eigenstate_system_is_controllable() {
        let v = larc_classify(&example_one_system(), true);
        // both generators have nonzero trace: full u(3)
        assert_eq!(v.algebra_dim, 9);
        assert_eq!(v.classification, AlgebraClass::FullUN);
        assert!(!v.budget_hit);
    }

    #[test]
    fn zero_control_is_insufficient() {
        let h0 = HermitianOperator::new(random::hermitian(3, &mut random::rng(6))).unwrap();
        let h1 = HermitianOperator::zeros(3);
        let sys = ControlSystem::new(h0, vec![h1]).unwrap();
        let v = larc_classify(&sys, false);
        assert_eq!(v.algebra_dim, 1);
        assert_eq!(v.classification, AlgebraClass::Insufficient);
    }

    #[test]
    fn spin_chain_system_spans_su8() {
        let p = registry(RegistryId::Qft3).unwrap();
        let v = larc_classify(&p.system, true);
        assert_eq!(v.algebra_dim, 63); // dim su(8)
        assert_eq!(v.classification, AlgebraClass::FullSUN);
        assert_eq!(v.exact_time, Some(AlgebraClass::FullSUN));
    }

    #[test]
    fn algebra_dim_invariant_under_conjugation() {
        let sys = example_one_system();
        let base = larc_classify(&sys, false).algebra_dim;
        let mut rng = random::rng(17);
        for _ in 0..20 {
            let u = random::haar_unitary(3, &mut rng);
            let conj = |h: &HermitianOperator| {
                let m = crate::qcore::matmul(
                    &crate::qcore::matmul(&u, h.mat()),
                    &crate::qcore::dagger(&u),
                );
                HermitianOperator::new(m).unwrap()
            };
            let sys2 =
                ControlSystem::new(conj(sys.h0()), vec![conj(sys.control(0))]).unwrap();
            assert_eq!(larc_classify(&sys2, false).algebra_dim, base);
        }
    }
}
