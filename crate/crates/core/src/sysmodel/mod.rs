//! Control-system definitions, Lie-algebra controllability tests, and the
//! registry of closed-form example problems.

mod larc;
mod pairs;
mod registry;

pub use larc::{larc_classify, AlgebraClass, ControllabilityVerdict};
pub use pairs::{critical_pair, CriticalPair};
pub use registry::{registry, ExampleProblem, ExpectedClass, RegistryId, UnitaryTrapCase};
pub(crate) use registry::{unitary_trap_constants, unitary_trap_params, vartime_params};

use crate::error::{Error, Result};
use crate::qcore::HermitianOperator;
use crate::tol;

/// Bilinear control system H(t) = H0 + Σ_m f_m(t) H_m.
#[derive(Debug, Clone)]
pub struct ControlSystem {
    h0: HermitianOperator,
    controls: Vec<HermitianOperator>,
    dim: usize,
    traceless_controls: bool,
}

impl ControlSystem {
    pub fn new(h0: HermitianOperator, controls: Vec<HermitianOperator>) -> Result<Self> {
        if controls.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one control Hamiltonian is required".into(),
            ));
        }
        let dim = h0.dim();
        for c in &controls {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: c.dim(),
                });
            }
        }
        let traceless_controls = controls.iter().all(|c| {
            let t = crate::qcore::trace(c.mat());
            t.norm() <= tol::TRACELESS * (crate::qcore::max_abs(c.mat()).max(1.0))
        });
        Ok(Self {
            h0,
            controls,
            dim,
            traceless_controls,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> usize {
        self.controls.len()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn control(&self, m: usize) -> &HermitianOperator {
        &self.controls[m]
    }

    pub fn controls(&self) -> &[HermitianOperator] {
        &self.controls
    }

    /// True when every control Hamiltonian is traceless; set at construction
    /// and revalidated here.
    pub fn traceless_controls(&self) -> bool {
        self.traceless_controls
    }
}
